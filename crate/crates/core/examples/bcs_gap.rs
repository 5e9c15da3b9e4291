//! Translation-invariant pairing on a 1D ring with a contact attraction:
//! the gap opens and grows with the coupling.

use gbhf::models::{bcs_minimize, build_bcs, BcsOptions, BcsSpec};

fn main() -> gbhf::Result<()> {
    println!(
        "{:>6} {:>10} {:>12} {:>10}",
        "g", "gap", "energy", "residual"
    );
    for g in [0.5, 1.0, 2.0, 3.0, 4.0] {
        let model = build_bcs(&BcsSpec::contact(1, 32, -g, -0.3 - g / 2.0))?;
        let rep = bcs_minimize(&model, &BcsOptions::default())?;
        println!(
            "{g:>6.1} {:>10.6} {:>12.6} {:>10.2e}",
            rep.gap, rep.energy.total, rep.gap_residual
        );
    }
    Ok(())
}
