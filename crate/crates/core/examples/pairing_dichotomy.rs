//! Repulsive interactions never profit from pairing; attractive ones do.

use gbhf::bhf::{bhf_solve_zero_t, pure_quasifree_search, BhfOptions, TemperatureSchedule};
use gbhf::hf::{hf_grand_canonical, ScfOptions};
use gbhf::models::{build_hubbard, HubbardSpec};

fn main() -> gbhf::Result<()> {
    for (coupling, mu) in [(4.0, 2.0), (1.0, 0.5), (-4.0, -1.5)] {
        let mut spec = HubbardSpec::chain(4, coupling);
        spec.mu = mu;
        let model = build_hubbard(&spec)?;
        let bhf = bhf_solve_zero_t(
            &model,
            &TemperatureSchedule::default(),
            &BhfOptions::default(),
        )?;
        let pure = pure_quasifree_search(&model, &BhfOptions::default())?;
        let hf = hf_grand_canonical(&model, &ScfOptions::default())?;
        println!(
            "λ = {coupling:>4}: E_BHF = {:.6}  (pure search {:.6})  E_HF = {:.6}  ‖α‖ = {:.3e}",
            bhf.energy(),
            pure.energy(),
            hf.energy(),
            bhf.pairing_norm
        );
    }
    Ok(())
}
