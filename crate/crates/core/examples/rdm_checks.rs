//! Necessary conditions on reduced density matrices, evaluated on exact
//! states.

use gbhf::models::{build_hubbard, HubbardSpec};
use gbhf::oracle::{assemble_hamiltonian, ground_energy, FockBasis, FockDensityMatrix};
use gbhf::rdm_checks::{check_pair, random_projection, RdmPair};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gbhf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let model = build_hubbard(&HubbardSpec::chain(2, 4.0))?;
    let h = assemble_hamiltonian(&model)?;
    let gs = ground_energy(&h, Some(2))?;
    let states = [
        (
            "dimer ground state",
            FockDensityMatrix::pure(h.basis, &gs.vector)?,
        ),
        (
            "random even state",
            FockDensityMatrix::random_even(FockBasis::new(4)?, 3, &mut rng),
        ),
    ];
    let projections: Vec<_> = (0..10)
        .map(|k| random_projection(4, 1 + k % 3, &mut rng))
        .collect();
    for (name, rho) in &states {
        let report = check_pair(&RdmPair::from_state(rho), Some(rho), &projections)?;
        println!("{name}:");
        println!(
            "  smallest eigenvalue of Γ⁽²⁾   {:.3e}",
            report.gpq_min_eigenvalue.unwrap_or(f64::NAN)
        );
        println!(
            "  trace identity error          {:.3e}",
            report.trace.map_or(0.0, |t| t.worst())
        );
        println!(
            "  correlation inequality slack  {:.3e}",
            report.correlation_min_slack.unwrap_or(f64::NAN)
        );
        println!("  passed                        {}", report.passed);
    }
    Ok(())
}
