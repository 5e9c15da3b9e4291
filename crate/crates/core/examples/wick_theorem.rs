//! Quasifree states factorize by the pairing formula; the correlated
//! Hubbard-dimer ground state does not.

use gbhf::models::{build_hubbard, HubbardSpec};
use gbhf::oracle::relative_entropy;
use gbhf::oracle::{assemble_hamiltonian, ground_energy, FockDensityMatrix};
use gbhf::quasifree::{quasifree_reduction, random_gpdm, realize_quasifree, wick_residual};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gbhf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rho = realize_quasifree(&random_gpdm(4, &mut rng))?;
    for order in [2, 4, 6] {
        println!(
            "quasifree state, {order}-point residual {:.2e}",
            wick_residual(&rho, order)?
        );
    }

    let model = build_hubbard(&HubbardSpec::chain(2, 4.0))?;
    let h = assemble_hamiltonian(&model)?;
    let gs = ground_energy(&h, Some(2))?;
    let dimer = FockDensityMatrix::pure(h.basis, &gs.vector)?;
    println!(
        "dimer ground state, 4-point residual {:.4}",
        wick_residual(&dimer, 4)?
    );
    let q = quasifree_reduction(&dimer)?.realization.expect("realized");
    println!(
        "relative entropy to its quasifree reduction {:.4}",
        relative_entropy(dimer.matrix(), q.matrix())?
    );
    Ok(())
}
