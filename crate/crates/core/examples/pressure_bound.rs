//! The mean-field pressure of any generalized 1-pdm stays below the exact
//! grand-canonical pressure.

use gbhf::bhf::pressure;
use gbhf::models::{build_hubbard, HubbardSpec};
use gbhf::quasifree::random_gpdm;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gbhf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut spec = HubbardSpec::chain(2, 4.0);
    spec.mu = 2.0;
    let model = build_hubbard(&spec)?;
    for beta in [0.5, 2.0, 10.0] {
        let worst = (0..20)
            .map(|_| pressure(&random_gpdm(4, &mut rng), &model, beta, true))
            .collect::<gbhf::Result<Vec<_>>>()?
            .into_iter()
            .map(|p| p.oracle_bound.expect("oracle ran") - p.pressure)
            .fold(f64::INFINITY, f64::min);
        println!("β = {beta:>4}: smallest margin to the exact pressure over 20 states {worst:.4}");
    }
    Ok(())
}
