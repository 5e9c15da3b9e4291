//! For a repulsive interaction the minimum over mixed 1-pdms is attained at
//! a projection; rounding a mixed state never raises its energy.

use gbhf::hf::{hf_energy, occupation_rounding, relaxed_solve, scf_solve, ScfOptions};
use gbhf::linalg::{c, random_hermitian, random_unitary, CMat, CVec};
use gbhf::{Model, TwoBodyTensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gbhf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = Model::new(
        random_hermitian(6, &mut rng),
        TwoBodyTensor::random_repulsive(6, 4, &mut rng),
        0.0,
    )?;
    let opts = ScfOptions::default();
    let relaxed = relaxed_solve(&model, 3, &opts)?;
    let scf = scf_solve(&model, 3, &opts)?;
    println!("relaxed minimum   {:.10}", relaxed.energy);
    println!("SCF minimum       {:.10}", scf.energy());
    println!("occupations       {:.6?}", relaxed.occupations);

    let u = random_unitary(6, &mut rng);
    let occ = [0.9, 0.8, 0.5, 0.5, 0.2, 0.1];
    let mixed =
        &u * CMat::from_diagonal(&CVec::from_iterator(6, occ.iter().map(|&x| c(x)))) * u.adjoint();
    let rounded = occupation_rounding(&mixed, &model)?;
    println!(
        "rounding          {:.6} -> {:.6} ({} swaps)",
        hf_energy(&mixed, &model)?.total,
        rounded.energy(),
        rounded.swaps
    );
    Ok(())
}
