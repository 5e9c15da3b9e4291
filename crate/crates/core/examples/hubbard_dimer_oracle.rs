//! Exact diagonalization of the two-site Hubbard model next to its
//! Hartree-Fock and Bogoliubov-Hartree-Fock energies.

use gbhf::bhf::{bhf_solve_zero_t, BhfOptions, TemperatureSchedule};
use gbhf::hf::{hf_grand_canonical, scf_solve, ScfOptions};
use gbhf::models::{build_hubbard, HubbardSpec};
use gbhf::oracle::{assemble_hamiltonian, ground_energy};

fn main() -> gbhf::Result<()> {
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>12}",
        "λ", "E_gs(2)", "E_HF(2)", "E_BHF", "E_HF"
    );
    for coupling in [0.0, 1.0, 2.0, 4.0, 8.0] {
        let mut spec = HubbardSpec::chain(2, coupling);
        spec.mu = coupling / 2.0;
        let model = build_hubbard(&spec)?;
        let h = assemble_hamiltonian(&model)?;
        let exact = ground_energy(&h, Some(2))?.energy;
        let hf_n = scf_solve(&model, 2, &ScfOptions::default())?.energy();
        let bhf = bhf_solve_zero_t(
            &model,
            &TemperatureSchedule::default(),
            &BhfOptions::default(),
        )?
        .energy();
        let hf = hf_grand_canonical(&model, &ScfOptions::default())?.energy();
        println!("{coupling:>6.1} {exact:>12.6} {hf_n:>12.6} {bhf:>12.6} {hf:>12.6}");
    }
    Ok(())
}
