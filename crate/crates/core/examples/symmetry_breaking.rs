//! Half-filled 4×4 Hubbard model at λ = 4: the translation- and
//! spin-invariant Hartree-Fock state is a paramagnet, while the unrestricted
//! minimizer is a Néel antiferromagnet with lower energy.

use gbhf::hf::{scf_solve, ScfOptions};
use gbhf::models::{
    build_hubbard, classify_symmetry, magnetization_profile, restricted_solve, HubbardSpec,
    MeanField, SolvedEnergy, SymmetryFlags, SymmetrySet,
};

fn main() -> gbhf::Result<()> {
    let mut spec = HubbardSpec::square(4, 4.0);
    spec.mu = 2.0;
    let model = build_hubbard(&spec)?;
    let n = spec.sites();
    let opts = ScfOptions::default();

    let flags = SymmetryFlags {
        translation: true,
        spin_su2: true,
        ..SymmetryFlags::default()
    };
    let set = SymmetrySet::lattice(&spec, flags);
    let para = restricted_solve(&model, &set, MeanField::Hf { particles: n }, &opts)?;
    let free = scf_solve(&model, n, &opts)?;
    let mag = magnetization_profile(&free.gamma, model.labels.as_ref())?;
    let verdict = classify_symmetry(
        SolvedEnergy {
            energy: para.energy(),
            converged: para.converged,
        },
        SolvedEnergy {
            energy: free.energy(),
            converged: free.converged,
        },
        None,
    )?;

    println!("restricted (paramagnet)   E = {:.10}", para.energy());
    println!("unrestricted HF           E = {:.10}", free.energy());
    println!("gap = {:.6e}  verdict = {:?}", verdict.gap, verdict.status);
    println!("staggered magnetization = {:.6}", mag.staggered);
    println!("uniform magnetization   = {:.2e}", mag.uniform);
    Ok(())
}
