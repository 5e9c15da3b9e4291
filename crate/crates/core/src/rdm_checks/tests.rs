use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{identity, random_unitary, CMat};
use crate::models::{build_hubbard, HubbardSpec};
use crate::oracle::{assemble_hamiltonian, ground_energy, FockBasis, FockDensityMatrix};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dimer_ground_state(lambda: f64) -> FockDensityMatrix {
    let model = build_hubbard(&HubbardSpec::chain(2, lambda)).unwrap();
    let h = assemble_hamiltonian(&model).unwrap();
    let gs = ground_energy(&h, Some(2)).unwrap();
    FockDensityMatrix::pure(h.basis, &gs.vector).unwrap()
}

fn random_slater(m: usize, n: usize, r: &mut ChaCha8Rng) -> CMat {
    let u = random_unitary(m, r);
    let occ = u.columns(0, n);
    occ * occ.adjoint()
}

fn oracle_states(seed: u64) -> Vec<FockDensityMatrix> {
    let mut r = rng(seed);
    let basis = FockBasis::new(4).unwrap();
    vec![
        FockDensityMatrix::random_even(basis, 3, &mut r),
        FockDensityMatrix::random_number_conserving(basis, 5, &mut r),
        FockDensityMatrix::random_n_particle(basis, 2, 2, &mut r),
        FockDensityMatrix::random_n_particle(basis, 3, 1, &mut r),
        FockDensityMatrix::vacuum(basis),
        dimer_ground_state(4.0),
    ]
}

#[test]
fn oracle_states_pass_every_check() {
    for seed in 0..3 {
        for rho in oracle_states(seed) {
            let pair = RdmPair::from_state(&rho);
            let mut r = rng(100 + seed);
            let projections: Vec<CMat> = (0..10)
                .map(|k| random_projection(4, 1 + k % 4, &mut r))
                .collect();
            let report = check_pair(&pair, Some(&rho), &projections).unwrap();
            assert!(report.passed, "{report:?}");
        }
    }
}

#[test]
fn negative_generalized_matrix_fails_gpq() {
    let mut g = CMat::identity(4, 4);
    g[(2, 2)] = c(-0.1);
    let min = gpq_check(&g);
    assert!((min + 0.1).abs() < 1e-12);
    assert!(!gpq_passes(min));
}

#[test]
fn slater_two_body_spectrum_is_zero_or_two() {
    let mut r = rng(5);
    let gamma = random_slater(4, 2, &mut r);
    let rho = realize_quasifree(&GOnePdm::from_one_pdm(&gamma)).unwrap();
    for x in HermEig::new(&two_rdm(&rho)).values {
        assert!(x.abs() < 1e-9 || (x - 2.0).abs() < 1e-9, "{x}");
    }
}

#[test]
fn slater_structure_holds() {
    let mut r = rng(6);
    for (m, n) in [(3, 2), (4, 2), (4, 3), (5, 2)] {
        let gamma = random_slater(m, n, &mut r);
        assert!(slater_structure_check(&gamma).unwrap() < 1e-9);
    }
    // full shell
    assert!(slater_structure_check(&identity(3)).unwrap() < 1e-9);
    assert!(slater_structure_check(&(identity(3) * c(0.5))).is_err());
    let mut one = CMat::zeros(3, 3);
    one[(0, 0)] = c(1.0);
    assert!(slater_structure_check(&one).is_err());
}

#[test]
fn correlation_inequality_special_cases() {
    let mut r = rng(7);
    let gamma = random_slater(4, 2, &mut r);
    let rho = realize_quasifree(&GOnePdm::from_one_pdm(&gamma)).unwrap();
    let pair = RdmPair::from_state(&rho);
    let p = random_projection(4, 2, &mut r);
    let b = correlation_inequality(&pair.gamma1, &pair.gamma2, &p).unwrap();
    assert!(b.correction.abs() < 1e-7 && b.slack >= -1e-9, "{b:?}");

    let zero = correlation_inequality(&pair.gamma1, &pair.gamma2, &CMat::zeros(4, 4)).unwrap();
    assert_eq!((zero.lhs, zero.rhs), (0.0, 0.0));

    let dimer = dimer_ground_state(4.0);
    let pair = RdmPair::from_state(&dimer);
    let mut site = CMat::zeros(4, 4);
    site[(0, 0)] = c(1.0);
    site[(1, 1)] = c(1.0);
    let b = correlation_inequality(&pair.gamma1, &pair.gamma2, &site).unwrap();
    assert!(b.slack >= -1e-9, "{b:?}");

    assert!(correlation_inequality(&pair.gamma1, &pair.gamma2, &(identity(4) * c(0.5))).is_err());
}

#[test]
fn trace_identities_for_simple_states() {
    let basis = FockBasis::new(3).unwrap();
    let vac = FockDensityMatrix::vacuum(basis);
    let t = trace_identities(&vac, &RdmPair::from_state(&vac)).unwrap();
    assert_eq!(t.mean_number, 0.0);
    assert!(t.passes());

    let mut r = rng(8);
    let gamma = random_slater(4, 3, &mut r);
    let rho = realize_quasifree(&GOnePdm::from_one_pdm(&gamma)).unwrap();
    let pair = RdmPair::from_state(&rho);
    assert!((trace(&pair.gamma2).re - 6.0).abs() < 1e-10);
    let t = trace_identities(&rho, &pair).unwrap();
    assert!(t.partial_trace.is_some() && t.passes(), "{t:?}");
}

#[test]
fn phase_average_is_dominated() {
    let mut r = rng(9);
    for lambda in [
        vec![0.5, 0.5, 1.0],
        vec![0.3, 0.7, 0.6, 0.4],
        vec![0.25, 0.75, 0.5, 0.5],
    ] {
        let f = random_unitary(4, &mut r)
            .columns(0, lambda.len())
            .into_owned();
        let d = phase_average_dominance(&lambda, &f).unwrap();
        assert!(d.one_body_error < 1e-9, "{d:?}");
        assert!(d.min_eigenvalue >= -1e-9, "{d:?}");
    }
}

#[test]
fn gpdm_positivity_of_valid_states() {
    let mut r = rng(10);
    for _ in 0..10 {
        let g = crate::quasifree::random_gpdm(3, &mut r);
        assert!(gpdm_positivity(&g) >= -1e-10);
    }
}
