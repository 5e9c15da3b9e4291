use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{
    c, frobenius, identity, random_gaussian, random_hermitian, random_unitary, CMat, CVec, HermEig,
    C64,
};
use crate::model::Model;
use crate::models::{build_hubbard, HubbardSpec};
use crate::oracle::{
    assemble_hamiltonian, build_car, generalized_one_rdm, ground_energy, npoint_expectation,
    relative_entropy, von_neumann, FockBasis, FockDensityMatrix,
};
use crate::tensor::TwoBodyTensor;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_orbital(m: usize, rng: &mut ChaCha8Rng) -> CVec {
    random_gaussian(2 * m, 1, rng).column(0).into_owned()
}

fn dimer_ground_state(lambda: f64) -> FockDensityMatrix {
    let model = build_hubbard(&HubbardSpec::chain(2, lambda)).unwrap();
    let h = assemble_hamiltonian(&model).unwrap();
    let gs = ground_energy(&h, Some(2)).unwrap();
    FockDensityMatrix::pure(h.basis, &gs.vector).unwrap()
}

#[test]
fn projection_gpdm_is_valid() {
    let mut r = rng(1);
    let u = random_unitary(4, &mut r);
    let occ = u.columns(0, 2);
    let p = occ * occ.adjoint();
    let g = GOnePdm::from_one_pdm(&p);
    let diag = validate_gpdm(&g);
    assert!(diag.is_valid(), "{:?}", diag.violations);
    let eig = HermEig::new(g.matrix());
    assert!(eig
        .values
        .iter()
        .all(|x| x.abs() < 1e-12 || (x - 1.0).abs() < 1e-12));
}

#[test]
fn symmetric_pairing_is_flagged() {
    let gamma = identity(2) * c(0.5);
    let mut alpha = CMat::zeros(2, 2);
    alpha[(0, 1)] = c(0.1);
    alpha[(1, 0)] = c(0.1);
    let diag = validate_gpdm(&GOnePdm::from_blocks(&gamma, &alpha));
    assert!(!diag.is_valid());
    assert!(diag
        .violations
        .iter()
        .any(|v| v.contains("pairing antisymmetry")));
}

#[test]
fn oracle_gpdm_is_valid() {
    let mut r = rng(2);
    let rho = FockDensityMatrix::random_even(FockBasis::new(4).unwrap(), 3, &mut r);
    let g = GOnePdm::from_matrix(generalized_one_rdm(&rho)).unwrap();
    let diag = validate_gpdm(&g);
    assert!(
        diag.hermiticity < 1e-10 && diag.j_symmetry < 1e-10 && diag.pairing_antisymmetry < 1e-10
    );
    assert!(diag.min_eigenvalue > -1e-10 && diag.max_eigenvalue < 1.0 + 1e-10);
}

#[test]
fn diagonal_gamma_gives_identity_map() {
    let gamma = CMat::from_diagonal(&CVec::from_vec(vec![c(0.9), c(0.2), c(0.6)]));
    let bd = block_diagonalize(&GOnePdm::from_one_pdm(&gamma)).unwrap();
    assert_eq!(bd.map, BogoliubovMap::identity(3));
    assert_eq!(bd.lambda, vec![0.9, 0.2, 0.6]);
}

#[test]
fn block_diagonalization_reconstructs() {
    let mut r = rng(3);
    for _ in 0..10 {
        let g = random_gpdm(4, &mut r);
        let bd = block_diagonalize(&g).unwrap();
        assert!(bd.residual < 1e-8, "{}", bd.residual);
        assert!(bd.map.unitarity_residual() < 1e-10);
        let w = bd.map.matrix();
        let d = w.adjoint() * g.matrix() * &w;
        for l in 0..4 {
            assert!((d[(l, l)].re - bd.lambda[l]).abs() < 1e-9);
            assert!((d[(l + 4, l + 4)].re - (1.0 - bd.lambda[l])).abs() < 1e-9);
        }
    }
}

#[test]
fn slater_gpdm_has_integer_spectrum() {
    let mut r = rng(4);
    let w = random_bogoliubov(3, &mut r);
    let g = super::bogoliubov::gpdm_from_spectrum(&w, &[1.0, 0.0, 1.0]);
    let bd = block_diagonalize(&g).unwrap();
    assert!(bd
        .lambda
        .iter()
        .all(|x| x.abs() < 1e-9 || (x - 1.0).abs() < 1e-9));
}

#[test]
fn half_filled_identity_realization() {
    let g = GOnePdm::from_one_pdm(&(identity(2) * c(0.5)));
    let rho = realize_quasifree(&g).unwrap();
    assert!(frobenius(&(rho.matrix() - identity(4) * c(0.25))) < 1e-12);
    assert!((von_neumann(rho.matrix()) - 2.0 * 2f64.ln()).abs() < 1e-12);
    assert!((quasifree_entropy(&g) - 2.0 * 2f64.ln()).abs() < 1e-12);
}

#[test]
fn slater_realization_is_pure() {
    let mut r = rng(5);
    let u = random_unitary(3, &mut r);
    let occ = u.columns(0, 2);
    let p = occ * occ.adjoint();
    let g = GOnePdm::from_one_pdm(&p);
    let rho = realize_quasifree(&g).unwrap();
    let m = rho.matrix();
    assert!(frobenius(&(m * m - m)) < 1e-10);
    assert!(quasifree_entropy(&g).abs() < 1e-9);
}

#[test]
fn realization_round_trip() {
    let mut r = rng(6);
    for _ in 0..5 {
        let g = random_gpdm(4, &mut r);
        let rho = realize_quasifree(&g).unwrap();
        let back = generalized_one_rdm(&rho);
        assert!(frobenius(&(back - g.matrix())) < 1e-8);
        assert!((von_neumann(rho.matrix()) - quasifree_entropy(&g)).abs() < 1e-9);
        assert!(is_quasifree(&rho));
    }
}

#[test]
fn reduction_is_idempotent() {
    let mut r = rng(7);
    let g = random_gpdm(3, &mut r);
    let rho = realize_quasifree(&g).unwrap();
    let q = quasifree_reduction(&rho).unwrap().realization.unwrap();
    let diff = HermEig::new(&(q.matrix() - rho.matrix()));
    let trace_norm: f64 = diff.values.iter().map(|x| x.abs()).sum();
    assert!(trace_norm < 1e-8);
}

#[test]
fn correlated_dimer_is_not_quasifree() {
    let rho = dimer_ground_state(4.0);
    assert!(!is_quasifree(&rho));
    assert!(wick_residual(&rho, 4).unwrap() > 1e-3);
    let q = quasifree_reduction(&rho).unwrap().realization.unwrap();
    let s = relative_entropy(rho.matrix(), q.matrix()).unwrap();
    assert!(s > 1e-6);
}

#[test]
fn reduction_minimizes_relative_entropy() {
    let mut r = rng(8);
    let rho = FockDensityMatrix::random_even(FockBasis::new(3).unwrap(), 4, &mut r);
    let q = quasifree_reduction(&rho).unwrap().realization.unwrap();
    let best = relative_entropy(rho.matrix(), q.matrix()).unwrap();
    for _ in 0..20 {
        let eta = realize_quasifree(&random_gpdm(3, &mut r)).unwrap();
        let s = relative_entropy(rho.matrix(), eta.matrix()).unwrap();
        assert!(best <= s + 1e-9, "{best} > {s}");
    }
}

#[test]
fn wick_two_point_and_errors() {
    let mut r = rng(9);
    let g = random_gpdm(3, &mut r);
    let (f, h) = (random_orbital(3, &mut r), random_orbital(3, &mut r));
    let w = wick_expectation(&g, &[f.clone(), h.clone()]).unwrap();
    assert_eq!(w, two_point(&g, &f, &h));
    assert!(wick_expectation(&g, std::slice::from_ref(&f)).is_err());
    assert!(wick_expectation(&g, &vec![f; 10]).is_err());
}

#[test]
fn wick_matches_oracle_up_to_six_points() {
    let mut r = rng(10);
    let m = 4;
    let g = random_gpdm(m, &mut r);
    let rho = realize_quasifree(&g).unwrap();
    let car = build_car(m).unwrap();
    for k in 1..=3 {
        let orbs: Vec<CVec> = (0..2 * k).map(|_| random_orbital(m, &mut r)).collect();
        let exact = npoint_expectation(&rho, &car, &orbs);
        let wick = wick_expectation(&g, &orbs).unwrap();
        assert!((exact - wick).norm() < 1e-9, "k={k}: {exact} vs {wick}");
    }
}

#[test]
fn four_point_formula() {
    let mut r = rng(11);
    let g = random_gpdm(3, &mut r);
    let o: Vec<CVec> = (0..4).map(|_| random_orbital(3, &mut r)).collect();
    let p = |a: usize, b: usize| two_point(&g, &o[a], &o[b]);
    let expected = p(0, 1) * p(2, 3) - p(0, 2) * p(1, 3) + p(0, 3) * p(1, 2);
    assert!((wick_expectation(&g, &o).unwrap() - expected).norm() < 1e-14);
}

#[test]
fn entropy_of_random_gpdm_matches_oracle() {
    let mut r = rng(12);
    let g = random_gpdm(3, &mut r);
    let rho = realize_quasifree(&g).unwrap();
    assert!((quasifree_entropy(&g) - von_neumann(rho.matrix())).abs() < 1e-9);
    let half = GOnePdm::from_one_pdm(&(identity(3) * c(0.5)));
    assert!((quasifree_entropy(&half) - 3.0 * 2f64.ln()).abs() < 1e-12);
}

#[test]
fn mixing_vectors_hit_occupations() {
    let mut r = rng(13);
    for j in 2..=8 {
        let n = r.random_range(1..j);
        // diagonal of a random rank-N projection
        let u = random_unitary(j, &mut r);
        let occ = u.columns(0, n);
        let p = occ * occ.adjoint();
        let lam: Vec<f64> = (0..j).map(|k| p[(k, k)].re).collect();
        let g = mixing_vectors(&lam).unwrap();
        assert!(frobenius(&(&g * g.adjoint() - identity(n))) < 1e-12);
        for (col, &l) in lam.iter().enumerate() {
            let norm2: f64 = g.column(col).iter().map(|z| z.norm_sqr()).sum();
            assert!((norm2 - l).abs() < 1e-12, "{norm2} vs {l}");
        }
    }
    assert!(mixing_vectors(&[1.2, -0.2]).is_err());
    assert!(mixing_vectors(&[0.5, 0.2]).is_err());
}

fn repulsive_model(m: usize, seed: u64) -> Model {
    let mut r = rng(seed);
    Model::new(
        random_hermitian(m, &mut r),
        TwoBodyTensor::random_repulsive(m, 3, &mut r),
        0.0,
    )
    .unwrap()
}

#[test]
fn integer_occupations_give_constant_phase_average() {
    let model = repulsive_model(3, 14);
    let mut r = rng(15);
    let lam = [1.0, 0.0, 1.0];
    let f = random_unitary(3, &mut r);
    let g = mixing_vectors(&lam).unwrap();
    let stats = phase_average(&model, &lam, &f, &g, 50, &mut r).unwrap();
    assert!(stats.max - stats.min < 1e-12);
}

#[test]
fn phase_average_min_below_mixed_energy() {
    let model = repulsive_model(3, 16);
    let mut r = rng(17);
    let lam = [1.0, 0.5, 0.5];
    let f = random_unitary(3, &mut r);
    let g = mixing_vectors(&lam).unwrap();
    let gamma0 =
        &f * CMat::from_diagonal(&CVec::from_iterator(3, lam.iter().map(|&x| c(x)))) * f.adjoint();
    let e0 = crate::hf::hf_energy(&gamma0, &model).unwrap().total;
    let stats = phase_average(&model, &lam, &f, &g, 2000, &mut r).unwrap();
    assert!(stats.min <= e0 + 1e-9);
    assert!(phase_average(&model, &[1.5, -0.5, 1.0], &f, &g, 1, &mut r).is_err());
}

#[test]
fn random_phase_identity() {
    let mut r = rng(18);
    let samples = 10_000;
    let mut acc = CMat::zeros(3, 3);
    for _ in 0..samples {
        let th: Vec<f64> = (0..3).map(|_| r.random::<f64>()).collect();
        for j in 0..3 {
            for k in 0..3 {
                acc[(j, k)] += C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (th[j] - th[k]));
            }
        }
    }
    acc /= c(samples as f64);
    assert!(crate::linalg::max_abs(&(acc - identity(3))) < 2e-2);
}

#[test]
fn bdg_negative_projection_for_free_fermions() {
    let h = CMat::from_diagonal(&CVec::from_vec(vec![c(-1.0), c(0.5), c(-0.2)]));
    let m = 3;
    let mut hb = CMat::zeros(2 * m, 2 * m);
    hb.view_mut((0, 0), (m, m)).copy_from(&h);
    hb.view_mut((m, m), (m, m)).copy_from(&(-h.transpose()));
    let jeb = bdg_diagonalize(&hb).unwrap();
    let g = jeb.negative_projection();
    let gamma = g.gamma();
    let expected = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.0), c(1.0)]));
    assert!(frobenius(&(gamma - expected)) < 1e-10);
    assert!(frobenius(&g.alpha()) < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bogoliubov_conjugation_preserves_validity(seed in 0u64..10_000, m in 1usize..5) {
        let mut r = rng(seed);
        let g = random_gpdm(m, &mut r);
        let w = random_bogoliubov(m, &mut r);
        let diag = validate_gpdm(&w.conjugate(&g));
        prop_assert!(diag.is_valid(), "{:?}", diag.violations);
    }

    #[test]
    fn spectrum_pairs_up(seed in 0u64..10_000, m in 1usize..5) {
        let mut r = rng(seed);
        let g = random_gpdm(m, &mut r);
        let vals = HermEig::new(g.matrix()).values;
        for k in 0..2 * m {
            prop_assert!((vals[k] + vals[2 * m - 1 - k] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_mode_split_is_isotropic(seed in 0u64..10_000, m in 1usize..5) {
        // Γ with λ = ½ everywhere except one mode
        let mut r = rng(seed);
        let w = random_bogoliubov(m, &mut r);
        let mut lam = vec![0.5; m];
        lam[0] = 0.1;
        let g = super::bogoliubov::gpdm_from_spectrum(&w, &lam);
        let bd = block_diagonalize(&g).unwrap();
        prop_assert!(bd.residual < 1e-8);
        prop_assert!(bd.map.unitarity_residual() < 1e-8);
    }
}
