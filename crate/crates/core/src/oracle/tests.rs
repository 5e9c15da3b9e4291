use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{
    c, commutator, frobenius, identity, random_hermitian, random_unitary, trace, CMat, CVec,
    HermEig, ZERO,
};
use crate::model::Model;
use crate::tensor::TwoBodyTensor;

fn dimer(lambda: f64) -> Model {
    let mut h = CMat::zeros(4, 4);
    for s in 0..2 {
        h[(s, 2 + s)] = c(-1.0);
        h[(2 + s, s)] = c(-1.0);
    }
    let v = TwoBodyTensor::density_density(4, |i, j| {
        if i / 2 == j / 2 && i != j {
            lambda
        } else {
            0.0
        }
    });
    Model::new(h, v, 0.0).unwrap()
}

fn ring_spinless(l: usize) -> Model {
    let mut h = CMat::zeros(l, l);
    for x in 0..l {
        let y = (x + 1) % l;
        h[(x, y)] = c(-1.0);
        h[(y, x)] = c(-1.0);
    }
    Model::new(h, TwoBodyTensor::zeros(l), 0.0).unwrap()
}

fn random_model(m: usize, rng: &mut ChaCha8Rng) -> Model {
    let h = random_hermitian(m, rng);
    let v = TwoBodyTensor::random_indefinite(m, rng);
    Model::new(h, v, 0.3).unwrap()
}

#[test]
fn hubbard_dimer_ground_energy() {
    let lambda = 4.0;
    let h = assemble_hamiltonian(&dimer(lambda)).unwrap();
    let gs = ground_energy(&h, Some(2)).unwrap();
    let closed = (lambda - (lambda * lambda + 16.0f64).sqrt()) / 2.0;
    assert!((gs.energy - closed).abs() < 1e-10, "{}", gs.energy);
    assert!((gs.energy + 0.828427).abs() < 1e-6);
    assert_eq!(gs.degeneracy, 1);
    assert!((gs.vector.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn noninteracting_dimer_and_ring() {
    let h = assemble_hamiltonian(&dimer(0.0)).unwrap();
    assert!((ground_energy(&h, Some(2)).unwrap().energy + 2.0).abs() < 1e-12);
    let ring = assemble_hamiltonian(&ring_spinless(4)).unwrap();
    assert!((ground_energy(&ring, Some(2)).unwrap().energy + 2.0).abs() < 1e-12);
}

#[test]
fn free_spectrum_is_subset_sums() {
    let eps = [-1.5, 0.25, 0.7, 2.0];
    let mut h = CMat::zeros(4, 4);
    for (k, e) in eps.iter().enumerate() {
        h[(k, k)] = c(*e);
    }
    let op = assemble_hamiltonian(&Model::new(h, TwoBodyTensor::zeros(4), 0.0).unwrap()).unwrap();
    let spec = full_spectrum(&op);
    let mut sums: Vec<f64> = (0..16usize)
        .map(|s| (0..4).filter(|k| s >> k & 1 == 1).map(|k| eps[k]).sum())
        .collect();
    sums.sort_by(f64::total_cmp);
    for (a, b) in spec.iter().zip(&sums) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn grand_canonical_minimum_over_sectors() {
    let mut m = dimer(4.0);
    m.mu = 1.0;
    let h = assemble_hamiltonian(&m).unwrap();
    let all = ground_energy(&h, None).unwrap();
    let best = (0..=4)
        .map(|n| ground_energy(&h, Some(n)).unwrap().energy)
        .fold(f64::INFINITY, f64::min);
    assert!((all.energy - best).abs() < 1e-12);
}

#[test]
fn sector_blocks_match_first_quantization() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in 2..=5 {
        let model = random_model(m, &mut rng);
        let h = assemble_hamiltonian(&model).unwrap();
        for n in 1..=m.min(3) {
            let direct = first_quantized_sector_matrix(&model, n).unwrap();
            let block = h.sector_block(n);
            assert!(frobenius(&(direct - block)) < 1e-12, "M={m} N={n}");
        }
    }
}

#[test]
fn number_conservation_and_hermiticity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = random_model(4, &mut rng);
    let h = assemble_hamiltonian(&model).unwrap();
    assert!(h.matrix.conserves_particle_number());
    assert!(h.matrix.hermiticity_residual() < 1e-12);
    let n_op = second_quantize_one_body(&h.basis, &identity(4)).to_dense();
    assert!(frobenius(&commutator(&h.to_dense(), &n_op)) < 1e-12);
}

#[test]
fn invalid_model_is_rejected() {
    let mut h = CMat::zeros(2, 2);
    h[(0, 1)] = c(1.0);
    assert!(Model::new(h, TwoBodyTensor::zeros(2), 0.0).is_err());
}

#[test]
fn rayleigh_ritz() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let model = random_model(5, &mut rng);
    let h = assemble_hamiltonian(&model).unwrap();
    let n = 2;
    let e0 = ground_energy(&h, Some(n)).unwrap().energy;
    let states = h.basis.sector(n);
    let block = h.sector_block(n);
    for _ in 0..100 {
        let v = crate::linalg::random_gaussian(states.len(), 1, &mut rng);
        let v = &v / c(v.norm());
        let e = (v.adjoint() * &block * &v)[(0, 0)].re;
        assert!(e >= e0 - 1e-10);
    }
}

fn slater(basis: FockBasis, orbitals: &[CVec]) -> CVec {
    let car = CarOperators::new(basis);
    let mut psi = CVec::zeros(basis.dim());
    psi[0] = c(1.0);
    for f in orbitals.iter().rev() {
        psi = car.creation_of(f) * psi;
    }
    psi
}

#[test]
fn slater_one_rdm_is_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let basis = FockBasis::new(4).unwrap();
    let u = random_unitary(4, &mut rng);
    let orbs: Vec<CVec> = (0..2).map(|k| u.column(k).into_owned()).collect();
    let rho = FockDensityMatrix::pure(basis, &slater(basis, &orbs)).unwrap();
    let g = one_rdm(&rho);
    let p = &orbs[0] * orbs[0].adjoint() + &orbs[1] * orbs[1].adjoint();
    assert!(frobenius(&(g - p)) < 1e-12);
}

#[test]
fn vacuum_rdms() {
    let rho = FockDensityMatrix::vacuum(FockBasis::new(3).unwrap());
    let r = reduced_density_matrices(&rho);
    assert_eq!(frobenius(&r.gamma1), 0.0);
    assert_eq!(frobenius(&r.alpha), 0.0);
    let mut expected = CMat::zeros(6, 6);
    for k in 3..6 {
        expected[(k, k)] = c(1.0);
    }
    assert_eq!(frobenius(&(r.gamma_gen - expected)), 0.0);
}

#[test]
fn generalized_rdm_has_block_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rho = FockDensityMatrix::random_even(FockBasis::new(3).unwrap(), 3, &mut rng);
    let r = reduced_density_matrices(&rho);
    let m = 3;
    let g = &r.gamma_gen;
    let ul = g.view((0, 0), (m, m)).into_owned();
    let ur = g.view((0, m), (m, m)).into_owned();
    let lr = g.view((m, m), (m, m)).into_owned();
    assert!(frobenius(&(ul - &r.gamma1)) < 1e-12);
    assert!(frobenius(&(ur - &r.alpha)) < 1e-12);
    let expected = identity(m) - r.gamma1.map(|z| z.conj());
    assert!(frobenius(&(lr - expected)) < 1e-12);
    assert!(frobenius(&(&r.alpha + r.alpha.transpose())) < 1e-12);
}

#[test]
fn traces_of_rdms() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rho = FockDensityMatrix::random_even(FockBasis::new(4).unwrap(), 4, &mut rng);
    let (n1, n2) = rho.number_moments();
    assert!((trace(&one_rdm(&rho)).re - n1).abs() < 1e-10);
    assert!((trace(&two_rdm(&rho)).re - (n2 - n1)).abs() < 1e-10);
}

#[test]
fn partial_trace_and_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let m = 4;
    let n = 3;
    let rho = FockDensityMatrix::random_n_particle(FockBasis::new(m).unwrap(), n, 5, &mut rng);
    let g1 = one_rdm(&rho);
    let g2 = two_rdm(&rho);
    let reduced = CMat::from_fn(m, m, |i, k| {
        (0..m).map(|j| g2[(i * m + j, k * m + j)]).sum()
    });
    assert!(frobenius(&(reduced - &g1 * c((n - 1) as f64))) < 1e-10);
    let e1 = HermEig::new(&g1);
    assert!(e1.min() >= -1e-10 && e1.max() <= 1.0 + 1e-10);
    let e2 = HermEig::new(&g2);
    assert!(e2.min() >= -1e-10 && e2.max() <= (n - 1) as f64 + 1e-10);
}

#[test]
fn energy_from_rdms_matches_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let model = dimer(4.0).with_mu(0.7);
    let h = assemble_hamiltonian(&model).unwrap();
    let rho = FockDensityMatrix::random_number_conserving(h.basis, 6, &mut rng);
    let e = energy_from_rdms(&one_rdm(&rho), &two_rdm(&rho), &model).unwrap();
    assert!((e - h.expectation(rho.matrix())).abs() < 1e-10);
    let zero = energy_from_rdms(&CMat::zeros(4, 4), &CMat::zeros(16, 16), &model).unwrap();
    assert_eq!(zero, 0.0);
    assert!(energy_from_rdms(&CMat::zeros(3, 3), &CMat::zeros(16, 16), &model).is_err());
}

#[test]
fn npoint_vacuum_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = 3;
    let basis = FockBasis::new(m).unwrap();
    let car = CarOperators::new(basis);
    let vac = FockDensityMatrix::vacuum(basis);
    let rnd = |rng: &mut ChaCha8Rng| {
        crate::linalg::random_gaussian(m, 1, rng)
            .column(0)
            .into_owned()
    };
    // c(f) = A*(0 ⊕ conj f), c†(g) = A*(g ⊕ 0)
    let annihilator = |f: &CVec| {
        let mut v = CVec::zeros(2 * m);
        for k in 0..m {
            v[m + k] = f[k].conj();
        }
        v
    };
    let creator = |g: &CVec| {
        let mut v = CVec::zeros(2 * m);
        v.rows_mut(0, m).copy_from(g);
        v
    };
    let (f1, f2, g1, g2) = (rnd(&mut rng), rnd(&mut rng), rnd(&mut rng), rnd(&mut rng));
    let two = npoint_expectation(&vac, &car, &[annihilator(&f1), creator(&g1)]);
    assert!((two - f1.dotc(&g1)).norm() < 1e-12);
    let four = npoint_expectation(
        &vac,
        &car,
        &[
            annihilator(&f1),
            annihilator(&f2),
            creator(&g2),
            creator(&g1),
        ],
    );
    let expected = f1.dotc(&g1) * f2.dotc(&g2) - f1.dotc(&g2) * f2.dotc(&g1);
    assert!((four - expected).norm() < 1e-12);
    let even = FockDensityMatrix::random_even(basis, 3, &mut rng);
    let odd = npoint_expectation(&even, &car, &[creator(&g1), annihilator(&f1), creator(&g2)]);
    assert!(odd.norm() < 1e-12);
}

#[test]
fn entropy_values() {
    let basis = FockBasis::new(3).unwrap();
    let mixed = FockDensityMatrix::maximally_mixed(basis);
    assert!((von_neumann(mixed.matrix()) - 3.0 * 2f64.ln()).abs() < 1e-12);
    let vac = FockDensityMatrix::vacuum(basis);
    assert!(von_neumann(vac.matrix()).abs() < 1e-12);
    assert!(
        relative_entropy(mixed.matrix(), mixed.matrix())
            .unwrap()
            .abs()
            < 1e-10
    );
    assert!(relative_entropy(vac.matrix(), mixed.matrix()).unwrap() > 0.0);
    assert!(matches!(
        relative_entropy(mixed.matrix(), vac.matrix()),
        Err(crate::Error::InfiniteRelativeEntropy(_))
    ));
}

#[test]
fn density_matrix_flags() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let basis = FockBasis::new(3).unwrap();
    let nc = FockDensityMatrix::random_number_conserving(basis, 4, &mut rng);
    assert!(nc.is_even() && nc.is_number_conserving());
    let ev = FockDensityMatrix::random_even(basis, 4, &mut rng);
    assert!(ev.is_even() && !ev.is_number_conserving());
    let mut odd = CMat::zeros(8, 8);
    odd[(0, 0)] = c(0.5);
    odd[(1, 1)] = c(0.5);
    odd[(0, 1)] = c(0.5);
    odd[(1, 0)] = c(0.5);
    assert!(!FockDensityMatrix::new(basis, odd).unwrap().is_even());
    let mut bad = CMat::zeros(8, 8);
    bad[(0, 0)] = c(2.0);
    bad[(1, 1)] = c(-1.0);
    assert!(FockDensityMatrix::new(basis, bad).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn car_relations_hold(m in 1usize..=6, i in 0usize..6, j in 0usize..6) {
        prop_assume!(i < m && j < m);
        let car = build_car(m).unwrap();
        let d = 1usize << m;
        let ci = car.c(i).to_dense();
        let cj = car.c(j).to_dense();
        let cdj = car.cdag(j).to_dense();
        let delta = if i == j { identity(d) } else { CMat::zeros(d, d) };
        prop_assert_eq!(frobenius(&(&ci * &cdj + &cdj * &ci - delta)), 0.0);
        prop_assert_eq!(frobenius(&(&ci * &cj + &cj * &ci)), 0.0);
        prop_assert!(car.c(i).to_dense().column(0).iter().all(|z| *z == ZERO));
    }

    #[test]
    fn oracle_gamma_is_valid(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = FockDensityMatrix::random_even(FockBasis::new(3).unwrap(), 2, &mut rng);
        let g = generalized_one_rdm(&rho);
        let e = HermEig::new(&g);
        prop_assert!(e.min() >= -1e-10 && e.max() <= 1.0 + 1e-10);
    }
}
