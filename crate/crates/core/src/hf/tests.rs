use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{
    c, frobenius, identity, random_hermitian, random_unitary, trace_product, CMat, CVec, HermEig,
};
use crate::model::Model;
use crate::models::{build_hubbard, HubbardSpec};
use crate::oracle::{
    assemble_hamiltonian, ground_energy, CarOperators, FockBasis, FockDensityMatrix,
};
use crate::quasifree::OnePdm;
use crate::tensor::TwoBodyTensor;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_pdm(m: usize, r: &mut ChaCha8Rng) -> CMat {
    let u = random_unitary(m, r);
    let occ: Vec<f64> = (0..m)
        .map(|k| ((k as f64 + 0.5) / m as f64).sin().abs())
        .collect();
    let d = CMat::from_diagonal(&CVec::from_iterator(m, occ.iter().map(|&x| c(x))));
    &u * d * u.adjoint()
}

fn random_model(m: usize, seed: u64, repulsive: bool) -> Model {
    let mut r = rng(seed);
    let h = random_hermitian(m, &mut r);
    let v = if repulsive {
        TwoBodyTensor::random_repulsive(m, 4, &mut r)
    } else {
        TwoBodyTensor::random_indefinite(m, &mut r)
    };
    Model::new(h, v, 0.0).unwrap()
}

#[test]
fn free_energy_is_linear() {
    let mut r = rng(1);
    let h = random_hermitian(3, &mut r);
    let model = Model::new(h, TwoBodyTensor::zeros(3), 0.4).unwrap();
    let g = random_pdm(3, &mut r);
    let e = hf_energy(&g, &model).unwrap();
    assert!((e.total - trace_product(&model.h_mu(), &g).re).abs() < 1e-12);
    assert_eq!(e.direct, 0.0);
}

#[test]
fn slater_energy_matches_oracle() {
    let model = random_model(4, 2, false).with_mu(0.3);
    let mut r = rng(3);
    let u = random_unitary(4, &mut r);
    let basis = FockBasis::new(4).unwrap();
    let car = CarOperators::new(basis);
    let mut psi = CVec::zeros(16);
    psi[0] = c(1.0);
    for k in (0..2).rev() {
        psi = car.creation_of(&u.column(k).into_owned()) * psi;
    }
    let rho = FockDensityMatrix::pure(basis, &psi).unwrap();
    let h = assemble_hamiltonian(&model).unwrap();
    let occ = u.columns(0, 2);
    let gamma = occ * occ.adjoint();
    let e = hf_energy(&gamma, &model).unwrap().total;
    assert!((e - h.expectation(rho.matrix())).abs() < 1e-10);
}

#[test]
fn dimer_bonding_rhf_energy() {
    let model = build_hubbard(&HubbardSpec::chain(2, 4.0)).unwrap();
    let mut gamma = CMat::zeros(4, 4);
    for s in 0..2 {
        for x in 0..2 {
            for y in 0..2 {
                gamma[(2 * x + s, 2 * y + s)] = c(0.5);
            }
        }
    }
    let e = hf_energy(&gamma, &model).unwrap();
    assert!((e.one_body + 2.0).abs() < 1e-12);
    assert!((e.direct - 2.0).abs() < 1e-12);
    assert!(e.exchange.abs() < 1e-12);
    assert!(e.total.abs() < 1e-12);
}

#[test]
fn fock_operator_is_the_gradient() {
    let model = random_model(4, 4, false).with_mu(0.2);
    let mut r = rng(5);
    for _ in 0..25 {
        let g = random_pdm(4, &mut r);
        let f = fock_operator(&g, &model).unwrap();
        let d = random_hermitian(4, &mut r);
        let step = 1e-5;
        let ep = hf_energy(&(&g + &d * c(step)), &model).unwrap().total;
        let em = hf_energy(&(&g - &d * c(step)), &model).unwrap().total;
        let fd = (ep - em) / (2.0 * step);
        let an = trace_product(&f, &d).re;
        assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "{fd} vs {an}");
    }
    let zero = fock_operator(&CMat::zeros(4, 4), &model).unwrap();
    assert!(frobenius(&(zero - model.h_mu())) < 1e-14);
}

#[test]
fn aufbau_basics() {
    let f = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(2.0), c(3.0), c(4.0)]));
    let a = aufbau_projection(&f, 2).unwrap();
    let expected = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(1.0), c(0.0), c(0.0)]));
    assert!(frobenius(&(a.projection - expected)) < 1e-12);
    assert!(!a.degenerate);
    let f2 = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(2.0), c(2.0), c(4.0)]));
    assert!(aufbau_projection(&f2, 2).unwrap().degenerate);
}

#[test]
fn aufbau_minimizes_linear_energy() {
    let mut r = rng(6);
    let f = random_hermitian(5, &mut r);
    let p = aufbau_projection(&f, 2).unwrap().projection;
    let e = trace_product(&f, &p).re;
    for _ in 0..50 {
        let u = random_unitary(5, &mut r);
        let q = u.columns(0, 2) * u.columns(0, 2).adjoint();
        assert!(e <= trace_product(&f, &q).re + 1e-12);
    }
}

#[test]
fn free_scf_is_aufbau() {
    let eps = [-1.0, -0.5, 0.3, 2.0];
    let h = CMat::from_diagonal(&CVec::from_iterator(4, eps.iter().map(|&x| c(x))));
    let model = Model::new(h, TwoBodyTensor::zeros(4), 0.0).unwrap();
    let opts = ScfOptions {
        mixing: 1.0,
        restarts: 1,
        ..Default::default()
    };
    let rep = scf_solve(&model, 2, &opts).unwrap();
    assert!(rep.converged);
    assert!((rep.energy() + 1.5).abs() < 1e-12);
    assert!(rep.trace.len() <= 2);
}

#[test]
fn scf_is_above_exact_dimer() {
    let model = build_hubbard(&HubbardSpec::chain(2, 1.0)).unwrap();
    let rep = scf_solve(&model, 2, &ScfOptions::default()).unwrap();
    assert!(rep.converged);
    let h = assemble_hamiltonian(&model).unwrap();
    let exact = ground_energy(&h, Some(2)).unwrap().energy;
    assert!(rep.energy() >= exact - 1e-9);
    let p = OnePdm::new(rep.gamma.clone()).unwrap();
    assert!(p.idempotency_residual() < 1e-8);
    assert!((p.trace() - 2.0).abs() < 1e-10);
}

#[test]
fn half_filled_ring_breaks_spin_symmetry() {
    let model = build_hubbard(&HubbardSpec::chain(4, 4.0)).unwrap();
    let para = scf_solve(
        &model,
        4,
        &ScfOptions {
            restarts: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let broken = scf_solve(
        &model,
        4,
        &ScfOptions {
            restarts: 6,
            seed: 3,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(broken.energy() <= para.energy() + 1e-9);
    let h = assemble_hamiltonian(&model).unwrap();
    assert!(broken.energy() >= ground_energy(&h, Some(4)).unwrap().energy - 1e-9);
}

#[test]
fn stationarity_at_convergence() {
    let model = random_model(5, 7, true);
    let opts = ScfOptions::default();
    let rep = scf_solve(&model, 2, &opts).unwrap();
    assert!(rep.converged);
    let f = fock_operator(&rep.gamma, &model).unwrap();
    assert!(frobenius(&(&f * &rep.gamma - &rep.gamma * &f)) <= opts.commutator_tol * 10.0);
    if !rep.degenerate {
        let p = aufbau_projection(&f, 2).unwrap().projection;
        assert!(frobenius(&(p - &rep.gamma)) < 1e-6);
    }
}

#[test]
fn spectrahedron_projection_is_feasible() {
    let mut r = rng(8);
    let x = random_hermitian(5, &mut r) * c(3.0);
    let p = project_spectrahedron(&x, 2.0).unwrap();
    let e = HermEig::new(&p);
    assert!(e.min() >= -1e-12 && e.max() <= 1.0 + 1e-12);
    assert!((crate::linalg::trace(&p).re - 2.0).abs() < 1e-10);
    // already feasible points are fixed
    let q = project_spectrahedron(&p, 2.0).unwrap();
    assert!(frobenius(&(q - &p)) < 1e-9);
}

#[test]
fn relaxed_free_problem_is_aufbau() {
    let eps = [0.5, -1.0, 0.1, 2.0];
    let h = CMat::from_diagonal(&CVec::from_iterator(4, eps.iter().map(|&x| c(x))));
    let model = Model::new(h.clone(), TwoBodyTensor::zeros(4), 0.0).unwrap();
    let rep = relaxed_solve(&model, 2, &ScfOptions::default()).unwrap();
    let p = aufbau_projection(&h, 2).unwrap().projection;
    assert!(frobenius(&(rep.gamma - p)) < 1e-6);
}

#[test]
fn relaxed_repulsive_minimizer_is_a_projection() {
    for seed in 0..4 {
        let model = random_model(4, 100 + seed, true);
        let opts = ScfOptions {
            restarts: 6,
            seed,
            ..Default::default()
        };
        let relaxed = relaxed_solve(&model, 2, &opts).unwrap();
        assert!(
            relaxed
                .occupations
                .iter()
                .all(|&x| x.abs() < 1e-6 || (x - 1.0).abs() < 1e-6),
            "{:?}",
            relaxed.occupations
        );
        let scf = scf_solve(&model, 2, &opts).unwrap();
        assert!(
            (relaxed.energy - scf.energy()).abs() < 1e-6,
            "{} vs {}",
            relaxed.energy,
            scf.energy()
        );
    }
}

#[test]
fn rounding_keeps_projections() {
    let model = random_model(4, 9, true);
    let mut r = rng(10);
    let u = random_unitary(4, &mut r);
    let p = u.columns(0, 2) * u.columns(0, 2).adjoint();
    let rep = occupation_rounding(&p, &model).unwrap();
    let e0 = hf_energy(&p, &model).unwrap().total;
    assert!(rep.energy() <= e0 + 1e-12);
    assert!(frobenius(&(rep.gamma - &p)) < 1e-9 || rep.swaps > 0);
}

#[test]
fn two_level_rounding_strictly_lowers() {
    // two modes with a strictly positive pair interaction
    let h = CMat::zeros(2, 2);
    let v = TwoBodyTensor::density_density(2, |i, j| if i != j { 1.0 } else { 0.0 });
    let model = Model::new(h, v, 0.0).unwrap();
    let gamma = identity(2) * c(0.5);
    let rep = occupation_rounding(&gamma, &model).unwrap();
    let e0 = hf_energy(&gamma, &model).unwrap().total;
    assert!(rep.energy() < e0 - 1e-3);
    let occ = HermEig::new(&rep.gamma).values;
    assert!(occ
        .iter()
        .all(|x| x.abs() < 1e-10 || (x - 1.0).abs() < 1e-10));
}

fn enumerate_best(gamma: &CMat, n: usize, model: &Model) -> f64 {
    let eig = HermEig::new(gamma);
    let j = eig.values.len();
    let mut best = f64::INFINITY;
    for mask in 0usize..1 << j {
        if mask.count_ones() as usize != n {
            continue;
        }
        let mut p = CMat::zeros(j, j);
        for k in (0..j).filter(|k| mask >> k & 1 == 1) {
            let f = eig.vectors.column(k);
            p += f * f.adjoint();
        }
        best = best.min(hf_energy(&p, model).unwrap().total);
    }
    best
}

#[test]
fn rounding_matches_enumeration_on_hubbard() {
    let model = build_hubbard(&HubbardSpec::chain(2, 3.0)).unwrap();
    let mut r = rng(11);
    for _ in 0..10 {
        let u = random_unitary(4, &mut r);
        let occ = [0.9, 0.6, 0.3, 0.2];
        let g = &u
            * CMat::from_diagonal(&CVec::from_iterator(4, occ.iter().map(|&x| c(x))))
            * u.adjoint();
        let rep = occupation_rounding(&g, &model).unwrap();
        assert!(rep.energies.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!((rep.energy() - enumerate_best(&g, 2, &model)).abs() < 1e-10);
    }
}

#[test]
fn attractive_open_shell_returns_a_slater_determinant() {
    // damped SCF settles on a mixture here, which undercuts the exact energy
    let mut spec = HubbardSpec::chain(3, -2.0);
    spec.mu = -0.6;
    let model = build_hubbard(&spec).unwrap();
    let rep = scf_solve(&model, 3, &ScfOptions::default()).unwrap();
    assert!(frobenius(&(&rep.gamma * &rep.gamma - &rep.gamma)) < 1e-9);
    let exact = ground_energy(&assemble_hamiltonian(&model).unwrap(), Some(3))
        .unwrap()
        .energy;
    assert!(rep.energy() >= exact - 1e-9, "{} < {exact}", rep.energy());
    assert!(rep.converged);
}
