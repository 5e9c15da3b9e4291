use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hf::{hf_energy, hf_grand_canonical, ScfOptions};
use crate::linalg::{
    c, fermi_scalar, frobenius, identity, max_abs, random_hermitian, random_real_symmetric,
    trace_product, CMat, HermEig,
};
use crate::model::Model;
use crate::models::{build_hubbard, HubbardSpec};
use crate::oracle::{assemble_hamiltonian, ground_energy, log_partition};
use crate::quasifree::{
    bdg_diagonalize, j_conj, random_gpdm, realize_quasifree, validate_gpdm, GOnePdm,
};
use crate::tensor::TwoBodyTensor;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_model(m: usize, seed: u64, repulsive: bool) -> Model {
    let mut r = rng(seed);
    let h = random_hermitian(m, &mut r);
    let v = if repulsive {
        TwoBodyTensor::random_repulsive(m, 3, &mut r)
    } else {
        TwoBodyTensor::random_indefinite(m, &mut r)
    };
    Model::new(h, v, 0.2).unwrap()
}

fn hubbard(l: usize, coupling: f64) -> Model {
    hubbard_at(l, coupling, coupling / 2.0)
}

fn hubbard_at(l: usize, coupling: f64, mu: f64) -> Model {
    let mut spec = HubbardSpec::chain(l, coupling);
    spec.mu = mu;
    build_hubbard(&spec).unwrap()
}

fn j_compatible_direction(m: usize, r: &mut ChaCha8Rng) -> CMat {
    let x = random_hermitian(2 * m, r);
    (&x - j_conj(&x)) * c(0.5)
}

fn attractive_pair(l: usize, coupling: f64) -> SpinHalfProblem {
    let spec = HubbardSpec::chain(l, 0.0);
    let free = build_hubbard(&spec).unwrap();
    let h_hat = CMat::from_fn(l, l, |x, y| free.h[(2 * x, 2 * y)]);
    let v_hat = TwoBodyTensor::density_density(l, |x, y| if x == y { coupling } else { 0.0 });
    SpinHalfProblem::new(h_hat, v_hat, -coupling / 2.0).unwrap()
}

#[test]
fn unpaired_energy_is_hf() {
    let model = random_model(4, 1, false);
    let mut r = rng(2);
    let g = random_gpdm(4, &mut r).without_pairing();
    let e = bhf_energy(&g, &model).unwrap();
    let hf = hf_energy(&g.gamma(), &model).unwrap();
    assert_eq!(e.pairing, 0.0);
    assert!((e.total - hf.total).abs() < 1e-13);
}

#[test]
fn repulsive_pairing_costs_energy() {
    let model = hubbard(2, 2.0);
    let mut r = rng(3);
    for _ in 0..20 {
        let g = random_gpdm(4, &mut r);
        assert!(bhf_energy(&g, &model).unwrap().pairing > 0.0);
    }
}

#[test]
fn energy_matches_oracle_trace() {
    let model = random_model(4, 4, false);
    let h = assemble_hamiltonian(&model).unwrap();
    let mut r = rng(5);
    for _ in 0..5 {
        let g = random_gpdm(4, &mut r);
        let rho = realize_quasifree(&g).unwrap();
        let e = bhf_energy(&g, &model).unwrap().total;
        assert!((e - h.expectation(rho.matrix())).abs() < 1e-9);
    }
}

#[test]
fn effective_hamiltonian_blocks() {
    let model = random_model(3, 6, false);
    let mut r = rng(7);
    let g = random_gpdm(3, &mut r);
    let h = bhf_effective(&g, &model).unwrap();
    assert!(frobenius(&(j_conj(&h) + &h)) < 1e-12);
    let unpaired = bhf_effective(&g.without_pairing(), &model).unwrap();
    let f = crate::hf::fock_operator(&g.gamma(), &model).unwrap();
    assert!(frobenius(&(unpaired.view((0, 0), (3, 3)) - f)) < 1e-12);

    let free = Model::new(model.h.clone(), TwoBodyTensor::zeros(3), model.mu).unwrap();
    let h0 = bhf_effective(&g, &free).unwrap();
    let hm = free.h_mu();
    assert!(frobenius(&(h0.view((0, 0), (3, 3)) - &hm)) < 1e-14);
    assert!(frobenius(&(h0.view((3, 3), (3, 3)) + hm.transpose())) < 1e-14);
    assert!(max_abs(&h0.view((0, 3), (3, 3)).into_owned()) < 1e-14);
}

#[test]
fn effective_hamiltonian_is_the_gradient() {
    let model = random_model(4, 8, false);
    let mut r = rng(9);
    for _ in 0..25 {
        let g = random_gpdm(4, &mut r);
        let h = bhf_effective(&g, &model).unwrap();
        let d = j_compatible_direction(4, &mut r);
        let step = 1e-5;
        let shifted = |t: f64| GOnePdm::from_matrix(g.matrix() + &d * c(t)).unwrap();
        let ep = bhf_energy(&shifted(step), &model).unwrap().total;
        let em = bhf_energy(&shifted(-step), &model).unwrap().total;
        let fd = (ep - em) / (2.0 * step);
        let an = 0.5 * trace_product(&h, &d).re;
        assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "{fd} vs {an}");
    }
}

#[test]
fn killing_pairing_lowers_repulsive_energy() {
    let mut r = rng(10);
    for k in 0..100 {
        let model = random_model(3, 200 + k, true);
        let g = random_gpdm(3, &mut r);
        let killed = kill_pairing(&g);
        assert!(validate_gpdm(&killed).is_valid());
        let e = bhf_energy(&g, &model).unwrap().total;
        assert!(bhf_energy(&killed, &model).unwrap().total <= e + 1e-12);
    }
}

#[test]
fn fermi_of_zero_is_half() {
    let g = fermi_gpdm(&CMat::zeros(4, 4), 3.0).unwrap();
    assert!(frobenius(&(g.matrix() - identity(4) * c(0.5))) < 1e-15);
}

#[test]
fn free_fixed_point_is_closed_form() {
    let mut r = rng(11);
    let h = random_hermitian(3, &mut r);
    let model = Model::new(h, TwoBodyTensor::zeros(3), 0.1).unwrap();
    let state = finite_temperature_fixed_point(&model, 2.0, None, 1e-12, 0.5, 10).unwrap();
    assert!(state.converged);
    assert_eq!(state.iterations, 0);
    let hm = model.h_mu();
    let gamma = HermEig::new(&hm).apply(|x| fermi_scalar(2.0 * x));
    assert!(frobenius(&(state.gpdm.gamma() - gamma)) < 1e-12);
}

#[test]
fn annealing_ladder_sharpens() {
    let model = hubbard_at(2, -3.0, -1.0);
    let schedule = TemperatureSchedule::geometric(1.0, 1e3, 13);
    let mut prev: Option<GOnePdm> = None;
    let mut jumps = Vec::new();
    let mut idem = Vec::new();
    for &beta in &schedule.betas {
        let s =
            finite_temperature_fixed_point(&model, beta, prev.as_ref(), 1e-11, 0.5, 5000).unwrap();
        assert!(s.converged, "β = {beta}");
        let eig = HermEig::new(s.gpdm.matrix());
        // beyond this the tails underflow in double precision
        if beta < 5.0 {
            assert!(eig.min() > 0.0 && eig.max() < 1.0);
        }
        let g = s.gpdm.matrix();
        idem.push(frobenius(&(g * g - g)));
        if let Some(p) = &prev {
            jumps.push(frobenius(&(p.matrix() - g)));
        }
        prev = Some(s.gpdm);
    }
    assert!(jumps.last().unwrap() < &1e-6, "{jumps:?}");
    assert!(idem.last().unwrap() < &idem[0]);
}

#[test]
fn zero_temperature_free_is_negative_projection() {
    let mut r = rng(12);
    let h = random_hermitian(3, &mut r);
    let model = Model::new(h, TwoBodyTensor::zeros(3), 0.0).unwrap();
    let rep = bhf_solve_zero_t(
        &model,
        &TemperatureSchedule::default(),
        &BhfOptions::default(),
    )
    .unwrap();
    let eig = HermEig::new(&model.h);
    let expected: f64 = eig.values.iter().filter(|&&e| e < 0.0).sum();
    assert!((rep.energy() - expected).abs() < 1e-10);
    assert!(rep.idempotency_residual < 1e-8);
    let p = eig.apply(|x| if x < 0.0 { 1.0 } else { 0.0 });
    assert!(frobenius(&(rep.gpdm.gamma() - p)) < 1e-6);
}

#[test]
fn repulsive_bhf_equals_hf() {
    for coupling in [1.0, 4.0] {
        let model = hubbard(2, coupling);
        let rep = bhf_solve_zero_t(
            &model,
            &TemperatureSchedule::default(),
            &BhfOptions::default(),
        )
        .unwrap();
        assert!(rep.pairing_norm <= 1e-6, "‖α‖ = {}", rep.pairing_norm);
        let hf = hf_grand_canonical(&model, &ScfOptions::default()).unwrap();
        assert!(
            (rep.energy() - hf.energy()).abs() <= 1e-8,
            "{} vs {}",
            rep.energy(),
            hf.energy()
        );
        let h = assemble_hamiltonian(&model).unwrap();
        assert!(ground_energy(&h, None).unwrap().energy <= rep.energy() + 1e-9);
    }
}

#[test]
fn attractive_ring_pairs() {
    // at μ = λ/2 pairing and charge order are degenerate; move off it
    let model = hubbard_at(4, -4.0, -1.5);
    let rep = bhf_solve_zero_t(
        &model,
        &TemperatureSchedule::default(),
        &BhfOptions::default(),
    )
    .unwrap();
    let hf = hf_grand_canonical(&model, &ScfOptions::default()).unwrap();
    assert!(rep.pairing_norm > 1e-2);
    assert!(
        rep.energy() < hf.energy() - 1e-4,
        "{} vs {}",
        rep.energy(),
        hf.energy()
    );
    let h = assemble_hamiltonian(&model).unwrap();
    assert!(ground_energy(&h, None).unwrap().energy <= rep.energy() + 1e-9);
}

#[test]
fn pressure_limits_and_bound() {
    let model = random_model(4, 13, false);
    let mut r = rng(14);
    let g = random_gpdm(4, &mut r);
    let cold = pressure(&g, &model, 1e9, false).unwrap();
    assert!((cold.pressure + cold.energy).abs() < 1e-8);
    for _ in 0..5 {
        let g = random_gpdm(4, &mut r);
        let beta = r.random_range(0.2..5.0);
        let p = pressure(&g, &model, beta, true).unwrap();
        assert_eq!(
            p.bound_holds(1e-8),
            Some(true),
            "{} vs {:?}",
            p.pressure,
            p.oracle_bound
        );
    }
}

#[test]
fn free_pressure_is_exact() {
    let mut r = rng(15);
    let h = random_hermitian(4, &mut r);
    let model = Model::new(h, TwoBodyTensor::zeros(4), 0.3).unwrap();
    let beta = 1.7;
    let free = bhf_effective(&GOnePdm::from_one_pdm(&CMat::zeros(4, 4)), &model).unwrap();
    let g = fermi_gpdm(&free, beta).unwrap();
    let p = pressure(&g, &model, beta, true).unwrap();
    let closed: f64 = HermEig::new(&model.h_mu())
        .values
        .iter()
        .map(|e| (1.0 + (-beta * e).exp()).ln() / beta)
        .sum();
    assert!((p.pressure - closed).abs() < 1e-10);
    let exact = log_partition(&assemble_hamiltonian(&model).unwrap(), beta) / beta;
    assert!((p.pressure - exact).abs() < 1e-10);
}

#[test]
fn spin_half_embedding_matches_full_functional() {
    let problem = attractive_pair(3, 2.5);
    let model = problem.model().unwrap();
    let mut r = rng(16);
    for _ in 0..5 {
        let g = HermEig::new(&random_real_symmetric(3, &mut r)).apply(|x| fermi_scalar(2.0 * x));
        let full = problem.assemble(&g);
        assert!(validate_gpdm(&full).is_valid());
        let alpha = full.alpha();
        assert!(frobenius(&(&alpha + alpha.transpose())) < 1e-14);
        let e = bhf_energy(&full, &model).unwrap().total;
        assert!((2.0 * problem.aux_energy(&g) - e).abs() < 1e-10);
    }
    // same-spin on-site terms vanish, so the Hubbard builder agrees
    let hub = hubbard(3, -2.5);
    let g = random_gpdm(6, &mut r);
    let a = bhf_energy(&g, &hub).unwrap().total;
    let b = bhf_energy(&g, &model).unwrap().total;
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn spin_half_projection_has_no_pairing() {
    let problem = attractive_pair(2, 1.0);
    let p = CMat::from_diagonal(&crate::linalg::CVec::from_vec(vec![c(1.0), c(0.0)]));
    assert!(max_abs(&problem.assemble(&p).alpha()) < 1e-7);
}

#[test]
fn aux_gradient_matches_differences() {
    let problem = attractive_pair(3, 1.5);
    let mut r = rng(17);
    for _ in 0..25 {
        let g = HermEig::new(&random_real_symmetric(3, &mut r)).apply(fermi_scalar);
        let grad = problem.aux_gradient(&g);
        let d = random_real_symmetric(3, &mut r);
        let step = 1e-5;
        let fd = (problem.aux_energy(&(&g + &d * c(step)))
            - problem.aux_energy(&(&g - &d * c(step))))
            / (2.0 * step);
        let an = trace_product(&grad, &d).re;
        assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "{fd} vs {an}");
    }
}

#[test]
fn spin_half_rejects_complex_input() {
    let mut h = CMat::zeros(2, 2);
    h[(0, 1)] = crate::linalg::I;
    h[(1, 0)] = -crate::linalg::I;
    let v = TwoBodyTensor::density_density(2, |x, y| if x == y { 1.0 } else { 0.0 });
    assert!(SpinHalfProblem::new(h, v, 0.0).is_err());
}

#[test]
fn spin_half_solve_matches_annealing() {
    let problem = attractive_pair(2, 3.0);
    let model = problem.model().unwrap();
    let aux = attractive_spin_half_solve(&problem, &BhfOptions::default()).unwrap();
    let full = bhf_solve_zero_t(
        &model,
        &TemperatureSchedule::default(),
        &BhfOptions::default(),
    )
    .unwrap();
    assert!(
        (aux.energy - full.energy()).abs() < 1e-6,
        "{} vs {}",
        aux.energy,
        full.energy()
    );
}

#[test]
fn pure_search_free_vacuum() {
    let mut r = rng(18);
    let h = random_hermitian(4, &mut r);
    let model = Model::new(h, TwoBodyTensor::zeros(4), 0.2).unwrap();
    let rep = pure_quasifree_search(&model, &BhfOptions::default()).unwrap();
    let expected: f64 = HermEig::new(&model.h_mu())
        .values
        .iter()
        .filter(|&&e| e < 0.0)
        .sum();
    assert!((rep.energy() - expected).abs() < 1e-9);
}

#[test]
fn pure_search_matches_annealing() {
    let model = hubbard_at(4, -4.0, -1.5);
    let pure = pure_quasifree_search(&model, &BhfOptions::default()).unwrap();
    let mixed = bhf_solve_zero_t(
        &model,
        &TemperatureSchedule::default(),
        &BhfOptions::default(),
    )
    .unwrap();
    assert!(
        (pure.energy() - mixed.energy()).abs() <= 1e-5,
        "{} vs {}",
        pure.energy(),
        mixed.energy()
    );
    let eig = bdg_diagonalize(&bhf_effective(&pure.gpdm, &model).unwrap()).unwrap();
    assert_eq!(eig.values.len(), 8);
}
