//! Necessary conditions for representability of reduced density matrices:
//! positivity of the generalized 2-RDM, the fermion correlation
//! inequality, trace identities and the two-body structure of Slater
//! determinants.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, herm_fn, hermitian_part, kron, trace, trace_product, CMat, HermEig};
use crate::oracle::{generalized_two_rdm, one_rdm, two_rdm, FockDensityMatrix};
use crate::quasifree::{mixing_vectors, phase_average_state, realize_quasifree, GOnePdm};
use crate::tensor::exchange_matrix;

/// Pass threshold for eigenvalue and slack checks.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Pass threshold for trace identities.
pub const TRACE_TOL: f64 = 1e-10;

/// `γ⁽¹⁾` on `C^M`, `γ⁽²⁾` on `C^M ⊗ C^M` (pair index `i·M + j`) and,
/// optionally, the generalized `Γ⁽²⁾` on `C^{2M} ⊗ C^{2M}`.
#[derive(Debug, Clone)]
pub struct RdmPair {
    pub gamma1: CMat,
    pub gamma2: CMat,
    pub big_gamma2: Option<CMat>,
}

impl RdmPair {
    pub fn new(gamma1: CMat, gamma2: CMat, big_gamma2: Option<CMat>) -> Result<Self> {
        let m = gamma1.nrows();
        if gamma1.shape() != (m, m) || gamma2.shape() != (m * m, m * m) {
            return Err(Error::Shape(format!(
                "γ1 is {:?} and γ2 is {:?}",
                gamma1.shape(),
                gamma2.shape()
            )));
        }
        if let Some(g) = &big_gamma2 {
            let d = 4 * m * m;
            if g.shape() != (d, d) {
                return Err(Error::Shape(format!(
                    "Γ2 must be {d}x{d}, got {:?}",
                    g.shape()
                )));
            }
        }
        Ok(Self {
            gamma1,
            gamma2,
            big_gamma2,
        })
    }

    /// All reduced matrices of an oracle state.
    pub fn from_state(rho: &FockDensityMatrix) -> Self {
        Self {
            gamma1: one_rdm(rho),
            gamma2: two_rdm(rho),
            big_gamma2: Some(generalized_two_rdm(rho)),
        }
    }

    pub fn modes(&self) -> usize {
        self.gamma1.nrows()
    }
}

/// Smallest eigenvalue of the Hermitian part of `Γ⁽²⁾`; GPQ passes iff it
/// is at least `−1e−9`.
pub fn gpq_check(big_gamma2: &CMat) -> f64 {
    HermEig::new(&hermitian_part(big_gamma2)).min()
}

pub fn gpq_passes(min_eigenvalue: f64) -> bool {
    min_eigenvalue >= -POSITIVITY_TOL
}

/// One-body shadow of GPQ: `min(λ_min(Γ), λ_min(1 − Γ))`.
pub fn gpdm_positivity(gpdm: &GOnePdm) -> f64 {
    let eig = HermEig::new(gpdm.matrix());
    eig.min().min(1.0 - eig.max())
}

/// `(1 − Ex)(γ ⊗ γ)`.
pub fn antisymmetrized_square(gamma: &CMat) -> CMat {
    let m = gamma.nrows();
    let gg = kron(gamma, gamma);
    &gg - exchange_matrix(m) * &gg
}

fn projection_residual(p: &CMat) -> f64 {
    let herm = (p - p.adjoint()).norm();
    let idem = (p * p - p).norm();
    herm.max(idem)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorrelationBound {
    /// `Tr[(P ⊗ P) γ⁽²⁾]`.
    pub lhs: f64,
    /// `Tr[(P⊗P)(1 − Ex)(γ⊗γ)] − Tr[Pγ]·min{1, 9 Tr[P(γ − γ²)^{1/2}]}`.
    pub rhs: f64,
    /// The `Tr[Pγ]·min{…}` correction.
    pub correction: f64,
    pub slack: f64,
}

/// Both sides of the fermion correlation inequality for an orthogonal
/// projection `P`.
pub fn correlation_inequality(gamma1: &CMat, gamma2: &CMat, p: &CMat) -> Result<CorrelationBound> {
    let m = gamma1.nrows();
    if p.shape() != (m, m) || gamma2.shape() != (m * m, m * m) {
        return Err(Error::Shape("P, γ1 and γ2 dimensions disagree".into()));
    }
    if projection_residual(p) > 1e-8 {
        return Err(Error::Domain(format!(
            "P is not an orthogonal projection (residual {:.2e})",
            projection_residual(p)
        )));
    }
    let pp = kron(p, p);
    let lhs = trace_product(&pp, gamma2).re;
    let main = trace_product(&pp, &antisymmetrized_square(gamma1)).re;
    let g = hermitian_part(gamma1);
    let root = herm_fn(&(&g - &g * &g), |x| x.max(0.0).sqrt());
    let fluct = trace_product(p, &root).re;
    let correction = trace_product(p, &g).re * (9.0 * fluct).min(1.0);
    let rhs = main - correction;
    Ok(CorrelationBound {
        lhs,
        rhs,
        correction,
        slack: lhs - rhs,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceIdentities {
    pub mean_number: f64,
    /// `|Tr γ⁽¹⁾ − ⟨N̂⟩|`.
    pub one_body: f64,
    /// `|Tr γ⁽²⁾ − ⟨N̂² − N̂⟩|`.
    pub two_body: f64,
    /// `‖γ⁽¹⁾ − (N−1)⁻¹ Tr₂ γ⁽²⁾‖_F` for states of fixed `N ≥ 2`.
    pub partial_trace: Option<f64>,
}

impl TraceIdentities {
    pub fn worst(&self) -> f64 {
        self.one_body
            .max(self.two_body)
            .max(self.partial_trace.unwrap_or(0.0))
    }

    pub fn passes(&self) -> bool {
        self.worst() <= TRACE_TOL
    }
}

/// `(N−1)⁻¹ Σ_j γ⁽²⁾[(i, j), (k, j)]`.
pub fn partial_trace_one_body(gamma2: &CMat, m: usize, n: usize) -> Result<CMat> {
    if n < 2 {
        return Err(Error::Domain(
            "partial-trace reconstruction needs N ≥ 2".into(),
        ));
    }
    let scale = 1.0 / (n - 1) as f64;
    Ok(CMat::from_fn(m, m, |i, k| {
        (0..m)
            .map(|j| gamma2[(i * m + j, k * m + j)])
            .sum::<crate::linalg::C64>()
            * scale
    }))
}

pub fn trace_identities(rho: &FockDensityMatrix, pair: &RdmPair) -> Result<TraceIdentities> {
    let m = pair.modes();
    if rho.basis().modes() != m {
        return Err(Error::Shape(
            "state and RDMs have different mode counts".into(),
        ));
    }
    let (n1, n2) = rho.number_moments();
    let partial_trace = match rho.fixed_particle_number() {
        Some(n) if n >= 2 => {
            let rebuilt = partial_trace_one_body(&pair.gamma2, m, n)?;
            Some((&pair.gamma1 - rebuilt).norm())
        }
        _ => None,
    };
    Ok(TraceIdentities {
        mean_number: n1,
        one_body: (trace(&pair.gamma1).re - n1).abs(),
        two_body: (trace(&pair.gamma2).re - (n2 - n1)).abs(),
        partial_trace,
    })
}

/// Builds the Slater determinant of the projection `γ` in the oracle and
/// returns `‖γ⁽²⁾ − (1 − Ex)(γ ⊗ γ)‖_F`.
pub fn slater_structure_check(gamma: &CMat) -> Result<f64> {
    let m = gamma.nrows();
    let residual = projection_residual(gamma);
    if residual > 1e-8 {
        return Err(Error::Domain(format!(
            "γ is not a projection (residual {residual:.2e})"
        )));
    }
    let n = trace(gamma).re.round() as usize;
    if n < 2 {
        return Err(Error::Domain(format!(
            "Slater structure needs N ≥ 2, got {n}"
        )));
    }
    if m == 0 {
        return Err(Error::Shape("empty one-particle space".into()));
    }
    let rho = realize_quasifree(&GOnePdm::from_one_pdm(gamma))?;
    Ok((two_rdm(&rho) - antisymmetrized_square(gamma)).norm())
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseAverageDominance {
    /// `λ_min((1 − Ex)(γ ⊗ γ) − γ⁽²⁾)` for the phase-averaged state.
    pub min_eigenvalue: f64,
    /// `‖γ⁽¹⁾_{ρ_av} − γ‖_F`.
    pub one_body_error: f64,
}

/// Two-body dominance for the phase-averaged state built from the
/// occupations `λ` in the orthonormal basis `f` (columns).
pub fn phase_average_dominance(lambda: &[f64], f: &CMat) -> Result<PhaseAverageDominance> {
    let g = mixing_vectors(lambda)?;
    let rho = phase_average_state(lambda, f, &g)?;
    let gamma =
        f * CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            lambda.len(),
            lambda.iter().map(|&x| c(x)),
        )) * f.adjoint();
    let gamma1 = one_rdm(&rho);
    let diff = hermitian_part(&(antisymmetrized_square(&gamma1) - two_rdm(&rho)));
    Ok(PhaseAverageDominance {
        min_eigenvalue: HermEig::new(&diff).min(),
        one_body_error: (gamma1 - gamma).norm(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RdmCheckReport {
    pub gpq_min_eigenvalue: Option<f64>,
    pub trace: Option<TraceIdentities>,
    /// Smallest slack over the supplied projections.
    pub correlation_min_slack: Option<f64>,
    pub passed: bool,
}

/// Runs GPQ, trace identities (when `rho` is given) and the correlation
/// inequality for every projection in `projections`.
pub fn check_pair(
    pair: &RdmPair,
    rho: Option<&FockDensityMatrix>,
    projections: &[CMat],
) -> Result<RdmCheckReport> {
    let gpq = pair.big_gamma2.as_ref().map(gpq_check);
    let trace = rho.map(|r| trace_identities(r, pair)).transpose()?;
    let mut slack: Option<f64> = None;
    for p in projections {
        let s = correlation_inequality(&pair.gamma1, &pair.gamma2, p)?.slack;
        slack = Some(slack.map_or(s, |x| x.min(s)));
    }
    let passed = gpq.is_none_or(gpq_passes)
        && trace.as_ref().is_none_or(|t| t.passes())
        && slack.is_none_or(|s| s >= -POSITIVITY_TOL);
    Ok(RdmCheckReport {
        gpq_min_eigenvalue: gpq,
        trace,
        correlation_min_slack: slack,
        passed,
    })
}

/// Orthogonal projection onto the span of `k` random Gaussian vectors.
pub fn random_projection<R: rand::Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> CMat {
    let a = crate::linalg::random_gaussian(m, k.min(m), rng);
    let cols = crate::linalg::orthonormal_columns(&a, 1e-10);
    let mut p = CMat::zeros(m, m);
    for v in cols {
        p += &v * v.adjoint();
    }
    p
}

#[cfg(test)]
mod tests;
