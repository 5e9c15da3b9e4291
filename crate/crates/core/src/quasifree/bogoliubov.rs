use rand::Rng;

use super::{j_conj, j_vec, validate_gpdm, GOnePdm};
use crate::error::{Error, Result};
use crate::linalg::{
    c, conj, expm_anti_hermitian, frobenius, identity, max_abs, random_hermitian, CMat, CVec,
    HermEig, C64, I,
};

/// `W = [[u, v̄], [v, ū]]`, a unitary on `C^{2M}` commuting with `J`.
///
/// Column `ℓ` of `[u; v]` is the generalized orbital `x_ℓ` of the
/// quasiparticle creator `d†_ℓ = A*(x_ℓ) = Σ_k u_kℓ c†_k + v_kℓ c_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovMap {
    pub u: CMat,
    pub v: CMat,
}

impl BogoliubovMap {
    pub fn identity(m: usize) -> Self {
        Self {
            u: identity(m),
            v: CMat::zeros(m, m),
        }
    }

    /// Read `u`, `v` off the left half of `w` after checking `JW = WJ`.
    pub fn from_matrix(w: &CMat) -> Result<Self> {
        let n = w.nrows();
        if !w.is_square() || n % 2 == 1 {
            return Err(Error::Shape("Bogoliubov map must be 2M x 2M".into()));
        }
        let res = frobenius(&(j_conj(w) - w));
        if res > 1e-8 {
            return Err(Error::Validation(format!(
                "map does not commute with J ({res:.3e})"
            )));
        }
        let m = n / 2;
        Ok(Self {
            u: w.view((0, 0), (m, m)).into_owned(),
            v: w.view((m, 0), (m, m)).into_owned(),
        })
    }

    pub fn modes(&self) -> usize {
        self.u.nrows()
    }

    pub fn matrix(&self) -> CMat {
        let m = self.modes();
        let mut w = CMat::zeros(2 * m, 2 * m);
        w.view_mut((0, 0), (m, m)).copy_from(&self.u);
        w.view_mut((m, 0), (m, m)).copy_from(&self.v);
        w.view_mut((0, m), (m, m)).copy_from(&conj(&self.v));
        w.view_mut((m, m), (m, m)).copy_from(&conj(&self.u));
        w
    }

    /// Generalized orbital `x_ℓ = (u_ℓ; v_ℓ)`.
    pub fn orbital(&self, l: usize) -> CVec {
        let m = self.modes();
        let mut x = CVec::zeros(2 * m);
        x.rows_mut(0, m).copy_from(&self.u.column(l));
        x.rows_mut(m, m).copy_from(&self.v.column(l));
        x
    }

    /// `‖W†W − 1‖_F`.
    pub fn unitarity_residual(&self) -> f64 {
        let w = self.matrix();
        frobenius(&(w.adjoint() * &w - identity(w.nrows())))
    }

    /// `Tr v†v`, finite here but recorded.
    pub fn shale_stinespring(&self) -> f64 {
        frobenius(&self.v).powi(2)
    }

    /// `W† Γ W`.
    pub fn conjugate(&self, gpdm: &GOnePdm) -> GOnePdm {
        let w = self.matrix();
        gpdm.map(|g| w.adjoint() * g * &w)
    }
}

/// `e^{iK}` for a random `J`-odd Hermitian `K`.
pub fn random_bogoliubov<R: Rng + ?Sized>(m: usize, rng: &mut R) -> BogoliubovMap {
    let a = random_hermitian(2 * m, rng);
    let k = (&a - j_conj(&a)) * c(0.5);
    let w = expm_anti_hermitian(&(k * I));
    BogoliubovMap::from_matrix(&w).expect("e^{iK} commutes with J")
}

/// `W diag(λ, 1 − λ) W†` with uniform random `λ` and random `W`.
pub fn random_gpdm<R: Rng + ?Sized>(m: usize, rng: &mut R) -> GOnePdm {
    let lambda: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let w = random_bogoliubov(m, rng);
    gpdm_from_spectrum(&w, &lambda)
}

pub(crate) fn gpdm_from_spectrum(w: &BogoliubovMap, lambda: &[f64]) -> GOnePdm {
    let m = w.modes();
    let d = CMat::from_diagonal(&CVec::from_fn(2 * m, |a, _| {
        c(if a < m {
            lambda[a]
        } else {
            1.0 - lambda[a - m]
        })
    }));
    let wm = w.matrix();
    GOnePdm::from_matrix(&wm * d * wm.adjoint())
        .expect("square")
        .symmetrized()
}

/// A `J`-compatible eigenbasis of a `J`-odd Hermitian `K`
/// (`JKJ = −K`): `W†KW = diag(κ, −κ)` with every `κ_ℓ ≤ 0`.
#[derive(Debug, Clone)]
pub struct JEigenbasis {
    pub map: BogoliubovMap,
    /// `κ_ℓ ≤ 0`, most negative first.
    pub values: Vec<f64>,
    /// Number of pairs `(x, Jx)` taken from the `|κ| ≤ tol` cluster.
    pub zero_modes: usize,
}

impl JEigenbasis {
    /// Projection onto the first-block columns: `W diag(1, 0) W†`. For a
    /// Hamiltonian this is `1_neg`, with any zero modes split isotropically.
    pub fn negative_projection(&self) -> GOnePdm {
        gpdm_from_spectrum(&self.map, &vec![1.0; self.map.modes()])
    }
}

/// Real (Jr = r) orthonormal basis of a `J`-invariant subspace given by an
/// orthonormal frame.
fn j_real_basis(frame: &[CVec]) -> Vec<CVec> {
    let n = frame.first().map_or(0, |f| f.len());
    let dim = frame.len();
    let mut p0 = CMat::zeros(n, n);
    for f in frame {
        p0 += f * f.adjoint();
    }
    let p0 = (&p0 + j_conj(&p0)) * c(0.5);
    let mut out: Vec<CVec> = Vec::with_capacity(dim);
    'outer: for a in 0..n {
        let y = p0.column(a).into_owned();
        let jy = j_vec(&y);
        for cand in [&y + &jy, (&y - &jy) * I] {
            let mut r = cand;
            for _ in 0..2 {
                for q in &out {
                    let ip = q.dotc(&r).re;
                    r -= q * c(ip);
                }
            }
            r = (&r + j_vec(&r)) * c(0.5);
            let nr = r.norm();
            if nr > 1e-6 {
                out.push(r / c(nr));
                if out.len() == dim {
                    break 'outer;
                }
            }
        }
    }
    out
}

pub fn j_adapted_eigenbasis(k: &CMat, zero_tol: f64) -> JEigenbasis {
    let n = k.nrows();
    let m = n / 2;
    let eig = HermEig::new(k);
    let n_neg = eig.values.iter().filter(|&&x| x < -zero_tol).count();
    let n_pos = eig.values.iter().filter(|&&x| x > zero_tol).count();
    let p = n_neg.min(n_pos).min(m);

    let mut xs: Vec<CVec> = (0..p).map(|i| eig.vectors.column(i).into_owned()).collect();
    let zero_frame: Vec<CVec> = (p..n - p)
        .map(|i| eig.vectors.column(i).into_owned())
        .collect();
    let reals = j_real_basis(&zero_frame);
    let zero_modes = reals.len() / 2;
    for pair in reals.chunks(2) {
        if let [r1, r2] = pair {
            xs.push((r1 + r2 * I) * c(std::f64::consts::FRAC_1_SQRT_2));
        }
    }
    debug_assert_eq!(xs.len(), m, "J-adapted basis must have M columns");

    let mut u = CMat::zeros(m, m);
    let mut v = CMat::zeros(m, m);
    let mut values = Vec::with_capacity(m);
    for (l, x) in xs.iter().enumerate() {
        // fix the phase: largest component real positive
        let (imax, _) = x.iter().enumerate().fold((0, 0.0), |acc, (i, z)| {
            if z.norm() > acc.1 + 1e-12 {
                (i, z.norm())
            } else {
                acc
            }
        });
        let phase = if x[imax].norm() > 0.0 {
            x[imax].conj() / x[imax].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let x = x * phase;
        u.set_column(l, &x.rows(0, m));
        v.set_column(l, &x.rows(m, m));
        values.push((x.adjoint() * k * &x)[(0, 0)].re.min(0.0));
    }
    JEigenbasis {
        map: BogoliubovMap { u, v },
        values,
        zero_modes,
    }
}

/// Diagonalize a `J`-odd Hermitian (BdG) Hamiltonian on `C^{2M}`.
pub fn bdg_diagonalize(h: &CMat) -> Result<JEigenbasis> {
    if !h.is_square() || h.nrows() % 2 == 1 {
        return Err(Error::Shape("BdG Hamiltonian must be 2M x 2M".into()));
    }
    let scale = max_abs(h).max(1.0);
    let odd = frobenius(&(j_conj(h) + h));
    if odd > 1e-8 * scale {
        return Err(Error::Validation(format!(
            "Hamiltonian is not J-odd ({odd:.3e})"
        )));
    }
    Ok(j_adapted_eigenbasis(h, 1e-9 * scale))
}

#[derive(Debug, Clone)]
pub struct BlockDiagonalization {
    pub map: BogoliubovMap,
    pub lambda: Vec<f64>,
    /// `‖W diag(λ, 1 − λ) W† − Γ‖_F`.
    pub residual: f64,
    pub warning: Option<String>,
}

/// `W†ΓW = diag(λ, 1 − λ)`.
///
/// Number-conserving `Γ` is handled through the eigenbasis of `γ` (so a
/// diagonal `γ` gives `W = 1`); otherwise `λ_ℓ ≤ ½`.
pub fn block_diagonalize(gpdm: &GOnePdm) -> Result<BlockDiagonalization> {
    let diag = validate_gpdm(gpdm);
    if !diag.is_valid() {
        return Err(Error::Validation(diag.violations.join("; ")));
    }
    let m = gpdm.modes();
    let gamma = gpdm.gamma();
    let (map, lambda) = if max_abs(&gpdm.alpha()) < 1e-13 {
        let off_diag = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| gamma[(i, j)].norm())
            .fold(0.0, f64::max);
        if off_diag == 0.0 {
            (
                BogoliubovMap::identity(m),
                (0..m).map(|i| gamma[(i, i)].re).collect(),
            )
        } else {
            let eig = HermEig::new(&gamma);
            (
                BogoliubovMap {
                    u: eig.vectors.clone(),
                    v: CMat::zeros(m, m),
                },
                eig.values.clone(),
            )
        }
    } else {
        let shifted = gpdm.matrix() - identity(2 * m) * c(0.5);
        let jeb = j_adapted_eigenbasis(&shifted, 1e-9);
        let lambda = jeb.values.iter().map(|k| k + 0.5).collect();
        (jeb.map, lambda)
    };
    let lambda: Vec<f64> = lambda.into_iter().map(|x: f64| x.clamp(0.0, 1.0)).collect();
    let rebuilt = gpdm_from_spectrum(&map, &lambda);
    let residual = frobenius(&(rebuilt.matrix() - gpdm.matrix()));
    let near_half = lambda
        .iter()
        .filter(|&&x| (x - 0.5).abs() < 1e-6 && (x - 0.5).abs() > 0.0)
        .count();
    let warning = (near_half > 0 && residual > 1e-10).then(|| {
        format!("{near_half} near-degenerate λ ≈ ½ pair(s); reconstruction residual {residual:.3e}")
    });
    Ok(BlockDiagonalization {
        map,
        lambda,
        residual,
        warning,
    })
}
