//! Dense complex linear algebra used throughout the crate.
//!
//! Everything is built on `nalgebra::DMatrix<Complex64>`. Hermitian
//! eigendecompositions are always returned with eigenvalues sorted
//! ascending so that downstream tie-breaking is deterministic.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Sorted Hermitian eigendecomposition `a = v diag(w) v†`.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermEig {
    pub fn new(a: &CMat) -> Self {
        assert!(a.is_square(), "eigendecomposition of a non-square matrix");
        let n = a.nrows();
        if n == 0 {
            return Self {
                values: Vec::new(),
                vectors: CMat::zeros(0, 0),
            };
        }
        let sym = hermitian_part(a);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[i]
                .total_cmp(&eig.eigenvalues[j])
                .then(i.cmp(&j))
        });
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = CMat::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            vectors.set_column(col, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    /// Rebuild `v diag(f(w)) v†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Apply a real function to a Hermitian matrix through its spectrum.
pub fn herm_fn(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    HermEig::new(a).apply(f)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_residual(a: &CMat) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().iter().sum()
}

/// `Tr[a b]` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn from_real(a: &DMatrix<f64>) -> CMat {
    a.map(c)
}

pub fn conj(a: &CMat) -> CMat {
    a.map(|z| z.conj())
}

/// Standard complex Gaussian matrix (independent real/imaginary parts, variance 1/2 each).
pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    hermitian_part(&random_gaussian(n, n, rng))
}

pub fn random_real_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let a = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    from_real(&((&a + a.transpose()) * 0.5))
}

/// Haar-ish random unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = random_gaussian(n, n, rng);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            out[(i, j)] *= phase;
        }
    }
    out
}

/// Orthonormalize the columns of `a` (modified Gram-Schmidt), dropping
/// columns whose residual norm falls below `tol`.
pub fn orthonormal_columns(a: &CMat, tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for j in 0..a.ncols() {
        let mut v: CVec = a.column(j).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let p = b.dotc(&v);
                v -= b * p;
            }
        }
        let n = v.norm();
        if n > tol {
            basis.push(v / c(n));
        }
    }
    basis
}

/// First divided differences of a scalar function on the spectrum, used for
/// derivatives of matrix functions (Daleckii-Krein).
pub fn divided_differences(
    values: &[f64],
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
) -> DMatrix<f64> {
    let n = values.len();
    DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (values[i], values[j]);
        if (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
            (f(a) - f(b)) / (a - b)
        } else {
            df(0.5 * (a + b))
        }
    })
}

/// Stable logistic occupation `1 / (1 + e^{x})`.
pub fn fermi_scalar(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `-x ln x` with `0 ln 0 := 0`; arguments are clamped into `[0, 1]`.
pub fn entropy_term(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// Numerically stable `ln Σ e^{a_i}`.
pub fn log_sum_exp(a: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = a.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Matrix exponential of an anti-Hermitian matrix, via `e^{A} = e^{-i (iA)}`.
pub fn expm_anti_hermitian(a: &CMat) -> CMat {
    let h = a * I;
    let eig = HermEig::new(&h);
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        let phase = C64::from_polar(1.0, -eig.values[j]);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    &scaled * eig.vectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eig_sorted_and_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(6, &mut rng);
        let eig = HermEig::new(&a);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let back = eig.apply(|x| x);
        assert!(frobenius(&(back - &a)) < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(5, &mut rng);
        assert!(frobenius(&(u.adjoint() * &u - identity(5))) < 1e-12);
    }

    #[test]
    fn expm_matches_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = random_hermitian(4, &mut rng).scale(0.1);
        let a = &h * I;
        let e = expm_anti_hermitian(&a);
        let mut series = identity(4);
        let mut term = identity(4);
        for k in 1..30 {
            term = &term * &a / c(k as f64);
            series += &term;
        }
        assert!(frobenius(&(e - series)) < 1e-12);
    }

    #[test]
    fn fermi_limits() {
        assert_eq!(fermi_scalar(0.0), 0.5);
        assert!(fermi_scalar(800.0) < 1e-300);
        assert_eq!(fermi_scalar(-800.0), 1.0);
    }

    #[test]
    fn log_sum_exp_is_stable() {
        let v = log_sum_exp([1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
