use crate::error::{Error, Result};
use crate::linalg::{entropy_term, CMat, HermEig};

const SUPPORT_TOL: f64 = 1e-12;

/// `S[ρ] = -Tr ρ ln ρ`.
pub fn von_neumann(rho: &CMat) -> f64 {
    HermEig::new(rho)
        .values
        .iter()
        .map(|&p| entropy_term(p))
        .sum()
}

/// `S[ρ, σ] = Tr ρ (ln ρ - ln σ)`; infinite when `ker σ ⊄ ker ρ`.
pub fn relative_entropy(rho: &CMat, sigma: &CMat) -> Result<f64> {
    let er = HermEig::new(rho);
    let es = HermEig::new(sigma);
    let mut log_sigma_part = 0.0;
    for (k, &s) in es.values.iter().enumerate() {
        let v = es.vectors.column(k);
        let weight = (v.adjoint() * rho * v)[(0, 0)].re;
        if s <= SUPPORT_TOL {
            if weight > 1e-10 {
                return Err(Error::InfiniteRelativeEntropy(format!(
                    "σ has kernel direction with ρ-weight {weight:.3e}"
                )));
            }
            continue;
        }
        log_sigma_part += weight * s.ln();
    }
    let neg_entropy: f64 = -er.values.iter().map(|&p| entropy_term(p)).sum::<f64>();
    Ok((neg_entropy - log_sigma_part).max(0.0))
}

pub fn entropies(rho: &CMat, sigma: Option<&CMat>) -> Result<(f64, Option<f64>)> {
    let s = von_neumann(rho);
    let rel = match sigma {
        Some(sig) => Some(relative_entropy(rho, sig)?),
        None => None,
    };
    Ok((s, rel))
}
