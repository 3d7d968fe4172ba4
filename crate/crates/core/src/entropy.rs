//! Classical and quantum divergences in nats.

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::{self, CMat};
use crate::pmf::JointPmf;
use crate::state::{self, DensityOperator, LocalPvm, PvmBasis};

/// Negative outcome weights down to this value are rounding noise.
pub const CLAMP_TOL: f64 = 1e-12;

/// `Σ p log(p/q)`, with `0 log(0/q) = 0` and `+∞` when `p > 0 = q`.
pub fn kl(p: &[f64], q: &[f64]) -> Result<ExtReal> {
    if p.len() != q.len() {
        return Err(Error::dim(format!(
            "pmfs have lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a < 0.0 || b < 0.0 {
            return Err(Error::invalid("kl arguments must be nonnegative"));
        }
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(ExtReal::Infinite);
        }
        acc += a * (a / b).ln();
    }
    Ok(ExtReal::Finite(acc))
}

pub fn kl_joint(p: &JointPmf, q: &JointPmf) -> Result<ExtReal> {
    if p.shape() != q.shape() {
        return Err(Error::dim(format!(
            "pmf shapes {:?} and {:?} differ",
            p.shape(),
            q.shape()
        )));
    }
    kl(p.as_slice(), q.as_slice())
}

/// Umegaki relative entropy `tr ρ (log ρ − log σ)`.
///
/// `sigma` only needs to be PSD; it is not required to have unit trace. The
/// support of `sigma` is taken at `rho`'s eigenvalue cutoff.
pub fn umegaki(rho: &DensityOperator, sigma: &CMat) -> Result<ExtReal> {
    if sigma.nrows() != rho.dim() || sigma.ncols() != rho.dim() {
        return Err(Error::dim(format!(
            "rho has dimension {}, sigma is {}x{}",
            rho.dim(),
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let cutoff = rho.eig_cutoff();
    if !state::support_contained_matrix(rho.matrix(), sigma, cutoff) {
        return Ok(ExtReal::Infinite);
    }
    let neg_entropy: f64 = rho
        .eigenvalues()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum();
    let e = linalg::eigh(sigma);
    let weights = PvmBasis::from_unitary_unchecked(e.vectors).outcome_weights(rho.matrix());
    let cross: f64 = e
        .values
        .iter()
        .zip(&weights)
        .filter(|(&mu, _)| mu > cutoff)
        .map(|(&mu, &w)| w * mu.ln())
        .sum();
    Ok(ExtReal::Finite(neg_entropy - cross))
}

/// Outcome pmf `⟨v|m|v⟩` over the basis vectors, with rounding negatives
/// clamped to zero.
pub fn outcome_pmf(m: &CMat, basis: &PvmBasis) -> Result<Vec<f64>> {
    if m.nrows() != basis.dim() {
        return Err(Error::dim(format!(
            "operator has dimension {}, basis {}",
            m.nrows(),
            basis.dim()
        )));
    }
    basis
        .outcome_weights(m)
        .into_iter()
        .map(|w| {
            if w >= 0.0 {
                Ok(w)
            } else if w >= -CLAMP_TOL {
                Ok(0.0)
            } else {
                Err(Error::invalid(format!("negative outcome probability {w:.3e}")))
            }
        })
        .collect()
}

/// Relative entropy of the outcome distributions of a rank-one projective
/// measurement.
pub fn measured_re(rho: &DensityOperator, sigma: &CMat, basis: &PvmBasis) -> Result<ExtReal> {
    if sigma.nrows() != rho.dim() {
        return Err(Error::dim("rho and sigma dimensions differ"));
    }
    kl(&outcome_pmf(rho.matrix(), basis)?, &outcome_pmf(sigma, basis)?)
}

/// Measured relative entropy under a local product measurement on
/// `(AB)^{⊗m}`; the states are given in interleaved order.
pub fn measured_re_local(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    pvm: &LocalPvm,
) -> Result<ExtReal> {
    let p = crate::pvm_opt::induced_pmf(rho, pvm)?;
    let q = crate::pvm_opt::induced_pmf(sigma, pvm)?;
    kl_joint(&p, &q)
}

/// Kubo–Ando geometric mean `σ0^{1/2} (σ0^{-1/2} σ1 σ0^{-1/2})^{1/2} σ0^{1/2}`.
pub fn geometric_mean(sigma0: &CMat, sigma1: &CMat, cutoff: f64) -> Result<CMat> {
    if sigma0.nrows() != sigma1.nrows() || sigma0.nrows() != sigma0.ncols() {
        return Err(Error::dim("geometric mean needs square matrices of equal size"));
    }
    let e0 = linalg::eigh(sigma0);
    let min = e0.values.last().copied().unwrap_or(0.0);
    if min <= cutoff {
        return Err(Error::precondition(format!(
            "first argument must be positive definite (min eigenvalue {min:.3e})"
        )));
    }
    let root: Vec<_> = e0.values.iter().map(|&v| linalg::c(v.sqrt())).collect();
    let inv_root: Vec<_> = e0.values.iter().map(|&v| linalg::c(1.0 / v.sqrt())).collect();
    let s = linalg::from_spectrum(&e0.vectors, &root);
    let si = linalg::from_spectrum(&e0.vectors, &inv_root);
    let inner = linalg::symmetrize(&(&si * sigma1 * &si));
    let inner_root = linalg::hermitian_fn_on_support(&inner, 0.0, f64::sqrt);
    Ok(linalg::symmetrize(&(&s * inner_root * &s)))
}

/// `h_b(p) = −p log p − (1 − p) log(1 − p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("binary entropy argument {p} outside [0, 1]")));
    }
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// Shannon entropy of a pmf vector.
pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum()
}
