//! Quantum marginal projection by dual ascent.

use serde::{Deserialize, Serialize};

use super::{QuantumMarginals, SolverDiagnostics};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, Keep};
use crate::state::{self, DensityOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QprojectConfig {
    /// Trace-norm tolerance on the marginals.
    pub tol: f64,
    pub max_iters: usize,
    /// Record the dual objective after every accepted step.
    pub record_history: bool,
}

impl Default for QprojectConfig {
    fn default() -> Self {
        QprojectConfig {
            tol: 1e-9,
            max_iters: 50_000,
            record_history: false,
        }
    }
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;
const MAX_STEP: f64 = 1e8;

/// `argmin D(ρ̂‖σ)` over states on `A ⊗ B` with reduced states `c`.
pub fn qproject(
    sigma: &DensityOperator,
    c: &QuantumMarginals,
    dims: (usize, usize),
    tol: f64,
) -> Result<(DensityOperator, SolverDiagnostics)> {
    qproject_with(
        sigma,
        c,
        dims,
        &QprojectConfig {
            tol,
            ..QprojectConfig::default()
        },
    )
}

pub fn qproject_with(
    sigma: &DensityOperator,
    c: &QuantumMarginals,
    dims: (usize, usize),
    cfg: &QprojectConfig,
) -> Result<(DensityOperator, SolverDiagnostics)> {
    let (d_a, d_b) = dims;
    if sigma.dim() != d_a * d_b || c.dims() != dims {
        return Err(Error::dim(format!(
            "sigma has dimension {}, targets {:?}, factorization {:?}",
            sigma.dim(),
            c.dims(),
            dims
        )));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let product = linalg::kron(c.rho_a.matrix(), c.rho_b.matrix());
    if !state::support_contained_matrix(&product, sigma.matrix(), sigma.eig_cutoff()) {
        return Err(Error::precondition(
            "target product state is not supported inside supp(sigma)",
        ));
    }
    let model = Model::new(sigma, c, dims);

    let mut la = CMat::zeros(d_a, d_a);
    let mut lb = CMat::zeros(d_b, d_b);
    let mut cur = model.eval(&la, &lb);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut history = Vec::new();
    if cfg.record_history {
        history.push(cur.dual);
    }
    while iterations < cfg.max_iters {
        if cur.residual <= cfg.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let slope = linalg::trace_product_re(&cur.grad_a, &cur.grad_a)
            + linalg::trace_product_re(&cur.grad_b, &cur.grad_b);
        let slack = 4.0 * f64::EPSILON * cur.dual.abs().max(1.0);
        let mut t = step;
        let accepted = loop {
            let na = &la + cur.grad_a.scale(t);
            let nb = &lb + cur.grad_b.scale(t);
            let cand = model.eval(&na, &nb);
            if cand.dual.is_finite() && cand.dual >= cur.dual + ARMIJO * t * slope - slack {
                break Some((na, nb, cand, t));
            }
            t *= 0.5;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((na, nb, next, t)) = accepted else {
            break;
        };
        let sa = cur.grad_a.scale(t);
        let sb = cur.grad_b.scale(t);
        let ya = &next.grad_a - &cur.grad_a;
        let yb = &next.grad_b - &cur.grad_b;
        let ss = t * t * slope;
        let sy = linalg::trace_product_re(&sa, &ya) + linalg::trace_product_re(&sb, &yb);
        step = if sy < 0.0 { ss / -sy } else { 2.0 * t };
        step = step.clamp(MIN_STEP, MAX_STEP);
        la = na;
        lb = nb;
        cur = next;
        if cfg.record_history {
            history.push(cur.dual);
        }
    }
    if cur.residual <= cfg.tol {
        converged = true;
    }
    let primal = linalg::trace_product_re(&cur.tau_a, &la)
        + linalg::trace_product_re(&cur.tau_b, &lb)
        - cur.log_z;
    let tau = DensityOperator::with_cutoff(cur.tau, sigma.eig_cutoff())?;
    Ok((
        tau,
        SolverDiagnostics {
            iterations,
            marginal_residual: cur.residual,
            objective: primal,
            converged,
            dual_value: Some(cur.dual),
            duality_gap: Some((primal - cur.dual).abs()),
            history,
        },
    ))
}

/// The exponential family restricted to `supp σ` through the isometry `V`.
struct Model<'a> {
    v: CMat,
    log_sigma: Vec<f64>,
    d_a: usize,
    d_b: usize,
    target: &'a QuantumMarginals,
}

struct Point {
    dual: f64,
    log_z: f64,
    tau: CMat,
    tau_a: CMat,
    tau_b: CMat,
    grad_a: CMat,
    grad_b: CMat,
    residual: f64,
}

impl<'a> Model<'a> {
    fn new(sigma: &DensityOperator, target: &'a QuantumMarginals, dims: (usize, usize)) -> Self {
        let e = sigma.raw_spectrum();
        let cutoff = sigma.eig_cutoff();
        let rank = e.values.iter().filter(|&&v| v > cutoff).count();
        let v = e.vectors.columns(0, rank).into_owned();
        let log_sigma = e.values[..rank].iter().map(|v| v.ln()).collect();
        Model {
            v,
            log_sigma,
            d_a: dims.0,
            d_b: dims.1,
            target,
        }
    }

    fn eval(&self, la: &CMat, lb: &CMat) -> Point {
        let k = linalg::kron(la, &linalg::identity(self.d_b))
            + linalg::kron(&linalg::identity(self.d_a), lb);
        let mut h = self.v.adjoint() * k * &self.v;
        for (i, &l) in self.log_sigma.iter().enumerate() {
            h[(i, i)] += c(l);
        }
        let e = linalg::eigh(&h);
        let top = e.values[0];
        let weights: Vec<f64> = e.values.iter().map(|&v| (v - top).exp()).collect();
        let z: f64 = weights.iter().sum();
        let log_z = top + z.ln();
        let diag: Vec<_> = weights.iter().map(|&w| c(w / z)).collect();
        let tau_r = linalg::from_spectrum(&e.vectors, &diag);
        let tau = linalg::symmetrize(&(&self.v * tau_r * self.v.adjoint()));
        let tau_a = linalg::partial_trace_matrix(&tau, self.d_a, self.d_b, Keep::A)
            .expect("factorization checked");
        let tau_b = linalg::partial_trace_matrix(&tau, self.d_a, self.d_b, Keep::B)
            .expect("factorization checked");
        let grad_a = self.target.rho_a.matrix() - &tau_a;
        let grad_b = self.target.rho_b.matrix() - &tau_b;
        let residual =
            linalg::trace_norm_hermitian(&grad_a) + linalg::trace_norm_hermitian(&grad_b);
        let dual = linalg::trace_product_re(self.target.rho_a.matrix(), la)
            + linalg::trace_product_re(self.target.rho_b.matrix(), lb)
            - log_z;
        Point {
            dual,
            log_z,
            tau,
            tau_a,
            tau_b,
            grad_a,
            grad_b,
            residual,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::umegaki;
    use crate::presets;

    #[test]
    fn product_sigma_gives_product_minimizer() {
        let sa = DensityOperator::diagonal(&[0.3, 0.7]).unwrap();
        let sb = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let sigma = state::tensor_product(&sa, &sb).unwrap();
        let ra = DensityOperator::diagonal(&[0.6, 0.4]).unwrap();
        let rb = DensityOperator::diagonal(&[0.5, 0.5]).unwrap();
        let c = QuantumMarginals::new(ra.clone(), rb.clone());
        let (tau, d) = qproject(&sigma, &c, (2, 2), 1e-10).unwrap();
        assert!(d.converged);
        let closed = umegaki(&ra, sa.matrix()).unwrap().to_f64()
            + umegaki(&rb, sb.matrix()).unwrap().to_f64();
        assert!((d.objective - closed).abs() < 1e-8);
        let prod = linalg::kron(ra.matrix(), rb.matrix());
        assert!(linalg::trace_norm_hermitian(&(tau.matrix() - prod)) < 1e-8);
    }

    #[test]
    fn feasible_sigma_is_its_own_projection() {
        let sigma = presets::isotropic(0.4, 2).unwrap();
        let a = state::partial_trace(&sigma, (2, 2), Keep::A).unwrap();
        let b = state::partial_trace(&sigma, (2, 2), Keep::B).unwrap();
        let (_, d) = qproject(&sigma, &QuantumMarginals::new(a, b), (2, 2), 1e-10).unwrap();
        assert_eq!(d.iterations, 0);
        assert!(d.objective.abs() < 1e-12);
    }

    #[test]
    fn unsupported_targets_rejected() {
        let sigma = presets::phi_perp(2).unwrap();
        let half = DensityOperator::maximally_mixed(2).unwrap();
        let c = QuantumMarginals::new(half.clone(), half);
        assert!(matches!(
            qproject(&sigma, &c, (2, 2), 1e-9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn dual_values_increase() {
        let sigma = presets::werner(0.3, 2).unwrap();
        let ra = DensityOperator::diagonal(&[0.9, 0.1]).unwrap();
        let rb = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        let cfg = QprojectConfig {
            record_history: true,
            ..QprojectConfig::default()
        };
        let (_, d) = qproject_with(&sigma, &QuantumMarginals::new(ra, rb), (2, 2), &cfg).unwrap();
        assert!(d.converged);
        for w in d.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        assert!(d.duality_gap.unwrap() < 1e-6);
    }
}
