//! Classical I-projection by iterative proportional fitting.

use serde::{Deserialize, Serialize};

use super::feasibility::essential_support;
use super::{infeasible, MarginalConstraint, SolverDiagnostics};
use crate::entropy;
use crate::error::{Error, Result};
use crate::pmf::JointPmf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IprojectConfig {
    /// L1 tolerance on the marginals.
    pub tol: f64,
    pub max_iters: usize,
    /// Sweeps between stall checks.
    pub stall_window: usize,
    /// Smallest residual decrease per window that still counts as progress.
    pub stall_decrease: f64,
}

impl Default for IprojectConfig {
    fn default() -> Self {
        IprojectConfig {
            tol: 1e-10,
            max_iters: 100_000,
            stall_window: 1000,
            stall_decrease: 1e-14,
        }
    }
}

/// `argmin D(p̂‖q)` over joint pmfs with marginals `c`.
pub fn iproject(
    q: &JointPmf,
    c: &MarginalConstraint,
    tol: f64,
) -> Result<(JointPmf, SolverDiagnostics)> {
    iproject_with(
        q,
        c,
        &IprojectConfig {
            tol,
            ..IprojectConfig::default()
        },
    )
}

pub fn iproject_with(
    q: &JointPmf,
    c: &MarginalConstraint,
    cfg: &IprojectConfig,
) -> Result<(JointPmf, SolverDiagnostics)> {
    let (rows, cols) = q.shape();
    if c.target_px.len() != rows || c.target_py.len() != cols {
        return Err(Error::dim(format!(
            "targets have lengths {}, {}; q is {rows}x{cols}",
            c.target_px.len(),
            c.target_py.len()
        )));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let px = &c.target_px;
    let py = &c.target_py;
    let Some(keep) = essential_support(px, py, |x, y| q.get(x, y) > 0.0, 1e-12) else {
        let residual = l1(&q.marginal_x(), px) + l1(&q.marginal_y(), py);
        return Err(infeasible(
            "no pmf supported on supp(q) has the target marginals",
            SolverDiagnostics {
                iterations: 0,
                marginal_residual: residual,
                objective: f64::INFINITY,
                converged: false,
                dual_value: None,
                duality_gap: None,
                history: Vec::new(),
            },
        ));
    };

    let mut p: Vec<f64> = q
        .as_slice()
        .iter()
        .zip(&keep)
        .map(|(&v, &k)| if k { v } else { 0.0 })
        .collect();
    let mut residual = f64::INFINITY;
    let mut checkpoint = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=cfg.max_iters {
        iterations = it;
        for x in 0..rows {
            let row = &mut p[x * cols..(x + 1) * cols];
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                let f = px[x] / s;
                row.iter_mut().for_each(|v| *v *= f);
            }
        }
        for y in 0..cols {
            let s: f64 = (0..rows).map(|x| p[x * cols + y]).sum();
            if s > 0.0 {
                let f = py[y] / s;
                (0..rows).for_each(|x| p[x * cols + y] *= f);
            }
        }
        residual = marginal_residual(&p, rows, cols, px, py);
        if residual <= cfg.tol {
            converged = true;
            break;
        }
        if it % cfg.stall_window == 0 {
            if checkpoint - residual < cfg.stall_decrease {
                break;
            }
            checkpoint = residual;
        }
    }
    if !converged {
        return Err(infeasible(
            format!("scaling stalled at residual {residual:.3e}"),
            SolverDiagnostics {
                iterations,
                marginal_residual: residual,
                objective: f64::INFINITY,
                converged: false,
                dual_value: None,
                duality_gap: None,
                history: Vec::new(),
            },
        ));
    }
    let p_hat = JointPmf::from_weights(rows, cols, p)?;
    let objective = entropy::kl_joint(&p_hat, q)?.to_f64();
    let residual = marginal_residual(p_hat.as_slice(), rows, cols, px, py);
    Ok((
        p_hat,
        SolverDiagnostics {
            iterations,
            marginal_residual: residual,
            objective,
            converged,
            dual_value: None,
            duality_gap: None,
            history: Vec::new(),
        },
    ))
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn marginal_residual(p: &[f64], rows: usize, cols: usize, px: &[f64], py: &[f64]) -> f64 {
    let mut r = 0.0;
    for x in 0..rows {
        let s: f64 = p[x * cols..(x + 1) * cols].iter().sum();
        r += (s - px[x]).abs();
    }
    for y in 0..cols {
        let s: f64 = (0..rows).map(|x| p[x * cols + y]).sum();
        r += (s - py[y]).abs();
    }
    r
}

/// Independent minimizer for 2×2 tables over the free cell `t = p̂(0,0)`,
/// by a dense grid followed by golden-section refinement.
pub fn brute_oracle_2x2(q: &JointPmf, c: &MarginalConstraint, grid: usize) -> Result<f64> {
    if q.shape() != (2, 2) || c.target_px.len() != 2 || c.target_py.len() != 2 {
        return Err(Error::dim("brute oracle needs a 2x2 instance"));
    }
    let (a, b) = (c.target_px[0], c.target_py[0]);
    let lo = (a + b - 1.0).max(0.0);
    let hi = a.min(b);
    let fail = |msg: &str| {
        infeasible(
            msg,
            SolverDiagnostics {
                iterations: 0,
                marginal_residual: f64::INFINITY,
                objective: f64::INFINITY,
                converged: false,
                dual_value: None,
                duality_gap: None,
                history: Vec::new(),
            },
        )
    };
    if lo > hi + 1e-15 {
        return Err(fail("empty coupling interval"));
    }
    let hi = hi.max(lo);
    let f = |t: f64| -> f64 {
        let cells = [t, a - t, b - t, 1.0 - a - b + t];
        let mut acc = 0.0;
        for (k, &v) in cells.iter().enumerate() {
            let v = v.max(0.0);
            let w = q.as_slice()[k];
            if v == 0.0 {
                continue;
            }
            if w == 0.0 {
                return f64::INFINITY;
            }
            acc += v * (v / w).ln();
        }
        acc
    };
    let grid = grid.max(2);
    let point = |k: usize| lo + (hi - lo) * k as f64 / grid as f64;
    let (best_k, best) = (0..=grid)
        .map(|k| (k, f(point(k))))
        .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
    if best.is_infinite() {
        return Err(fail("every coupling leaves the support of q"));
    }
    let mut l = point(best_k.saturating_sub(1));
    let mut r = point((best_k + 1).min(grid));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = r - inv_phi * (r - l);
    let mut x2 = l + inv_phi * (r - l);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while r - l > 1e-12 {
        if f1 <= f2 {
            r = x2;
            x2 = x1;
            f2 = f1;
            x1 = r - inv_phi * (r - l);
            f1 = f(x1);
        } else {
            l = x1;
            x1 = x2;
            f1 = f2;
            x2 = l + inv_phi * (r - l);
            f2 = f(x2);
        }
    }
    Ok(best.min(f(0.5 * (l + r))).min(f1).min(f2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn targets(px: &[f64], py: &[f64]) -> MarginalConstraint {
        MarginalConstraint::new(px.to_vec(), py.to_vec()).unwrap()
    }

    #[test]
    fn product_q_with_own_marginals_is_fixed() {
        let q = JointPmf::product(&[0.3, 0.7], &[0.6, 0.4]).unwrap();
        let (p, d) = iproject(&q, &targets(&[0.3, 0.7], &[0.6, 0.4]), 1e-10).unwrap();
        assert!(d.converged);
        assert!(d.objective.abs() < 1e-14);
        for (a, b) in p.as_slice().iter().zip(q.as_slice()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_q_projects_to_product_of_targets() {
        let q = JointPmf::uniform(2, 2).unwrap();
        let c = targets(&[0.7, 0.3], &[0.6, 0.4]);
        let (p, d) = iproject(&q, &c, 1e-10).unwrap();
        let h = |x: f64| -x * x.ln() - (1.0 - x) * (1.0 - x).ln();
        let closed = 4f64.ln() - h(0.7) - h(0.6);
        assert!((d.objective - closed).abs() < 1e-12);
        assert!((d.objective - 0.102_418_4).abs() < 1e-6);
        assert!((p.get(0, 0) - 0.42).abs() < 1e-10);
        let brute = brute_oracle_2x2(&q, &c, 1000).unwrap();
        assert!((brute - closed).abs() < 1e-12);
    }

    #[test]
    fn support_obstruction_is_infeasible() {
        let q = JointPmf::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let err = iproject(&q, &targets(&[0.5, 0.5], &[0.3, 0.7]), 1e-10).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }

    #[test]
    fn brute_oracle_degenerate_targets() {
        let q = JointPmf::from_rows(&[vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        let v = brute_oracle_2x2(&q, &targets(&[1.0, 0.0], &[1.0, 0.0]), 100).unwrap();
        assert!((v + 0.1f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn boundary_feasible_instance_converges() {
        let q = JointPmf::from_rows(&[vec![0.25, 0.25], vec![0.0, 0.5]]).unwrap();
        let c = targets(&[0.5, 0.5], &[0.5, 0.5]);
        let (p, d) = iproject(&q, &c, 1e-10).unwrap();
        assert!(d.converged);
        assert!(p.get(1, 0).abs() < 1e-15);
        let brute = brute_oracle_2x2(&q, &c, 1000).unwrap();
        assert!((brute - d.objective).abs() < 1e-8);
    }

    #[test]
    fn rectangular_tables() {
        let q = JointPmf::new(3, 2, vec![0.1, 0.2, 0.15, 0.15, 0.3, 0.1]).unwrap();
        let c = targets(&[0.2, 0.5, 0.3], &[0.5, 0.5]);
        let (p, d) = iproject(&q, &c, 1e-12).unwrap();
        assert!(d.marginal_residual <= 1e-12);
        let mx = p.marginal_x();
        assert!((mx[1] - 0.5).abs() < 1e-12);
    }
}
