//! Finite-block surrogate of the local-projective-measurement exponent.
//!
//! For a block of `m` copies the value is
//! `(1/m) max_{P_A, P_B} min_{p̂} D(p̂ ‖ q)`, where `q` is the outcome pmf of
//! `ρ̃^{⊗m}` under the local bases and `p̂` ranges over couplings of the
//! outcome pmfs of `ρ_A^{⊗m}` and `ρ_B^{⊗m}`. Local bases are searched as
//! `U_0 exp(iH)` over Hermitian `H`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::outcome_pmf;
use crate::error::{Error, Result};
use crate::exponents::{BoundKind, ExponentReport, Method};
use crate::ext::ExtReal;
use crate::linalg::{self, CMat};
use crate::marginal::{self, MarginalConstraint, SolverDiagnostics};
use crate::pmf::JointPmf;
use crate::state::{self, BipartitePair, DensityOperator, LocalPvm, PvmBasis, PSD_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    NelderMead,
    RandomSearch,
    CoordinateRotations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PvmSearchConfig {
    pub block_size: usize,
    pub restarts: usize,
    pub optimizer: Optimizer,
    pub seed: u64,
    pub inner_tol: f64,
    /// Objective evaluations per restart.
    pub max_evals: usize,
}

impl Default for PvmSearchConfig {
    fn default() -> Self {
        PvmSearchConfig {
            block_size: 1,
            restarts: 32,
            optimizer: Optimizer::NelderMead,
            seed: 0,
            inner_tol: 1e-10,
            max_evals: 1500,
        }
    }
}

/// Largest `m · log2(d_A d_B)` accepted by the search.
pub const MAX_BLOCK_QUBITS: f64 = 16.0;

impl PvmSearchConfig {
    pub fn validate(&self, d_a: usize, d_b: usize) -> Result<()> {
        if self.block_size == 0 || self.restarts == 0 || self.max_evals == 0 {
            return Err(Error::invalid(
                "block size, restarts and evaluation budget must be positive",
            ));
        }
        if !(self.inner_tol > 0.0) {
            return Err(Error::invalid("inner tolerance must be positive"));
        }
        let bits = self.block_size as f64 * ((d_a * d_b) as f64).log2();
        if bits > MAX_BLOCK_QUBITS {
            return Err(Error::Size(format!(
                "block of {} copies spans {bits:.1} qubits, limit {MAX_BLOCK_QUBITS}",
                self.block_size
            )));
        }
        Ok(())
    }
}

/// Joint outcome pmf of a state on `(AB)^{⊗m}` (interleaved order) under a
/// local product measurement.
pub fn induced_pmf(state: &DensityOperator, pvm: &LocalPvm) -> Result<JointPmf> {
    let m = pvm.block_size;
    let (dim_a, dim_b) = (pvm.basis_a.dim(), pvm.basis_b.dim());
    if state.dim() != dim_a * dim_b {
        return Err(Error::dim(format!(
            "state has dimension {}, measurement expects {}",
            state.dim(),
            dim_a * dim_b
        )));
    }
    let grouped = linalg::regroup(state.matrix(), pvm.d_a, pvm.d_b, m);
    let joint = pvm.basis_a.kron(&pvm.basis_b);
    JointPmf::from_weights(dim_a, dim_b, outcome_pmf(&grouped, &joint)?)
}

/// Hermitian matrix from `d²` real coordinates: the diagonal first, then the
/// real and imaginary parts of the strict upper triangle.
pub fn hermitian_from_params(theta: &[f64], d: usize) -> CMat {
    let mut h = CMat::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = linalg::c(theta[i]);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = num_complex::Complex64::new(theta[k], theta[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Evaluation context for one pair and block size.
struct Objective {
    rho_a: DensityOperator,
    rho_b: DensityOperator,
    alt: DensityOperator,
    d_a: usize,
    d_b: usize,
    m: usize,
    dim_a: usize,
    dim_b: usize,
    base_a: CMat,
    base_b: CMat,
    inner_tol: f64,
    support_ok: bool,
}

struct Scored {
    value: f64,
    theta: Vec<f64>,
    diagnostics: Option<SolverDiagnostics>,
}

impl Objective {
    fn pvm(&self, theta: &[f64]) -> LocalPvm {
        let (ta, tb) = theta.split_at(self.dim_a * self.dim_a);
        let ua = &self.base_a * linalg::unitary_from_hermitian(&hermitian_from_params(ta, self.dim_a));
        let ub = &self.base_b * linalg::unitary_from_hermitian(&hermitian_from_params(tb, self.dim_b));
        LocalPvm {
            basis_a: PvmBasis::from_unitary_unchecked(ua),
            basis_b: PvmBasis::from_unitary_unchecked(ub),
            d_a: self.d_a,
            d_b: self.d_b,
            block_size: self.m,
        }
    }

    /// Per-copy inner minimum at a fixed measurement; `+∞` when no coupling
    /// fits inside the support of `q`.
    fn eval_pvm(&self, pvm: &LocalPvm) -> Result<(f64, Option<SolverDiagnostics>)> {
        let px = outcome_pmf(self.rho_a.matrix(), &pvm.basis_a)?;
        let py = outcome_pmf(self.rho_b.matrix(), &pvm.basis_b)?;
        let c = MarginalConstraint::new(normalize(px), normalize(py))?;
        let q = induced_pmf(&self.alt, pvm)?;
        match marginal::iproject(&q, &c, self.inner_tol) {
            Ok((_, d)) => Ok((d.objective.max(0.0) / self.m as f64, Some(d))),
            Err(Error::Infeasible { .. }) if !self.support_ok => Ok((f64::INFINITY, None)),
            Err(e) => Err(e),
        }
    }

    fn eval(&self, theta: &[f64]) -> Result<Scored> {
        let (value, diagnostics) = self.eval_pvm(&self.pvm(theta))?;
        Ok(Scored {
            value,
            theta: theta.to_vec(),
            diagnostics,
        })
    }

    fn n_params(&self) -> usize {
        self.dim_a * self.dim_a + self.dim_b * self.dim_b
    }
}

fn normalize(mut p: Vec<f64>) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    p
}

/// Best value found and the measurement attaining it.
pub fn maxmin_finite_n(
    pair: &BipartitePair,
    cfg: &PvmSearchConfig,
) -> Result<(ExponentReport, LocalPvm)> {
    cfg.validate(pair.d_a, pair.d_b)?;
    let m = cfg.block_size;
    let (base_a, base_b) = if m > 1 {
        let single = PvmSearchConfig {
            block_size: 1,
            ..cfg.clone()
        };
        let (_, best) = maxmin_finite_n(pair, &single)?;
        (
            linalg::kron_power(best.basis_a.vectors(), m),
            linalg::kron_power(best.basis_b.vectors(), m),
        )
    } else {
        (linalg::identity(pair.d_a), linalg::identity(pair.d_b))
    };
    let (rho_a, rho_b) = pair.null_marginals()?;
    let obj = Objective {
        rho_a: state::tensor_power(&rho_a, m)?,
        rho_b: state::tensor_power(&rho_b, m)?,
        alt: state::tensor_power(&pair.alt_state, m)?,
        d_a: pair.d_a,
        d_b: pair.d_b,
        m,
        dim_a: base_a.nrows(),
        dim_b: base_b.nrows(),
        base_a,
        base_b,
        inner_tol: cfg.inner_tol,
        support_ok: pair.support_condition()?,
    };

    let runs: Vec<Result<(Scored, usize)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(&obj, cfg, r as u64))
        .collect();
    let mut best: Option<Scored> = None;
    let mut evals = 0;
    for run in runs {
        let (scored, n) = run?;
        evals += n;
        if best.as_ref().is_none_or(|b| scored.value > b.value) {
            best = Some(scored);
        }
    }
    let best = best.expect("at least one restart");
    let pvm = obj.pvm(&best.theta);
    let mut diag = best
        .diagnostics
        .unwrap_or_else(|| SolverDiagnostics::closed_form(f64::INFINITY));
    diag.iterations = evals;
    let report = ExponentReport {
        name: format!("maxmin_m{m}"),
        value: ExtReal::from_f64(best.value),
        method: Method::PvmSearch,
        bound_kind: BoundKind::Lower,
        diagnostics: Some(diag),
    };
    Ok((report, pvm))
}

/// Value of the inner problem at one given measurement.
pub fn maxmin_at(pair: &BipartitePair, pvm: &LocalPvm, inner_tol: f64) -> Result<ExtReal> {
    if pvm.d_a != pair.d_a || pvm.d_b != pair.d_b {
        return Err(Error::dim("measurement does not match the pair"));
    }
    let m = pvm.block_size;
    let (rho_a, rho_b) = pair.null_marginals()?;
    let obj = Objective {
        rho_a: state::tensor_power(&rho_a, m)?,
        rho_b: state::tensor_power(&rho_b, m)?,
        alt: state::tensor_power(&pair.alt_state, m)?,
        d_a: pair.d_a,
        d_b: pair.d_b,
        m,
        dim_a: pvm.basis_a.dim(),
        dim_b: pvm.basis_b.dim(),
        base_a: linalg::identity(pvm.basis_a.dim()),
        base_b: linalg::identity(pvm.basis_b.dim()),
        inner_tol,
        support_ok: pair.support_condition()?,
    };
    Ok(ExtReal::from_f64(obj.eval_pvm(pvm)?.0))
}

fn run_restart(obj: &Objective, cfg: &PvmSearchConfig, r: u64) -> Result<(Scored, usize)> {
    let n = obj.n_params();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r));
    let start: Vec<f64> = if r == 0 {
        vec![0.0; n]
    } else {
        (0..n)
            .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect()
    };
    match cfg.optimizer {
        Optimizer::NelderMead => nelder_mead(obj, start, cfg.max_evals),
        Optimizer::RandomSearch => random_search(obj, start, cfg.max_evals, &mut rng),
        Optimizer::CoordinateRotations => coordinate_rotations(obj, start, cfg.max_evals),
    }
}

/// Maximizes by Nelder–Mead on the negated objective.
fn nelder_mead(obj: &Objective, start: Vec<f64>, max_evals: usize) -> Result<(Scored, usize)> {
    let n = start.len();
    let evals = std::cell::Cell::new(0usize);
    let f = |x: &[f64]| -> Result<Scored> {
        evals.set(evals.get() + 1);
        obj.eval(x)
    };
    let mut simplex = vec![f(&start)?];
    for i in 0..n {
        let mut x = start.clone();
        x[i] += 0.5;
        simplex.push(f(&x)?);
    }
    let by_value = |a: &Scored, b: &Scored| b.value.total_cmp(&a.value);
    loop {
        simplex.sort_by(by_value);
        let best = simplex[0].value;
        let worst = simplex[n].value;
        if best == f64::INFINITY || evals.get() >= max_evals {
            break;
        }
        let size = simplex[1..]
            .iter()
            .flat_map(|s| s.theta.iter().zip(&simplex[0].theta).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (best - worst).abs() < 1e-13 && size < 1e-9 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|s| s.theta[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].theta)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let refl = f(&along(1.0))?;
        if refl.value > simplex[0].value {
            let exp = f(&along(2.0))?;
            simplex[n] = if exp.value > refl.value { exp } else { refl };
        } else if refl.value > simplex[n - 1].value {
            simplex[n] = refl;
        } else {
            let outside = refl.value > simplex[n].value;
            let con = f(&along(if outside { 0.5 } else { -0.5 }))?;
            let target = if outside { refl.value } else { simplex[n].value };
            if con.value >= target {
                simplex[n] = con;
            } else {
                let best_theta = simplex[0].theta.clone();
                for s in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best_theta
                        .iter()
                        .zip(&s.theta)
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    *s = f(&x)?;
                }
            }
        }
    }
    simplex.sort_by(by_value);
    let best = simplex.swap_remove(0);
    Ok((best, evals.get()))
}

fn random_search(
    obj: &Objective,
    start: Vec<f64>,
    max_evals: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Scored, usize)> {
    let n = start.len();
    let mut best = obj.eval(&start)?;
    for _ in 1..max_evals {
        let x: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let s = obj.eval(&x)?;
        if s.value > best.value {
            best = s;
        }
    }
    Ok((best, max_evals))
}

/// Cyclic one-dimensional searches: a coarse grid over `[−π, π)` around the
/// current coordinate followed by golden-section refinement.
fn coordinate_rotations(
    obj: &Objective,
    start: Vec<f64>,
    max_evals: usize,
) -> Result<(Scored, usize)> {
    const GRID: usize = 12;
    let n = start.len();
    let mut best = obj.eval(&start)?;
    let mut evals = 1;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    'outer: loop {
        let before = best.value;
        for k in 0..n {
            let at = |t: f64, base: &[f64]| {
                let mut x = base.to_vec();
                x[k] = t;
                x
            };
            let centre = best.theta[k];
            let h = 2.0 * std::f64::consts::PI / GRID as f64;
            let mut top = (centre, best.value);
            for g in 1..GRID {
                let t = centre + h * g as f64;
                let s = obj.eval(&at(t, &best.theta))?;
                evals += 1;
                if s.value > top.1 {
                    top = (t, s.value);
                }
            }
            let (mut l, mut r) = (top.0 - h, top.0 + h);
            let base = best.theta.clone();
            let mut x1 = r - inv_phi * (r - l);
            let mut x2 = l + inv_phi * (r - l);
            let mut f1 = obj.eval(&at(x1, &base))?;
            let mut f2 = obj.eval(&at(x2, &base))?;
            evals += 2;
            for _ in 0..30 {
                if f1.value >= f2.value {
                    r = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = r - inv_phi * (r - l);
                    f1 = obj.eval(&at(x1, &base))?;
                } else {
                    l = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = l + inv_phi * (r - l);
                    f2 = obj.eval(&at(x2, &base))?;
                }
                evals += 1;
            }
            let cand = if f1.value >= f2.value { f1 } else { f2 };
            if cand.value > best.value {
                best = cand;
            } else if top.1 > best.value {
                best = obj.eval(&at(top.0, &base))?;
                evals += 1;
            }
            if evals >= max_evals || best.value == f64::INFINITY {
                break 'outer;
            }
        }
        if best.value - before < 1e-12 {
            break;
        }
    }
    Ok((best, evals))
}

/// Output of the explicit coupling-to-state construction.
#[derive(Debug, Clone)]
pub struct Lemma2State {
    pub matrix: CMat,
    pub min_eigenvalue: f64,
    pub is_psd: bool,
    /// Trace-norm distance of the reduced states from `ρ_A`, `ρ_B`.
    pub marginal_residual: f64,
    /// Largest deviation of the diagonal in the product basis from the target.
    pub diagonal_residual: f64,
}

/// Replaces the diagonal of `ρ_A ⊗ ρ_B` in the product basis `{|xy⟩}` by the
/// target coupling, keeping every off-diagonal entry.
///
/// Positivity is checked and reported, not assumed.
pub fn lemma2_construct(
    rho: &DensityOperator,
    dims: (usize, usize),
    pvm: &LocalPvm,
    target: &JointPmf,
) -> Result<Lemma2State> {
    let (d_a, d_b) = dims;
    if pvm.block_size != 1 || pvm.d_a != d_a || pvm.d_b != d_b {
        return Err(Error::dim("construction needs a single-copy local measurement"));
    }
    if target.shape() != (d_a, d_b) {
        return Err(Error::dim("target table does not match the local dimensions"));
    }
    let rho_a = state::partial_trace(rho, dims, linalg::Keep::A)?;
    let rho_b = state::partial_trace(rho, dims, linalg::Keep::B)?;
    let px = outcome_pmf(rho_a.matrix(), &pvm.basis_a)?;
    let py = outcome_pmf(rho_b.matrix(), &pvm.basis_b)?;
    let mismatch = px
        .iter()
        .zip(target.marginal_x())
        .chain(py.iter().zip(target.marginal_y()))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if mismatch > 1e-10 {
        return Err(Error::precondition(format!(
            "target marginals differ from the induced marginals by {mismatch:.3e}"
        )));
    }
    let u = pvm.joint_basis().vectors().clone();
    let product = linalg::kron(rho_a.matrix(), rho_b.matrix());
    let mut in_basis = u.adjoint() * product * &u;
    for x in 0..d_a {
        for y in 0..d_b {
            in_basis[(x * d_b + y, x * d_b + y)] = linalg::c(target.get(x, y));
        }
    }
    let matrix = linalg::symmetrize(&(&u * in_basis * u.adjoint()));
    let min_eigenvalue = linalg::min_eigenvalue(&matrix);
    let ra = linalg::partial_trace_matrix(&matrix, d_a, d_b, linalg::Keep::A)?;
    let rb = linalg::partial_trace_matrix(&matrix, d_a, d_b, linalg::Keep::B)?;
    let marginal_residual = linalg::trace_norm_hermitian(&(ra - rho_a.matrix()))
        + linalg::trace_norm_hermitian(&(rb - rho_b.matrix()));
    let diag = PvmBasis::from_unitary_unchecked(u).outcome_weights(&matrix);
    let diagonal_residual = diag
        .iter()
        .zip(target.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Lemma2State {
        matrix,
        min_eigenvalue,
        is_psd: min_eigenvalue >= -PSD_TOL,
        marginal_residual,
        diagonal_residual,
    })
}
