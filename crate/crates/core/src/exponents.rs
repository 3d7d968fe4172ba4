//! Exponent calculators: classical zero-rate exponent, product-alternative
//! closed form, the single-letter marginal-constrained quantity, the
//! geometric-mean gap `κ`, isotropic/Werner bounds and perfect
//! discrimination witnesses.

use serde::{Deserialize, Serialize};

use crate::entropy::{self, umegaki};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::marginal::{self, MarginalConstraint, QuantumMarginals, SolverDiagnostics};
use crate::pmf::JointPmf;
use crate::pvm_opt::induced_pmf;
use crate::state::{BipartitePair, DensityOperator, LocalPvm, PvmBasis};

/// Tolerance on `‖ρ̃ − ρ̃_A ⊗ ρ̃_B‖_F` for treating an alternative as product.
pub const PRODUCT_TOL: f64 = 1e-10;

/// Overlap `Σ min(p, q)` below which two outcome pmfs count as disjoint.
pub const DISJOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Ipf,
    DualAscent,
    PvmSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Exact,
    Upper,
    Lower,
}

/// A computed exponent or bound, in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub name: String,
    pub value: ExtReal,
    pub method: Method,
    pub bound_kind: BoundKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<SolverDiagnostics>,
}

impl ExponentReport {
    pub fn closed_form(name: &str, value: ExtReal, bound_kind: BoundKind) -> Self {
        ExponentReport {
            name: name.to_string(),
            value,
            method: Method::ClosedForm,
            bound_kind,
            diagnostics: None,
        }
    }
}

/// `min D(p̂‖q)` over `p̂` with the marginals of `p`.
///
/// Exact when `q` has full support; otherwise the value is only known to be
/// achievable and is reported as a lower bound.
pub fn theta_zrc(p: &JointPmf, q: &JointPmf) -> Result<ExponentReport> {
    theta_zrc_tol(p, q, 1e-10)
}

pub fn theta_zrc_tol(p: &JointPmf, q: &JointPmf, tol: f64) -> Result<ExponentReport> {
    if p.shape() != q.shape() {
        return Err(Error::dim("p and q must share an alphabet"));
    }
    let c = MarginalConstraint::new(p.marginal_x(), p.marginal_y())?;
    let (_, diag) = marginal::iproject(q, &c, tol)?;
    let bound_kind = if q.as_slice().iter().all(|&v| v > 0.0) {
        BoundKind::Exact
    } else {
        BoundKind::Lower
    };
    Ok(ExponentReport {
        name: "theta_zrc".into(),
        value: ExtReal::Finite(diag.objective.max(0.0)),
        method: Method::Ipf,
        bound_kind,
        diagnostics: Some(diag),
    })
}

/// `D(ρ_A‖ρ̃_A) + D(ρ_B‖ρ̃_B)` for a product alternative.
pub fn theta_product_alt(pair: &BipartitePair) -> Result<ExponentReport> {
    let defect = pair.alt_product_defect()?;
    if defect > PRODUCT_TOL {
        return Err(Error::invalid(format!(
            "alternative is not a product state (defect {defect:.3e})"
        )));
    }
    let (alt_a, alt_b) = pair.alt_marginals()?;
    theta_product_factors(pair, &alt_a, &alt_b)
}

/// Same as [`theta_product_alt`] with the alternative given by its factors.
pub fn theta_product_factors(
    pair: &BipartitePair,
    alt_a: &DensityOperator,
    alt_b: &DensityOperator,
) -> Result<ExponentReport> {
    if alt_a.dim() != pair.d_a || alt_b.dim() != pair.d_b {
        return Err(Error::dim("alternative factors do not match the pair"));
    }
    let (rho_a, rho_b) = pair.null_marginals()?;
    let value = umegaki(&rho_a, alt_a.matrix())? + umegaki(&rho_b, alt_b.matrix())?;
    Ok(ExponentReport::closed_form(
        "theta_product_alt",
        value,
        BoundKind::Exact,
    ))
}

/// `min D(ρ̂‖ρ̃)` over `ρ̂` with the reduced states of `ρ`; an upper bound on
/// the communication-constrained exponent under the support condition.
pub fn theta_sl(pair: &BipartitePair, tol: f64) -> Result<ExponentReport> {
    let (rho_a, rho_b) = pair.null_marginals()?;
    let c = QuantumMarginals::new(rho_a, rho_b);
    let (_, diag) = marginal::qproject(&pair.alt_state, &c, pair.dims(), tol)?;
    Ok(ExponentReport {
        name: "theta_sl".into(),
        value: ExtReal::Finite(diag.objective.max(0.0)),
        method: Method::DualAscent,
        bound_kind: BoundKind::Upper,
        diagnostics: Some(diag),
    })
}

/// `κ = ½(D(ψ‖ρ̃_0) + D(ψ‖ρ̃_1) − D(ψ‖ω(ρ̃_0,ρ̃_1)) − D(ψ‖ω(ρ̃_1,ρ̃_0)))`,
/// reported with its sign.
pub fn kappa_gap(psi: &DensityOperator, r0: &DensityOperator, r1: &DensityOperator) -> Result<f64> {
    if psi.rank() != 1 {
        return Err(Error::invalid(format!(
            "psi must be pure, found rank {}",
            psi.rank()
        )));
    }
    if r0.dim() != psi.dim() || r1.dim() != psi.dim() {
        return Err(Error::dim("psi, r0 and r1 must share a dimension"));
    }
    for (name, r) in [("r0", r0), ("r1", r1)] {
        if r.min_eigenvalue() <= r.eig_cutoff() {
            return Err(Error::invalid(format!("{name} must be positive definite")));
        }
    }
    let cutoff = r0.eig_cutoff();
    let w01 = entropy::geometric_mean(r0.matrix(), r1.matrix(), cutoff)?;
    let w10 = entropy::geometric_mean(r1.matrix(), r0.matrix(), cutoff)?;
    let d = |m: &crate::linalg::CMat| -> Result<f64> {
        umegaki(psi, m)?
            .finite()
            .ok_or_else(|| Error::invalid("divergence is infinite"))
    };
    Ok(0.5 * (d(r0.matrix())? + d(r1.matrix())? - d(&w01)? - d(&w10)?))
}

pub fn kappa_report(
    psi: &DensityOperator,
    r0: &DensityOperator,
    r1: &DensityOperator,
) -> Result<ExponentReport> {
    let k = kappa_gap(psi, r0, r1)?;
    Ok(ExponentReport::closed_form(
        "kappa",
        ExtReal::Finite(k),
        BoundKind::Exact,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Isotropic,
    Werner,
}

/// Closed-form upper bounds `ln(pd + 1)` (isotropic against `Φ^⊥`) and
/// `ln((d + 1 − 2p)/(d − 1))` (Werner against `Θ^⊥`).
pub fn iso_werner_bounds(family: Family, p: f64, d: usize) -> Result<ExponentReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p = {p} outside [0, 1]")));
    }
    if d < 2 {
        return Err(Error::invalid(format!("d = {d} must be at least 2")));
    }
    let d = d as f64;
    let (name, value) = match family {
        Family::Isotropic => ("isotropic_bound", (p * d + 1.0).ln()),
        Family::Werner => ("werner_bound", ((d + 1.0 - 2.0 * p) / (d - 1.0)).ln()),
    };
    Ok(ExponentReport::closed_form(
        name,
        ExtReal::Finite(value),
        BoundKind::Upper,
    ))
}

/// A local product measurement under which the two hypotheses produce
/// disjoint outcome distributions.
#[derive(Debug, Clone)]
pub struct DiscriminationWitness {
    pub label: String,
    pub pvm: LocalPvm,
    pub overlap: f64,
}

#[derive(Debug, Clone)]
pub enum Discrimination {
    Perfect {
        report: ExponentReport,
        witness: DiscriminationWitness,
    },
    NotFound {
        /// Smallest outcome overlap over the searched measurements.
        best_overlap: f64,
    },
}

impl Discrimination {
    pub fn is_perfect(&self) -> bool {
        matches!(self, Discrimination::Perfect { .. })
    }
}

fn dictionary(d: usize) -> Vec<(&'static str, PvmBasis)> {
    let mut out = vec![("Z", PvmBasis::computational(d)), ("X", PvmBasis::fourier(d))];
    if d == 2 {
        out.push(("Y", PvmBasis::pauli_y()));
    }
    out
}

/// Searches single-copy local product measurements built from a fixed basis
/// dictionary (computational, Fourier and, for qubits, Pauli-Y) plus `extra`
/// for one that separates the hypotheses perfectly.
pub fn orthogonal_discrimination(
    pair: &BipartitePair,
    extra: &[LocalPvm],
) -> Result<Discrimination> {
    let mut candidates = Vec::new();
    for (la, ba) in dictionary(pair.d_a) {
        for (lb, bb) in dictionary(pair.d_b) {
            let pvm = LocalPvm::new(ba.clone(), bb, pair.d_a, pair.d_b, 1)?;
            candidates.push((format!("{la}⊗{lb}"), pvm));
        }
    }
    for (i, pvm) in extra.iter().enumerate() {
        if pvm.block_size != 1 || pvm.d_a != pair.d_a || pvm.d_b != pair.d_b {
            return Err(Error::dim(format!(
                "user measurement #{i} does not act on a single copy of the pair"
            )));
        }
        candidates.push((format!("user#{i}"), pvm.clone()));
    }
    let mut best_overlap = f64::INFINITY;
    for (label, pvm) in candidates {
        let p = induced_pmf(&pair.null_state, &pvm)?;
        let q = induced_pmf(&pair.alt_state, &pvm)?;
        let overlap: f64 = p
            .as_slice()
            .iter()
            .zip(q.as_slice())
            .map(|(a, b)| a.min(*b))
            .sum();
        if overlap <= DISJOINT_TOL {
            return Ok(Discrimination::Perfect {
                report: ExponentReport::closed_form(
                    "orthogonal_discrimination",
                    ExtReal::Infinite,
                    BoundKind::Exact,
                ),
                witness: DiscriminationWitness {
                    label,
                    pvm,
                    overlap,
                },
            });
        }
        best_overlap = best_overlap.min(overlap);
    }
    Ok(Discrimination::NotFound { best_overlap })
}
