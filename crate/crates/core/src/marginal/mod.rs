//! Relative-entropy projections onto sets with prescribed marginals.
//!
//! The classical problem `min D(p̂‖q)` over joint pmfs with fixed row and
//! column sums is solved by iterative proportional fitting. The quantum
//! problem `min D(ρ̂‖σ)` over states with fixed reduced states is solved by
//! ascent on the Lagrange dual over the family
//! `exp(log σ + λ_A ⊗ I + I ⊗ λ_B) / Z`.

mod feasibility;
mod iproject;
mod qproject;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::check_pmf;
use crate::state::DensityOperator;

pub use feasibility::transport_feasible;
pub use iproject::{brute_oracle_2x2, iproject, iproject_with, IprojectConfig};
pub use qproject::{qproject, qproject_with, QprojectConfig};

/// Convergence record shared by both solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    /// L1 distance for pmfs, trace norm for operators.
    pub marginal_residual: f64,
    pub objective: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duality_gap: Option<f64>,
    /// Dual objective per accepted iteration, when requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
}

impl SolverDiagnostics {
    pub(crate) fn closed_form(objective: f64) -> Self {
        SolverDiagnostics {
            iterations: 0,
            marginal_residual: 0.0,
            objective,
            converged: true,
            dual_value: None,
            duality_gap: None,
            history: Vec::new(),
        }
    }
}

/// Target marginals `(p_X, p_Y)` for the classical projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalConstraint {
    pub target_px: Vec<f64>,
    pub target_py: Vec<f64>,
}

impl MarginalConstraint {
    pub fn new(target_px: Vec<f64>, target_py: Vec<f64>) -> Result<Self> {
        check_pmf(&target_px)?;
        check_pmf(&target_py)?;
        Ok(MarginalConstraint {
            target_px,
            target_py,
        })
    }
}

/// Target reduced states `(ρ_A, ρ_B)` for the quantum projection.
#[derive(Debug, Clone)]
pub struct QuantumMarginals {
    pub rho_a: DensityOperator,
    pub rho_b: DensityOperator,
}

impl QuantumMarginals {
    pub fn new(rho_a: DensityOperator, rho_b: DensityOperator) -> Self {
        QuantumMarginals { rho_a, rho_b }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rho_a.dim(), self.rho_b.dim())
    }
}

pub(crate) fn infeasible(message: impl Into<String>, diagnostics: SolverDiagnostics) -> Error {
    Error::Infeasible {
        message: message.into(),
        diagnostics: Box::new(diagnostics),
    }
}
