//! JSON problem files.
//!
//! A state is either an explicit matrix, row-major with complex entries as
//! `[re, im]` pairs,
//!
//! ```json
//! {"dim": 2, "matrix": [[[0.5, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.5, 0.0]]]}
//! ```
//!
//! or a preset shorthand such as `{"preset": "isotropic", "p": 0.5, "d": 2}`.
//! Errors carry the JSON path of the offending field.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::pmf::JointPmf;
use crate::presets::{self, Preset};
use crate::state::{BipartitePair, DensityOperator, PvmBasis};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        MatrixJson {
            dim: m.nrows(),
            matrix: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self, path: &str) -> Result<CMat> {
        if self.matrix.len() != self.dim {
            return Err(input(
                format!("{path}.matrix"),
                format!("expected {} rows, found {}", self.dim, self.matrix.len()),
            ));
        }
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != self.dim {
                return Err(input(
                    format!("{path}.matrix[{i}]"),
                    format!("expected {} entries, found {}", self.dim, row.len()),
                ));
            }
        }
        Ok(CMat::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.matrix[i][j];
            Complex64::new(re, im)
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetJson {
    pub preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    #[serde(default = "default_dim")]
    pub d: usize,
}

fn default_dim() -> usize {
    2
}

impl PresetJson {
    fn params(&self) -> Vec<f64> {
        if !self.params.is_empty() {
            return self.params.clone();
        }
        self.p.into_iter().chain(self.q).collect()
    }

    fn build(&self, path: &str) -> Result<Preset> {
        presets::preset(&self.preset, &self.params(), self.d).map_err(|e| at(path, e))
    }
}

fn input(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Input {
        path: path.into(),
        message: message.into(),
    }
}

/// Re-labels validation failures with the JSON path they came from.
fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Input { .. } => e,
        other if other.is_input_error() => input(path, other.to_string()),
        other => other,
    }
}

/// Deserializes `value` into `T`, reporting the full path on failure.
pub fn from_value<T: DeserializeOwned>(value: &Value, path: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let full = if inner == "." {
            path.to_string()
        } else {
            format!("{path}.{inner}")
        };
        input(full, e.inner().to_string())
    })
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| input("$", e.to_string()))
}

fn is_preset(value: &Value) -> bool {
    value.get("preset").is_some()
}

/// A Hermitian matrix given explicitly (presets are states, not operators).
pub fn parse_matrix(value: &Value, path: &str) -> Result<CMat> {
    from_value::<MatrixJson>(value, path)?.to_matrix(path)
}

pub fn parse_state(value: &Value, path: &str) -> Result<DensityOperator> {
    if is_preset(value) {
        return from_value::<PresetJson>(value, path)?
            .build(path)?
            .into_state()
            .map_err(|e| at(path, e));
    }
    DensityOperator::new(parse_matrix(value, path)?).map_err(|e| at(path, e))
}

pub fn state_to_json(state: &DensityOperator) -> MatrixJson {
    MatrixJson::from_matrix(state.matrix())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairJson {
    d_a: usize,
    d_b: usize,
    null: Value,
    alt: Value,
}

/// Either a pair preset or `{"d_a", "d_b", "null", "alt"}`.
pub fn parse_pair(value: &Value, path: &str) -> Result<BipartitePair> {
    if is_preset(value) {
        return from_value::<PresetJson>(value, path)?
            .build(path)?
            .into_pair()
            .map_err(|e| at(path, e));
    }
    let raw: PairJson = from_value(value, path)?;
    let null = parse_state(&raw.null, &format!("{path}.null"))?;
    let alt = parse_state(&raw.alt, &format!("{path}.alt"))?;
    BipartitePair::new(raw.d_a, raw.d_b, null, alt).map_err(|e| at(path, e))
}

/// A joint pmf as a list of rows.
pub fn parse_pmf(value: &Value, path: &str) -> Result<JointPmf> {
    let rows: Vec<Vec<f64>> = from_value(value, path)?;
    JointPmf::from_rows(&rows).map_err(|e| at(path, e))
}

/// A basis as a unitary matrix whose columns are the basis vectors.
pub fn parse_basis(value: &Value, path: &str) -> Result<PvmBasis> {
    PvmBasis::new(parse_matrix(value, path)?).map_err(|e| at(path, e))
}

pub fn basis_to_json(basis: &PvmBasis) -> MatrixJson {
    MatrixJson::from_matrix(basis.vectors())
}
