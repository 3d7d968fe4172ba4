//! Joint probability mass functions on finite product alphabets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PMF_TOL: f64 = 1e-12;

/// A nonnegative `|X| × |Y|` table summing to one, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    rows: usize,
    cols: usize,
    table: Vec<f64>,
}

impl JointPmf {
    pub fn new(rows: usize, cols: usize, table: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || table.len() != rows * cols {
            return Err(Error::dim(format!(
                "table of length {} does not match shape {rows}x{cols}",
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid(format!("pmf entry {bad} is not a probability")));
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > PMF_TOL {
            return Err(Error::invalid(format!("pmf sums to {total}, expected 1")));
        }
        Ok(JointPmf { rows, cols, table })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dim("ragged pmf table"));
        }
        Self::new(r, c, rows.iter().flatten().copied().collect())
    }

    /// Outer product of two pmf vectors.
    pub fn product(px: &[f64], py: &[f64]) -> Result<Self> {
        check_pmf(px)?;
        check_pmf(py)?;
        let table = px
            .iter()
            .flat_map(|a| py.iter().map(move |b| a * b))
            .collect();
        Self::new(px.len(), py.len(), table)
    }

    pub fn uniform(rows: usize, cols: usize) -> Result<Self> {
        let n = rows * cols;
        Self::new(rows, cols, vec![1.0 / n as f64; n])
    }

    /// Builds from entries that may carry rounding error: negatives down to
    /// `-1e-12` are clamped to zero and the table is renormalized.
    pub(crate) fn from_weights(rows: usize, cols: usize, mut table: Vec<f64>) -> Result<Self> {
        for v in table.iter_mut() {
            if *v < 0.0 && *v >= -PMF_TOL {
                *v = 0.0;
            }
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
        }
        for v in table.iter_mut() {
            *v /= total;
        }
        Self::new(rows, cols, table)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.cols + y]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.table
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.table.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        self.table.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|y| (0..self.rows).map(|x| self.get(x, y)).sum())
            .collect()
    }

    /// Applies the same relabeling to rows and columns.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> JointPmf {
        let mut table = vec![0.0; self.table.len()];
        for x in 0..self.rows {
            for y in 0..self.cols {
                table[row_perm[x] * self.cols + col_perm[y]] = self.get(x, y);
            }
        }
        JointPmf {
            rows: self.rows,
            cols: self.cols,
            table,
        }
    }
}

pub fn check_pmf(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::invalid("empty pmf"));
    }
    if p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::invalid("pmf has a negative or non-finite entry"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PMF_TOL {
        return Err(Error::invalid(format!("pmf sums to {total}, expected 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginals() {
        let p = JointPmf::from_rows(&[vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        let mx = p.marginal_x();
        let my = p.marginal_y();
        assert!((mx[0] - 0.3).abs() < 1e-15 && (mx[1] - 0.7).abs() < 1e-15);
        assert!((my[0] - 0.4).abs() < 1e-15 && (my[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(JointPmf::from_rows(&[vec![0.5, 0.6]]).is_err());
        assert!(JointPmf::from_rows(&[vec![1.5, -0.5]]).is_err());
        assert!(JointPmf::from_rows(&[vec![0.5], vec![0.25, 0.25]]).is_err());
        assert!(JointPmf::new(2, 2, vec![0.25; 3]).is_err());
    }
}
