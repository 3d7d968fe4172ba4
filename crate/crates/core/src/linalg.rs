//! Dense complex linear algebra helpers.
//!
//! Everything here works on small dense matrices; matrix functions go through
//! the Hermitian eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest Hilbert-space dimension any state may have.
pub const MAX_DIM: usize = 1 << 16;

/// Hermitian eigendecomposition with eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMat,
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().copied().sum()
}

/// Real part of `tr(a b)` without forming the product.
pub fn trace_product_re(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m^*) / 2`.
pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn eigh(m: &CMat) -> Eigh {
    let n = m.nrows();
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Eigh { values, vectors }
}

/// `V diag(d) V^*`.
pub fn from_spectrum(vectors: &CMat, diag: &[Complex64]) -> CMat {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (j, d) in diag.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= d;
        }
    }
    &scaled * vectors.adjoint()
}

/// Applies `f` to the eigenvalues above `cutoff`; the rest of the spectrum is
/// mapped to zero (support-restricted functional calculus).
pub fn hermitian_fn_on_support(m: &CMat, cutoff: f64, f: impl Fn(f64) -> f64) -> CMat {
    let e = eigh(m);
    let diag: Vec<Complex64> = e
        .values
        .iter()
        .map(|&v| if v > cutoff { c(f(v)) } else { ZERO })
        .collect();
    symmetrize(&from_spectrum(&e.vectors, &diag))
}

/// `exp(i h)` for Hermitian `h`.
pub fn unitary_from_hermitian(h: &CMat) -> CMat {
    let e = eigh(h);
    let diag: Vec<Complex64> = e
        .values
        .iter()
        .map(|&v| Complex64::from_polar(1.0, v))
        .collect();
    from_spectrum(&e.vectors, &diag)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    eigh(m).values.iter().map(|v| v.abs()).sum()
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    *eigh(m).values.last().unwrap_or(&0.0)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `m^{⊗k}`; `k = 0` gives the 1×1 identity.
pub fn kron_power(m: &CMat, k: usize) -> CMat {
    let mut out = identity(1);
    for _ in 0..k {
        out = kron(&out, m);
    }
    out
}

pub fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::dim("dimension must be positive"));
    }
    if dim > MAX_DIM {
        return Err(Error::Size(format!(
            "dimension {dim} exceeds the maximum {MAX_DIM}"
        )));
    }
    Ok(())
}

/// Which tensor factor survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Keep {
    A,
    B,
}

pub fn partial_trace_matrix(m: &CMat, d_a: usize, d_b: usize, keep: Keep) -> Result<CMat> {
    if m.nrows() != d_a * d_b || m.ncols() != d_a * d_b {
        return Err(Error::dim(format!(
            "matrix is {}x{}, expected factorization {d_a}·{d_b}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(match keep {
        Keep::A => CMat::from_fn(d_a, d_a, |i, j| {
            (0..d_b).map(|k| m[(i * d_b + k, j * d_b + k)]).sum()
        }),
        Keep::B => CMat::from_fn(d_b, d_b, |k, l| {
            (0..d_a).map(|i| m[(i * d_b + k, i * d_b + l)]).sum()
        }),
    })
}

/// Permutation taking the interleaved order `A1 B1 A2 B2 … Am Bm` of
/// `(AB)^{⊗m}` to the grouped order `A1 … Am B1 … Bm`.
///
/// `perm[grouped_index] = interleaved_index`.
pub fn regroup_permutation(d_a: usize, d_b: usize, m: usize) -> Vec<usize> {
    let dim_a = d_a.pow(m as u32);
    let dim_b = d_b.pow(m as u32);
    let mut perm = vec![0; dim_a * dim_b];
    for ia in 0..dim_a {
        let a_digits = digits(ia, d_a, m);
        for ib in 0..dim_b {
            let b_digits = digits(ib, d_b, m);
            let mut idx = 0;
            for k in 0..m {
                idx = idx * d_a + a_digits[k];
                idx = idx * d_b + b_digits[k];
            }
            perm[ia * dim_b + ib] = idx;
        }
    }
    perm
}

/// Reorders an operator on `(AB)^{⊗m}` into `A^{⊗m} ⊗ B^{⊗m}` ordering.
pub fn regroup(m_op: &CMat, d_a: usize, d_b: usize, m: usize) -> CMat {
    if m == 1 {
        return m_op.clone();
    }
    let perm = regroup_permutation(d_a, d_b, m);
    let n = perm.len();
    CMat::from_fn(n, n, |i, j| m_op[(perm[i], perm[j])])
}

/// Base-`d` digits of `idx`, most significant first, padded to `len`.
pub fn digits(mut idx: usize, d: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for k in (0..len).rev() {
        out[k] = idx % d;
        idx /= d;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[c(0.3), Complex64::new(0.1, 0.2), Complex64::new(0.1, -0.2), c(0.7)],
        );
        let e = eigh(&m);
        assert!(e.values[0] >= e.values[1]);
        let diag: Vec<Complex64> = e.values.iter().map(|&v| c(v)).collect();
        let back = from_spectrum(&e.vectors, &diag);
        assert!(frobenius(&(back - &m)) < 1e-14);
    }

    #[test]
    fn regroup_is_identity_for_single_block() {
        assert_eq!(regroup_permutation(2, 3, 1), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn regroup_swaps_middle_factors() {
        // (A1 B1 A2 B2) -> (A1 A2 B1 B2) for qubits: grouped index a1 a2 b1 b2.
        let perm = regroup_permutation(2, 2, 2);
        // grouped |a1=0 a2=1 b1=1 b2=0> = 0b0110 = 6 -> interleaved a1 b1 a2 b2 = 0 1 1 0 = 6
        assert_eq!(perm[6], 6);
        // grouped |a1=0 a2=1 b1=0 b2=0> = 0b0100 = 4 -> interleaved 0 0 1 0 = 2
        assert_eq!(perm[4], 2);
    }

    #[test]
    fn partial_trace_rejects_bad_factorization() {
        let m = identity(6);
        assert!(partial_trace_matrix(&m, 4, 2, Keep::A).is_err());
    }
}
