//! Density operators, bipartite hypothesis pairs and projective measurements.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, Eigh, Keep};

/// Entrywise asymmetry tolerated (and symmetrized away) on ingestion.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue still accepted as PSD.
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Default eigenvalue threshold separating the support from the kernel.
pub const DEFAULT_EIG_CUTOFF: f64 = 1e-10;
/// Gram-matrix tolerance for orthonormal bases.
pub const BASIS_TOL: f64 = 1e-10;
/// Leakage outside a support projector still counted as contained.
pub const SUPPORT_TOL: f64 = 1e-9;

/// A Hermitian, positive semidefinite, unit-trace matrix with lazily cached
/// spectral data.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: CMat,
    eig_cutoff: f64,
    spectrum: OnceLock<Eigh>,
}

impl DensityOperator {
    /// Validates and wraps `matrix`. Asymmetry up to `1e-12` is symmetrized.
    pub fn new(matrix: CMat) -> Result<Self> {
        Self::with_cutoff(matrix, DEFAULT_EIG_CUTOFF)
    }

    pub fn with_cutoff(matrix: CMat, eig_cutoff: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::dim(format!(
                "density matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        linalg::check_dim(matrix.nrows())?;
        if !(eig_cutoff >= 0.0) {
            return Err(Error::invalid("eigenvalue cutoff must be nonnegative"));
        }
        let defect = linalg::hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::invalid(format!(
                "matrix is not Hermitian (asymmetry {defect:.3e})"
            )));
        }
        let matrix = linalg::symmetrize(&matrix);
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::invalid(format!("trace is {tr}, expected 1")));
        }
        let state = DensityOperator {
            matrix,
            eig_cutoff,
            spectrum: OnceLock::new(),
        };
        let min = state.raw_spectrum().values.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::invalid(format!(
                "matrix is not positive semidefinite (min eigenvalue {min:.3e})"
            )));
        }
        Ok(state)
    }

    /// `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::invalid("pure state vector is zero"));
        }
        let n = v.len();
        let m = CMat::from_fn(n, n, |i, j| v[i] * v[j].conj() / norm);
        Self::new(m)
    }

    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::invalid(format!("basis index {index} >= dim {dim}")));
        }
        let mut v = vec![linalg::ZERO; dim];
        v[index] = linalg::ONE;
        Self::pure(&v)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        linalg::check_dim(dim)?;
        Self::new(linalg::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let n = probs.len();
        let mut m = CMat::zeros(n, n);
        for (i, &p) in probs.iter().enumerate() {
            m[(i, i)] = c(p);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn eig_cutoff(&self) -> f64 {
        self.eig_cutoff
    }

    /// Unclamped eigendecomposition, eigenvalues descending.
    pub fn raw_spectrum(&self) -> &Eigh {
        self.spectrum.get_or_init(|| linalg::eigh(&self.matrix))
    }

    /// Eigenvalues (descending) with everything at or below the cutoff
    /// reported as zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.raw_spectrum()
            .values
            .iter()
            .map(|&v| if v > self.eig_cutoff { v } else { 0.0 })
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.raw_spectrum()
            .values
            .iter()
            .filter(|&&v| v > self.eig_cutoff)
            .count()
    }

    pub fn is_pure(&self) -> bool {
        self.rank() == 1
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.raw_spectrum().values.last().copied().unwrap_or(0.0)
    }

    /// Projector onto the eigenvectors with eigenvalue above the cutoff.
    pub fn support_projector(&self) -> CMat {
        support_projector(self.raw_spectrum(), self.eig_cutoff)
    }

    /// Re-validates `matrix` with this state's cutoff.
    fn derived(&self, matrix: CMat) -> Result<Self> {
        Self::with_cutoff(matrix, self.eig_cutoff)
    }
}

fn support_projector(e: &Eigh, cutoff: f64) -> CMat {
    let n = e.vectors.nrows();
    let diag: Vec<Complex64> = e
        .values
        .iter()
        .map(|&v| if v > cutoff { linalg::ONE } else { linalg::ZERO })
        .collect();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    linalg::from_spectrum(&e.vectors, &diag)
}

/// `a ⊗ b`.
pub fn tensor_product(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .ok_or_else(|| Error::Size("tensor dimension overflow".into()))?;
    linalg::check_dim(dim)?;
    a.derived(linalg::kron(a.matrix(), b.matrix()))
}

/// `state^{⊗k}`.
pub fn tensor_power(state: &DensityOperator, k: usize) -> Result<DensityOperator> {
    if k == 0 {
        return Err(Error::invalid("tensor power must be at least 1"));
    }
    let dim = state
        .dim()
        .checked_pow(k as u32)
        .ok_or_else(|| Error::Size("tensor dimension overflow".into()))?;
    linalg::check_dim(dim)?;
    state.derived(linalg::kron_power(state.matrix(), k))
}

pub fn partial_trace(
    state: &DensityOperator,
    dims: (usize, usize),
    keep: Keep,
) -> Result<DensityOperator> {
    let m = linalg::partial_trace_matrix(state.matrix(), dims.0, dims.1, keep)?;
    state.derived(m)
}

/// Eigenvalues (descending, cutoff-zeroed) and the eigenbasis.
pub fn spectral(state: &DensityOperator) -> (Vec<f64>, PvmBasis) {
    let basis = PvmBasis {
        vectors: state.raw_spectrum().vectors.clone(),
    };
    (state.eigenvalues(), basis)
}

/// Spectral decomposition of an arbitrary Hermitian matrix.
pub fn spectral_matrix(m: &CMat, cutoff: f64) -> Result<(Vec<f64>, PvmBasis)> {
    if m.nrows() != m.ncols() {
        return Err(Error::dim("matrix must be square"));
    }
    let defect = linalg::hermitian_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian (asymmetry {defect:.3e})"
        )));
    }
    let e = linalg::eigh(m);
    let values = e
        .values
        .iter()
        .map(|&v| if v.abs() > cutoff { v } else { 0.0 })
        .collect();
    Ok((values, PvmBasis { vectors: e.vectors }))
}

/// Whether `supp(a) ⊆ supp(b)`, with `b`'s support taken at `b`'s cutoff.
pub fn support_contained(a: &DensityOperator, b: &DensityOperator) -> bool {
    support_contained_matrix(a.matrix(), b.matrix(), b.eig_cutoff())
}

/// Support containment for a PSD `a` inside the support of a PSD `b`.
pub fn support_contained_matrix(a: &CMat, b: &CMat, cutoff: f64) -> bool {
    if a.nrows() != b.nrows() {
        return false;
    }
    let e = linalg::eigh(b);
    let complement = linalg::identity(b.nrows()) - support_projector(&e, cutoff);
    let leak = &complement * a * &complement;
    linalg::frobenius(&leak) <= SUPPORT_TOL
}

/// Pinching with respect to the rank-one projectors of `basis`:
/// `Σ_i |v_i⟩⟨v_i| op |v_i⟩⟨v_i|`.
pub fn pinch(op: &CMat, basis: &PvmBasis) -> Result<CMat> {
    if op.nrows() != basis.dim() || op.ncols() != basis.dim() {
        return Err(Error::dim(format!(
            "operator is {}x{}, basis has dimension {}",
            op.nrows(),
            op.ncols(),
            basis.dim()
        )));
    }
    let v = &basis.vectors;
    let rotated = v.adjoint() * op * v;
    let diag: Vec<Complex64> = (0..basis.dim()).map(|i| rotated[(i, i)]).collect();
    Ok(linalg::from_spectrum(v, &diag))
}

/// An orthonormal basis, i.e. a rank-one projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct PvmBasis {
    vectors: CMat,
}

impl PvmBasis {
    /// Columns of `vectors` are the basis vectors.
    pub fn new(vectors: CMat) -> Result<Self> {
        if vectors.nrows() != vectors.ncols() || vectors.nrows() == 0 {
            return Err(Error::dim("basis must consist of dim vectors of length dim"));
        }
        let gram = vectors.adjoint() * &vectors;
        let defect = linalg::frobenius(&(gram - linalg::identity(vectors.nrows())));
        if defect > BASIS_TOL {
            return Err(Error::invalid(format!(
                "basis vectors are not orthonormal (Gram defect {defect:.3e})"
            )));
        }
        Ok(PvmBasis { vectors })
    }

    /// Skips validation; for unitaries produced internally.
    pub(crate) fn from_unitary_unchecked(u: CMat) -> Self {
        PvmBasis { vectors: u }
    }

    pub fn computational(dim: usize) -> Self {
        PvmBasis {
            vectors: linalg::identity(dim),
        }
    }

    /// Discrete Fourier basis; for `dim = 2` this is the `|±⟩` basis.
    pub fn fourier(dim: usize) -> Self {
        let norm = 1.0 / (dim as f64).sqrt();
        let vectors = CMat::from_fn(dim, dim, |j, k| {
            let angle = 2.0 * std::f64::consts::PI * (j * k) as f64 / dim as f64;
            Complex64::from_polar(norm, angle)
        });
        PvmBasis { vectors }
    }

    /// Qubit eigenbasis of Pauli Y.
    pub fn pauli_y() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let vectors = CMat::from_row_slice(
            2,
            2,
            &[c(s), c(s), Complex64::new(0.0, s), Complex64::new(0.0, -s)],
        );
        PvmBasis { vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        self.vectors.column(i).iter().copied().collect()
    }

    pub fn kron(&self, other: &PvmBasis) -> PvmBasis {
        PvmBasis {
            vectors: linalg::kron(&self.vectors, &other.vectors),
        }
    }

    pub fn power(&self, k: usize) -> PvmBasis {
        PvmBasis {
            vectors: linalg::kron_power(&self.vectors, k),
        }
    }

    /// Outcome probabilities `⟨v_i|m|v_i⟩` (real parts).
    pub fn outcome_weights(&self, m: &CMat) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let col = self.vectors.column(i);
                let mv = m * col;
                col.iter().zip(mv.iter()).map(|(a, b)| (a.conj() * b).re).sum()
            })
            .collect()
    }
}

/// A product of local bases on `A^{⊗m}` and `B^{⊗m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPvm {
    pub basis_a: PvmBasis,
    pub basis_b: PvmBasis,
    pub d_a: usize,
    pub d_b: usize,
    pub block_size: usize,
}

impl LocalPvm {
    pub fn new(
        basis_a: PvmBasis,
        basis_b: PvmBasis,
        d_a: usize,
        d_b: usize,
        block_size: usize,
    ) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::invalid("block size must be at least 1"));
        }
        let want_a = d_a.checked_pow(block_size as u32);
        let want_b = d_b.checked_pow(block_size as u32);
        if want_a != Some(basis_a.dim()) || want_b != Some(basis_b.dim()) {
            return Err(Error::dim(format!(
                "local bases have dimensions {}, {}; expected {d_a}^{block_size}, {d_b}^{block_size}",
                basis_a.dim(),
                basis_b.dim()
            )));
        }
        Ok(LocalPvm {
            basis_a,
            basis_b,
            d_a,
            d_b,
            block_size,
        })
    }

    pub fn computational(d_a: usize, d_b: usize, block_size: usize) -> Self {
        LocalPvm {
            basis_a: PvmBasis::computational(d_a.pow(block_size as u32)),
            basis_b: PvmBasis::computational(d_b.pow(block_size as u32)),
            d_a,
            d_b,
            block_size,
        }
    }

    /// Single-copy product basis on `A ⊗ B`.
    pub fn joint_basis(&self) -> PvmBasis {
        self.basis_a.kron(&self.basis_b)
    }
}

/// A null/alternative hypothesis pair on `A ⊗ B`.
#[derive(Debug, Clone)]
pub struct BipartitePair {
    pub d_a: usize,
    pub d_b: usize,
    pub null_state: DensityOperator,
    pub alt_state: DensityOperator,
}

impl BipartitePair {
    pub fn new(
        d_a: usize,
        d_b: usize,
        null_state: DensityOperator,
        alt_state: DensityOperator,
    ) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::dim("subsystem dimensions must be positive"));
        }
        let want = d_a * d_b;
        if null_state.dim() != want || alt_state.dim() != want {
            return Err(Error::dim(format!(
                "states have dimensions {}, {}; expected {d_a}·{d_b} = {want}",
                null_state.dim(),
                alt_state.dim()
            )));
        }
        Ok(BipartitePair {
            d_a,
            d_b,
            null_state,
            alt_state,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    pub fn null_marginals(&self) -> Result<(DensityOperator, DensityOperator)> {
        Ok((
            partial_trace(&self.null_state, self.dims(), Keep::A)?,
            partial_trace(&self.null_state, self.dims(), Keep::B)?,
        ))
    }

    pub fn alt_marginals(&self) -> Result<(DensityOperator, DensityOperator)> {
        Ok((
            partial_trace(&self.alt_state, self.dims(), Keep::A)?,
            partial_trace(&self.alt_state, self.dims(), Keep::B)?,
        ))
    }

    /// Frobenius distance of the alternative from the product of its marginals.
    pub fn alt_product_defect(&self) -> Result<f64> {
        let (a, b) = self.alt_marginals()?;
        let prod = linalg::kron(a.matrix(), b.matrix());
        Ok(linalg::frobenius(&(self.alt_state.matrix() - prod)))
    }

    /// `ρ_A ⊗ ρ_B ≪ ρ̃_AB`.
    pub fn support_condition(&self) -> Result<bool> {
        let (a, b) = self.null_marginals()?;
        let prod = linalg::kron(a.matrix(), b.matrix());
        Ok(support_contained_matrix(
            &prod,
            self.alt_state.matrix(),
            self.alt_state.eig_cutoff(),
        ))
    }

    pub fn swapped(&self) -> BipartitePair {
        BipartitePair {
            d_a: self.d_a,
            d_b: self.d_b,
            null_state: self.alt_state.clone(),
            alt_state: self.null_state.clone(),
        }
    }
}
