//! Random instances for tests, property checks and the CLI.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::pmf::JointPmf;
use crate::state::{DensityOperator, PvmBasis};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// `rows × cols` matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { linalg::ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_basis<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PvmBasis {
    PvmBasis::from_unitary_unchecked(haar_unitary(d, rng))
}

/// Density operator `G G† / tr(G G†)` with `G` a `d × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<DensityOperator> {
    if rank == 0 || rank > d {
        return Err(Error::invalid(format!("rank {rank} must be in 1..={d}")));
    }
    let g = ginibre(d, rank, rng);
    let m = &g * g.adjoint();
    let t = linalg::trace(&m).re;
    DensityOperator::new(linalg::symmetrize(&(m / c(t))))
}

pub fn random_full_rank<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DensityOperator> {
    random_density(d, d, rng)
}

pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DensityOperator> {
    random_density(d, 1, rng)
}

/// Uniform point of the probability simplex.
pub fn random_simplex<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_joint_pmf<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<JointPmf> {
    JointPmf::from_weights(rows, cols, random_simplex(rows * cols, rng))
}

pub fn random_pmf_diagonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DensityOperator> {
    DensityOperator::diagonal(&random_simplex(d, rng))
}

/// Hermitian `0 ≤ M ≤ I` with uniform eigenvalues in a Haar-random basis.
pub fn random_contraction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let u = haar_unitary(d, rng);
    let values: Vec<Complex64> = (0..d).map(|_| c(rng.random::<f64>())).collect();
    linalg::symmetrize(&linalg::from_spectrum(&u, &values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..6 {
            let u = haar_unitary(d, &mut rng);
            let defect = (u.adjoint() * &u - linalg::identity(d)).norm();
            assert!(defect < 1e-12);
        }
    }

    #[test]
    fn densities_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(4, 2, &mut rng).unwrap();
        assert_eq!(rho.rank(), 2);
        assert!((linalg::trace(rho.matrix()).re - 1.0).abs() < 1e-12);
        assert!(random_density(3, 0, &mut rng).is_err());
    }

    #[test]
    fn contraction_spectrum_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_contraction(5, &mut rng);
        let e = linalg::eigh(&m);
        assert!(e.values.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn same_seed_same_instance() {
        let a = random_joint_pmf(2, 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_joint_pmf(2, 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
