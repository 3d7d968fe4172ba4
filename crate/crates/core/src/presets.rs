//! Named state families: isotropic and Werner states, their extremal members,
//! Bell-type pairs and classical-quantum builders.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::state::{BipartitePair, DensityOperator};

/// Maximally entangled state `Φ = |Φ⟩⟨Φ|` with `|Φ⟩ = d^{-1/2} Σ_i |ii⟩`.
pub fn max_entangled(d: usize) -> Result<DensityOperator> {
    check_d(d, 1)?;
    let mut v = vec![linalg::ZERO; d * d];
    for i in 0..d {
        v[i * d + i] = linalg::ONE;
    }
    DensityOperator::pure(&v)
}

/// `Φ^⊥ = (I − Φ)/(d² − 1)`.
pub fn phi_perp(d: usize) -> Result<DensityOperator> {
    check_d(d, 2)?;
    let phi = max_entangled(d)?;
    let m = (linalg::identity(d * d) - phi.matrix()).scale(1.0 / (d * d - 1) as f64);
    DensityOperator::new(m)
}

/// Swap operator `F = Σ_{ij} |i⟩⟨j| ⊗ |j⟩⟨i|`.
pub fn swap(d: usize) -> CMat {
    let mut f = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(i * d + j, j * d + i)] = linalg::ONE;
        }
    }
    f
}

/// Symmetric state `Θ = (I + F)/(d(d+1))`.
pub fn theta(d: usize) -> Result<DensityOperator> {
    check_d(d, 2)?;
    let m = (linalg::identity(d * d) + swap(d)).scale(1.0 / (d * (d + 1)) as f64);
    DensityOperator::new(m)
}

/// Antisymmetric state `Θ^⊥ = (I − F)/(d(d−1))`.
pub fn theta_perp(d: usize) -> Result<DensityOperator> {
    check_d(d, 2)?;
    let m = (linalg::identity(d * d) - swap(d)).scale(1.0 / (d * (d - 1)) as f64);
    DensityOperator::new(m)
}

/// Isotropic state `p Φ + (1 − p) Φ^⊥`.
pub fn isotropic(p: f64, d: usize) -> Result<DensityOperator> {
    check_p(p)?;
    mix(p, &max_entangled(d)?, &phi_perp(d)?)
}

/// Werner state `p Θ + (1 − p) Θ^⊥`.
pub fn werner(p: f64, d: usize) -> Result<DensityOperator> {
    check_p(p)?;
    mix(p, &theta(d)?, &theta_perp(d)?)
}

/// The four two-qubit Bell-type states used in the orthogonal-discrimination
/// examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellVariant {
    /// `(|00⟩ + |11⟩)/√2`
    PhiPlus,
    /// `(|01⟩ + |10⟩)/√2`
    PsiPlus,
    /// `(|++⟩ + |−−⟩)/√2`
    PlusPlus,
    /// `(|+−⟩ + |−+⟩)/√2`
    PlusMinus,
}

pub fn bell(variant: BellVariant) -> Result<DensityOperator> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [c(s), c(s)];
    let minus = [c(s), c(-s)];
    let zero = [linalg::ONE, linalg::ZERO];
    let one = [linalg::ZERO, linalg::ONE];
    let pair = |a: &[Complex64; 2], b: &[Complex64; 2], x: &[Complex64; 2], y: &[Complex64; 2]| {
        let mut v = vec![linalg::ZERO; 4];
        for i in 0..2 {
            for j in 0..2 {
                v[2 * i + j] = a[i] * b[j] + x[i] * y[j];
            }
        }
        v
    };
    let v = match variant {
        BellVariant::PhiPlus => pair(&zero, &zero, &one, &one),
        BellVariant::PsiPlus => pair(&zero, &one, &one, &zero),
        BellVariant::PlusPlus => pair(&plus, &plus, &minus, &minus),
        BellVariant::PlusMinus => pair(&plus, &minus, &minus, &plus),
    };
    DensityOperator::pure(&v)
}

/// Classical-quantum state `Σ_x p(x) |x⟩⟨x| ⊗ ρ_x`.
pub fn cq_state(p_x: &[f64], blocks: &[DensityOperator]) -> Result<DensityOperator> {
    if p_x.len() != blocks.len() || blocks.is_empty() {
        return Err(Error::invalid(
            "cq state needs one conditional state per classical symbol",
        ));
    }
    let d_b = blocks[0].dim();
    if blocks.iter().any(|b| b.dim() != d_b) {
        return Err(Error::dim("conditional states must share a dimension"));
    }
    if p_x.iter().any(|&p| !(p >= 0.0)) || (p_x.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("classical distribution must be a pmf"));
    }
    let n = p_x.len();
    let mut m = CMat::zeros(n * d_b, n * d_b);
    for (x, (p, block)) in p_x.iter().zip(blocks).enumerate() {
        for i in 0..d_b {
            for j in 0..d_b {
                m[(x * d_b + i, x * d_b + j)] = block.matrix()[(i, j)] * *p;
            }
        }
    }
    DensityOperator::new(m)
}

/// Named family selector used by the file format and the CLI.
#[derive(Debug, Clone)]
pub enum Preset {
    State(DensityOperator),
    Pair(BipartitePair),
}

impl Preset {
    pub fn into_state(self) -> Result<DensityOperator> {
        match self {
            Preset::State(s) => Ok(s),
            Preset::Pair(_) => Err(Error::invalid("preset names a pair, expected a state")),
        }
    }

    pub fn into_pair(self) -> Result<BipartitePair> {
        match self {
            Preset::Pair(p) => Ok(p),
            Preset::State(_) => Err(Error::invalid("preset names a state, expected a pair")),
        }
    }
}

/// Builds a named state or pair.
///
/// States: `isotropic(p)`, `werner(p)`, `max_entangled`, `phi_perp`, `theta`,
/// `theta_perp`, `maximally_mixed`, `bell_phi_plus`, `bell_psi_plus`,
/// `bell_plus_plus`, `bell_plus_minus`.
/// Pairs: `example1_z`, `example1_x`, `example2` (`Φ` vs `Φ^⊥`),
/// `isotropic_pair(p, q)`, `werner_pair(p, q)`, `cq_kappa` (the
/// classical-quantum instance with `ψ = |0⟩⟨0|`, `p̃_X = (p, 1 − p)`).
pub fn preset(name: &str, params: &[f64], d: usize) -> Result<Preset> {
    let param = |i: usize| -> Result<f64> {
        params
            .get(i)
            .copied()
            .ok_or_else(|| Error::invalid(format!("preset {name} needs parameter #{i}")))
    };
    let state = |s: DensityOperator| Ok(Preset::State(s));
    match name {
        "isotropic" => state(isotropic(param(0)?, d)?),
        "werner" => state(werner(param(0)?, d)?),
        "max_entangled" => state(max_entangled(d)?),
        "phi_perp" => state(phi_perp(d)?),
        "theta" => state(theta(d)?),
        "theta_perp" => state(theta_perp(d)?),
        "maximally_mixed" => state(DensityOperator::maximally_mixed(d)?),
        "bell_phi_plus" => state(bell(BellVariant::PhiPlus)?),
        "bell_psi_plus" => state(bell(BellVariant::PsiPlus)?),
        "bell_plus_plus" => state(bell(BellVariant::PlusPlus)?),
        "bell_plus_minus" => state(bell(BellVariant::PlusMinus)?),
        "example1_z" => Ok(Preset::Pair(BipartitePair::new(
            2,
            2,
            bell(BellVariant::PhiPlus)?,
            bell(BellVariant::PsiPlus)?,
        )?)),
        "example1_x" => Ok(Preset::Pair(BipartitePair::new(
            2,
            2,
            bell(BellVariant::PlusPlus)?,
            bell(BellVariant::PlusMinus)?,
        )?)),
        "example2" => Ok(Preset::Pair(BipartitePair::new(
            d,
            d,
            max_entangled(d)?,
            phi_perp(d)?,
        )?)),
        "isotropic_pair" => Ok(Preset::Pair(BipartitePair::new(
            d,
            d,
            isotropic(param(0)?, d)?,
            isotropic(param(1)?, d)?,
        )?)),
        "werner_pair" => Ok(Preset::Pair(BipartitePair::new(
            d,
            d,
            werner(param(0)?, d)?,
            werner(param(1)?, d)?,
        )?)),
        "cq_kappa" => {
            let (pair, _, _, _) = kappa_cq_pair(param(0)?)?;
            Ok(Preset::Pair(pair))
        }
        other => Err(Error::invalid(format!("unknown preset {other:?}"))),
    }
}

/// States of the geometric-mean gap instance: `ψ = |0⟩⟨0|`,
/// `ρ̃_0 = 0.4|0⟩⟨0| + 0.6|1⟩⟨1|`, `ρ̃_1 = 0.1|+⟩⟨+| + 0.9|−⟩⟨−|`.
pub fn kappa_instance() -> Result<(DensityOperator, DensityOperator, DensityOperator)> {
    let psi = DensityOperator::basis_state(2, 0)?;
    let r0 = DensityOperator::diagonal(&[0.4, 0.6])?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = DensityOperator::pure(&[c(s), c(s)])?;
    let minus = DensityOperator::pure(&[c(s), c(-s)])?;
    let r1 = mix(0.1, &plus, &minus)?;
    Ok((psi, r0, r1))
}

/// Classical-quantum pair with uniform `p_X`, `ρ_0 = ρ_1 = ψ` under the null
/// and `p̃_X = (p̃, 1 − p̃)`, conditionals `(ρ̃_0, ρ̃_1)` from
/// [`kappa_instance`] under the alternative.
///
/// Returns the pair together with `(ψ, ρ̃_0, ρ̃_1)`.
pub fn kappa_cq_pair(
    p_tilde: f64,
) -> Result<(BipartitePair, DensityOperator, DensityOperator, DensityOperator)> {
    if !(p_tilde > 0.0 && p_tilde < 1.0) {
        return Err(Error::invalid("p̃_X(0) must lie strictly inside (0, 1)"));
    }
    let (psi, r0, r1) = kappa_instance()?;
    let null = cq_state(&[0.5, 0.5], &[psi.clone(), psi.clone()])?;
    let alt = cq_state(&[p_tilde, 1.0 - p_tilde], &[r0.clone(), r1.clone()])?;
    Ok((BipartitePair::new(2, 2, null, alt)?, psi, r0, r1))
}

fn mix(p: f64, a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    DensityOperator::new(a.matrix().scale(p) + b.matrix().scale(1.0 - p))
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("parameter p = {p} outside [0, 1]")));
    }
    Ok(())
}

fn check_d(d: usize, min: usize) -> Result<()> {
    if d < min.max(1) {
        return Err(Error::invalid(format!("local dimension d = {d} must be >= {min}")));
    }
    Ok(())
}
