//! Blowing-up constructions and their numerical verification.
//!
//! Strings over `[0, d)` of length `n` are encoded as base-`d` integers with
//! the first symbol most significant, matching the order of Kronecker
//! products. Every projector built here is diagonal in a product basis, so
//! the traces are exact sums over strings.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{self, PRODUCT_TOL};
use crate::ext::ExtReal;
use crate::linalg::{self, c, CMat, Keep};
use crate::state::{self, BipartitePair, DensityOperator};

/// Largest Hamming neighborhood `hamming_blowup` will materialize.
pub const MAX_BLOWUP_SIZE: usize = 1 << 24;
/// Largest `d^n` for a dense `M` in `verify_blowup`.
pub const MAX_DENSE_STRINGS: usize = 1 << 10;
/// Largest `d^n` enumerated by the verifiers.
pub const MAX_ENUM_STRINGS: usize = 1 << 20;
/// Slack below which a verified inequality counts as violated.
pub const SLACK_TOL: f64 = 1e-12;

const CHUNK: usize = 4096;
const CONTRACTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupParams {
    pub n: usize,
    pub epsilon_n: f64,
    pub r_n: f64,
}

impl BlowupParams {
    pub fn new(n: usize, epsilon_n: f64, r_n: f64) -> Result<Self> {
        let p = BlowupParams { n, epsilon_n, r_n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if !(self.epsilon_n > 0.0 && self.epsilon_n <= 1.0) {
            return Err(Error::invalid(format!(
                "epsilon_n = {} is outside (0, 1]",
                self.epsilon_n
            )));
        }
        if !(self.r_n >= 0.0) || !self.r_n.is_finite() {
            return Err(Error::invalid(format!("r_n = {} must be >= 0", self.r_n)));
        }
        Ok(())
    }

    /// `⌈l_n⌉`, the integer Hamming radius.
    pub fn radius(&self) -> usize {
        l_n_size(self).ceil() as usize
    }

    /// Parameters along the zero-rate schedule `ε_n = (1 − ε)/|W_n|²`,
    /// `r_n = n^{1/3}`.
    pub fn zero_rate_schedule(n: usize, epsilon: f64, message_size: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) || !(message_size >= 1.0) {
            return Err(Error::invalid(
                "need epsilon in [0, 1) and a message size of at least 1",
            ));
        }
        BlowupParams::new(
            n,
            (1.0 - epsilon) / (message_size * message_size),
            (n as f64).cbrt(),
        )
    }
}

/// `√n (√(−½ ln(ε_n/2)) + r_n)`.
pub fn l_n_size(p: &BlowupParams) -> f64 {
    (p.n as f64).sqrt() * ((-0.5 * (0.5 * p.epsilon_n).ln()).sqrt() + p.r_n)
}

/// Natural log of `Σ_{l=1}^{L} C(n, l)`, summed exactly.
pub fn ln_binomial_sum(n: usize, upper: usize) -> f64 {
    let mut term = BigUint::from(1u32);
    let mut sum = BigUint::zero();
    for l in 1..=upper.min(n) {
        term = term * BigUint::from(n - l + 1) / BigUint::from(l);
        sum += &term;
    }
    ln_big(&sum)
}

fn ln_big(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln γ_n = ln 2 + L ln d + ln Σ_{l≤L} C(n,l) − ln ε_n − L ln μ` with
/// `L = ⌈l_n⌉`; infinite when `μ = 0`.
pub fn ln_gamma_factor(p: &BlowupParams, d: usize, mu_min: f64) -> Result<ExtReal> {
    p.validate()?;
    if d == 0 {
        return Err(Error::invalid("alphabet size must be positive"));
    }
    if !(0.0..=1.0).contains(&mu_min) {
        return Err(Error::invalid(format!("mu_min = {mu_min} is outside [0, 1]")));
    }
    if mu_min == 0.0 {
        return Ok(ExtReal::Infinite);
    }
    let big_l = p.radius();
    let lf = big_l as f64;
    Ok(ExtReal::Finite(
        std::f64::consts::LN_2 + lf * (d as f64).ln() + ln_binomial_sum(p.n, big_l)
            - p.epsilon_n.ln()
            - lf * mu_min.ln(),
    ))
}

/// The blowing-up factor itself. Values beyond the `f64` range saturate to
/// the infinite sentinel; use `ln_gamma_factor` for those.
pub fn gamma_factor(p: &BlowupParams, d: usize, mu_min: f64) -> Result<ExtReal> {
    Ok(match ln_gamma_factor(p, d, mu_min)? {
        ExtReal::Finite(v) => ExtReal::from_f64(v.exp()),
        ExtReal::Infinite => ExtReal::Infinite,
    })
}

/// `(1/n) ln γ_n`.
pub fn normalized_log_gamma(p: &BlowupParams, d: usize, mu_min: f64) -> Result<ExtReal> {
    Ok(ln_gamma_factor(p, d, mu_min)?.scale(1.0 / p.n as f64))
}

/// A set of length-`n` strings over `[0, d)`, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    n: usize,
    d: usize,
    members: Vec<usize>,
}

impl IndexSet {
    pub fn new(n: usize, d: usize, mut members: Vec<usize>) -> Result<Self> {
        let total = string_count(d, n)?;
        if let Some(&bad) = members.iter().find(|&&m| m >= total) {
            return Err(Error::invalid(format!("code {bad} is not a string of length {n}")));
        }
        members.sort_unstable();
        members.dedup();
        Ok(IndexSet { n, d, members })
    }

    pub fn from_strings(d: usize, strings: &[Vec<usize>]) -> Result<Self> {
        let n = strings.first().map_or(0, Vec::len);
        let mut codes = Vec::with_capacity(strings.len());
        for s in strings {
            if s.len() != n || s.iter().any(|&x| x >= d) {
                return Err(Error::invalid(format!("{s:?} is not a string over [0, {d})^{n}")));
            }
            codes.push(s.iter().fold(0, |acc, &x| acc * d + x));
        }
        IndexSet::new(n, d, codes)
    }

    pub fn full(n: usize, d: usize) -> Result<Self> {
        Ok(IndexSet {
            n,
            d,
            members: (0..string_count(d, n)?).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.d
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, code: usize) -> bool {
        self.members.binary_search(&code).is_ok()
    }

    pub fn string(&self, code: usize) -> Vec<usize> {
        linalg::digits(code, self.d, self.n)
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    /// `Σ_{x^n ∈ S} Π_i w[x_i]`.
    pub fn product_mass(&self, weights: &[f64]) -> f64 {
        product_mass(&self.members, self.d, self.n, weights)
    }

    fn complement(&self) -> Vec<usize> {
        let total = self.d.pow(self.n as u32);
        (0..total).filter(|&m| !self.contains(m)).collect()
    }
}

fn string_count(d: usize, n: usize) -> Result<usize> {
    d.checked_pow(n as u32)
        .filter(|&t| t <= MAX_BLOWUP_SIZE)
        .ok_or_else(|| Error::Size(format!("{d}^{n} strings exceed the enumeration limit")))
}

fn product_mass(codes: &[usize], d: usize, n: usize, weights: &[f64]) -> f64 {
    let partial: Vec<f64> = codes
        .par_chunks(CHUNK)
        .map(|chunk| {
            chunk
                .iter()
                .map(|&code| string_weight(code, d, n, weights))
                .sum::<f64>()
        })
        .collect();
    partial.iter().sum()
}

fn string_weight(mut code: usize, d: usize, n: usize, weights: &[f64]) -> f64 {
    let mut w = 1.0;
    for _ in 0..n {
        w *= weights[code % d];
        code /= d;
    }
    w
}

/// Strings whose diagonal entry `⟨x^n|M|x^n⟩` is at least `ε_n / 2`.
pub fn build_j_set(m_diag: &[f64], d: usize, p: &BlowupParams) -> Result<IndexSet> {
    p.validate()?;
    let total = string_count(d, p.n)?;
    if m_diag.len() != total {
        return Err(Error::dim(format!(
            "diagonal has length {}, expected {d}^{} = {total}",
            m_diag.len(),
            p.n
        )));
    }
    if let Some(v) = m_diag
        .iter()
        .find(|&&v| !(-CONTRACTION_TOL..=1.0 + CONTRACTION_TOL).contains(&v))
    {
        return Err(Error::invalid(format!("diagonal entry {v} is outside [0, 1]")));
    }
    let threshold = 0.5 * p.epsilon_n;
    let members = (0..total).filter(|&i| m_diag[i] >= threshold).collect();
    Ok(IndexSet {
        n: p.n,
        d,
        members,
    })
}

/// All strings within Hamming distance `⌈radius⌉` of a member.
pub fn hamming_blowup(s: &IndexSet, radius: f64) -> Result<IndexSet> {
    hamming_blowup_limited(s, radius, MAX_BLOWUP_SIZE)
}

pub fn hamming_blowup_limited(s: &IndexSet, radius: f64, limit: usize) -> Result<IndexSet> {
    if !(radius >= 0.0) {
        return Err(Error::invalid(format!("radius {radius} must be >= 0")));
    }
    let (n, d) = (s.n, s.d);
    let steps = (radius.ceil() as usize).min(n);
    let powers: Vec<usize> = (0..n).map(|k| d.pow((n - 1 - k) as u32)).collect();
    let mut seen: HashSet<usize> = s.members.iter().copied().collect();
    let mut frontier = s.members.clone();
    for _ in 0..steps {
        let mut next = Vec::new();
        for &code in &frontier {
            for &pw in &powers {
                let digit = (code / pw) % d;
                let base = code - digit * pw;
                for sym in (0..d).filter(|&sym| sym != digit) {
                    let cand = base + sym * pw;
                    if seen.insert(cand) {
                        next.push(cand);
                    }
                }
            }
            if seen.len() > limit {
                return Err(Error::Size(format!(
                    "Hamming neighborhood exceeds {limit} strings"
                )));
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let mut members: Vec<usize> = seen.into_iter().collect();
    members.sort_unstable();
    Ok(IndexSet { n, d, members })
}

/// A contraction `0 ≤ M ≤ I` on the `n`-fold system.
#[derive(Debug, Clone, PartialEq)]
pub enum Contraction {
    /// `m^{⊗n}` given by its single-copy factor.
    Product(CMat),
    /// A full operator on `d^n` dimensions.
    Dense(CMat),
}

impl Contraction {
    fn validate(&self, d: usize, n: usize) -> Result<()> {
        let (m, want) = match self {
            Contraction::Product(m) => (m, d),
            Contraction::Dense(m) => {
                let total = d.pow(n as u32);
                if total > MAX_DENSE_STRINGS {
                    return Err(Error::Size(format!(
                        "dense contraction on {total} dimensions exceeds {MAX_DENSE_STRINGS}"
                    )));
                }
                (m, total)
            }
        };
        if m.nrows() != want || m.ncols() != want {
            return Err(Error::dim(format!(
                "contraction is {}x{}, expected {want}x{want}",
                m.nrows(),
                m.ncols()
            )));
        }
        check_contraction(m)
    }

    /// `⟨x^n|M|x^n⟩` for every string, with `|x⟩` the columns of `basis`.
    fn diagonal_in(&self, basis: &CMat, n: usize) -> Vec<f64> {
        let d = basis.nrows();
        match self {
            Contraction::Product(m) => {
                let single = (basis.adjoint() * m * basis).diagonal().map(|z| z.re);
                let single: Vec<f64> = single.iter().copied().collect();
                let total = d.pow(n as u32);
                (0..total).map(|code| string_weight(code, d, n, &single)).collect()
            }
            Contraction::Dense(m) => {
                let rotated = conjugate_by_power(m, basis, n);
                rotated.diagonal().iter().map(|z| z.re).collect()
            }
        }
    }

    /// `tr(M σ^{⊗n})`.
    fn expectation(&self, sigma: &CMat, n: usize) -> f64 {
        match self {
            Contraction::Product(m) => linalg::trace_product_re(m, sigma).powi(n as i32),
            Contraction::Dense(m) => linalg::trace_product_re(m, &linalg::kron_power(sigma, n)),
        }
    }
}

fn check_contraction(m: &CMat) -> Result<()> {
    if linalg::hermitian_defect(m) > CONTRACTION_TOL {
        return Err(Error::invalid("contraction is not Hermitian"));
    }
    let e = linalg::eigh(&linalg::symmetrize(m));
    let (hi, lo) = (e.values[0], *e.values.last().expect("nonempty"));
    if lo < -CONTRACTION_TOL || hi > 1.0 + CONTRACTION_TOL {
        return Err(Error::invalid(format!(
            "spectrum [{lo}, {hi}] is not inside [0, 1]"
        )));
    }
    Ok(())
}

/// `(U^{⊗n})† M U^{⊗n}`, applied one tensor factor at a time.
fn conjugate_by_power(m: &CMat, u: &CMat, n: usize) -> CMat {
    let ud = u.adjoint();
    let mut x = m.clone();
    for k in 0..n {
        x = apply_factor_left(&x, &ud, n, k);
    }
    let mut y = x.adjoint();
    for k in 0..n {
        y = apply_factor_left(&y, &ud, n, k);
    }
    y
}

/// `(I ⊗ … ⊗ a ⊗ … ⊗ I) m` with `a` acting on factor `k` of `n`.
fn apply_factor_left(m: &CMat, a: &CMat, n: usize, k: usize) -> CMat {
    let d = a.nrows();
    let stride = d.pow((n - 1 - k) as u32);
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for row in 0..m.nrows() {
        let digit = (row / stride) % d;
        let base = row - digit * stride;
        for s in 0..d {
            let coeff = a[(digit, s)];
            if coeff == linalg::ZERO {
                continue;
            }
            let src = base + s * stride;
            for col in 0..m.ncols() {
                out[(row, col)] += coeff * m[(src, col)];
            }
        }
    }
    out
}

/// Outcome of checking both inequalities of the monopartite lemma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRecord {
    pub n: usize,
    pub d: usize,
    pub epsilon_n: f64,
    pub r_n: f64,
    pub l_n: f64,
    pub radius: usize,
    /// `tr(ρ^{⊗n} M)`.
    pub trace_rho_m: f64,
    pub precondition_met: bool,
    pub j_size: usize,
    /// `Σ_{x^n ∈ J} λ_{x^n}`.
    pub j_weight: f64,
    pub blown_size: usize,
    /// `tr(ρ^{⊗n} P⁺)`.
    pub rho_mass: f64,
    pub rho_bound: f64,
    pub rho_slack: f64,
    /// `tr(σ^{⊗n} P⁺)`.
    pub sigma_mass: f64,
    /// `tr(M σ^{⊗n})`.
    pub m_sigma: f64,
    pub mu_min: f64,
    pub gamma: ExtReal,
    pub sigma_slack: ExtReal,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Builds `P⁺` from `M` and checks `tr(ρ^{⊗n}P⁺) ≥ 1 − e^{−2r²}` and
/// `tr(σ^{⊗n}P⁺) ≤ γ_n tr(Mσ^{⊗n})`.
pub fn verify_blowup(
    rho: &DensityOperator,
    m: &Contraction,
    sigma: &DensityOperator,
    p: &BlowupParams,
) -> Result<BlowupRecord> {
    p.validate()?;
    let d = rho.dim();
    if sigma.dim() != d {
        return Err(Error::dim(format!(
            "rho has dimension {d}, sigma {}",
            sigma.dim()
        )));
    }
    check_enum(d, p.n)?;
    m.validate(d, p.n)?;

    let spec = rho.raw_spectrum();
    let lambda = rho.eigenvalues();
    let side = Side::new(&spec.vectors, &lambda, m, p)?;
    let diag_sigma = basis_diagonal(&spec.vectors, sigma.matrix());

    let mu_raw = min_on_support(&diag_sigma, &lambda);
    let mut note = None;
    let mu_min = if mu_raw <= SUPPORT_TOL {
        note = Some("rho is not supported inside supp(sigma); gamma is infinite".to_string());
        0.0
    } else {
        mu_raw.min(1.0)
    };
    let gamma = gamma_factor(p, d, mu_min)?;
    let sigma_mass = side.blown.product_mass(&diag_sigma);
    let m_sigma = m.expectation(sigma.matrix(), p.n);
    let sigma_slack = slack_upper(gamma, 1.0, m_sigma, sigma_mass);

    let rho_bound = 1.0 - (-2.0 * p.r_n * p.r_n).exp();
    let rho_slack = side.rho_mass - rho_bound;
    let precondition_met = side.trace_m >= p.epsilon_n - SLACK_TOL;
    if !precondition_met {
        note = Some(format!(
            "tr(rho^n M) = {} is below epsilon_n = {}",
            side.trace_m, p.epsilon_n
        ));
    }
    let passed = precondition_met
        && side.j_weight >= 0.5 * p.epsilon_n - SLACK_TOL
        && rho_slack >= -SLACK_TOL
        && sigma_slack.to_f64() >= -SLACK_TOL;
    Ok(BlowupRecord {
        n: p.n,
        d,
        epsilon_n: p.epsilon_n,
        r_n: p.r_n,
        l_n: l_n_size(p),
        radius: p.radius(),
        trace_rho_m: side.trace_m,
        precondition_met,
        j_size: side.j.len(),
        j_weight: side.j_weight,
        blown_size: side.blown.len(),
        rho_mass: side.rho_mass,
        rho_bound,
        rho_slack,
        sigma_mass,
        m_sigma,
        mu_min,
        gamma,
        sigma_slack,
        passed,
        note,
    })
}

const SUPPORT_TOL: f64 = 1e-12;

fn check_enum(d: usize, n: usize) -> Result<()> {
    match d.checked_pow(n as u32) {
        Some(t) if t <= MAX_ENUM_STRINGS => Ok(()),
        _ => Err(Error::Size(format!(
            "{d}^{n} strings exceed the verification limit {MAX_ENUM_STRINGS}"
        ))),
    }
}

/// `⟨x|m|x⟩` for the columns `|x⟩` of `basis`.
fn basis_diagonal(basis: &CMat, m: &CMat) -> Vec<f64> {
    (basis.adjoint() * m * basis)
        .diagonal()
        .iter()
        .map(|z| z.re.max(0.0))
        .collect()
}

fn min_on_support(values: &[f64], lambda: &[f64]) -> f64 {
    values
        .iter()
        .zip(lambda)
        .filter(|(_, &l)| l > 0.0)
        .map(|(&v, _)| v)
        .fold(f64::INFINITY, f64::min)
}

/// `γ^power · rhs − lhs`, infinite when `γ` is.
fn slack_upper(gamma: ExtReal, power: f64, rhs: f64, lhs: f64) -> ExtReal {
    match gamma {
        ExtReal::Infinite => ExtReal::Infinite,
        ExtReal::Finite(g) => {
            let bound = g.powf(power) * rhs;
            if bound.is_infinite() {
                ExtReal::Infinite
            } else {
                ExtReal::Finite(bound - lhs)
            }
        }
    }
}

/// One side of the construction: the `J` set in the eigenbasis of the null
/// state and its blown-up neighborhood.
struct Side {
    trace_m: f64,
    j: IndexSet,
    j_weight: f64,
    blown: IndexSet,
    rho_mass: f64,
}

impl Side {
    fn new(basis: &CMat, lambda: &[f64], m: &Contraction, p: &BlowupParams) -> Result<Self> {
        let d = basis.nrows();
        let n = p.n;
        let mut m_diag = m.diagonal_in(basis, n);
        let trace_m: f64 = (0..m_diag.len())
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|chunk| {
                chunk
                    .iter()
                    .map(|&code| string_weight(code, d, n, lambda) * m_diag[code])
                    .sum::<f64>()
            })
            .collect::<Vec<_>>()
            .iter()
            .sum();
        for (code, v) in m_diag.iter_mut().enumerate() {
            *v = v.clamp(0.0, 1.0);
            if string_weight(code, d, n, lambda) <= 0.0 {
                *v = 0.0;
            }
        }
        let j = build_j_set(&m_diag, d, p)?;
        let j_weight = j.product_mass(lambda);
        let blown = hamming_blowup(&j, l_n_size(p))?;
        let rho_mass = blown.product_mass(lambda);
        Ok(Side {
            trace_m,
            j,
            j_weight,
            blown,
            rho_mass,
        })
    }
}

/// Outcome of checking the bipartite lemma and the intersection bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteBlowupRecord {
    pub n: usize,
    pub d_a: usize,
    pub d_b: usize,
    pub epsilon_n: f64,
    pub r_n: f64,
    pub l_n: f64,
    pub radius: usize,
    pub trace_a: f64,
    pub trace_b: f64,
    pub precondition_met: bool,
    pub blown_size_a: usize,
    pub blown_size_b: usize,
    pub rho_mass_a: f64,
    pub rho_mass_b: f64,
    pub rho_bound: f64,
    pub rho_slack: f64,
    pub mu_bar_min: f64,
    pub gamma_bar: ExtReal,
    /// `tr(σ_AB^{⊗n}(P⁺_A ⊗ P⁺_B))`.
    pub sigma_mass: f64,
    /// `tr((M_A ⊗ M_B) σ_AB^{⊗n})`.
    pub m_sigma: f64,
    pub sigma_slack: ExtReal,
    /// `tr(ρ_AB^{⊗n}(P⁺_A ⊗ P⁺_B))` summed directly.
    pub joint_mass: f64,
    /// The same trace through `1 − tr(ρM₁) − tr(ρM₂) + tr(ρM₁M₂)`.
    pub joint_mass_identity: f64,
    pub joint_bound: f64,
    pub joint_slack: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Bipartite version: `M_A`, `M_B` act on `A^n`, `B^n` and are given in
/// product form.
pub fn verify_blowup_bipartite(
    rho_ab: &DensityOperator,
    dims: (usize, usize),
    m_a: &Contraction,
    m_b: &Contraction,
    sigma_ab: &DensityOperator,
    p: &BlowupParams,
) -> Result<BipartiteBlowupRecord> {
    p.validate()?;
    let (d_a, d_b) = dims;
    if rho_ab.dim() != d_a * d_b || sigma_ab.dim() != d_a * d_b {
        return Err(Error::dim(format!(
            "states have dimensions {}, {}; factorization {dims:?}",
            rho_ab.dim(),
            sigma_ab.dim()
        )));
    }
    for m in [m_a, m_b] {
        if !matches!(m, Contraction::Product(_)) {
            return Err(Error::invalid(
                "bipartite verification takes product-form contractions",
            ));
        }
    }
    check_enum(d_a * d_b, p.n)?;
    m_a.validate(d_a, p.n)?;
    m_b.validate(d_b, p.n)?;

    let rho_a = state::partial_trace(rho_ab, dims, Keep::A)?;
    let rho_b = state::partial_trace(rho_ab, dims, Keep::B)?;
    let lambda_a = rho_a.eigenvalues();
    let lambda_b = rho_b.eigenvalues();
    let basis_a = rho_a.raw_spectrum().vectors.clone();
    let basis_b = rho_b.raw_spectrum().vectors.clone();
    let side_a = Side::new(&basis_a, &lambda_a, m_a, p)?;
    let side_b = Side::new(&basis_b, &lambda_b, m_b, p)?;

    let product_basis = linalg::kron(&basis_a, &basis_b);
    let sigma_diag = basis_diagonal(&product_basis, sigma_ab.matrix());
    let rho_diag = basis_diagonal(&product_basis, rho_ab.matrix());

    let mut note = None;
    let mut mu_raw = f64::INFINITY;
    for x in (0..d_a).filter(|&x| lambda_a[x] > 0.0) {
        for y in (0..d_b).filter(|&y| lambda_b[y] > 0.0) {
            mu_raw = mu_raw.min(sigma_diag[x * d_b + y]);
        }
    }
    let mu_bar_min = if mu_raw <= SUPPORT_TOL {
        note = Some("mu_bar_min vanishes; gamma_bar is infinite".to_string());
        0.0
    } else {
        mu_raw.min(1.0)
    };
    let gamma_bar = gamma_factor(p, d_a.max(d_b), mu_bar_min)?;
    let pair_mass = |a: &[usize], b: &[usize], w: &[f64]| pair_product_mass(a, b, d_a, d_b, p.n, w);
    let sigma_mass = pair_mass(side_a.blown.members(), side_b.blown.members(), &sigma_diag);
    let (fa, fb) = match (m_a, m_b) {
        (Contraction::Product(a), Contraction::Product(b)) => (a, b),
        _ => unreachable!("checked above"),
    };
    let m_sigma = linalg::trace_product_re(&linalg::kron(fa, fb), sigma_ab.matrix()).powi(p.n as i32);
    let sigma_slack = slack_upper(gamma_bar, 2.0, m_sigma, sigma_mass);

    let joint_mass = pair_mass(side_a.blown.members(), side_b.blown.members(), &rho_diag);
    let out_a = side_a.blown.complement();
    let out_b = side_b.blown.complement();
    let both_out = pair_mass(&out_a, &out_b, &rho_diag);
    let joint_mass_identity = 1.0 - (1.0 - side_a.rho_mass) - (1.0 - side_b.rho_mass) + both_out;

    let tail = (-2.0 * p.r_n * p.r_n).exp();
    let rho_bound = 1.0 - tail;
    let joint_bound = 1.0 - 2.0 * tail;
    let rho_slack = side_a.rho_mass.min(side_b.rho_mass) - rho_bound;
    let joint_slack = joint_mass - joint_bound;
    let precondition_met = side_a.trace_m.min(side_b.trace_m) >= p.epsilon_n - SLACK_TOL;
    if !precondition_met {
        note = Some(format!(
            "min(tr(rho_A^n M_A), tr(rho_B^n M_B)) = {} is below epsilon_n = {}",
            side_a.trace_m.min(side_b.trace_m),
            p.epsilon_n
        ));
    }
    let passed = precondition_met
        && rho_slack >= -SLACK_TOL
        && sigma_slack.to_f64() >= -SLACK_TOL
        && joint_slack >= -SLACK_TOL;
    Ok(BipartiteBlowupRecord {
        n: p.n,
        d_a,
        d_b,
        epsilon_n: p.epsilon_n,
        r_n: p.r_n,
        l_n: l_n_size(p),
        radius: p.radius(),
        trace_a: side_a.trace_m,
        trace_b: side_b.trace_m,
        precondition_met,
        blown_size_a: side_a.blown.len(),
        blown_size_b: side_b.blown.len(),
        rho_mass_a: side_a.rho_mass,
        rho_mass_b: side_b.rho_mass,
        rho_bound,
        rho_slack,
        mu_bar_min,
        gamma_bar,
        sigma_mass,
        m_sigma,
        sigma_slack,
        joint_mass,
        joint_mass_identity,
        joint_bound,
        joint_slack,
        passed,
        note,
    })
}

/// `Σ_{a ∈ A, b ∈ B} Π_i w(a_i, b_i)` for a single-copy weight table on
/// `[0, d_a) × [0, d_b)`.
fn pair_product_mass(a: &[usize], b: &[usize], d_a: usize, d_b: usize, n: usize, w: &[f64]) -> f64 {
    let b_digits: Vec<Vec<usize>> = b.iter().map(|&code| linalg::digits(code, d_b, n)).collect();
    let partial: Vec<f64> = a
        .par_chunks(64)
        .map(|chunk| {
            let mut acc = 0.0;
            for &code in chunk {
                let xa = linalg::digits(code, d_a, n);
                for yb in &b_digits {
                    let mut v = 1.0;
                    for i in 0..n {
                        v *= w[xa[i] * d_b + yb[i]];
                    }
                    acc += v;
                }
            }
            acc
        })
        .collect();
    partial.iter().sum()
}

/// Largest `n` for the typical-projector scheme.
pub const MAX_TYPICAL_N: usize = 12;
/// Largest number of type-count cells the scheme's recursion may allocate.
const MAX_TYPE_CELLS: usize = 1 << 26;
const TYPICAL_EDGE: f64 = 1e-12;

/// Traces of one side's typical-projector operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalSide {
    /// `tr(M̂ ρ^{⊗n})`.
    pub rho_mass: f64,
    /// `tr(M̂ σ^{⊗n})`.
    pub sigma_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalProjectorRecord {
    pub n: usize,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `−ln β_n / n`.
    pub exponent_estimate: ExtReal,
    /// `D(ρ_A‖ρ̃_A) + D(ρ_B‖ρ̃_B)`.
    pub theta_product_alt: f64,
    /// `e^{−n(θ − 4δ)}`, the guaranteed ceiling on `β_n`.
    pub beta_ceiling: f64,
    pub side_a: TypicalSide,
    pub side_b: TypicalSide,
}

/// Exact errors of the one-bit scheme whose local tests are
/// `M̂ = P_{δ,n}(ρ,σ) P_{δ,n}(ρ,ρ) P_{δ,n}(ρ,σ)` on each side.
pub fn typical_projector_scheme(
    pair: &BipartitePair,
    n: usize,
    delta: f64,
) -> Result<TypicalProjectorRecord> {
    if n == 0 || n > MAX_TYPICAL_N {
        return Err(Error::invalid(format!("n = {n} must be in 1..={MAX_TYPICAL_N}")));
    }
    if !(delta > 0.0) {
        return Err(Error::invalid("delta must be positive"));
    }
    let (d_a, d_b) = pair.dims();
    if d_a != 2 || d_b != 2 {
        return Err(Error::invalid("the typical-projector scheme is implemented for qubits"));
    }
    if pair.alt_product_defect()? > PRODUCT_TOL {
        return Err(Error::precondition("alternative is not a product state"));
    }
    let (ra, rb) = pair.null_marginals()?;
    let (sa, sb) = pair.alt_marginals()?;
    if !state::support_contained(&ra, &sa) || !state::support_contained(&rb, &sb) {
        return Err(Error::precondition(
            "null marginals are not supported inside the alternative marginals",
        ));
    }
    let theta = exponents::theta_product_alt(pair)?
        .value
        .finite()
        .ok_or_else(|| Error::precondition("product-alternative exponent is infinite"))?;

    let ta = TypicalTest::new(&ra, &sa, n, delta);
    let tb = TypicalTest::new(&rb, &sb, n, delta);
    let side_a = ta.side_traces()?;
    let side_b = tb.side_traces()?;

    // ρ_AB in the product of the alternative eigenbases
    let v = linalg::kron(&ta.sigma_basis, &tb.sigma_basis);
    let r = v.adjoint() * pair.null_state.matrix() * &v;
    let mut trans = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for y2 in 0..2 {
                for w in 0..2 {
                    for z in 0..2 {
                        for z2 in 0..2 {
                            let f = ta.u[(x, y)].conj()
                                * ta.u[(x, y2)]
                                * tb.u[(w, z)].conj()
                                * tb.u[(w, z2)]
                                * r[(y2 * 2 + z2, y * 2 + z)];
                            trans.push((vec![x, y, y2, w, z, z2], f));
                        }
                    }
                }
            }
        }
    }
    let dp = TypeRecursion::run(n, &[2; 6], &trans)?;
    let accept = dp.sum(|counts| {
        ta.rho_typical(&counts[0])
            && ta.sigma_typical(&counts[1])
            && ta.sigma_typical(&counts[2])
            && tb.rho_typical(&counts[3])
            && tb.sigma_typical(&counts[4])
            && tb.sigma_typical(&counts[5])
    });
    let alpha = 1.0 - accept.re;
    let beta = side_a.sigma_mass * side_b.sigma_mass;
    let exponent_estimate = if beta > 0.0 {
        ExtReal::Finite(-beta.ln() / n as f64)
    } else {
        ExtReal::Infinite
    };
    Ok(TypicalProjectorRecord {
        n,
        delta,
        alpha,
        beta,
        exponent_estimate,
        theta_product_alt: theta,
        beta_ceiling: (-(n as f64) * (theta - 4.0 * delta)).exp(),
        side_a,
        side_b,
    })
}

/// Membership tests of the two typical projectors on one side, and the
/// overlaps `u(x, y) = ⟨x|y⟩` between the eigenbases of `ρ` and `σ`.
struct TypicalTest {
    n: usize,
    delta: f64,
    ln_rho: Vec<f64>,
    ln_sigma: Vec<f64>,
    rho_center: f64,
    sigma_center: f64,
    sigma_values: Vec<f64>,
    rho_values: Vec<f64>,
    u: CMat,
    sigma_basis: CMat,
}

impl TypicalTest {
    fn new(rho: &DensityOperator, sigma: &DensityOperator, n: usize, delta: f64) -> Self {
        let rho_values = rho.eigenvalues();
        let sigma_values = sigma.eigenvalues();
        let rho_basis = &rho.raw_spectrum().vectors;
        let sigma_basis = sigma.raw_spectrum().vectors.clone();
        let ln = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .map(|&x| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY })
                .collect()
        };
        let ln_rho = ln(&rho_values);
        let ln_sigma = ln(&sigma_values);
        let rho_center = rho_values
            .iter()
            .zip(&ln_rho)
            .filter(|(&l, _)| l > 0.0)
            .map(|(&l, &g)| l * g)
            .sum();
        let rho_in_sigma = basis_diagonal(&sigma_basis, rho.matrix());
        let sigma_center = rho_in_sigma
            .iter()
            .zip(&ln_sigma)
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, &g)| w * g)
            .sum();
        TypicalTest {
            n,
            delta,
            ln_rho,
            ln_sigma,
            rho_center,
            sigma_center,
            sigma_values,
            rho_values,
            u: rho_basis.adjoint() * &sigma_basis,
            sigma_basis,
        }
    }

    fn within(&self, counts: &[usize], logs: &[f64], center: f64) -> bool {
        let mut acc = 0.0;
        for (&k, &g) in counts.iter().zip(logs) {
            if k > 0 {
                if g == f64::NEG_INFINITY {
                    return false;
                }
                acc += k as f64 * g;
            }
        }
        ((acc / self.n as f64) - center).abs() <= self.delta + TYPICAL_EDGE
    }

    fn rho_typical(&self, counts: &[usize]) -> bool {
        self.within(counts, &self.ln_rho, self.rho_center)
    }

    fn sigma_typical(&self, counts: &[usize]) -> bool {
        self.within(counts, &self.ln_sigma, self.sigma_center)
    }

    fn side_traces(&self) -> Result<TypicalSide> {
        let d = self.u.nrows();
        // tr(M̂σ^n) = Σ_{x ∈ A(ρ,ρ), y ∈ A(ρ,σ)} σ_y |⟨x|y⟩|²
        let mut trans = Vec::new();
        for x in 0..d {
            for y in 0..d {
                trans.push((vec![x, y], c(self.sigma_values[y] * self.u[(x, y)].norm_sqr())));
            }
        }
        let sigma_mass = TypeRecursion::run(self.n, &[d, d], &trans)?
            .sum(|k| self.rho_typical(&k[0]) && self.sigma_typical(&k[1]))
            .re;
        // tr(M̂ρ^n) = Σ_{x' } λ_{x'} Σ_{x ∈ A(ρ,ρ)} |⟨x|P_σ|x'⟩|²
        let mut trans = Vec::new();
        for x in 0..d {
            for y in 0..d {
                for y2 in 0..d {
                    let mut f = linalg::ZERO;
                    for (xp, &l) in self.rho_values.iter().enumerate() {
                        f += c(l)
                            * self.u[(x, y)]
                            * self.u[(xp, y)].conj()
                            * self.u[(x, y2)].conj()
                            * self.u[(xp, y2)];
                    }
                    trans.push((vec![x, y, y2], f));
                }
            }
        }
        let rho_mass = TypeRecursion::run(self.n, &[d, d, d], &trans)?
            .sum(|k| self.rho_typical(&k[0]) && self.sigma_typical(&k[1]) && self.sigma_typical(&k[2]))
            .re;
        Ok(TypicalSide {
            rho_mass,
            sigma_mass,
        })
    }
}

/// Sums of `Π_i f(s_i)` over tuples of strings, grouped by the type of each
/// string. The per-position factor `f` is the same at every position, so
/// only symbol counts need tracking.
struct TypeRecursion {
    n: usize,
    dims: Vec<usize>,
    cells: Vec<Complex64>,
}

impl TypeRecursion {
    fn run(n: usize, dims: &[usize], transitions: &[(Vec<usize>, Complex64)]) -> Result<Self> {
        let tracked: usize = dims.iter().map(|&d| d - 1).sum();
        let size = (n + 1)
            .checked_pow(tracked as u32)
            .filter(|&s| s <= MAX_TYPE_CELLS)
            .ok_or_else(|| Error::Size(format!("type recursion with n = {n} is too large")))?;
        let mut strides = Vec::new();
        let mut acc = 1;
        for &d in dims {
            let mut row = vec![0; d];
            for s in row.iter_mut().take(d - 1) {
                *s = acc;
                acc *= n + 1;
            }
            strides.push(row);
        }
        let moves: Vec<(usize, Complex64)> = transitions
            .iter()
            .filter(|(_, f)| *f != linalg::ZERO)
            .map(|(syms, f)| {
                let off = syms.iter().zip(&strides).map(|(&s, row)| row[s]).sum();
                (off, *f)
            })
            .collect();
        let mut cells = vec![linalg::ZERO; size];
        cells[0] = linalg::ONE;
        for _ in 0..n {
            let mut next = vec![linalg::ZERO; size];
            for (idx, &v) in cells.iter().enumerate() {
                if v == linalg::ZERO {
                    continue;
                }
                for &(off, f) in &moves {
                    next[idx + off] += v * f;
                }
            }
            cells = next;
        }
        Ok(TypeRecursion {
            n,
            dims: dims.to_vec(),
            cells,
        })
    }

    /// Total weight of the type tuples accepted by `keep`, which receives
    /// the full count vector of every string.
    fn sum(&self, keep: impl Fn(&[Vec<usize>]) -> bool) -> Complex64 {
        let base = self.n + 1;
        let mut total = linalg::ZERO;
        for (idx, &v) in self.cells.iter().enumerate() {
            if v == linalg::ZERO {
                continue;
            }
            let mut rest = idx;
            let mut counts = Vec::with_capacity(self.dims.len());
            let mut valid = true;
            for &d in &self.dims {
                let mut k = vec![0; d];
                let mut used = 0;
                for slot in k.iter_mut().take(d - 1) {
                    *slot = rest % base;
                    rest /= base;
                    used += *slot;
                }
                if used > self.n {
                    valid = false;
                    break;
                }
                k[d - 1] = self.n - used;
                counts.push(k);
            }
            if valid && keep(&counts) {
                total += v;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn params(n: usize, eps: f64, r: f64) -> BlowupParams {
        BlowupParams::new(n, eps, r).unwrap()
    }

    #[test]
    fn l_n_examples() {
        let p = params(4, 0.5, 0.0);
        let want = 2.0 * (-0.5 * 0.25f64.ln()).sqrt();
        assert!((l_n_size(&p) - want).abs() < 1e-15);
        assert!((l_n_size(&p) - 1.6651).abs() < 1e-4);
        let q = params(16, 0.5, 0.0);
        assert!((l_n_size(&q) - 2.0 * l_n_size(&p)).abs() < 1e-14);
        assert!(BlowupParams::new(4, 2.0, 0.0).is_err());
        assert!(BlowupParams::new(4, 0.5, -1.0).is_err());
    }

    #[test]
    fn binomial_sums_exact() {
        // Σ_{l=1}^{3} C(10, l) = 10 + 45 + 120
        assert!((ln_binomial_sum(10, 3) - 175f64.ln()).abs() < 1e-14);
        assert!((ln_binomial_sum(10, 50) - 1023f64.ln()).abs() < 1e-14);
        // 2^3000 - 1 through the shifted path
        let big = ln_binomial_sum(3000, 3000);
        assert!((big - 3000.0 * std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn gamma_sentinel_and_monotonicity() {
        let p = params(20, 1.0, 0.0);
        assert_eq!(gamma_factor(&p, 2, 0.0).unwrap(), ExtReal::Infinite);
        let g1 = gamma_factor(&p, 2, 1.0).unwrap().to_f64();
        let big_l = p.radius();
        let s: f64 = (1..=big_l).map(|l| binom(20, l)).sum();
        let want = 2.0 * 2f64.powi(big_l as i32) * s;
        assert!((g1 / want - 1.0).abs() < 1e-12);
        let g2 = gamma_factor(&p, 2, 0.5).unwrap().to_f64();
        assert!(g2 > g1);
    }

    fn binom(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn hamming_ball_small() {
        let s = IndexSet::from_strings(2, &[vec![0, 0, 0]]).unwrap();
        assert_eq!(hamming_blowup(&s, 0.0).unwrap(), s);
        let b = hamming_blowup(&s, 1.0).unwrap();
        let want = IndexSet::from_strings(
            2,
            &[vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
        )
        .unwrap();
        assert_eq!(b, want);
        // a fractional radius rounds up
        assert_eq!(hamming_blowup(&s, 0.2).unwrap(), want);
    }

    #[test]
    fn hamming_guard() {
        let s = IndexSet::from_strings(2, &[vec![0; 10]]).unwrap();
        assert!(matches!(
            hamming_blowup_limited(&s, 5.0, 100),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn j_set_extremes() {
        let p = params(3, 0.5, 0.0);
        assert_eq!(build_j_set(&[1.0; 8], 2, &p).unwrap().len(), 8);
        assert!(build_j_set(&[0.0; 8], 2, &p).unwrap().is_empty());
        assert!(build_j_set(&[1.5; 8], 2, &p).is_err());
    }

    #[test]
    fn identity_contraction_passes() {
        let rho = DensityOperator::diagonal(&[0.7, 0.3]).unwrap();
        let sigma = DensityOperator::diagonal(&[0.4, 0.6]).unwrap();
        let rec = verify_blowup(
            &rho,
            &Contraction::Product(linalg::identity(2)),
            &sigma,
            &params(6, 1.0, 1.0),
        )
        .unwrap();
        assert!(rec.passed);
        assert_eq!(rec.blown_size, 64);
        assert!((rec.rho_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn failed_precondition_is_reported() {
        let rho = DensityOperator::diagonal(&[0.7, 0.3]).unwrap();
        let m = Contraction::Product(CMat::zeros(2, 2));
        let rec = verify_blowup(&rho, &m, &rho, &params(4, 0.5, 0.5)).unwrap();
        assert!(!rec.precondition_met);
        assert!(!rec.passed);
        assert_eq!(rec.j_size, 0);
    }

    #[test]
    fn dense_matches_product_form() {
        let rho = DensityOperator::new(CMat::from_row_slice(
            2,
            2,
            &[
                c(0.65),
                Complex64::new(0.1, 0.05),
                Complex64::new(0.1, -0.05),
                c(0.35),
            ],
        ))
        .unwrap();
        let sigma = DensityOperator::diagonal(&[0.35, 0.65]).unwrap();
        let m = CMat::from_row_slice(2, 2, &[c(0.8), c(0.1), c(0.1), c(0.3)]);
        let probe = verify_blowup(&rho, &Contraction::Product(m.clone()), &sigma, &params(4, 1.0, 0.5))
            .unwrap();
        let p = params(4, probe.trace_rho_m, 0.5);
        let product = verify_blowup(&rho, &Contraction::Product(m.clone()), &sigma, &p).unwrap();
        let dense =
            verify_blowup(&rho, &Contraction::Dense(linalg::kron_power(&m, 4)), &sigma, &p).unwrap();
        assert!((product.trace_rho_m - dense.trace_rho_m).abs() < 1e-12);
        assert!((product.m_sigma - dense.m_sigma).abs() < 1e-12);
        assert_eq!(product.j_size, dense.j_size);
        assert_eq!(product.blown_size, dense.blown_size);
        assert!(product.passed && dense.passed);
    }

    #[test]
    fn bipartite_identity_and_support_violation() {
        let rho = presets::isotropic(0.5, 2).unwrap();
        let id = Contraction::Product(linalg::identity(2));
        let p = params(3, 1.0, 0.5);
        let rec = verify_blowup_bipartite(&rho, (2, 2), &id, &id, &rho, &p).unwrap();
        assert!(rec.passed);
        assert!((rec.joint_mass - rec.joint_mass_identity).abs() < 1e-12);
        let sigma = DensityOperator::basis_state(4, 0).unwrap();
        let rec = verify_blowup_bipartite(&rho, (2, 2), &id, &id, &sigma, &p).unwrap();
        assert_eq!(rec.gamma_bar, ExtReal::Infinite);
        assert!(rec.note.is_some());
        assert!(rec.passed);
    }

    #[test]
    fn typical_scheme_equal_states() {
        let ra = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let rb = DensityOperator::diagonal(&[0.3, 0.7]).unwrap();
        let prod = state::tensor_product(&ra, &rb).unwrap();
        let pair = BipartitePair::new(2, 2, prod.clone(), prod).unwrap();
        let rec = typical_projector_scheme(&pair, 8, 0.2).unwrap();
        assert!((rec.alpha + rec.beta - 1.0).abs() < 1e-12);
        assert!(rec.exponent_estimate.to_f64() < 0.2);
    }

    #[test]
    fn typical_scheme_matches_dense_computation() {
        let rho = presets::isotropic(0.6, 2).unwrap();
        let rho = DensityOperator::new(
            rho.matrix() * c(0.7)
                + linalg::kron(
                    &CMat::from_row_slice(2, 2, &[c(0.2), Complex64::new(0.05, 0.1), Complex64::new(0.05, -0.1), c(0.1)]),
                    &DensityOperator::diagonal(&[0.5, 0.5]).unwrap().into_matrix(),
                ),
        )
        .unwrap();
        let sa = DensityOperator::new(CMat::from_row_slice(
            2,
            2,
            &[c(0.6), c(0.2), c(0.2), c(0.4)],
        ))
        .unwrap();
        let sb = DensityOperator::diagonal(&[0.45, 0.55]).unwrap();
        let sigma = state::tensor_product(&sa, &sb).unwrap();
        let pair = BipartitePair::new(2, 2, rho.clone(), sigma).unwrap();
        let n = 3;
        let delta = 0.3;
        let rec = typical_projector_scheme(&pair, n, delta).unwrap();

        let (ra, rb) = pair.null_marginals().unwrap();
        let ma = dense_m_hat(&ra, &sa, n, delta);
        let mb = dense_m_hat(&rb, &sb, n, delta);
        // back from grouped A^n B^n order to interleaved (AB)^n order
        let perm = linalg::regroup_permutation(2, 2, n);
        let dim = perm.len();
        let mut inter = CMat::zeros(dim, dim);
        let grouped = linalg::kron(&ma, &mb);
        for i in 0..dim {
            for j in 0..dim {
                inter[(perm[i], perm[j])] = grouped[(i, j)];
            }
        }
        let rho_n = linalg::kron_power(rho.matrix(), n);
        let accept = linalg::trace_product_re(&inter, &rho_n);
        assert!((rec.alpha - (1.0 - accept)).abs() < 1e-10, "{} vs {}", rec.alpha, 1.0 - accept);
        let beta = linalg::trace_product_re(&ma, &linalg::kron_power(sa.matrix(), n))
            * linalg::trace_product_re(&mb, &linalg::kron_power(sb.matrix(), n));
        assert!((rec.beta - beta).abs() < 1e-12);
        let side_rho = linalg::trace_product_re(&ma, &linalg::kron_power(ra.matrix(), n));
        assert!((rec.side_a.rho_mass - side_rho).abs() < 1e-12);
    }

    /// `M̂` built densely from its definition.
    fn dense_m_hat(rho: &DensityOperator, sigma: &DensityOperator, n: usize, delta: f64) -> CMat {
        let proj = |basis: &CMat, values: &[f64], center: f64| -> CMat {
            let d = basis.nrows();
            let big = linalg::kron_power(basis, n);
            let total = d.pow(n as u32);
            let mut diag = vec![linalg::ZERO; total];
            for (code, slot) in diag.iter_mut().enumerate() {
                let digits = linalg::digits(code, d, n);
                if digits.iter().any(|&k| values[k] <= 0.0) {
                    continue;
                }
                let s: f64 = digits.iter().map(|&k| values[k].ln()).sum::<f64>() / n as f64;
                if (s - center).abs() <= delta + TYPICAL_EDGE {
                    *slot = linalg::ONE;
                }
            }
            linalg::from_spectrum(&big, &diag)
        };
        let rv = rho.eigenvalues();
        let sv = sigma.eigenvalues();
        let h: f64 = rv.iter().filter(|&&l| l > 0.0).map(|&l| l * l.ln()).sum();
        let sb = &sigma.raw_spectrum().vectors;
        let cross: f64 = basis_diagonal(sb, rho.matrix())
            .iter()
            .zip(&sv)
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, &s)| w * s.ln())
            .sum();
        let p_rho = proj(&rho.raw_spectrum().vectors, &rv, h);
        let p_sigma = proj(sb, &sv, cross);
        &p_sigma * p_rho * &p_sigma
    }
}
