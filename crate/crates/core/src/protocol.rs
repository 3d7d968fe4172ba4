//! One-bit zero-rate testing protocols.
//!
//! Each party compresses its `n` observations to a single bit and the tester
//! fuses the two bits. Error probabilities are computed exactly by a
//! recursion over positions that tracks only what each local test needs,
//! which for typicality tests is the local type.

use rand::SeedableRng;
use rand::distr::Distribution;
use rand::distr::weighted::WeightedIndex;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg;
use crate::pmf::JointPmf;
use crate::pvm_opt;
use crate::state::{self, BipartitePair, LocalPvm};

pub const MAX_ALPHABET: usize = 4;
pub const MAX_N: usize = 80;
/// Largest joint state space of the exact recursion.
pub const MAX_STATES: usize = 1 << 23;
/// Two-sided 95% normal quantile used by the Wilson interval.
pub const WILSON_Z: f64 = 1.959963984540054;
/// Induced outcome probabilities below this are treated as exact zeros.
pub const ZERO_MASS_TOL: f64 = 1e-14;

const EDGE: f64 = 1e-9;
const MC_BATCH: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypicalityMode {
    /// `|N(a|x^n) − n p(a)| ≤ δ n p(a)` for every symbol.
    Robust,
    /// Binary only: `½n(1 − δ) ≤ N(1|x^n) ≤ ½n(1 + δ)`.
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalityRule {
    pub delta: f64,
    pub mode: TypicalityMode,
}

impl TypicalityRule {
    pub fn new(delta: f64, mode: TypicalityMode) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("delta = {delta} is outside (0, 1)")));
        }
        Ok(TypicalityRule { delta, mode })
    }

    pub fn robust(delta: f64) -> Result<Self> {
        TypicalityRule::new(delta, TypicalityMode::Robust)
    }

    fn accepts(&self, counts: &[usize], n: usize, p: &[f64]) -> bool {
        let nf = n as f64;
        match self.mode {
            TypicalityMode::Robust => counts
                .iter()
                .zip(p)
                .all(|(&k, &pk)| (k as f64 - nf * pk).abs() <= self.delta * nf * pk + EDGE),
            TypicalityMode::Interval => {
                let ones = counts[1] as f64;
                0.5 * nf * (1.0 - self.delta) <= ones + EDGE
                    && ones <= 0.5 * nf * (1.0 + self.delta) + EDGE
            }
        }
    }
}

/// The bit a party sends: `true` votes for the null hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalTest {
    /// Typicality with respect to the party's null marginal.
    Typical(TypicalityRule),
    /// Every observed symbol lies in the set.
    SupportedOn(Vec<usize>),
    /// The first observed symbol lies in the set.
    FirstSymbolIn(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fusion {
    /// Accept the null when both bits are set.
    And,
    /// Accept the null when the bits are equal.
    Agree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneBitScheme {
    pub test_x: LocalTest,
    pub test_y: LocalTest,
    pub fusion: Fusion,
}

impl OneBitScheme {
    /// Both parties test typicality and the tester takes the AND.
    pub fn typicality(rule: TypicalityRule) -> Self {
        OneBitScheme {
            test_x: LocalTest::Typical(rule),
            test_y: LocalTest::Typical(rule),
            fusion: Fusion::And,
        }
    }

    fn accept(&self, bit_x: bool, bit_y: bool) -> bool {
        match self.fusion {
            Fusion::And => bit_x && bit_y,
            Fusion::Agree => bit_x == bit_y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMethod {
    ExactTypes,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Number of copies of the underlying source.
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub minus_log_beta_over_n: ExtReal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub points: Vec<CurvePoint>,
    pub method: CurveMethod,
    /// Copies consumed per classical symbol.
    pub block_size: usize,
}

/// Exact errors of the typicality scheme with AND fusion.
pub fn one_bit_exact(
    p: &JointPmf,
    q: &JointPmf,
    rule: TypicalityRule,
    n_list: &[usize],
) -> Result<ErrorCurve> {
    one_bit_exact_scheme(p, q, &OneBitScheme::typicality(rule), n_list)
}

pub fn one_bit_exact_scheme(
    p: &JointPmf,
    q: &JointPmf,
    scheme: &OneBitScheme,
    n_list: &[usize],
) -> Result<ErrorCurve> {
    let (dx, dy) = check_shapes(p, q)?;
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    if n_max > MAX_N || n_list.contains(&0) {
        return Err(Error::Size(format!("every n must lie in 1..={MAX_N}")));
    }
    let tx = Tracker::new(&scheme.test_x, dx, n_max, &p.marginal_x())?;
    let ty = Tracker::new(&scheme.test_y, dy, n_max, &p.marginal_y())?;
    let states = tx
        .size()
        .checked_mul(ty.size())
        .filter(|&s| s <= MAX_STATES)
        .ok_or_else(|| Error::Size("joint state space of the exact recursion is too large".into()))?;

    let mut order: Vec<usize> = n_list.to_vec();
    order.sort_unstable();
    order.dedup();
    let eval = |pmf: &JointPmf| -> Vec<Vec<f64>> {
        let mut cur = vec![0.0; states];
        cur[tx.start() * ty.size() + ty.start()] = 1.0;
        let moves: Vec<(usize, usize, f64)> = (0..dx)
            .flat_map(|x| (0..dy).map(move |y| (x, y)))
            .map(|(x, y)| (x, y, pmf.get(x, y)))
            .filter(|&(_, _, w)| w > 0.0)
            .collect();
        let mut snapshots = Vec::new();
        let mut step = 0;
        for &target in &order {
            while step < target {
                let mut next = vec![0.0; states];
                for (idx, &v) in cur.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let (sx, sy) = (idx / ty.size(), idx % ty.size());
                    for &(x, y, w) in &moves {
                        next[tx.next(sx, x, step) * ty.size() + ty.next(sy, y, step)] += v * w;
                    }
                }
                cur = next;
                step += 1;
            }
            snapshots.push(cur.clone());
        }
        snapshots
    };
    let (under_p, under_q) = rayon::join(|| eval(p), || eval(q));

    let mut points_by_n = Vec::new();
    for (k, &n) in order.iter().enumerate() {
        let bits_x: Vec<bool> = (0..tx.size()).map(|s| tx.bit(s, n)).collect();
        let bits_y: Vec<bool> = (0..ty.size()).map(|s| ty.bit(s, n)).collect();
        let mut alpha = 0.0;
        let mut beta = 0.0;
        for idx in 0..states {
            let accept = scheme.accept(bits_x[idx / ty.size()], bits_y[idx % ty.size()]);
            if accept {
                beta += under_q[k][idx];
            } else {
                alpha += under_p[k][idx];
            }
        }
        points_by_n.push((n, point(n, alpha, beta)));
    }
    let points = n_list
        .iter()
        .map(|n| {
            points_by_n
                .iter()
                .find(|(m, _)| m == n)
                .map(|(_, pt)| pt.clone())
                .expect("every n was evaluated")
        })
        .collect();
    Ok(ErrorCurve {
        points,
        method: CurveMethod::ExactTypes,
        block_size: 1,
    })
}

fn point(n: usize, alpha: f64, beta: f64) -> CurvePoint {
    let alpha = alpha.clamp(0.0, 1.0);
    let beta = beta.clamp(0.0, 1.0);
    CurvePoint {
        n,
        alpha,
        beta,
        minus_log_beta_over_n: if beta > 0.0 {
            ExtReal::Finite((-beta.ln() / n as f64).max(0.0))
        } else {
            ExtReal::Infinite
        },
    }
}

fn check_shapes(p: &JointPmf, q: &JointPmf) -> Result<(usize, usize)> {
    if p.shape() != q.shape() {
        return Err(Error::dim(format!(
            "p is {:?}, q is {:?}",
            p.shape(),
            q.shape()
        )));
    }
    let (dx, dy) = p.shape();
    if dx > MAX_ALPHABET || dy > MAX_ALPHABET {
        return Err(Error::Size(format!(
            "alphabets {dx}x{dy} exceed {MAX_ALPHABET}x{MAX_ALPHABET}"
        )));
    }
    Ok((dx, dy))
}

/// Finite-state summary of a party's string sufficient for its test.
enum Tracker {
    /// Symbol counts in mixed radix with base `n_max + 1`; the last symbol
    /// is implied.
    Counts {
        d: usize,
        base: usize,
        rule: TypicalityRule,
        reference: Vec<f64>,
    },
    /// State 0 while every symbol is in the mask, 1 afterwards.
    AllIn { mask: Vec<bool> },
    /// State 0 before the first symbol, `1 + a` after first symbol `a`.
    First { mask: Vec<bool> },
}

impl Tracker {
    fn new(test: &LocalTest, d: usize, n_max: usize, reference: &[f64]) -> Result<Self> {
        let mask = |set: &[usize]| -> Result<Vec<bool>> {
            let mut m = vec![false; d];
            for &a in set {
                *m.get_mut(a).ok_or_else(|| {
                    Error::invalid(format!("symbol {a} is outside the alphabet of size {d}"))
                })? = true;
            }
            Ok(m)
        };
        Ok(match test {
            LocalTest::Typical(rule) => {
                if rule.mode == TypicalityMode::Interval && d != 2 {
                    return Err(Error::invalid("interval typicality needs a binary alphabet"));
                }
                Tracker::Counts {
                    d,
                    base: n_max + 1,
                    rule: *rule,
                    reference: reference.to_vec(),
                }
            }
            LocalTest::SupportedOn(set) => Tracker::AllIn { mask: mask(set)? },
            LocalTest::FirstSymbolIn(set) => Tracker::First { mask: mask(set)? },
        })
    }

    fn size(&self) -> usize {
        match self {
            Tracker::Counts { d, base, .. } => base.pow((*d - 1) as u32),
            Tracker::AllIn { .. } => 2,
            Tracker::First { mask } => mask.len() + 1,
        }
    }

    fn start(&self) -> usize {
        0
    }

    fn next(&self, state: usize, sym: usize, position: usize) -> usize {
        match self {
            Tracker::Counts { d, base, .. } => {
                if sym + 1 == *d {
                    state
                } else {
                    state + base.pow(sym as u32)
                }
            }
            Tracker::AllIn { mask } => {
                if mask[sym] {
                    state
                } else {
                    1
                }
            }
            Tracker::First { .. } => {
                if position == 0 {
                    1 + sym
                } else {
                    state
                }
            }
        }
    }

    fn bit(&self, state: usize, n: usize) -> bool {
        match self {
            Tracker::Counts {
                d,
                base,
                rule,
                reference,
            } => {
                let mut counts = vec![0; *d];
                let mut rest = state;
                let mut used = 0;
                for slot in counts.iter_mut().take(d - 1) {
                    *slot = rest % base;
                    rest /= base;
                    used += *slot;
                }
                if used > n {
                    return false;
                }
                counts[d - 1] = n - used;
                rule.accepts(&counts, n, reference)
            }
            Tracker::AllIn { .. } => state == 0,
            Tracker::First { mask } => state > 0 && mask[state - 1],
        }
    }
}

/// Sampled type I error with its Wilson interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub rejections: usize,
    pub alpha_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Where the type II error comes from.
    pub beta_note: String,
}

pub fn one_bit_monte_carlo(
    p: &JointPmf,
    q: &JointPmf,
    rule: TypicalityRule,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_shapes(p, q)?;
    one_bit_monte_carlo_scheme(p, &OneBitScheme::typicality(rule), n, trials, seed)
}

/// Trials run in batches of fixed size, batch `b` seeded with `seed + b`, so
/// the estimate does not depend on the thread count.
pub fn one_bit_monte_carlo_scheme(
    p: &JointPmf,
    scheme: &OneBitScheme,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let (dx, dy) = p.shape();
    let tx = Tracker::new(&scheme.test_x, dx, n, &p.marginal_x())?;
    let ty = Tracker::new(&scheme.test_y, dy, n, &p.marginal_y())?;
    let sampler = WeightedIndex::new(p.as_slice())
        .map_err(|e| Error::invalid(format!("cannot sample from p: {e}")))?;
    let batches = trials.div_ceil(MC_BATCH);
    let rejections: usize = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(b as u64));
            let count = MC_BATCH.min(trials - b * MC_BATCH);
            let mut rejected = 0;
            for _ in 0..count {
                let (mut sx, mut sy) = (tx.start(), ty.start());
                for pos in 0..n {
                    let cell = sampler.sample(&mut rng);
                    sx = tx.next(sx, cell / dy, pos);
                    sy = ty.next(sy, cell % dy, pos);
                }
                if !scheme.accept(tx.bit(sx, n), ty.bit(sy, n)) {
                    rejected += 1;
                }
            }
            rejected
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let (low, high) = wilson_interval(rejections, trials, WILSON_Z);
    Ok(MonteCarloEstimate {
        n,
        trials,
        seed,
        rejections,
        alpha_hat: rejections as f64 / trials as f64,
        wilson_low: low,
        wilson_high: high,
        beta_note: "beta is computed exactly by one_bit_exact; it is not sampled".into(),
    })
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    let nt = trials as f64;
    let phat = successes as f64 / nt;
    let z2 = z * z;
    let denom = 1.0 + z2 / nt;
    let center = (phat + z2 / (2.0 * nt)) / denom;
    let half = z * (phat * (1.0 - phat) / nt + z2 / (4.0 * nt * nt)).sqrt() / denom;
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

/// The induced outcome pmfs of one block under a local measurement.
pub fn induced_pair(pair: &BipartitePair, pvm: &LocalPvm) -> Result<(JointPmf, JointPmf)> {
    let m = pvm.block_size;
    let (d_a, d_b) = pair.dims();
    if (pvm.d_a, pvm.d_b) != (d_a, d_b) {
        return Err(Error::dim(format!(
            "measurement is for {}x{}, pair is {d_a}x{d_b}",
            pvm.d_a, pvm.d_b
        )));
    }
    let dim = (d_a * d_b)
        .checked_pow(m as u32)
        .ok_or_else(|| Error::Size("block dimension overflows".into()))?;
    linalg::check_dim(dim)?;
    let null = state::tensor_power(&pair.null_state, m)?;
    let alt = state::tensor_power(&pair.alt_state, m)?;
    Ok((
        snap_zeros(&pvm_opt::induced_pmf(&null, pvm)?)?,
        snap_zeros(&pvm_opt::induced_pmf(&alt, pvm)?)?,
    ))
}

fn snap_zeros(p: &JointPmf) -> Result<JointPmf> {
    let (rows, cols) = p.shape();
    let table = p
        .as_slice()
        .iter()
        .map(|&v| if v < ZERO_MASS_TOL { 0.0 } else { v })
        .collect();
    JointPmf::from_weights(rows, cols, table)
}

/// Measures `k` blocks of `m` copies locally and runs the classical scheme
/// on the outcomes; exponents are per copy.
pub fn quantum_frontend(
    pair: &BipartitePair,
    pvm: &LocalPvm,
    scheme: &OneBitScheme,
    k_list: &[usize],
) -> Result<ErrorCurve> {
    let (p, q) = induced_pair(pair, pvm)?;
    let m = pvm.block_size;
    let curve = one_bit_exact_scheme(&p, &q, scheme, k_list)?;
    Ok(ErrorCurve {
        points: curve
            .points
            .into_iter()
            .map(|pt| point(pt.n * m, pt.alpha, pt.beta))
            .collect(),
        method: CurveMethod::ExactTypes,
        block_size: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{self, BellVariant};
    use crate::state::PvmBasis;

    fn correlated() -> JointPmf {
        JointPmf::from_rows(&[vec![0.45, 0.05], vec![0.05, 0.45]]).unwrap()
    }

    #[test]
    fn identical_hypotheses() {
        let p = correlated();
        let curve = one_bit_exact(&p, &p, TypicalityRule::robust(0.2).unwrap(), &[5, 17, 40]).unwrap();
        for pt in &curve.points {
            assert!((pt.alpha + pt.beta - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_interval_matches_binomial_sum() {
        let p = JointPmf::product(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        let q = JointPmf::product(&[0.3, 0.7], &[0.6, 0.4]).unwrap();
        let rule = TypicalityRule::new(0.2, TypicalityMode::Interval).unwrap();
        let n = 30;
        let curve = one_bit_exact(&p, &q, rule, &[n]).unwrap();
        let binom = |k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
        let typical = |ones: usize| {
            let o = ones as f64;
            0.5 * n as f64 * 0.8 <= o + 1e-9 && o <= 0.5 * n as f64 * 1.2 + 1e-9
        };
        let mass = |p1: f64| -> f64 {
            (0..=n)
                .filter(|&k| typical(k))
                .map(|k| binom(k) * p1.powi(k as i32) * (1.0 - p1).powi((n - k) as i32))
                .sum()
        };
        let want_beta = mass(0.7) * mass(0.4);
        let want_alpha = 1.0 - mass(0.5) * mass(0.5);
        let pt = &curve.points[0];
        assert!((pt.beta - want_beta).abs() < 1e-14);
        assert!((pt.alpha - want_alpha).abs() < 1e-13);
    }

    #[test]
    fn disjoint_support_gives_zero_beta() {
        let p = JointPmf::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let q = JointPmf::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let curve = one_bit_exact(&p, &q, TypicalityRule::robust(0.5).unwrap(), &[10]).unwrap();
        assert_eq!(curve.points[0].beta, 0.0);
        assert_eq!(curve.points[0].alpha, 0.0);
        assert_eq!(curve.points[0].minus_log_beta_over_n, ExtReal::Infinite);
    }

    #[test]
    fn guards() {
        let p = JointPmf::uniform(5, 2).unwrap();
        assert!(matches!(
            one_bit_exact(&p, &p, TypicalityRule::robust(0.1).unwrap(), &[4]),
            Err(Error::Size(_))
        ));
        let p = correlated();
        assert!(one_bit_exact(&p, &p, TypicalityRule::robust(0.1).unwrap(), &[81]).is_err());
        assert!(TypicalityRule::robust(1.5).is_err());
    }

    #[test]
    fn point_mass_never_rejected() {
        let p = JointPmf::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let est = one_bit_monte_carlo(&p, &p, TypicalityRule::robust(0.1).unwrap(), 20, 500, 3).unwrap();
        assert_eq!(est.alpha_hat, 0.0);
        assert_eq!(est.wilson_low, 0.0);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_consistent() {
        let p = correlated();
        let rule = TypicalityRule::robust(0.2).unwrap();
        let a = one_bit_monte_carlo(&p, &p, rule, 30, 5000, 11).unwrap();
        let b = one_bit_monte_carlo(&p, &p, rule, 30, 5000, 11).unwrap();
        assert_eq!(a, b);
        let exact = one_bit_exact(&p, &p, rule, &[30]).unwrap().points[0].alpha;
        let (lo, hi) = wilson_interval(a.rejections, a.trials, 4.0);
        assert!(lo <= exact && exact <= hi);
    }

    #[test]
    fn wilson_known_value() {
        // 10 successes of 100 trials
        let (lo, hi) = wilson_interval(10, 100, WILSON_Z);
        assert!((lo - 0.055_229_3).abs() < 1e-6);
        assert!((hi - 0.174_366_2).abs() < 1e-6);
    }

    #[test]
    fn bell_pairs_perfectly_discriminated() {
        let scheme = OneBitScheme {
            test_x: LocalTest::FirstSymbolIn(vec![0]),
            test_y: LocalTest::FirstSymbolIn(vec![0]),
            fusion: Fusion::Agree,
        };
        let cases = [
            (BellVariant::PhiPlus, BellVariant::PsiPlus, PvmBasis::computational(2)),
            (BellVariant::PlusPlus, BellVariant::PlusMinus, PvmBasis::fourier(2)),
        ];
        for (null, alt, basis) in cases {
            let pair = BipartitePair::new(
                2,
                2,
                presets::bell(null).unwrap(),
                presets::bell(alt).unwrap(),
            )
            .unwrap();
            let pvm = LocalPvm::new(basis.clone(), basis, 2, 2, 1).unwrap();
            let curve = quantum_frontend(&pair, &pvm, &scheme, &[1, 5, 20]).unwrap();
            for pt in &curve.points {
                assert_eq!(pt.alpha, 0.0);
                assert_eq!(pt.beta, 0.0);
            }
        }
    }

    #[test]
    fn commuting_frontend_equals_classical() {
        let p = JointPmf::from_rows(&[vec![0.4, 0.1], vec![0.2, 0.3]]).unwrap();
        let q = JointPmf::product(&[0.5, 0.5], &[0.6, 0.4]).unwrap();
        let diag = |t: &JointPmf| crate::state::DensityOperator::diagonal(t.as_slice()).unwrap();
        let pair = BipartitePair::new(2, 2, diag(&p), diag(&q)).unwrap();
        let rule = TypicalityRule::robust(0.3).unwrap();
        let scheme = OneBitScheme::typicality(rule);
        let quantum =
            quantum_frontend(&pair, &LocalPvm::computational(2, 2, 1), &scheme, &[8, 16]).unwrap();
        let classical = one_bit_exact(&p, &q, rule, &[8, 16]).unwrap();
        for (a, b) in quantum.points.iter().zip(&classical.points) {
            assert!((a.alpha - b.alpha).abs() < 1e-14);
            assert!((a.beta - b.beta).abs() < 1e-14);
        }
    }

    #[test]
    fn blocks_normalize_per_copy() {
        let pair = BipartitePair::new(
            2,
            2,
            crate::state::DensityOperator::diagonal(&[0.4, 0.1, 0.2, 0.3]).unwrap(),
            crate::state::DensityOperator::diagonal(&[0.25; 4]).unwrap(),
        )
        .unwrap();
        let scheme = OneBitScheme::typicality(TypicalityRule::robust(0.3).unwrap());
        let curve =
            quantum_frontend(&pair, &LocalPvm::computational(2, 2, 2), &scheme, &[3]).unwrap();
        assert_eq!(curve.block_size, 2);
        assert_eq!(curve.points[0].n, 6);
    }
}
