//! Acceptance harness: one PASS/FAIL line per criterion, tolerances pinned
//! below.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use steinlab::blowup::{self, BlowupParams, Contraction};
use steinlab::entropy::{self, umegaki};
use steinlab::exponents::{self, Family};
use steinlab::linalg::{self, Keep};
use steinlab::marginal::{self, MarginalConstraint, QuantumMarginals};
use steinlab::presets::{self, BellVariant};
use steinlab::protocol::{self, Fusion, LocalTest, OneBitScheme, TypicalityRule};
use steinlab::pvm_opt::{self, PvmSearchConfig};
use steinlab::random;
use steinlab::state::{self, BipartitePair, DensityOperator, LocalPvm, PvmBasis};
use steinlab::JointPmf;

const KAPPA_TARGET: f64 = 0.0178;
const KAPPA_TOL: f64 = 5e-4;
const KAPPA_TIME: Duration = Duration::from_secs(1);
const PRODUCT_ALT_TOL: f64 = 1e-6;
const PRODUCT_ALT_TIME: Duration = Duration::from_secs(30);
const BOUNDS_TOL: f64 = 1e-12;
const ZERO_SL_TOL: f64 = 1e-9;
const ZERO_MAXMIN_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 1e-8;
const EMBEDDING_TOL: f64 = 1e-3;
const ONE_BIT_REL: f64 = 0.15;
const ONE_BIT_TIME: Duration = Duration::from_secs(10);
const SLACK_TOL: f64 = 1e-12;
const GAMMA_TARGET: f64 = 0.05;
const PINCH_TOL: f64 = 1e-10;
const LEMMA4_TOL: f64 = 1e-9;
const TENSOR_TOL: f64 = 1e-10;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn trace_distance(a: &linalg::CMat, b: &linalg::CMat) -> f64 {
    0.5 * linalg::trace_norm_hermitian(&(a - b))
}

fn c1_kappa() -> Outcome {
    let start = Instant::now();
    let (psi, r0, r1) = presets::kappa_instance().unwrap();
    let k = exponents::kappa_gap(&psi, &r0, &r1).unwrap();
    let elapsed = start.elapsed();
    outcome(
        (k - KAPPA_TARGET).abs() <= KAPPA_TOL && elapsed < KAPPA_TIME,
        format!("kappa = {k:.6} in {elapsed:.2?}"),
    )
}

fn c2_product_alternative() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst_obj: f64 = 0.0;
    let mut worst_dist: f64 = 0.0;
    for _ in 0..50 {
        let rho = random::random_full_rank(4, &mut r).unwrap();
        let sa = random::random_full_rank(2, &mut r).unwrap();
        let sb = random::random_full_rank(2, &mut r).unwrap();
        let sigma = state::tensor_product(&sa, &sb).unwrap();
        let ra = state::partial_trace(&rho, (2, 2), Keep::A).unwrap();
        let rb = state::partial_trace(&rho, (2, 2), Keep::B).unwrap();
        let c = QuantumMarginals::new(ra.clone(), rb.clone());
        let (tau, diag) = marginal::qproject(&sigma, &c, (2, 2), 1e-10).unwrap();
        let closed = umegaki(&ra, sa.matrix()).unwrap().to_f64()
            + umegaki(&rb, sb.matrix()).unwrap().to_f64();
        worst_obj = worst_obj.max((diag.objective - closed).abs());
        let prod = linalg::kron(ra.matrix(), rb.matrix());
        worst_dist = worst_dist.max(trace_distance(tau.matrix(), &prod));
    }
    let elapsed = start.elapsed();
    outcome(
        worst_obj <= PRODUCT_ALT_TOL && worst_dist <= PRODUCT_ALT_TOL && elapsed < PRODUCT_ALT_TIME,
        format!("max |obj - closed| = {worst_obj:.2e}, max trace distance = {worst_dist:.2e}, {elapsed:.2?}"),
    )
}

fn c3_bounds() -> Outcome {
    let iso = exponents::iso_werner_bounds(Family::Isotropic, 1.0, 2)
        .unwrap()
        .value
        .to_f64();
    let wer = exponents::iso_werner_bounds(Family::Werner, 1.0, 2)
        .unwrap()
        .value
        .to_f64();
    outcome(
        (iso - 3f64.ln()).abs() <= BOUNDS_TOL && wer.abs() <= BOUNDS_TOL,
        format!("isotropic = {iso:.15}, werner = {wer:.3e}"),
    )
}

fn same_marginal_pairs() -> Vec<BipartitePair> {
    let mut r = rng(4);
    let mut pairs = Vec::new();
    for _ in 0..7 {
        let (p, q) = (r.random_range(0.05..0.95), r.random_range(0.05..0.95));
        pairs.push(
            BipartitePair::new(
                2,
                2,
                presets::isotropic(p, 2).unwrap(),
                presets::isotropic(q, 2).unwrap(),
            )
            .unwrap(),
        );
    }
    for _ in 0..7 {
        let (p, q) = (r.random_range(0.05..0.95), r.random_range(0.05..0.95));
        pairs.push(
            BipartitePair::new(
                2,
                2,
                presets::werner(p, 2).unwrap(),
                presets::werner(q, 2).unwrap(),
            )
            .unwrap(),
        );
    }
    for _ in 0..6 {
        let b0 = random::random_full_rank(2, &mut r).unwrap();
        let b1 = random::random_full_rank(2, &mut r).unwrap();
        let null = presets::cq_state(&[0.5, 0.5], &[b0.clone(), b1.clone()]).unwrap();
        let alt = presets::cq_state(&[0.5, 0.5], &[b1, b0]).unwrap();
        pairs.push(BipartitePair::new(2, 2, null, alt).unwrap());
    }
    pairs
}

fn c4_same_marginals() -> Outcome {
    let mut worst_sl: f64 = 0.0;
    let mut worst_mm: f64 = 0.0;
    let mut all_supported = true;
    let cfg = PvmSearchConfig {
        restarts: 4,
        ..PvmSearchConfig::default()
    };
    for pair in same_marginal_pairs() {
        all_supported &= pair.support_condition().unwrap();
        let sl = exponents::theta_sl(&pair, 1e-10).unwrap().value.to_f64();
        let (mm, _) = pvm_opt::maxmin_finite_n(&pair, &cfg).unwrap();
        worst_sl = worst_sl.max(sl.abs());
        worst_mm = worst_mm.max(mm.value.to_f64().abs());
    }
    outcome(
        all_supported && worst_sl <= ZERO_SL_TOL && worst_mm <= ZERO_MAXMIN_TOL,
        format!("20 pairs: max |theta_sl| = {worst_sl:.2e}, max |maxmin| = {worst_mm:.2e}"),
    )
}

fn c5_classical() -> Outcome {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let q = random::random_joint_pmf(2, 2, &mut r).unwrap();
        let c = MarginalConstraint::new(random::random_simplex(2, &mut r), random::random_simplex(2, &mut r))
            .unwrap();
        let (_, diag) = marginal::iproject(&q, &c, 1e-12).unwrap();
        let brute = marginal::brute_oracle_2x2(&q, &c, 2000).unwrap();
        worst = worst.max((diag.objective - brute).abs());
    }
    let cfg = PvmSearchConfig {
        restarts: 4,
        ..PvmSearchConfig::default()
    };
    let mut worst_embed: f64 = 0.0;
    for _ in 0..10 {
        let p = random::random_joint_pmf(2, 2, &mut r).unwrap();
        let q = random::random_joint_pmf(2, 2, &mut r).unwrap();
        let theta = exponents::theta_zrc(&p, &q).unwrap().value.to_f64();
        let pair = BipartitePair::new(
            2,
            2,
            DensityOperator::diagonal(p.as_slice()).unwrap(),
            DensityOperator::diagonal(q.as_slice()).unwrap(),
        )
        .unwrap();
        let (mm, _) = pvm_opt::maxmin_finite_n(&pair, &cfg).unwrap();
        worst_embed = worst_embed.max((mm.value.to_f64() - theta).abs());
    }
    outcome(
        worst <= ORACLE_TOL && worst_embed <= EMBEDDING_TOL,
        format!("500 instances: max |ipf - brute| = {worst:.2e}; 10 embeddings: max |maxmin - theta_zrc| = {worst_embed:.2e}"),
    )
}

fn c6_one_bit() -> Outcome {
    let start = Instant::now();
    let p = JointPmf::from_rows(&[vec![0.45, 0.05], vec![0.05, 0.45]]).unwrap();
    let q = JointPmf::uniform(2, 2).unwrap();
    let theta = exponents::theta_zrc(&p, &q).unwrap().value.to_f64();
    let ns = [10, 20, 40, 60];
    let curve = protocol::one_bit_exact(&p, &q, TypicalityRule::robust(0.1).unwrap(), &ns).unwrap();
    let exps: Vec<f64> = curve
        .points
        .iter()
        .map(|pt| pt.minus_log_beta_over_n.to_f64())
        .collect();
    let gaps: Vec<f64> = exps.iter().map(|e| (e - theta).abs()).collect();
    let improving = gaps.windows(2).all(|w| w[1] <= w[0]);
    let last = *exps.last().unwrap();
    let within = (last - theta).abs() <= ONE_BIT_REL * theta.abs();
    let elapsed = start.elapsed();
    outcome(
        improving && within && elapsed < ONE_BIT_TIME,
        format!(
            "theta_zrc = {theta:.6}; exponents at n = {ns:?}: {:?}; {elapsed:.2?}",
            exps.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn c7_blowup() -> Outcome {
    let mut r = rng(7);
    let mut mono_fail = 0;
    let mut worst_mono = f64::INFINITY;
    for i in 0..100 {
        let rho = random::random_full_rank(2, &mut r).unwrap();
        let sigma = random::random_full_rank(2, &mut r).unwrap();
        let m = random::random_contraction(2, &mut r);
        let n = r.random_range(4..=12);
        let rn = if i % 2 == 0 { 0.5 } else { 1.0 };
        let trace = linalg::trace_product_re(&m, rho.matrix()).powi(n as i32);
        let p = BlowupParams::new(n, trace.min(1.0), rn).unwrap();
        let rec = blowup::verify_blowup(&rho, &Contraction::Product(m), &sigma, &p).unwrap();
        worst_mono = worst_mono.min(rec.rho_slack.min(rec.sigma_slack.to_f64()));
        if !rec.passed {
            mono_fail += 1;
        }
    }
    let mut bi_fail = 0;
    let mut worst_bi = f64::INFINITY;
    for i in 0..50 {
        let rho = random::random_full_rank(4, &mut r).unwrap();
        let sigma = random::random_full_rank(4, &mut r).unwrap();
        let ma = random::random_contraction(2, &mut r);
        let mb = random::random_contraction(2, &mut r);
        let n = r.random_range(2..=8);
        let rn = if i % 2 == 0 { 0.5 } else { 1.0 };
        let ra = state::partial_trace(&rho, (2, 2), Keep::A).unwrap();
        let rb = state::partial_trace(&rho, (2, 2), Keep::B).unwrap();
        let eps = linalg::trace_product_re(&ma, ra.matrix())
            .powi(n as i32)
            .min(linalg::trace_product_re(&mb, rb.matrix()).powi(n as i32));
        let p = BlowupParams::new(n, eps.min(1.0), rn).unwrap();
        let rec = blowup::verify_blowup_bipartite(
            &rho,
            (2, 2),
            &Contraction::Product(ma),
            &Contraction::Product(mb),
            &sigma,
            &p,
        )
        .unwrap();
        worst_bi = worst_bi
            .min(rec.rho_slack)
            .min(rec.sigma_slack.to_f64())
            .min(rec.joint_slack);
        if !rec.passed {
            bi_fail += 1;
        }
    }
    // formula-only schedule: d = 2, μ̄ = 1/4, ε = 0.1, |W_n| = n
    let mut schedule = Vec::new();
    for k in 1..=14 {
        let n = 1usize << k;
        let p = BlowupParams::zero_rate_schedule(n, 0.1, n as f64).unwrap();
        let v = blowup::normalized_log_gamma(&p, 2, 0.25).unwrap().to_f64();
        schedule.push(v);
    }
    let tail_decreasing = schedule[4..].windows(2).all(|w| w[1] < w[0]);
    let last = *schedule.last().unwrap();
    let ok = mono_fail == 0
        && worst_mono >= -SLACK_TOL
        && bi_fail == 0
        && worst_bi >= -SLACK_TOL
        && tail_decreasing
        && last < GAMMA_TARGET;
    outcome(
        ok,
        format!(
            "monopartite {}/100 pass (min slack {worst_mono:.3e}); bipartite {}/50 pass (min slack {worst_bi:.3e}); \
             (1/n) ln gamma at n = 2^10..2^14: {:?}",
            100 - mono_fail,
            50 - bi_fail,
            schedule[9..].iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn c8_pinching() -> Outcome {
    let mut r = rng(8);
    let mut worst = f64::INFINITY;
    for i in 0..200 {
        let d = 2 + i % 7;
        let m = random::random_contraction(d, &mut r);
        let basis = random::random_basis(d, &mut r);
        let pinched = state::pinch(&m, &basis).unwrap();
        let diff = pinched - m.map(|z| z / d as f64);
        worst = worst.min(linalg::min_eigenvalue(&linalg::symmetrize(&diff)));
    }
    outcome(worst >= -PINCH_TOL, format!("min eigenvalue over 200 contractions = {worst:.3e}"))
}

fn c9_lemma4() -> Outcome {
    let mut r = rng(9);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_tensor: f64 = 0.0;
    for _ in 0..20 {
        let rho = random::random_pure(2, &mut r).unwrap();
        let s0 = random::random_full_rank(2, &mut r).unwrap();
        let s1 = random::random_full_rank(2, &mut r).unwrap();
        let omega = entropy::geometric_mean(s0.matrix(), s1.matrix(), 1e-12).unwrap();
        let rhs = umegaki(&rho, &omega).unwrap().to_f64();
        for _ in 0..1000 {
            let basis: PvmBasis = random::random_basis(2, &mut r);
            let d0 = entropy::measured_re(&rho, s0.matrix(), &basis).unwrap().to_f64();
            let d1 = entropy::measured_re(&rho, s1.matrix(), &basis).unwrap().to_f64();
            worst = worst.max(0.5 * (d0 + d1) - rhs);
        }
        let t0 = random::random_full_rank(2, &mut r).unwrap();
        let t1 = random::random_full_rank(2, &mut r).unwrap();
        let joint = entropy::geometric_mean(
            &linalg::kron(s0.matrix(), t0.matrix()),
            &linalg::kron(s1.matrix(), t1.matrix()),
            1e-12,
        )
        .unwrap();
        let split = linalg::kron(
            &omega,
            &entropy::geometric_mean(t0.matrix(), t1.matrix(), 1e-12).unwrap(),
        );
        worst_tensor = worst_tensor.max(linalg::frobenius(&(joint - split)));
    }
    outcome(
        worst <= LEMMA4_TOL && worst_tensor <= TENSOR_TOL,
        format!("max (lhs - rhs) = {worst:.3e}; tensorization residual = {worst_tensor:.2e}"),
    )
}

fn c10_example1() -> Outcome {
    let scheme = OneBitScheme {
        test_x: LocalTest::FirstSymbolIn(vec![0]),
        test_y: LocalTest::FirstSymbolIn(vec![0]),
        fusion: Fusion::Agree,
    };
    let cases = [
        ("Z", BellVariant::PhiPlus, BellVariant::PsiPlus, PvmBasis::computational(2)),
        ("X", BellVariant::PlusPlus, BellVariant::PlusMinus, PvmBasis::fourier(2)),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (label, null, alt, basis) in cases {
        let pair = BipartitePair::new(
            2,
            2,
            presets::bell(null).unwrap(),
            presets::bell(alt).unwrap(),
        )
        .unwrap();
        let pvm = LocalPvm::new(basis.clone(), basis, 2, 2, 1).unwrap();
        let curve = protocol::quantum_frontend(&pair, &pvm, &scheme, &[1, 10, 40]).unwrap();
        let max_alpha = curve.points.iter().map(|p| p.alpha).fold(0.0, f64::max);
        let max_beta = curve.points.iter().map(|p| p.beta).fold(0.0, f64::max);
        ok &= max_alpha == 0.0 && max_beta == 0.0;
        details.push(format!("{label}⊗{label}: alpha = {max_alpha}, beta = {max_beta}"));
    }
    outcome(ok, details.join("; "))
}

fn c11_typical_projectors() -> Outcome {
    let ra = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
    let rb = DensityOperator::diagonal(&[0.3, 0.7]).unwrap();
    let sa = DensityOperator::diagonal(&[0.4, 0.6]).unwrap();
    let sb = DensityOperator::diagonal(&[0.6, 0.4]).unwrap();
    let null = DensityOperator::diagonal(&[0.26, 0.54, 0.04, 0.16]).unwrap();
    let check_a = state::partial_trace(&null, (2, 2), Keep::A).unwrap();
    let check_b = state::partial_trace(&null, (2, 2), Keep::B).unwrap();
    assert!(linalg::frobenius(&(check_a.matrix() - ra.matrix())) < 1e-12);
    assert!(linalg::frobenius(&(check_b.matrix() - rb.matrix())) < 1e-12);
    let pair = BipartitePair::new(2, 2, null, state::tensor_product(&sa, &sb).unwrap()).unwrap();
    let (n, delta) = (12, 0.2);
    let rec = blowup::typical_projector_scheme(&pair, n, delta).unwrap();
    let est = rec.exponent_estimate.to_f64();
    let window = 4.0 * delta + 3.0 * (n as f64).ln() / n as f64;
    outcome(
        (est - rec.theta_product_alt).abs() <= window,
        format!(
            "n = {n}: -ln beta / n = {est:.4}, theta = {:.4}, window = {window:.4}, alpha = {:.4}",
            rec.theta_product_alt, rec.alpha
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "kappa reproduction", c1_kappa),
        (2, "product-alternative consistency", c2_product_alternative),
        (3, "isotropic/Werner bounds", c3_bounds),
        (4, "same-marginal zeros", c4_same_marginals),
        (5, "classical exactness", c5_classical),
        (6, "one-bit scheme convergence", c6_one_bit),
        (7, "blowing-up verification", c7_blowup),
        (8, "pinching inequality", c8_pinching),
        (9, "geometric-mean bound", c9_lemma4),
        (10, "perfect discrimination", c10_example1),
        (11, "typical-projector trend", c11_typical_projectors),
    ];
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        let o = run();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} {id:>2} {name}: {}", o.detail);
        if !o.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
