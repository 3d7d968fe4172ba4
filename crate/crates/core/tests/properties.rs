//! Randomized invariants.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use steinlab::blowup::{self, BlowupParams, Contraction, IndexSet};
use steinlab::entropy;
use steinlab::linalg;
use steinlab::marginal::{self, MarginalConstraint};
use steinlab::protocol::{self, TypicalityRule};
use steinlab::random;
use steinlab::state;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hamming_ball_has_exact_size(n in 1usize..9, d in 2usize..4, radius in 0usize..5, seed: u64) {
        let code = (seed as usize) % d.pow(n as u32);
        let s = IndexSet::new(n, d, vec![code]).unwrap();
        let ball = blowup::hamming_blowup(&s, radius as f64).unwrap();
        let want: f64 = (0..=radius.min(n))
            .map(|l| binomial(n, l) * ((d - 1) as f64).powi(l as i32))
            .sum();
        prop_assert_eq!(ball.len() as f64, want);
        prop_assert!(s.is_subset(&ball));
    }

    #[test]
    fn blowup_contains_seed_set(n in 2usize..8, seed: u64, eps in 0.01f64..0.9) {
        let mut r = rng(seed);
        let local: Vec<f64> = (0..2).map(|_| rand::Rng::random::<f64>(&mut r)).collect();
        let diag: Vec<f64> = (0..1usize << n)
            .map(|code| (0..n).map(|k| local[(code >> k) & 1]).product())
            .collect();
        let p = BlowupParams::new(n, eps, 0.5).unwrap();
        let j = blowup::build_j_set(&diag, 2, &p).unwrap();
        let blown = blowup::hamming_blowup(&j, p.radius() as f64).unwrap();
        prop_assert!(j.is_subset(&blown));
    }

    #[test]
    fn rho_mass_grows_with_radius(n in 4usize..10, seed: u64) {
        let mut r = rng(seed);
        let rho = random::random_full_rank(2, &mut r).unwrap();
        let sigma = random::random_full_rank(2, &mut r).unwrap();
        let m = random::random_contraction(2, &mut r);
        let eps = linalg::trace_product_re(&m, rho.matrix()).powi(n as i32).min(1.0);
        let mut last = 0.0;
        for rn in [0.25, 0.5, 1.0, 1.5] {
            let p = BlowupParams::new(n, eps, rn).unwrap();
            let rec = blowup::verify_blowup(&rho, &Contraction::Product(m.clone()), &sigma, &p).unwrap();
            prop_assert!(rec.rho_mass >= last - 1e-12);
            prop_assert!(rec.passed);
            last = rec.rho_mass;
        }
    }

    #[test]
    fn pinching_dominates_scaled_operator(d in 2usize..7, seed: u64) {
        let mut r = rng(seed);
        let m = random::random_contraction(d, &mut r);
        let basis = random::random_basis(d, &mut r);
        let diff = state::pinch(&m, &basis).unwrap() - m.map(|z| z / d as f64);
        prop_assert!(linalg::min_eigenvalue(&linalg::symmetrize(&diff)) >= -1e-10);
    }

    #[test]
    fn measurement_cannot_increase_relative_entropy(d in 2usize..5, seed: u64) {
        let mut r = rng(seed);
        let rho = random::random_full_rank(d, &mut r).unwrap();
        let sigma = random::random_full_rank(d, &mut r).unwrap();
        let basis = random::random_basis(d, &mut r);
        let measured = entropy::measured_re(&rho, sigma.matrix(), &basis).unwrap().to_f64();
        let full = entropy::umegaki(&rho, sigma.matrix()).unwrap().to_f64();
        prop_assert!(measured >= -1e-12);
        prop_assert!(measured <= full + 1e-9);
    }

    #[test]
    fn projection_hits_targets(rows in 2usize..4, cols in 2usize..4, seed: u64) {
        let mut r = rng(seed);
        let q = random::random_joint_pmf(rows, cols, &mut r).unwrap();
        let c = MarginalConstraint::new(
            random::random_simplex(rows, &mut r),
            random::random_simplex(cols, &mut r),
        ).unwrap();
        let (p, diag) = marginal::iproject(&q, &c, 1e-11).unwrap();
        let err: f64 = p.marginal_x().iter().zip(&c.target_px).map(|(a, b)| (a - b).abs()).sum::<f64>()
            + p.marginal_y().iter().zip(&c.target_py).map(|(a, b)| (a - b).abs()).sum::<f64>();
        prop_assert!(err <= 1e-8);
        let direct = entropy::kl_joint(&p, &q).unwrap().to_f64();
        prop_assert!((direct - diag.objective).abs() <= 1e-8);
        let product = steinlab::JointPmf::product(&c.target_px, &c.target_py).unwrap();
        prop_assert!(diag.objective <= entropy::kl_joint(&product, &q).unwrap().to_f64() + 1e-9);
    }

    #[test]
    fn exact_errors_are_probabilities(n in 1usize..25, seed: u64, delta in 0.05f64..0.5) {
        let mut r = rng(seed);
        let p = random::random_joint_pmf(2, 2, &mut r).unwrap();
        let q = random::random_joint_pmf(2, 2, &mut r).unwrap();
        let curve = protocol::one_bit_exact(&p, &q, TypicalityRule::robust(delta).unwrap(), &[n]).unwrap();
        let pt = &curve.points[0];
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&pt.alpha));
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&pt.beta));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn monte_carlo_is_reproducible(seed: u64, n in 1usize..20) {
        let mut r = rng(seed);
        let p = random::random_joint_pmf(2, 2, &mut r).unwrap();
        let q = random::random_joint_pmf(2, 2, &mut r).unwrap();
        let rule = TypicalityRule::robust(0.2).unwrap();
        let a = protocol::one_bit_monte_carlo(&p, &q, rule, n, 3000, seed).unwrap();
        let b = protocol::one_bit_monte_carlo(&p, &q, rule, n, 3000, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.wilson_low <= a.alpha_hat && a.alpha_hat <= a.wilson_high);
    }
}
