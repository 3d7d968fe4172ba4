//! Built-in reproduction targets.
//!
//! Every item runs in isolation: an error inside one item marks that item
//! failed and leaves the rest alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use steinlab::entropy::umegaki;
use steinlab::exponents::{self, Family};
use steinlab::marginal::{self, QuantumMarginals};
use steinlab::protocol::{self, Fusion, LocalTest, OneBitScheme, TypicalityRule};
use steinlab::state::{BipartitePair, LocalPvm, PvmBasis};
use steinlab::{presets, random, JointPmf};

use crate::commands::product_pair;
use crate::error::{CliError, CliResult};
use crate::report::{Cell, Report, Table};

#[derive(Debug, Clone, Serialize)]
pub struct ItemResult {
    pub name: &'static str,
    pub expected: Value,
    pub got: Value,
    pub tol: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

type Check = steinlab::Result<(Value, Value, bool)>;

struct Item {
    name: &'static str,
    tol: f64,
    run: fn(f64) -> Check,
}

const ITEMS: &[Item] = &[
    Item {
        name: "kappa",
        tol: 5e-4,
        run: kappa,
    },
    Item {
        name: "bounds_isotropic",
        tol: 1e-12,
        run: bounds_isotropic,
    },
    Item {
        name: "bounds_werner",
        tol: 1e-12,
        run: bounds_werner,
    },
    Item {
        name: "product_alternative",
        tol: 1e-6,
        run: product_alternative,
    },
    Item {
        name: "same_marginal_zeros",
        tol: 1e-9,
        run: same_marginal_zeros,
    },
    Item {
        name: "example1_z",
        tol: 0.0,
        run: example1_z,
    },
    Item {
        name: "example1_x",
        tol: 0.0,
        run: example1_x,
    },
    Item {
        name: "type_dp",
        tol: 0.0,
        run: type_dp,
    },
];

pub fn item_names() -> Vec<&'static str> {
    ITEMS.iter().map(|i| i.name).collect()
}

fn within(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol
}

fn kappa(tol: f64) -> Check {
    let (psi, r0, r1) = presets::kappa_instance()?;
    let k = exponents::kappa_gap(&psi, &r0, &r1)?;
    Ok((json!(0.0178), json!(k), within(k, 0.0178, tol)))
}

fn bounds_isotropic(tol: f64) -> Check {
    let v = exponents::iso_werner_bounds(Family::Isotropic, 1.0, 2)?.value.to_f64();
    let want = 3f64.ln();
    Ok((json!(want), json!(v), within(v, want, tol)))
}

fn bounds_werner(tol: f64) -> Check {
    let v = exponents::iso_werner_bounds(Family::Werner, 1.0, 2)?.value.to_f64();
    Ok((json!(0.0), json!(v), within(v, 0.0, tol)))
}

/// Largest gap between the projection value and the sum of marginal
/// divergences over random product alternatives.
fn product_alternative(tol: f64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let rho = random::random_full_rank(4, &mut rng)?;
        let sa = random::random_full_rank(2, &mut rng)?;
        let sb = random::random_full_rank(2, &mut rng)?;
        let pair = product_pair(rho, &sa, &sb)?;
        let (ra, rb) = pair.null_marginals()?;
        let c = QuantumMarginals::new(ra.clone(), rb.clone());
        let (_, diag) = marginal::qproject(&pair.alt_state, &c, (2, 2), 1e-10)?;
        let closed = umegaki(&ra, sa.matrix())?.to_f64() + umegaki(&rb, sb.matrix())?.to_f64();
        worst = worst.max((diag.objective - closed).abs());
    }
    Ok((json!(0.0), json!(worst), worst <= tol))
}

fn same_marginal_zeros(tol: f64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut pairs = vec![
        BipartitePair::new(2, 2, presets::isotropic(0.3, 2)?, presets::isotropic(0.8, 2)?)?,
        BipartitePair::new(3, 3, presets::isotropic(0.6, 3)?, presets::isotropic(0.1, 3)?)?,
        BipartitePair::new(2, 2, presets::werner(0.2, 2)?, presets::werner(0.7, 2)?)?,
    ];
    let b0 = random::random_full_rank(2, &mut rng)?;
    let b1 = random::random_full_rank(2, &mut rng)?;
    let null = presets::cq_state(&[0.5, 0.5], &[b0.clone(), b1.clone()])?;
    let alt = presets::cq_state(&[0.5, 0.5], &[b1, b0])?;
    pairs.push(BipartitePair::new(2, 2, null, alt)?);
    let mut worst: f64 = 0.0;
    for pair in &pairs {
        worst = worst.max(exponents::theta_sl(pair, 1e-10)?.value.to_f64().abs());
    }
    Ok((json!(0.0), json!(worst), worst <= tol))
}

fn first_agree() -> OneBitScheme {
    OneBitScheme {
        test_x: LocalTest::FirstSymbolIn(vec![0]),
        test_y: LocalTest::FirstSymbolIn(vec![0]),
        fusion: Fusion::Agree,
    }
}

fn perfect(name: &str, basis: PvmBasis) -> Check {
    let pair = match presets::preset(name, &[], 2)? {
        presets::Preset::Pair(p) => p,
        presets::Preset::State(_) => unreachable!("example presets are pairs"),
    };
    let pvm = LocalPvm::new(basis.clone(), basis, 2, 2, 1)?;
    let curve = protocol::quantum_frontend(&pair, &pvm, &first_agree(), &[1, 10, 40])?;
    let worst = curve
        .points
        .iter()
        .map(|p| p.alpha.max(p.beta))
        .fold(0.0, f64::max);
    let witness = exponents::orthogonal_discrimination(&pair, &[])?.is_perfect();
    Ok((
        json!({"alpha": 0.0, "beta": 0.0, "witness": true}),
        json!({"max_error": worst, "witness": witness}),
        worst == 0.0 && witness,
    ))
}

fn example1_z(_: f64) -> Check {
    perfect("example1_z", PvmBasis::computational(2))
}

fn example1_x(_: f64) -> Check {
    perfect("example1_x", PvmBasis::fourier(2))
}

/// The exact type-class errors agree with sampling, the type I error falls
/// with `n`, and the exponent stays under the type-counting ceiling.
fn type_dp(_: f64) -> Check {
    let p = JointPmf::from_rows(&[vec![0.45, 0.05], vec![0.05, 0.45]])?;
    let q = JointPmf::from_rows(&[vec![0.3, 0.2], vec![0.2, 0.3]])?;
    let rule = TypicalityRule::robust(0.2)?;
    let ns = [20, 40, 80];
    let curve = protocol::one_bit_exact(&p, &q, rule, &ns)?;
    let alphas: Vec<f64> = curve.points.iter().map(|pt| pt.alpha).collect();
    let decreasing = alphas.windows(2).all(|w| w[1] <= w[0]);
    let theta = exponents::theta_zrc(&p, &q)?.value.to_f64();
    let under_ceiling = curve.points.iter().all(|pt| {
        let n = pt.n as f64;
        pt.minus_log_beta_over_n.to_f64() <= theta + 4.0 * (n + 1.0).ln() / n
    });
    let mc = protocol::one_bit_monte_carlo(&p, &q, rule, 20, 20_000, 7)?;
    let covered = mc.wilson_low <= alphas[0] && alphas[0] <= mc.wilson_high;
    Ok((
        json!({"alpha_decreasing": true, "within_ceiling": true, "sampled_covers_exact": true}),
        json!({
            "alpha": alphas,
            "alpha_decreasing": decreasing,
            "within_ceiling": under_ceiling,
            "sampled_covers_exact": covered,
        }),
        decreasing && under_ceiling && covered,
    ))
}

fn run_item(item: &Item) -> ItemResult {
    match (item.run)(item.tol) {
        Ok((expected, got, passed)) => ItemResult {
            name: item.name,
            expected,
            got,
            tol: item.tol,
            passed,
            error: None,
        },
        Err(e) => ItemResult {
            name: item.name,
            expected: Value::Null,
            got: Value::Null,
            tol: item.tol,
            passed: false,
            error: Some(e.to_string()),
        },
    }
}

fn cell(v: &Value) -> Cell {
    match v {
        Value::Number(n) => n.as_f64().map(Cell::Float).unwrap_or_else(|| Cell::Text(n.to_string())),
        Value::String(s) => Cell::Text(s.clone()),
        Value::Bool(b) => Cell::Bool(*b),
        Value::Null => Cell::Text(String::new()),
        other => Cell::Text(other.to_string()),
    }
}

pub fn run(config: Value, only: Option<&str>) -> CliResult<Report> {
    let selected: Vec<&Item> = match only {
        Some(name) => {
            let item = ITEMS.iter().find(|i| i.name == name).ok_or_else(|| {
                CliError::input("item", format!("unknown item {name:?}; known: {}", item_names().join(", ")))
            })?;
            vec![item]
        }
        None => ITEMS.iter().collect(),
    };
    let results: Vec<ItemResult> = selected.par_iter().map(|i| run_item(i)).collect();
    let failed = results.iter().filter(|r| !r.passed).count();
    let table = Table {
        headers: vec!["name", "expected", "got", "tol", "passed"],
        rows: results
            .iter()
            .map(|r| vec![r.name.into(), cell(&r.expected), cell(&r.got), r.tol.into(), r.passed.into()])
            .collect(),
    };
    let body = json!({"items": results, "failed": failed, "total": results.len()});
    let mut report = Report::new("repro", config, body, table);
    report.passed = failed == 0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_item_passes() {
        for item in ITEMS {
            let r = run_item(item);
            assert!(r.passed, "{}: {:?} {:?}", r.name, r.got, r.error);
        }
    }

    #[test]
    fn unknown_item_is_input_error() {
        let err = run(Value::Null, Some("nope")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

}
