//! One handler per subcommand. Each returns a [`Report`] and never prints.

use std::fs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use steinlab::blowup::{self, BlowupParams, Contraction};
use steinlab::exponents::{self, Discrimination, ExponentReport, Family};
use steinlab::marginal::{self, MarginalConstraint, QuantumMarginals};
use steinlab::protocol::{
    self, ErrorCurve, Fusion, LocalTest, OneBitScheme, TypicalityMode, TypicalityRule,
};
use steinlab::pvm_opt::{self, Optimizer, PvmSearchConfig};
use steinlab::state::{BipartitePair, DensityOperator, LocalPvm};
use steinlab::{io, linalg, presets, random, ExtReal, JointPmf};

use crate::args::{
    BlowupArgs, BoundsArgs, FamilyArg, GlobalArgs, MaxminArgs, ModeArg, OptimizerArg, PresetArgs,
    SchemeArg, SimulateArgs,
};
use crate::error::{CliError, CliResult};
use crate::report::{Cell, Report, Table};

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize to JSON")
}

/// Reads `--input`, or builds a preset shorthand from the flags.
pub fn load_problem(global: &GlobalArgs, preset: Option<&PresetArgs>) -> CliResult<Value> {
    if let Some(PresetArgs {
        preset: Some(name),
        params,
        d,
    }) = preset
    {
        return Ok(json!({"preset": name, "params": params, "d": d}));
    }
    match &global.input {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::input("$", format!("cannot read {}: {e}", path.display())))?;
            Ok(io::parse_json(&text)?)
        }
        None => Err(CliError::input("$", "no problem given; pass --input or --preset")),
    }
}

fn optional_problem(global: &GlobalArgs) -> CliResult<Option<Value>> {
    match global.input {
        Some(_) => load_problem(global, None).map(Some),
        None => Ok(None),
    }
}

fn config(global: &GlobalArgs, extra: Value) -> Value {
    let mut c = json!({
        "seed": global.seed,
        "tol": global.tol,
        "log_base": global.log_base,
    });
    if let (Some(obj), Value::Object(more)) = (c.as_object_mut(), extra) {
        obj.extend(more);
    }
    c
}

fn check_tol(global: &GlobalArgs) -> CliResult<()> {
    if global.tol > 0.0 && global.tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::input("--tol", format!("tolerance {} must be positive", global.tol)))
    }
}

pub fn ext_value(e: ExtReal, factor: f64) -> Value {
    match e {
        ExtReal::Finite(v) => json!(v * factor),
        ExtReal::Infinite => json!("+inf"),
    }
}

fn ext_cell(e: ExtReal, factor: f64) -> Cell {
    match e {
        ExtReal::Finite(v) => Cell::Float(v * factor),
        ExtReal::Infinite => Cell::Text("+inf".into()),
    }
}

fn report_value(r: &ExponentReport, factor: f64) -> Value {
    let mut v = to_value(r);
    v["value"] = ext_value(r.value, factor);
    v
}

fn bound_kind(r: &ExponentReport) -> String {
    to_value(&r.bound_kind).as_str().unwrap_or_default().to_string()
}

fn exponent_table(reports: &[(String, &ExponentReport)], factor: f64) -> Table {
    Table {
        headers: vec!["param", "value", "bound_kind"],
        rows: reports
            .iter()
            .map(|(param, r)| vec![param.clone().into(), ext_cell(r.value, factor), bound_kind(r).into()])
            .collect(),
    }
}

fn is_classical(v: &Value) -> bool {
    v.get("preset").is_none() && v.get("p").is_some() && v.get("q").is_some()
}

fn parse_pmf_pair(v: &Value) -> CliResult<(JointPmf, JointPmf)> {
    Ok((io::parse_pmf(&v["p"], "$.p")?, io::parse_pmf(&v["q"], "$.q")?))
}

pub fn exponent(global: &GlobalArgs, args: &PresetArgs) -> CliResult<Report> {
    check_tol(global)?;
    let f = global.log_base.factor();
    let input = load_problem(global, Some(args))?;
    if is_classical(&input) {
        let (p, q) = parse_pmf_pair(&input)?;
        let r = exponents::theta_zrc_tol(&p, &q, global.tol)?;
        let results = json!({"reports": [report_value(&r, f)]});
        let table = exponent_table(&[(r.name.clone(), &r)], f);
        return Ok(Report::new("exponent", config(global, json!({})), results, table).with_input(input));
    }
    let pair = io::parse_pair(&input, "$")?;
    let supported = pair.support_condition()?;
    let defect = pair.alt_product_defect()?;
    let mut reports = Vec::new();
    if supported {
        reports.push(exponents::theta_sl(&pair, global.tol)?);
    }
    if defect <= exponents::PRODUCT_TOL {
        reports.push(exponents::theta_product_alt(&pair)?);
    }
    let witness = match exponents::orthogonal_discrimination(&pair, &[])? {
        Discrimination::Perfect { report, witness } => {
            reports.push(report);
            json!({"label": witness.label, "overlap": witness.overlap})
        }
        Discrimination::NotFound { best_overlap } => json!({"best_overlap": best_overlap}),
    };
    let results = json!({
        "support_condition": supported,
        "alt_product_defect": defect,
        "reports": reports.iter().map(|r| report_value(r, f)).collect::<Vec<_>>(),
        "discrimination": witness,
    });
    let named: Vec<(String, &ExponentReport)> = reports.iter().map(|r| (r.name.clone(), r)).collect();
    let table = exponent_table(&named, f);
    Ok(Report::new("exponent", config(global, json!({})), results, table).with_input(input))
}

pub fn kappa(global: &GlobalArgs) -> CliResult<Report> {
    let f = global.log_base.factor();
    let input = optional_problem(global)?;
    let (psi, r0, r1) = match &input {
        Some(v) => (
            io::parse_state(&v["psi"], "$.psi")?,
            io::parse_state(&v["r0"], "$.r0")?,
            io::parse_state(&v["r1"], "$.r1")?,
        ),
        None => presets::kappa_instance()?,
    };
    let r = exponents::kappa_report(&psi, &r0, &r1)?;
    let results = json!({
        "report": report_value(&r, f),
        "psi": io::state_to_json(&psi),
        "r0": io::state_to_json(&r0),
        "r1": io::state_to_json(&r1),
    });
    let table = exponent_table(&[("kappa".into(), &r)], f);
    let report = Report::new("kappa", config(global, json!({})), results, table);
    Ok(match input {
        Some(v) => report.with_input(v),
        None => report,
    })
}

pub fn bounds(global: &GlobalArgs, args: &BoundsArgs) -> CliResult<Report> {
    let f = global.log_base.factor();
    let family = match args.family {
        FamilyArg::Isotropic => Family::Isotropic,
        FamilyArg::Werner => Family::Werner,
    };
    let grid: Vec<f64> = match args.p {
        Some(p) => vec![p],
        None if args.steps >= 2 => (0..args.steps)
            .map(|i| i as f64 / (args.steps - 1) as f64)
            .collect(),
        None => return Err(CliError::input("--steps", "a sweep needs at least 2 points")),
    };
    let mut reports = Vec::with_capacity(grid.len());
    for &p in &grid {
        let r = exponents::iso_werner_bounds(family, p, args.d)
            .map_err(|e| CliError::input("--p", e.to_string()))?;
        reports.push(r);
    }
    let points: Vec<Value> = grid
        .iter()
        .zip(&reports)
        .map(|(&p, r)| json!({"p": p, "report": report_value(r, f)}))
        .collect();
    let named: Vec<(String, &ExponentReport)> = grid
        .iter()
        .zip(&reports)
        .map(|(&p, r)| (crate::report::format_float(p), r))
        .collect();
    let cfg = config(
        global,
        json!({"family": format!("{:?}", args.family).to_lowercase(), "d": args.d}),
    );
    Ok(Report::new("bounds", cfg, json!({"points": points}), exponent_table(&named, f)))
}

pub fn iproject(global: &GlobalArgs) -> CliResult<Report> {
    check_tol(global)?;
    let f = global.log_base.factor();
    let input = load_problem(global, None)?;
    let q = io::parse_pmf(&input["q"], "$.q")?;
    let c = if input.get("p").is_some() {
        let p = io::parse_pmf(&input["p"], "$.p")?;
        MarginalConstraint::new(p.marginal_x(), p.marginal_y())?
    } else {
        let px: Vec<f64> = io::from_value(&input["px"], "$.px")?;
        let py: Vec<f64> = io::from_value(&input["py"], "$.py")?;
        MarginalConstraint::new(px, py).map_err(|e| CliError::input("$", e.to_string()))?
    };
    let (p, diag) = marginal::iproject(&q, &c, global.tol)?;
    let results = json!({
        "objective": diag.objective * f,
        "minimizer": p.to_rows(),
        "diagnostics": diag,
    });
    let (rows, cols) = p.shape();
    let mut table = Table {
        headers: vec!["x", "y", "value"],
        rows: Vec::new(),
    };
    for x in 0..rows {
        for y in 0..cols {
            table.rows.push(vec![x.into(), y.into(), p.get(x, y).into()]);
        }
    }
    Ok(Report::new("iproject", config(global, json!({})), results, table).with_input(input))
}

fn diagnostics_table(diag: &marginal::SolverDiagnostics, f: f64) -> Table {
    let mut rows = vec![
        vec!["objective".into(), Cell::Float(diag.objective * f)],
        vec!["marginal_residual".into(), diag.marginal_residual.into()],
        vec!["iterations".into(), diag.iterations.into()],
        vec!["converged".into(), diag.converged.into()],
    ];
    if let Some(gap) = diag.duality_gap {
        rows.push(vec!["duality_gap".into(), gap.into()]);
    }
    Table {
        headers: vec!["quantity", "value"],
        rows,
    }
}

pub fn qproject(global: &GlobalArgs, args: &PresetArgs) -> CliResult<Report> {
    check_tol(global)?;
    let f = global.log_base.factor();
    let input = load_problem(global, Some(args))?;
    let pair = io::parse_pair(&input, "$")?;
    let (ra, rb) = pair.null_marginals()?;
    let c = QuantumMarginals::new(ra, rb);
    let (tau, diag) = marginal::qproject(&pair.alt_state, &c, pair.dims(), global.tol)?;
    let table = diagnostics_table(&diag, f);
    let results = json!({
        "objective": diag.objective * f,
        "minimizer": io::state_to_json(&tau),
        "diagnostics": diag,
    });
    Ok(Report::new("qproject", config(global, json!({})), results, table).with_input(input))
}

pub fn maxmin(global: &GlobalArgs, args: &MaxminArgs) -> CliResult<Report> {
    check_tol(global)?;
    let f = global.log_base.factor();
    let input = load_problem(global, Some(&args.problem))?;
    let pair = io::parse_pair(&input, "$")?;
    let optimizer = match args.optimizer {
        OptimizerArg::NelderMead => Optimizer::NelderMead,
        OptimizerArg::RandomSearch => Optimizer::RandomSearch,
        OptimizerArg::CoordinateRotations => Optimizer::CoordinateRotations,
    };
    let cfg = PvmSearchConfig {
        block_size: args.m,
        restarts: args.restarts,
        optimizer,
        seed: global.seed,
        inner_tol: global.tol,
        max_evals: args.max_evals,
    };
    cfg.validate(pair.d_a, pair.d_b)
        .map_err(|e| CliError::input("--m", e.to_string()))?;
    let (r, pvm) = pvm_opt::maxmin_finite_n(&pair, &cfg)?;
    let results = json!({
        "report": report_value(&r, f),
        "block_size": pvm.block_size,
        "basis_a": io::basis_to_json(&pvm.basis_a),
        "basis_b": io::basis_to_json(&pvm.basis_b),
    });
    let table = exponent_table(&[(format!("maxmin_m{}", args.m), &r)], f);
    Ok(Report::new("maxmin", config(global, to_value(&cfg)), results, table).with_input(input))
}

fn blowup_params(n: usize, eps: f64, rn: f64) -> CliResult<BlowupParams> {
    BlowupParams::new(n, eps.min(1.0), rn).map_err(|e| CliError::input("--n", e.to_string()))
}

pub fn blowup(global: &GlobalArgs, args: &BlowupArgs) -> CliResult<Report> {
    let input = optional_problem(global)?;
    let dim = if args.bipartite { 4 } else { 2 };
    let given = match &input {
        Some(v) => {
            let rho = io::parse_state(&v["rho"], "$.rho")?;
            let sigma = io::parse_state(&v["sigma"], "$.sigma")?;
            for (s, path) in [(&rho, "$.rho"), (&sigma, "$.sigma")] {
                if s.dim() != dim {
                    return Err(CliError::input(path, format!("expected dimension {dim}, found {}", s.dim())));
                }
            }
            Some((rho, sigma))
        }
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(global.seed);
    let mut records = Vec::with_capacity(args.trials);
    let mut table = Table {
        headers: vec![
            "trial",
            "n",
            "radius",
            "epsilon_n",
            "precondition_met",
            "rho_slack",
            "sigma_slack",
            "passed",
        ],
        rows: Vec::new(),
    };
    let mut all_passed = true;
    for trial in 0..args.trials {
        let (rho, sigma) = match &given {
            Some((r, s)) => (r.clone(), s.clone()),
            None => (
                random::random_full_rank(dim, &mut rng)?,
                random::random_full_rank(dim, &mut rng)?,
            ),
        };
        let n = args.n as i32;
        let (record, row) = if args.bipartite {
            let ma = random::random_contraction(2, &mut rng);
            let mb = random::random_contraction(2, &mut rng);
            let ra = steinlab::state::partial_trace(&rho, (2, 2), linalg::Keep::A)?;
            let rb = steinlab::state::partial_trace(&rho, (2, 2), linalg::Keep::B)?;
            let eps = args.epsn.unwrap_or_else(|| {
                linalg::trace_product_re(&ma, ra.matrix())
                    .powi(n)
                    .min(linalg::trace_product_re(&mb, rb.matrix()).powi(n))
            });
            let p = blowup_params(args.n, eps, args.rn)?;
            let rec = blowup::verify_blowup_bipartite(
                &rho,
                (2, 2),
                &Contraction::Product(ma),
                &Contraction::Product(mb),
                &sigma,
                &p,
            )?;
            let row = vec![
                trial.into(),
                rec.n.into(),
                rec.radius.into(),
                rec.epsilon_n.into(),
                rec.precondition_met.into(),
                rec.rho_slack.min(rec.joint_slack).into(),
                ext_cell(rec.sigma_slack, 1.0),
                rec.passed.into(),
            ];
            all_passed &= rec.passed || !rec.precondition_met;
            (to_value(&rec), row)
        } else {
            let m = random::random_contraction(2, &mut rng);
            let eps = args
                .epsn
                .unwrap_or_else(|| linalg::trace_product_re(&m, rho.matrix()).powi(n));
            let p = blowup_params(args.n, eps, args.rn)?;
            let rec = blowup::verify_blowup(&rho, &Contraction::Product(m), &sigma, &p)?;
            let row = vec![
                trial.into(),
                rec.n.into(),
                rec.radius.into(),
                rec.epsilon_n.into(),
                rec.precondition_met.into(),
                rec.rho_slack.into(),
                ext_cell(rec.sigma_slack, 1.0),
                rec.passed.into(),
            ];
            all_passed &= rec.passed || !rec.precondition_met;
            (to_value(&rec), row)
        };
        records.push(record);
        table.rows.push(row);
    }
    let cfg = config(
        global,
        json!({"n": args.n, "rn": args.rn, "epsn": args.epsn, "trials": args.trials, "bipartite": args.bipartite}),
    );
    let results = json!({"all_passed": all_passed, "records": records});
    let mut report = Report::new("blowup", cfg, results, table);
    report.passed = all_passed;
    Ok(match input {
        Some(v) => report.with_input(v),
        None => report,
    })
}

fn scheme_for(args: &SimulateArgs) -> CliResult<OneBitScheme> {
    let mode = match args.mode {
        ModeArg::Robust => TypicalityMode::Robust,
        ModeArg::Interval => TypicalityMode::Interval,
    };
    Ok(match args.scheme {
        SchemeArg::OneBit => OneBitScheme::typicality(
            TypicalityRule::new(args.delta, mode).map_err(|e| CliError::input("--delta", e.to_string()))?,
        ),
        SchemeArg::FirstAgree => OneBitScheme {
            test_x: LocalTest::FirstSymbolIn(vec![0]),
            test_y: LocalTest::FirstSymbolIn(vec![0]),
            fusion: Fusion::Agree,
        },
    })
}

fn quantum_problem(v: &Value) -> CliResult<(BipartitePair, LocalPvm)> {
    let pair = io::parse_pair(&v["pair"], "$.pair")?;
    let a = io::parse_basis(&v["basis_a"], "$.basis_a")?;
    let b = io::parse_basis(&v["basis_b"], "$.basis_b")?;
    let pvm = LocalPvm::new(a, b, pair.d_a, pair.d_b, 1).map_err(|e| CliError::input("$", e.to_string()))?;
    Ok((pair, pvm))
}

pub fn simulate(global: &GlobalArgs, args: &SimulateArgs) -> CliResult<Report> {
    let f = global.log_base.factor();
    let input = load_problem(global, None)?;
    let scheme = scheme_for(args)?;
    let (p, curve): (JointPmf, ErrorCurve) = if is_classical(&input) {
        let (p, q) = parse_pmf_pair(&input)?;
        let curve = protocol::one_bit_exact_scheme(&p, &q, &scheme, &args.n)?;
        (p, curve)
    } else {
        let (pair, pvm) = quantum_problem(&input)?;
        let (p, _) = protocol::induced_pair(&pair, &pvm)?;
        (p, protocol::quantum_frontend(&pair, &pvm, &scheme, &args.n)?)
    };
    let mut monte_carlo = Vec::new();
    if args.trials > 0 {
        for &n in &args.n {
            monte_carlo.push(protocol::one_bit_monte_carlo_scheme(&p, &scheme, n, args.trials, global.seed)?);
        }
    }
    let mut headers = vec!["n", "alpha", "beta", "minus_log_beta_over_n"];
    if !monte_carlo.is_empty() {
        headers.extend(["alpha_hat", "wilson_low", "wilson_high"]);
    }
    let mut table = Table {
        headers,
        rows: Vec::new(),
    };
    let mut points = Vec::new();
    for (i, pt) in curve.points.iter().enumerate() {
        let mut row = vec![
            pt.n.into(),
            pt.alpha.into(),
            pt.beta.into(),
            ext_cell(pt.minus_log_beta_over_n, f),
        ];
        if let Some(mc) = monte_carlo.get(i) {
            row.extend([mc.alpha_hat.into(), mc.wilson_low.into(), mc.wilson_high.into()]);
        }
        table.rows.push(row);
        let mut v = to_value(pt);
        v["minus_log_beta_over_n"] = ext_value(pt.minus_log_beta_over_n, f);
        points.push(v);
    }
    let results = json!({
        "method": curve.method,
        "block_size": curve.block_size,
        "points": points,
        "monte_carlo": monte_carlo,
    });
    let cfg = config(
        global,
        json!({"scheme": to_value(&scheme), "n": args.n, "trials": args.trials}),
    );
    Ok(Report::new("simulate", cfg, results, table).with_input(input))
}

/// Product-alternative helper shared with the reproduction suite.
pub fn product_pair(
    null: DensityOperator,
    alt_a: &DensityOperator,
    alt_b: &DensityOperator,
) -> steinlab::Result<BipartitePair> {
    let alt = steinlab::state::tensor_product(alt_a, alt_b)?;
    BipartitePair::new(alt_a.dim(), alt_b.dim(), null, alt)
}
