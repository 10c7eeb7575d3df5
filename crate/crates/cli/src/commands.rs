use std::fs;
use std::sync::Arc;

use funkball::finsler::oracle::{bipolar_oracle, polar_f_star_oracle, reversibility_oracle, OracleConfig};
use funkball::finsler::{
    funk_distance, legendre_gradient, polar_f_star, randers_f, reversibility, reversibility_at, uniformity_at,
    uniformity_lf, volume_density,
};
use funkball::report::{csv_table, num};
use funkball::sobolev::{
    counterexample_profile, default_truncations, divergence_trend, federer_fleming, sandwich_constants, w12a_norm,
};
use funkball::solver::{
    discrete_gradient, finite_difference_gradient, lambda_scan_with, log_schedule, random_inits, solve_with,
    subquadraticity_diagnostic, Setup,
};
use funkball::{BallPoint, BumpProfile, CoVec, ModelParams, RadialFunction, RadialGrid, TanVec};

use crate::config::RunConfig;
use crate::{CliError, CounterexampleArgs, DiagArgs, DiagTable, MetricArgs, NormsArgs, ProfileKind, ScanArgs, SolveArgs};

/// Relative agreement required between closed forms and sup oracles.
const ORACLE_TOL: f64 = 1e-6;
/// Slack on the norm inequalities.
const INEQUALITY_SLACK: f64 = 1e-10;
/// Relative error accepted by the gradient table under `--verify`.
const GRADIENT_TOL: f64 = 1e-5;

fn parse_vector(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("--{name}: cannot parse '{t}'")))
        })
        .collect()
}

/// A single component is placed on the first axis.
fn fit_dim(name: &str, mut v: Vec<f64>, n: usize) -> Result<Vec<f64>, CliError> {
    if v.len() == 1 && n > 1 {
        v.resize(n, 0.0);
    }
    if v.len() != n {
        return Err(CliError::Validation(format!(
            "--{name} has {} components but n = {n}",
            v.len()
        )));
    }
    Ok(v)
}

/// Writes `files` and the resolved config under `cfg.out`, if set.
fn write_outputs(cfg: &RunConfig, files: &[(String, String)]) -> Result<(), CliError> {
    let Some(dir) = &cfg.out else {
        return Ok(());
    };
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.resolved"), cfg.resolved())?;
    for (name, body) in files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, body)?;
    }
    Ok(())
}

struct Checks(Vec<String>);

impl Checks {
    fn new() -> Self {
        Self(Vec::new())
    }

    /// Prints `verify name: closed vs reference`; records a mismatch.
    fn compare(&mut self, name: &str, closed: f64, reference: f64, tol: f64) {
        let err = (closed - reference).abs() / reference.abs().max(1.0);
        let ok = err <= tol;
        println!(
            "verify {name}: {closed:?} vs {reference:?} (rel err {err:e}) {}",
            if ok { "ok" } else { "MISMATCH" }
        );
        if !ok {
            self.0.push(name.to_string());
        }
    }

    fn require(&mut self, name: &str, ok: bool, detail: String) {
        println!("verify {name}: {detail} {}", if ok { "ok" } else { "MISMATCH" });
        if !ok {
            self.0.push(name.to_string());
        }
    }

    fn finish(self) -> Result<(), CliError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(CliError::Failure(format!("verification mismatch: {}", self.0.join(", "))))
        }
    }
}

pub fn metric(cfg: &RunConfig, args: &MetricArgs, verify: bool) -> Result<(), CliError> {
    let params = cfg.validate()?;
    let n = params.n();
    let oracle = OracleConfig::default();
    let mut checks = Checks::new();
    let x = match &args.x {
        Some(t) => BallPoint::new(fit_dim("x", parse_vector("x", t)?, n)?)?,
        None => BallPoint::origin(n),
    };
    println!("n = {n}");
    println!("a = {:?}", params.a());
    if args.reversibility {
        println!("r_F = {:?}", reversibility(&params));
        if verify && args.x.is_some() {
            let at = reversibility_at(&params, &x)?;
            checks.compare("r_F(x)", at, reversibility_oracle(&params, &x, &oracle)?, ORACLE_TOL);
        }
        return checks.finish();
    }
    println!("x = {:?}", x.coords());
    println!("r_F = {:?}", reversibility(&params));
    println!("l_F = {:?}", uniformity_lf(&params));
    println!("r_F(x) = {:?}", reversibility_at(&params, &x)?);
    println!("l_F(x) = {:?}", uniformity_at(&params, &x)?);
    println!("density = {:?}", volume_density(&params, &x)?);
    let origin = BallPoint::origin(n);
    println!("d_funk(0, x) = {:?}", funk_distance(&origin, &x)?);
    println!("d_funk(x, 0) = {:?}", funk_distance(&x, &origin)?);
    if let Some(t) = &args.y {
        let y = fit_dim("y", parse_vector("y", t)?, n)?;
        let back: Vec<f64> = y.iter().map(|v| -v).collect();
        let f = randers_f(&params, &x, &TanVec(y.clone()))?;
        println!("y = {y:?}");
        println!("F = {f:?}");
        println!("F(-y) = {:?}", randers_f(&params, &x, &TanVec(back))?);
        if verify {
            checks.compare("F", f, bipolar_oracle(&params, &x, &TanVec(y), &oracle)?, ORACLE_TOL);
        }
    }
    if let Some(t) = &args.alpha {
        let alpha = CoVec(fit_dim("alpha", parse_vector("alpha", t)?, n)?);
        let fs = polar_f_star(&params, &x, &alpha)?;
        let grad = legendre_gradient(&params, &x, &alpha)?;
        println!("alpha = {:?}", alpha.0);
        println!("F* = {fs:?}");
        println!("grad_F = {:?}", grad.0);
        if verify {
            checks.compare("F*", fs, polar_f_star_oracle(&params, &x, &alpha, &oracle)?, ORACLE_TOL);
            checks.compare("alpha(grad_F)", alpha.apply(&grad), fs * fs, 1e-10);
            checks.compare("F(grad_F)", randers_f(&params, &x, &grad)?, fs, 1e-10);
        }
    }
    checks.finish()
}

pub fn norms(cfg: &RunConfig, args: &NormsArgs, verify: bool) -> Result<(), CliError> {
    let params = cfg.validate()?;
    let u = match args.profile {
        ProfileKind::Bump => {
            if !(args.radius > 0.0 && args.radius < 1.0) {
                return Err(CliError::Validation(format!("--radius {} outside (0, 1)", args.radius)));
            }
            let q = cfg.quadrature.clone().with_breakpoints(&[args.radius]);
            RadialFunction::from_profile(Arc::new(RadialGrid::new(&q)?), &BumpProfile::new(args.height, args.radius))?
        }
        ProfileKind::Counterexample => {
            RadialFunction::from_profile(Arc::new(RadialGrid::new(&cfg.quadrature)?), &counterexample_profile())?
        }
    };
    let u = if args.negate { u.negated() } else { u };
    let report = w12a_norm(&u, &params)?;
    let (lower, upper) = sandwich_constants(&params);
    println!("n = {}", params.n());
    println!("a = {:?}", params.a());
    println!("r_max = {:?}", report.r_max);
    println!("seminorm = {:?}", report.seminorm);
    println!("mass = {:?}", report.mass);
    println!("w12a = {:?}", report.total);
    println!("klein_gradient = {:?}", report.klein_gradient);
    println!("h12 = {:?}", report.h12);
    println!("sandwich = [{lower:?}, {upper:?}]");
    let ff = federer_fleming(&u, params.n())?;
    println!("federer_fleming = {:?} <= {:?}", ff.lhs, ff.rhs);
    write_outputs(cfg, &[("norms.json".into(), report.to_json())])?;
    if !verify {
        return Ok(());
    }
    let mut checks = Checks::new();
    let slack = INEQUALITY_SLACK * report.h12.max(1.0);
    checks.require(
        "sandwich",
        lower * report.h12 <= report.total + slack && report.total <= upper * report.h12 + slack,
        format!("{:?} <= {:?} <= {:?}", lower * report.h12, report.total, upper * report.h12),
    );
    // the inequality is stated for functions vanishing at the boundary
    if args.profile == ProfileKind::Bump {
        checks.require(
            "federer_fleming",
            ff.lhs <= ff.rhs + INEQUALITY_SLACK * ff.rhs.max(1.0),
            format!("{:?} <= {:?}", ff.lhs, ff.rhs),
        );
    }
    checks.finish()
}

pub fn counterexample(cfg: &RunConfig, args: &CounterexampleArgs) -> Result<(), CliError> {
    let params = cfg.validate()?;
    let schedule = match &args.schedule {
        Some(t) => parse_vector("schedule", t)?,
        None => default_truncations(),
    };
    if schedule.len() < 2 {
        return Err(CliError::Validation(
            "the slope fit needs at least two truncation radii".into(),
        ));
    }
    let trend = divergence_trend(&schedule, params.n(), &cfg.quadrature)?;
    let csv = trend.to_csv();
    print!("{csv}");
    let pass = trend.passes(args.c1_tol, args.slope_tol);
    println!("c1_limit = {:?}", trend.c1_limit);
    println!("slope = {:?}", trend.slope);
    println!("expected_slope = {:?}", trend.expected_slope);
    println!("verdict = {}", if pass { "PASS" } else { "FAIL" });
    write_outputs(
        cfg,
        &[
            ("counterexample.csv".into(), csv),
            ("counterexample.json".into(), to_json(&trend)?),
        ],
    )?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failure("counterexample verdict FAIL".into()))
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Failure(format!("json: {e}")))
}

/// `<num>`, `<num>*lstar` or `<num>*ltilde`.
fn parse_lambda(token: &str, setup: &Setup) -> Result<f64, CliError> {
    let token = token.trim();
    let (k, unit) = match token.split_once('*') {
        Some((k, "lstar")) => (k, setup.lambda_star),
        Some((k, "ltilde")) => (k, setup.tilde.value),
        Some(_) => {
            return Err(CliError::Validation(format!(
                "lambda token '{token}': unit must be lstar or ltilde"
            )))
        }
        None => (token, 1.0),
    };
    let k: f64 = k
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("cannot parse lambda token '{token}'")))?;
    let lambda = k * unit;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(CliError::Validation(format!("lambda must be finite and non-negative, got {lambda}")));
    }
    Ok(lambda)
}

fn setup(cfg: &RunConfig) -> Result<(ModelParams, Setup), CliError> {
    let params = cfg.validate_for_solver()?;
    let setup = Setup::new(params, cfg.weight()?, cfg.nonlinearity()?, &cfg.solver)?;
    println!("n = {}", params.n());
    println!("a = {:?}", params.a());
    println!("lambda_star = {:?}", setup.lambda_star);
    println!("lambda_tilde_est = {:?}", setup.tilde.value);
    Ok((params, setup))
}

pub fn solve(cfg: &RunConfig, args: &SolveArgs) -> Result<(), CliError> {
    let (_, setup) = setup(cfg)?;
    let lambda = parse_lambda(&args.lambda, &setup)?;
    let report = solve_with(&setup, lambda, &cfg.solver, 0)?;
    println!("lambda = {lambda:?}");
    println!("classification = {}", report.classification);
    for s in &report.solutions {
        println!(
            "{}: energy = {:?}, residual = {:?}, norm = {:?}, min = {:?}",
            s.label, s.energy, s.residual, s.norm, s.min_value
        );
    }
    let mut files = vec![
        ("solve.csv".to_string(), report.to_csv()),
        ("solve.json".to_string(), to_json(&report)?),
    ];
    files.extend(
        report
            .solutions
            .iter()
            .map(|s| (format!("profile_{}.csv", s.label), s.profile_csv())),
    );
    write_outputs(cfg, &files)?;
    if report.certified() {
        println!("certified = true");
        Ok(())
    } else {
        println!("certified = false");
        Err(CliError::Failure(report.failures.join("; ")))
    }
}

pub fn scan(cfg: &RunConfig, args: &ScanArgs) -> Result<(), CliError> {
    let (_, setup) = setup(cfg)?;
    let schedule = args
        .schedule
        .split(',')
        .map(|t| parse_lambda(t, &setup))
        .collect::<Result<Vec<_>, _>>()?;
    let report = lambda_scan_with(&setup, &schedule, &cfg.solver);
    for e in &report.entries {
        match &e.report {
            Some(r) => println!("lambda = {:?}: {}", e.lambda, r.classification),
            None => println!("lambda = {:?}: error: {}", e.lambda, e.error.as_deref().unwrap_or("")),
        }
    }
    match report.onset {
        Some(l) => println!("onset = {l:?}"),
        None => println!("onset = none"),
    }
    println!("consistent = {}", report.consistent);
    let mut files = vec![
        ("scan.csv".to_string(), report.to_csv()),
        ("scan.json".to_string(), to_json(&report)?),
    ];
    for (i, e) in report.entries.iter().enumerate() {
        if let Some(r) = &e.report {
            for s in &r.solutions {
                files.push((format!("profiles/{i:03}_{}.csv", s.label), s.profile_csv()));
            }
        }
    }
    write_outputs(cfg, &files)?;
    let certified = report.certified();
    println!("certified = {certified}");
    if certified {
        Ok(())
    } else {
        Err(CliError::Failure("scan has uncertified entries".into()))
    }
}

pub fn diag(cfg: &RunConfig, args: &DiagArgs, verify: bool) -> Result<(), CliError> {
    let (_, setup) = setup(cfg)?;
    let model = &setup.model;
    match args.table {
        DiagTable::Subquadraticity => {
            let ts = log_schedule(args.t_min, args.t_max, args.points)?;
            let rows = subquadraticity_diagnostic(model, &setup.tilde.trial, &ts)?;
            let table: Vec<Vec<String>> = rows.iter().map(|r| vec![num(r.t), num(r.g), num(r.norm_sq), num(r.ratio)]).collect();
            let csv = csv_table(&["t", "g", "norm_sq", "ratio"], &table);
            print!("{csv}");
            write_outputs(cfg, &[("subquadraticity.csv".into(), csv)])
        }
        DiagTable::Gradient => {
            if args.states == 0 {
                return Err(CliError::Validation("--states must be positive".into()));
            }
            let lambda = parse_lambda(&args.lambda, &setup)?;
            // random bumps plus a linear tail, so that no element is flat: on a
            // flat element F*^2 switches branch and central differences lose
            // their second order
            let r_max = model.grid().r_max();
            let tail = model.interpolate(|r| 0.05 * (r_max - r));
            let states: Vec<Vec<f64>> = random_inits(model, args.states, cfg.solver.seed, 0, setup.tilde.height.max(1.0))
                .into_iter()
                .map(|u| u.iter().zip(&tail).map(|(a, b)| a + b).collect())
                .collect();
            let mut worst: f64 = 0.0;
            let table: Vec<Vec<String>> = states
                .iter()
                .enumerate()
                .map(|(i, u)| {
                    let exact = discrete_gradient(model, u, lambda);
                    let fd = finite_difference_gradient(model, u, lambda, 1e-6);
                    let err = relative_error(&exact.gradient, &fd);
                    worst = worst.max(err);
                    vec![i.to_string(), num(err), exact.kinks.len().to_string()]
                })
                .collect();
            let csv = csv_table(&["state", "rel_err", "kinks"], &table);
            print!("{csv}");
            write_outputs(cfg, &[("gradient.csv".into(), csv)])?;
            let mut checks = Checks::new();
            if verify {
                checks.require("gradient", worst < GRADIENT_TOL, format!("max rel err {worst:e}"));
            }
            checks.finish()
        }
    }
}

fn relative_error(x: &[f64], y: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = y.iter().map(|b| b * b).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}
