//! Solving at a fixed `lambda`, scanning a schedule of `lambda`, and the
//! subquadraticity table of `G`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FunkError, Result};
use crate::finsler::ModelParams;
use crate::radial::{BumpProfile, RadialProfile};
use crate::report::{csv_table, num};

use super::energy::EnergyModel;
use super::minimize::{check_lambda, minimize, tilde_lambda_estimate, MinimizeOutcome, TildeLambda, TrialFamily};
use super::mountain_pass::mountain_pass;
use super::problem::{nonexistence_threshold, Nonlinearity, WeightKappa};
use super::SolverConfig;

/// Lower bound accepted on certified solutions.
pub const NONNEGATIVITY_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    OnlyZero,
    One,
    Two,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::OnlyZero => "only-zero",
            Classification::One => "one",
            Classification::Two => "two",
        })
    }
}

/// A certified non-zero solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    /// `u1` (global minimizer) or `u2` (mountain pass).
    pub label: String,
    pub energy: f64,
    pub residual: f64,
    /// `||u||_{H^1_2}`.
    pub norm: f64,
    pub min_value: f64,
    pub iterations: usize,
    /// `(r, u(r))` at the mesh nodes, boundary included.
    pub profile: Vec<(f64, f64)>,
}

impl SolutionRecord {
    fn new(model: &EnergyModel, label: &str, u: &[f64], energy: f64, residual: f64, iterations: usize) -> Self {
        let breaks = model.grid().breaks();
        let profile = breaks
            .iter()
            .copied()
            .zip(u.iter().copied().chain(std::iter::once(0.0)))
            .collect();
        Self {
            label: label.into(),
            energy,
            residual,
            norm: model.h12_norm(u),
            min_value: u.iter().copied().fold(0.0, f64::min),
            iterations,
            profile,
        }
    }

    /// Free nodal values (boundary dropped).
    pub fn nodal(&self) -> Vec<f64> {
        self.profile[..self.profile.len() - 1].iter().map(|p| p.1).collect()
    }

    /// Two-column `r,u` CSV.
    pub fn profile_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self.profile.iter().map(|(r, u)| vec![num(*r), num(*u)]).collect();
        csv_table(&["r", "u"], &rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub lambda: f64,
    pub n: usize,
    pub a: f64,
    pub lambda_star: f64,
    pub lambda_tilde: f64,
    pub classification: Classification,
    pub solutions: Vec<SolutionRecord>,
    /// Initial guesses tried and how many of them ended at `u = 0`.
    pub inits: usize,
    pub zero_inits: usize,
    /// Problems met along the way; non-empty means the report is not certified.
    pub failures: Vec<String>,
}

impl SolveReport {
    pub fn certified(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn solution(&self, label: &str) -> Option<&SolutionRecord> {
        self.solutions.iter().find(|s| s.label == label)
    }

    fn rows(&self) -> Vec<Vec<String>> {
        if self.solutions.is_empty() {
            return vec![vec![
                num(self.lambda),
                self.classification.to_string(),
                "zero".into(),
                num(0.0),
                num(0.0),
                num(0.0),
                "0".into(),
            ]];
        }
        self.solutions
            .iter()
            .map(|s| {
                vec![
                    num(self.lambda),
                    self.classification.to_string(),
                    s.label.clone(),
                    num(s.energy),
                    num(s.residual),
                    num(s.norm),
                    s.iterations.to_string(),
                ]
            })
            .collect()
    }

    /// One row per solution: `lambda,class,solution,energy,residual,norm,iterations`.
    pub fn to_csv(&self) -> String {
        csv_table(&CSV_HEADER, &self.rows())
    }
}

const CSV_HEADER: [&str; 7] = ["lambda", "class", "solution", "energy", "residual", "norm", "iterations"];

/// Outcome at one `lambda` of a scan; failures are recorded, not raised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub lambda: f64,
    pub report: Option<SolveReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaScanReport {
    pub n: usize,
    pub a: f64,
    pub lambda_star: f64,
    pub lambda_tilde: f64,
    pub entries: Vec<ScanEntry>,
    /// Smallest scanned `lambda` from which every entry is classified `two`.
    pub onset: Option<f64>,
    /// Every entry below `lambda_star` is `only-zero`.
    pub consistent: bool,
}

impl LambdaScanReport {
    pub fn classifications(&self) -> Vec<Option<Classification>> {
        self.entries.iter().map(|e| e.report.as_ref().map(|r| r.classification)).collect()
    }

    pub fn certified(&self) -> bool {
        self.consistent && self.entries.iter().all(|e| e.report.as_ref().is_some_and(|r| r.certified()))
    }

    pub fn to_csv(&self) -> String {
        let mut rows = Vec::new();
        for e in &self.entries {
            match &e.report {
                Some(r) => rows.extend(r.rows()),
                None => rows.push(vec![
                    num(e.lambda),
                    "error".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]),
            }
        }
        csv_table(&CSV_HEADER, &rows)
    }
}

/// Problem data shared by every `lambda` of a run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub model: EnergyModel,
    pub lambda_star: f64,
    pub tilde: TildeLambda,
}

impl Setup {
    pub fn new(params: ModelParams, kappa: WeightKappa, nl: Nonlinearity, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let model = EnergyModel::new(params, kappa, nl, cfg.mesh()?)?;
        let lambda_star = nonexistence_threshold(model.params(), model.nonlinearity(), model.kappa());
        let tilde = tilde_lambda_estimate(&model, &TrialFamily::default())?;
        Ok(Self {
            model,
            lambda_star,
            tilde,
        })
    }
}

fn initial_guesses(setup: &Setup, cfg: &SolverConfig, stream: u64) -> Vec<Vec<f64>> {
    let model = &setup.model;
    let mut inits: Vec<Vec<f64>> = [0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|s| setup.tilde.trial.iter().map(|v| s * v).collect())
        .collect();
    inits.extend(random_inits(model, cfg.random_inits, cfg.seed, stream, setup.tilde.height.max(1.0)));
    inits
}

/// Random initial guesses used by [`solve`] at task index `stream`.
pub fn random_inits(model: &EnergyModel, count: usize, seed: u64, stream: u64, amplitude: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count)
        .map(|_| {
            let bump = BumpProfile::random(&mut rng, 0.95);
            let amp = amplitude * 10f64.powf(rng.random_range(-1.0..1.0));
            model.interpolate(|r| amp * bump.value(r))
        })
        .collect()
}

fn certify(record: &SolutionRecord, cfg: &SolverConfig, failures: &mut Vec<String>) -> bool {
    let mut ok = true;
    if !(record.residual < cfg.tol) {
        failures.push(format!("{}: residual {:e} above tolerance {:e}", record.label, record.residual, cfg.tol));
        ok = false;
    }
    if record.min_value < -NONNEGATIVITY_SLACK {
        failures.push(format!("{}: negative value {:e}", record.label, record.min_value));
        ok = false;
    }
    ok
}

/// Minimizes from several initial guesses, then runs the mountain pass from the
/// best negative-energy minimizer. `stream` selects the random initial guesses.
pub fn solve_with(setup: &Setup, lambda: f64, cfg: &SolverConfig, stream: u64) -> Result<SolveReport> {
    check_lambda(lambda)?;
    let model = &setup.model;
    let inits = initial_guesses(setup, cfg, stream);
    let outcomes: Vec<Result<MinimizeOutcome>> = inits.par_iter().map(|u0| minimize(model, lambda, u0, cfg)).collect();

    let mut failures = Vec::new();
    let mut zero_inits = 0;
    let mut best: Option<MinimizeOutcome> = None;
    for (i, out) in outcomes.into_iter().enumerate() {
        let out = out?;
        if !out.converged {
            failures.push(format!(
                "init {i}: minimization stopped after {} iterations at residual {:e}",
                out.iterations, out.residual
            ));
            continue;
        }
        if model.h12_norm(&out.u) < cfg.zero_norm {
            zero_inits += 1;
        } else if out.energy < 0.0 && best.as_ref().is_none_or(|b| out.energy < b.energy) {
            best = Some(out);
        }
    }

    let mut solutions = Vec::new();
    let mut classification = Classification::OnlyZero;
    if let Some(u1) = best {
        let rec = SolutionRecord::new(model, "u1", &u1.u, u1.energy, u1.residual, u1.iterations);
        if certify(&rec, cfg, &mut failures) {
            classification = Classification::One;
            match mountain_pass(model, lambda, &u1.u, cfg) {
                Ok(mp) => {
                    let rec2 = SolutionRecord::new(
                        model,
                        "u2",
                        &mp.u,
                        mp.energy,
                        mp.residual,
                        mp.sweeps + mp.newton_iterations,
                    );
                    if certify(&rec2, cfg, &mut failures) {
                        classification = Classification::Two;
                    }
                    solutions.push(rec);
                    solutions.push(rec2);
                }
                Err(e) => {
                    failures.push(format!("mountain pass: {e}"));
                    solutions.push(rec);
                }
            }
        }
    }

    Ok(SolveReport {
        lambda,
        n: model.params().n(),
        a: model.params().a(),
        lambda_star: setup.lambda_star,
        lambda_tilde: setup.tilde.value,
        classification,
        solutions,
        inits: inits.len(),
        zero_inits,
        failures,
    })
}

/// Solves the problem at one `lambda`.
pub fn solve(
    params: ModelParams,
    kappa: WeightKappa,
    nl: Nonlinearity,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let setup = Setup::new(params, kappa, nl, cfg)?;
    solve_with(&setup, lambda, cfg, 0)
}

/// [`lambda_scan`] on a prepared [`Setup`].
pub fn lambda_scan_with(setup: &Setup, schedule: &[f64], cfg: &SolverConfig) -> LambdaScanReport {
    let entries: Vec<ScanEntry> = schedule
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| match solve_with(setup, lambda, cfg, i as u64) {
            Ok(report) => ScanEntry {
                lambda,
                report: Some(report),
                error: None,
            },
            Err(e) => ScanEntry {
                lambda,
                report: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let is_two = |e: &ScanEntry| e.report.as_ref().is_some_and(|r| r.classification == Classification::Two);
    let mut order: Vec<&ScanEntry> = entries.iter().collect();
    order.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    let onset = order
        .iter()
        .rposition(|e| !is_two(e))
        .map_or(0, |i| i + 1);
    let onset = order.get(onset).map(|e| e.lambda);
    let consistent = entries.iter().filter(|e| e.lambda < setup.lambda_star).all(|e| {
        e.report
            .as_ref()
            .is_some_and(|r| r.classification == Classification::OnlyZero)
    });
    LambdaScanReport {
        n: setup.model.params().n(),
        a: setup.model.params().a(),
        lambda_star: setup.lambda_star,
        lambda_tilde: setup.tilde.value,
        entries,
        onset,
        consistent,
    }
}

/// Solves at every `lambda` of `schedule` in parallel; entry `i` uses random
/// stream `i`, so results do not depend on the number of threads.
pub fn lambda_scan(
    params: ModelParams,
    kappa: WeightKappa,
    nl: Nonlinearity,
    schedule: &[f64],
    cfg: &SolverConfig,
) -> Result<LambdaScanReport> {
    let setup = Setup::new(params, kappa, nl, cfg)?;
    Ok(lambda_scan_with(&setup, schedule, cfg))
}

/// `count` log-spaced points from `lo` to `hi`.
pub fn log_schedule(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 {
        return Err(FunkError::Config(format!("invalid log schedule [{lo}, {hi}] x {count}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|k| match k {
            0 => lo,
            k if k == count - 1 => hi,
            k => (a + (b - a) * k as f64 / (count - 1) as f64).exp(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubquadraticityRow {
    pub t: f64,
    pub g: f64,
    pub norm_sq: f64,
    /// `G(t u) / ||t u||^2_{H^1_2}`.
    pub ratio: f64,
}

/// `G(t u) / ||t u||^2_{H^1_2}` along a schedule of `t > 0`.
pub fn subquadraticity_diagnostic(model: &EnergyModel, direction: &[f64], ts: &[f64]) -> Result<Vec<SubquadraticityRow>> {
    if direction.len() != model.dim() {
        return Err(FunkError::Length {
            expected: model.dim(),
            got: direction.len(),
        });
    }
    let base = model.h12_norm(direction);
    if base == 0.0 {
        return Err(FunkError::Undefined("zero direction".into()));
    }
    ts.iter()
        .map(|&t| {
            if !(t > 0.0 && t.is_finite()) {
                return Err(FunkError::Parameter(t));
            }
            let scaled: Vec<f64> = direction.iter().map(|v| t * v).collect();
            let g = model.g_functional(&scaled);
            let norm_sq = (t * base).powi(2);
            Ok(SubquadraticityRow {
                t,
                g,
                norm_sq,
                ratio: g / norm_sq,
            })
        })
        .collect()
}
