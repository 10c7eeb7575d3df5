//! Run configuration: a flat `key = value` file with optional `[section]`
//! headers, overridden by command-line flags.
//!
//! ```text
//! n = 3
//! a = 0.5
//! [solver]
//! elements = 160
//! tol = 1e-8
//! [problem]
//! g = sublinear
//! kappa = bump:0.5
//! ```
//!
//! Inside `[solver]`, `tol` is the same key as `solver.tol` at top level.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use funkball::solver::{Nonlinearity, SolverConfig, WeightKappa};
use funkball::{FunkError, Measure, ModelParams, QuadratureConfig, Scheme};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub a: f64,
    pub quadrature: QuadratureConfig,
    pub solver: SolverConfig,
    /// `sublinear` or `log`, optionally `*<scale>`.
    pub g: String,
    /// `bump:<radius>`, optionally `*<scale>`.
    pub kappa: String,
    pub kappa_measure: Measure,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 3,
            a: 0.0,
            quadrature: QuadratureConfig::default(),
            solver: SolverConfig::default(),
            g: "sublinear".into(),
            kappa: "bump:0.5".into(),
            kappa_measure: Measure::Finsler,
            workers: None,
            out: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Validation(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_scheme(value: &str) -> Result<Scheme, CliError> {
    let (kind, arg) = value.split_once(':').unwrap_or((value, ""));
    match (kind, arg) {
        ("single", "") => Ok(Scheme::Single),
        ("graded", k) => Ok(Scheme::Graded {
            panels_per_decade: parse("quadrature.scheme", k)?,
        }),
        ("clustered", m) => Ok(Scheme::Clustered {
            elements: parse("quadrature.scheme", m)?,
        }),
        _ => Err(CliError::Validation(format!(
            "unknown scheme '{value}' (expected single, graded:<k> or clustered:<m>)"
        ))),
    }
}

fn scheme_text(s: &Scheme) -> String {
    match s {
        Scheme::Single => "single".into(),
        Scheme::Graded { panels_per_decade } => format!("graded:{panels_per_decade}"),
        Scheme::Clustered { elements } => format!("clustered:{elements}"),
    }
}

/// Splits `name*scale` into the name and an optional factor.
fn split_scale(spec: &str) -> Result<(&str, Option<f64>), CliError> {
    match spec.split_once('*') {
        Some((name, k)) => {
            let k: f64 = parse("scale", k.trim())?;
            if !(k > 0.0 && k.is_finite()) {
                return Err(CliError::Validation(format!("scale in '{spec}' must be positive")));
            }
            Ok((name.trim(), Some(k)))
        }
        None => Ok((spec.trim(), None)),
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let key = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            self.set(&key, value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "n" => self.n = parse(key, value)?,
            "a" => self.a = parse(key, value)?,
            "seed" | "solver.seed" => self.solver.seed = parse(key, value)?,
            "workers" => self.workers = Some(parse(key, value)?),
            "out" | "output.dir" => self.out = Some(PathBuf::from(value)),
            "quadrature.nodes_per_panel" => self.quadrature.nodes_per_panel = parse(key, value)?,
            "quadrature.r_max" => self.quadrature.r_max = parse(key, value)?,
            "quadrature.scheme" => self.quadrature.scheme = parse_scheme(value)?,
            "solver.elements" => self.solver.elements = parse(key, value)?,
            "solver.gauss_points" => self.solver.gauss_points = parse(key, value)?,
            "solver.r_max" => self.solver.r_max = parse(key, value)?,
            "solver.tol" => self.solver.tol = parse(key, value)?,
            "solver.max_iter" => self.solver.max_iter = parse(key, value)?,
            "solver.path_nodes" => self.solver.path_nodes = parse(key, value)?,
            "solver.reparam_every" => self.solver.reparam_every = parse(key, value)?,
            "solver.max_sweeps" => self.solver.max_sweeps = parse(key, value)?,
            "solver.handoff" => self.solver.handoff = parse(key, value)?,
            "solver.random_inits" => self.solver.random_inits = parse(key, value)?,
            "solver.separation" => self.solver.separation = parse(key, value)?,
            "solver.zero_norm" => self.solver.zero_norm = parse(key, value)?,
            "problem.g" => self.g = value.to_string(),
            "problem.kappa" => self.kappa = value.to_string(),
            "problem.kappa_measure" => {
                self.kappa_measure = value.parse().map_err(|e: FunkError| CliError::Validation(e.to_string()))?
            }
            _ => return Err(CliError::Validation(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Bounds shared by every subcommand.
    pub fn validate(&self) -> Result<ModelParams, CliError> {
        let params = ModelParams::new(self.n, self.a)?;
        self.quadrature.validate()?;
        self.solver.validate()?;
        if self.workers == Some(0) {
            return Err(CliError::Validation("workers must be positive".into()));
        }
        self.nonlinearity()?;
        self.weight()?;
        Ok(params)
    }

    /// [`validate`](Self::validate) plus `a < 1`, for the solver subcommands.
    pub fn validate_for_solver(&self) -> Result<ModelParams, CliError> {
        let params = self.validate()?;
        params.require_subfunk()?;
        Ok(params)
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity, CliError> {
        let (name, scale) = split_scale(&self.g)?;
        let nl = match name {
            "sublinear" => Nonlinearity::sublinear(),
            "log" => Nonlinearity::logarithmic(),
            other => return Err(CliError::Validation(format!("unknown nonlinearity '{other}'"))),
        };
        Ok(match scale {
            Some(k) => nl.scaled(k),
            None => nl,
        })
    }

    pub fn weight(&self) -> Result<WeightKappa, CliError> {
        let (name, scale) = split_scale(&self.kappa)?;
        let kappa = match name.split_once(':') {
            Some(("bump", r)) => WeightKappa::bump(parse("problem.kappa", r)?)?,
            None if name == "bump" => WeightKappa::default_bump(),
            _ => return Err(CliError::Validation(format!("unknown weight '{name}'"))),
        };
        let kappa = kappa.with_measure(self.kappa_measure);
        Ok(match scale {
            Some(k) => kappa.scaled(k),
            None => kappa,
        })
    }

    /// Every key with its resolved value, in the input format.
    pub fn resolved(&self) -> String {
        let s = &self.solver;
        let q = &self.quadrature;
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "a = {:?}", self.a);
        if let Some(w) = self.workers {
            let _ = writeln!(out, "workers = {w}");
        }
        if let Some(dir) = &self.out {
            let _ = writeln!(out, "out = {}", dir.display());
        }
        let _ = writeln!(out, "\n[quadrature]");
        let _ = writeln!(out, "nodes_per_panel = {}", q.nodes_per_panel);
        let _ = writeln!(out, "r_max = {:?}", q.r_max);
        let _ = writeln!(out, "scheme = {}", scheme_text(&q.scheme));
        let _ = writeln!(out, "\n[solver]");
        let _ = writeln!(out, "elements = {}", s.elements);
        let _ = writeln!(out, "gauss_points = {}", s.gauss_points);
        let _ = writeln!(out, "r_max = {:?}", s.r_max);
        let _ = writeln!(out, "tol = {:?}", s.tol);
        let _ = writeln!(out, "max_iter = {}", s.max_iter);
        let _ = writeln!(out, "path_nodes = {}", s.path_nodes);
        let _ = writeln!(out, "reparam_every = {}", s.reparam_every);
        let _ = writeln!(out, "max_sweeps = {}", s.max_sweeps);
        let _ = writeln!(out, "handoff = {:?}", s.handoff);
        let _ = writeln!(out, "random_inits = {}", s.random_inits);
        let _ = writeln!(out, "seed = {}", s.seed);
        let _ = writeln!(out, "separation = {:?}", s.separation);
        let _ = writeln!(out, "zero_norm = {:?}", s.zero_norm);
        let _ = writeln!(out, "\n[problem]");
        let _ = writeln!(out, "g = {}", self.g);
        let _ = writeln!(out, "kappa = {}", self.kappa);
        let _ = writeln!(out, "kappa_measure = {}", self.kappa_measure.name());
        out
    }
}
