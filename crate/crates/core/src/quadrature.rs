//! Radial quadrature against the singular Klein and Finsler volume densities.
//!
//! A radially symmetric integral over the ball reduces to
//!
//! ```text
//!   int_{|x| < R} f(|x|) dmu(x) = n omega_n int_0^R f(r) r^{n-1} rho(r) dr
//! ```
//!
//! where `rho` is the density of `mu` against Lebesgue measure. The Klein
//! density blows up like `(1 - r)^{-(n+1)/2}`, so integrals are taken over a
//! truncated ball `|x| < R_max` with panels graded toward `R_max`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{finite, FunkError, Result};
use crate::finsler::{finsler_density, klein_density, ModelParams};

/// Volume measure on the ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Lebesgue,
    Klein,
    /// Hausdorff measure `dV_{F_a}`.
    Finsler,
}

impl Measure {
    /// Density against Lebesgue measure at radius `r`.
    pub fn density(self, params: &ModelParams, r: f64) -> f64 {
        match self {
            Measure::Lebesgue => 1.0,
            Measure::Klein => klein_density(params.n(), r),
            Measure::Finsler => finsler_density(params.n(), params.a(), r),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Lebesgue => "lebesgue",
            Measure::Klein => "klein",
            Measure::Finsler => "finsler",
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = FunkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lebesgue" => Ok(Measure::Lebesgue),
            "klein" => Ok(Measure::Klein),
            "finsler" => Ok(Measure::Finsler),
            other => Err(FunkError::Config(format!("unknown measure '{other}'"))),
        }
    }
}

/// Gamma function at integer or half-integer arguments `k / 2`, `k >= 1`.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k >= 1, "gamma_half needs a positive argument");
    if k.is_multiple_of(2) {
        (1..k / 2).map(|j| j as f64).product()
    } else {
        // Gamma(1/2) = sqrt(pi), Gamma(x + 1) = x Gamma(x)
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while (2.0 * x) < k as f64 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Lebesgue volume of the unit ball of `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    PI.powf(0.5 * n as f64) / gamma_half(n + 2)
}

/// Surface area `n omega_n` of the unit sphere of `R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel layout on `[0, R_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    /// A single panel.
    Single,
    /// Panels whose distance to the unit sphere shrinks geometrically toward
    /// `R_max`, with `panels_per_decade` panels per decade of `1 - r`.
    Graded { panels_per_decade: usize },
    /// `elements` panels with breakpoints `R_max (1 - cos(pi k / elements)) / 2`,
    /// clustered at both ends. Used as the finite-element mesh of the solver.
    Clustered { elements: usize },
}

/// Node count, truncation radius and panel layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss-Legendre points per panel.
    pub nodes_per_panel: usize,
    pub r_max: f64,
    pub scheme: Scheme,
    /// Extra breakpoints (kinks of the integrand), merged into the panel layout.
    #[serde(default)]
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes_per_panel: 64,
            r_max: 1.0 - 1e-8,
            scheme: Scheme::Graded { panels_per_decade: 2 },
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureConfig {
    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn with_breakpoints(mut self, extra: &[f64]) -> Self {
        self.breakpoints.extend_from_slice(extra);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_panel < 8 && !matches!(self.scheme, Scheme::Clustered { .. }) {
            return Err(FunkError::Config(format!(
                "at least 8 nodes per panel required, got {}",
                self.nodes_per_panel
            )));
        }
        if self.nodes_per_panel == 0 {
            return Err(FunkError::Config("zero nodes per panel".into()));
        }
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(FunkError::Config(format!(
                "truncation radius must lie in (0, 1), got {}",
                self.r_max
            )));
        }
        match self.scheme {
            Scheme::Graded { panels_per_decade: 0 } => {
                Err(FunkError::Config("panels_per_decade must be positive".into()))
            }
            Scheme::Clustered { elements } if elements < 2 => {
                Err(FunkError::Config("clustered mesh needs at least 2 elements".into()))
            }
            _ => Ok(()),
        }
    }

    fn panel_breaks(&self) -> Vec<f64> {
        let r_max = self.r_max;
        let mut breaks = match self.scheme {
            Scheme::Single => vec![0.0, r_max],
            Scheme::Graded { panels_per_decade } => {
                let d_end = 1.0 - r_max;
                let decades = -d_end.log10();
                let panels = ((decades * panels_per_decade as f64).ceil() as usize).max(1);
                (0..=panels)
                    .map(|k| {
                        if k == panels {
                            r_max
                        } else {
                            1.0 - d_end.powf(k as f64 / panels as f64)
                        }
                    })
                    .collect()
            }
            Scheme::Clustered { elements } => (0..=elements)
                .map(|k| {
                    if k == elements {
                        r_max
                    } else {
                        0.5 * r_max * (1.0 - (PI * k as f64 / elements as f64).cos())
                    }
                })
                .collect(),
        };
        breaks.extend(self.breakpoints.iter().copied().filter(|b| *b > 0.0 && *b < r_max));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
        breaks
    }
}

/// Composite Gauss-Legendre rule for `int_0^{R_max} f(r) dr`.
///
/// Nodes are grouped by panel: panel `e` spans `[breaks[e], breaks[e + 1]]` and
/// owns nodes `e * per_panel .. (e + 1) * per_panel`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    breaks: Vec<f64>,
    per_panel: usize,
}

impl RadialGrid {
    pub fn new(cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self::from_breaks(cfg.panel_breaks(), cfg.nodes_per_panel))
    }

    /// Grid on explicit panel breakpoints `0 = b_0 < ... < b_M = R_max`.
    pub fn from_breaks(breaks: Vec<f64>, per_panel: usize) -> Self {
        let (x, w) = gauss_legendre(per_panel);
        let panels = breaks.len() - 1;
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for e in 0..panels {
            let (lo, hi) = (breaks[e], breaks[e + 1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        Self {
            nodes,
            weights,
            breaks,
            per_panel,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Panel breakpoints, starting at 0 and ending at `R_max`.
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn per_panel(&self) -> usize {
        self.per_panel
    }

    pub fn panels(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn r_max(&self) -> f64 {
        *self.breaks.last().expect("grid has at least one panel")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Panel owning quadrature node `q`.
    pub fn panel_of(&self, q: usize) -> usize {
        q / self.per_panel
    }

    /// Weights of `dmu` restricted to radial functions: `w_q n omega_n r_q^{n-1} rho(r_q)`.
    pub fn measure_weights(&self, params: &ModelParams, measure: Measure) -> Vec<f64> {
        let n = params.n();
        let area = unit_sphere_area(n);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * area * r.powi(n as i32 - 1) * measure.density(params, r))
            .collect()
    }
}

/// `int_{|x| < R_max} f(|x|) dmu(x)` for a radial integrand.
pub fn radial_integral<F>(f: F, params: &ModelParams, measure: Measure, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let grid = RadialGrid::new(cfg)?;
    radial_integral_on(&grid, f, params, measure)
}

/// [`radial_integral`] on a prebuilt grid.
pub fn radial_integral_on<F>(grid: &RadialGrid, f: F, params: &ModelParams, measure: Measure) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let n = params.n();
    let mut sum = 0.0;
    for (&r, &w) in grid.nodes().iter().zip(grid.weights()) {
        let v = f(r);
        if !v.is_finite() {
            return Err(FunkError::NonFinite(format!("integrand at r = {r}: {v}")));
        }
        sum += w * v * r.powi(n as i32 - 1) * measure.density(params, r);
    }
    finite(sum * unit_sphere_area(n), "radial integral")
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte-Carlo integral of `f` over `|x| < r_max` against `measure`, with
/// points drawn uniformly from the truncated ball.
pub fn ball_integral_mc<F>(
    f: F,
    params: &ModelParams,
    measure: Measure,
    r_max: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    if samples < 1000 {
        return Err(FunkError::Config(format!(
            "Monte-Carlo integration needs at least 1000 samples, got {samples}"
        )));
    }
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(FunkError::Config(format!("truncation radius must lie in (0, 1), got {r_max}")));
    }
    let n = params.n();
    let volume = unit_ball_volume(n) * r_max.powi(n as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; n];
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 0..samples {
        let len = loop {
            for v in x.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if len > 1e-12 {
                break len;
            }
        };
        let u: f64 = rng.random();
        let radius = r_max * u.powf(1.0 / n as f64);
        x.iter_mut().for_each(|v| *v *= radius / len);
        let value = f(&x) * measure.density(params, radius);
        if !value.is_finite() {
            return Err(FunkError::NonFinite(format!("Monte-Carlo sample at |x| = {radius}: {value}")));
        }
        // Welford
        let delta = value - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (value - mean);
    }
    let variance = m2 / (samples - 1) as f64;
    Ok(McEstimate {
        estimate: volume * mean,
        std_error: volume * (variance / samples as f64).sqrt(),
        samples,
    })
}
