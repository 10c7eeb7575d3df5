//! Sobolev norms on `(B^n(1), F_a)` for radial functions, the inequalities
//! relating them, and the one-sided counterexample at the Funk endpoint.
//!
//! `||u||_{W^{1,2,a}}^2 = int F_a^{*2}(x, Du) dV_{F_a} + int u^2 dV_{F_a}`. It is
//! only positively homogeneous: `||-u||` may differ from `||u||`, and at `a = 1`
//! it may even be infinite while `||u||` is finite.

use serde::{Deserialize, Serialize};

use crate::error::{FunkError, Result};
use crate::finsler::ModelParams;
use crate::quadrature::{radial_integral, unit_ball_volume, Measure, QuadratureConfig};
use crate::radial::{CounterexampleProfile, RadialFunction};
use crate::report::{csv_table, num};
use crate::solver::radial_fstar;

/// All norms of one radial function, each integrated over `|x| < r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    /// `int F^{*2}(Du) dV_{F_a}`.
    pub seminorm: f64,
    /// `int u^2 dV_{F_a}`.
    pub mass: f64,
    /// `||u||_{W^{1,2,a}}`.
    pub total: f64,
    /// `||u||_K = (int h_K^*(Du, Du) dV_{h_K})^{1/2}`.
    pub klein_gradient: f64,
    /// `||u||_{H^1_2} = (||u||_K^2 + int u^2 dV_{h_K})^{1/2}`.
    pub h12: f64,
    pub r_max: f64,
}

const NORM_FIELDS: [&str; 6] = ["seminorm", "mass", "total", "klein_gradient", "h12", "r_max"];

impl NormReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    pub fn csv_header() -> String {
        NORM_FIELDS.join(",")
    }

    pub fn csv_row(&self) -> String {
        [self.seminorm, self.mass, self.total, self.klein_gradient, self.h12, self.r_max]
            .iter()
            .map(|v| num(*v))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Norms of `u` on its own grid.
pub fn w12a_norm(u: &RadialFunction, params: &ModelParams) -> Result<NormReport> {
    let grid = u.grid();
    let wf = grid.measure_weights(params, Measure::Finsler);
    let wk = grid.measure_weights(params, Measure::Klein);
    let (mut seminorm, mut mass, mut klein, mut klein_mass) = (0.0, 0.0, 0.0, 0.0);
    for (q, &r) in grid.nodes().iter().enumerate() {
        let (v, du) = (u.values()[q], u.slopes()[q]);
        let fs = radial_fstar(params, r, du)?;
        let hk = (1.0 - r * r) * du;
        seminorm += wf[q] * fs * fs;
        mass += wf[q] * v * v;
        klein += wk[q] * hk * hk;
        klein_mass += wk[q] * v * v;
    }
    let report = NormReport {
        seminorm,
        mass,
        total: (seminorm + mass).sqrt(),
        klein_gradient: klein.sqrt(),
        h12: (klein + klein_mass).sqrt(),
        r_max: grid.r_max(),
    };
    if [seminorm, mass, klein, klein_mass].iter().any(|v| !v.is_finite()) {
        return Err(FunkError::NonFinite("norm integral".into()));
    }
    Ok(report)
}

/// `u(x) = -sqrt(1 - |x|)` with its exact derivative.
pub fn counterexample_profile() -> CounterexampleProfile {
    CounterexampleProfile
}

fn funk_params(n: usize) -> Result<ModelParams> {
    ModelParams::new(n, 1.0)
}

/// `C1(R) = int_{|x|<R} F_1^{*2}(x, Du) dx` and `C2(R) = int_{|x|<R} F_1^{*2}(x, -Du) dx`
/// for `u = -sqrt(1 - |x|)`, i.e. `(1/4) int (1 - |x|)` and
/// `(1/4) int (1 + |x|)^2 / (1 - |x|)`. `dV_{F_1}` is Lebesgue measure.
pub fn c1_c2_integrals(r_max: f64, n: usize, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(FunkError::OutsideBall(r_max));
    }
    let params = funk_params(n)?;
    let cfg = cfg.clone().with_r_max(r_max);
    let slope = |r: f64| 0.5 / (1.0 - r).sqrt();
    let fstar_sq = |r: f64, du: f64| radial_fstar(&params, r, du).map_or(f64::NAN, |v| v * v);
    let c1 = radial_integral(|r| fstar_sq(r, slope(r)), &params, Measure::Finsler, &cfg)?;
    let c2 = radial_integral(|r| fstar_sq(r, -slope(r)), &params, Measure::Finsler, &cfg)?;
    Ok((c1, c2))
}

/// `||u||^2_{W^{1,2,1}} = C1(R) + int_{|x|<R} u^2 dx` for the counterexample.
pub fn counterexample_norm_sq(r_max: f64, n: usize, cfg: &QuadratureConfig) -> Result<f64> {
    let (c1, _) = c1_c2_integrals(r_max, n, cfg)?;
    let params = funk_params(n)?;
    let mass = radial_integral(|r| 1.0 - r, &params, Measure::Finsler, &cfg.clone().with_r_max(r_max))?;
    Ok(c1 + mass)
}

/// One truncation radius of the divergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub r_max: f64,
    pub c1: f64,
    pub c2: f64,
}

/// `C1` and `C2` along a schedule of truncation radii, with the growth rate of
/// `C2` in `ln(1 / (1 - R))` fitted by least squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceTrend {
    pub n: usize,
    pub rows: Vec<DivergenceRow>,
    pub slope: f64,
    /// `n omega_n`, the rate at which `C2` grows per unit of `ln(1 / (1 - R))`.
    pub expected_slope: f64,
    /// `omega_n / (4 (n + 1))`.
    pub c1_limit: f64,
}

impl DivergenceTrend {
    /// `C1` within `c1_tol` of its limit at the largest radius and the fitted
    /// slope within `slope_rel_tol` of `n omega_n`.
    pub fn passes(&self, c1_tol: f64, slope_rel_tol: f64) -> bool {
        let last = self.rows.last().expect("trend has at least two rows");
        (last.c1 - self.c1_limit).abs() < c1_tol
            && (self.slope / self.expected_slope - 1.0).abs() < slope_rel_tol
            && self.rows.windows(2).all(|w| w[1].c2 > w[0].c2)
    }

    /// `(R, C1, C2, C2/C1)` rows.
    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| vec![num(r.r_max), num(r.c1), num(r.c2), num(r.c2 / r.c1)])
            .collect();
        csv_table(&["r_max", "c1", "c2", "ratio"], &rows)
    }
}

/// Default truncation schedule `R = 1 - 10^{-k}`, `k = 2..=8`.
pub fn default_truncations() -> Vec<f64> {
    (2..=8).map(|k| 1.0 - 10f64.powi(-k)).collect()
}

pub fn divergence_trend(schedule: &[f64], n: usize, cfg: &QuadratureConfig) -> Result<DivergenceTrend> {
    if schedule.len() < 2 {
        return Err(FunkError::Config("a slope fit needs at least two truncation radii".into()));
    }
    let mut rows = Vec::with_capacity(schedule.len());
    for &r in schedule {
        let (c1, c2) = c1_c2_integrals(r, n, cfg)?;
        rows.push(DivergenceRow { r_max: r, c1, c2 });
    }
    let xs: Vec<f64> = rows.iter().map(|r| -(1.0 - r.r_max).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.c2).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FunkError::Config("truncation radii must be distinct".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let omega = unit_ball_volume(n);
    Ok(DivergenceTrend {
        n,
        rows,
        slope: sxy / sxx,
        expected_slope: n as f64 * omega,
        c1_limit: omega / (4.0 * (n as f64 + 1.0)),
    })
}

/// Both sides of `int u^2 dV_{h_K} <= 4/(n-1)^2 int h_K^*(Du, Du) dV_{h_K}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FedererFleming {
    pub lhs: f64,
    pub rhs: f64,
}

impl FedererFleming {
    /// `lhs / rhs`; undefined for `u = 0`.
    pub fn ratio(&self) -> Result<f64> {
        if self.rhs == 0.0 {
            return Err(FunkError::Undefined("Federer-Fleming ratio of the zero function".into()));
        }
        Ok(self.lhs / self.rhs)
    }
}

pub fn federer_fleming(u: &RadialFunction, n: usize) -> Result<FedererFleming> {
    let params = ModelParams::new(n, 0.0)?;
    let report = w12a_norm(u, &params)?;
    let mass = report.h12.powi(2) - report.klein_gradient.powi(2);
    let grad = report.klein_gradient.powi(2);
    Ok(FedererFleming {
        lhs: mass.max(0.0),
        rhs: 4.0 / ((n as f64 - 1.0).powi(2)) * grad,
    })
}

/// `(c, C)` with `c ||u||_{H^1_2} <= ||u||_{W^{1,2,a}} <= C ||u||_{H^1_2}`:
/// `c = (1 - a^2)^{(n+1)/4} / (1 + a)`, `C = 1 / (1 - a)` (infinite at `a = 1`).
pub fn sandwich_constants(params: &ModelParams) -> (f64, f64) {
    let a = params.a();
    let n = params.n() as f64;
    let lower = (1.0 - a * a).powf(0.25 * (n + 1.0)) / (1.0 + a);
    let upper = if params.is_funk() { f64::INFINITY } else { 1.0 / (1.0 - a) };
    (lower, upper)
}

/// `C` with `||u||_K <= ||u||_{H^1_2} <= C ||u||_K`: `(1 + 4/(n-1)^2)^{1/2}`.
pub fn klein_equivalence_constant(n: usize) -> f64 {
    (1.0 + 4.0 / ((n as f64 - 1.0).powi(2))).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::{funk_distance, BallPoint};
    use crate::quadrature::RadialGrid;
    use crate::radial::{BumpProfile, RadialProfile};
    use rand::SeedableRng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn profile_fn(p: &BumpProfile) -> RadialFunction {
        let cfg = QuadratureConfig::default().with_breakpoints(&[p.radius]);
        RadialFunction::from_profile(Arc::new(RadialGrid::new(&cfg).unwrap()), p).unwrap()
    }

    #[test]
    fn zero_function_has_zero_norms() {
        let grid = Arc::new(RadialGrid::new(&QuadratureConfig::default()).unwrap());
        let u = RadialFunction::zero(grid);
        let r = w12a_norm(&u, &ModelParams::new(3, 0.4).unwrap()).unwrap();
        assert_eq!((r.seminorm, r.mass, r.total, r.klein_gradient, r.h12), (0.0, 0.0, 0.0, 0.0, 0.0));
        let ff = federer_fleming(&u, 3).unwrap();
        assert_eq!((ff.lhs, ff.rhs), (0.0, 0.0));
        assert!(ff.ratio().is_err());
    }

    #[test]
    fn a_zero_reduces_to_h12() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 2..=4 {
            for _ in 0..10 {
                let u = profile_fn(&BumpProfile::random(&mut rng, 0.99));
                let r = w12a_norm(&u, &ModelParams::new(n, 0.0).unwrap()).unwrap();
                assert!((r.total - r.h12).abs() < 1e-10 * r.h12);
                assert!((r.total.powi(2) - r.seminorm - r.mass).abs() < 1e-12 * r.total.powi(2));
            }
        }
    }

    #[test]
    fn counterexample_matches_funk_distance() {
        let u = counterexample_profile();
        assert_eq!(u.value(0.0), -1.0);
        assert_eq!(u.slope(0.75), 1.0);
        for k in 0..20 {
            let r = 0.049 * k as f64;
            let d = funk_distance(&BallPoint::origin(2), &BallPoint::on_axis(2, r).unwrap()).unwrap();
            assert!((u.value(r) + (-d / 2.0).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn counterexample_constants() {
        let cfg = QuadratureConfig::default();
        let (c1, _) = c1_c2_integrals(1.0 - 1e-8, 2, &cfg).unwrap();
        assert!((c1 - PI / 12.0).abs() < 1e-6);
        let norm_sq = counterexample_norm_sq(1.0 - 1e-8, 2, &cfg).unwrap();
        assert!((norm_sq - 5.0 * PI / 12.0).abs() < 1e-5);
        let (c1, _) = c1_c2_integrals(1.0 - 1e-8, 3, &cfg).unwrap();
        assert!((c1 - PI / 12.0).abs() < 1e-6);
        assert!(c1_c2_integrals(1.0, 2, &cfg).is_err());
    }

    #[test]
    fn trend_needs_two_radii() {
        let cfg = QuadratureConfig::default();
        assert!(divergence_trend(&[0.99], 2, &cfg).is_err());
        let t = divergence_trend(&default_truncations(), 2, &cfg).unwrap();
        assert!(t.passes(1e-6, 0.05), "{t:?}");
    }

    #[test]
    fn json_and_csv_field_order() {
        let r = NormReport {
            seminorm: 1.0,
            mass: 3.0,
            total: 2.0,
            klein_gradient: 0.5,
            h12: 0.75,
            r_max: 0.9,
        };
        let json = r.to_json();
        let keys: Vec<usize> = NORM_FIELDS.iter().map(|k| json.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(NormReport::csv_header(), "seminorm,mass,total,klein_gradient,h12,r_max");
        assert!(r.csv_row().starts_with("1.0000000000000000e0,3.0000000000000000e0,"));
    }
}
