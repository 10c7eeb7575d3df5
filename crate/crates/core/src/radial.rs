//! Radially symmetric functions on the truncated ball.
//!
//! A [`RadialFunction`] lives on a [`RadialGrid`]: the panel breakpoints double
//! as mesh nodes `0 = r_0 < r_1 < ... < r_M = R_max` and the Gauss points carry
//! the values and radial derivatives that every integral consumes. Functions
//! come from nodal values (piecewise linear; the derivative on a panel is the
//! centered difference across it) or from an analytic profile with a
//! registered derivative.

use std::sync::Arc;

use rand::Rng;

use crate::error::{FunkError, Result};
use crate::quadrature::RadialGrid;

/// An analytic radial profile `u(r)` with its derivative.
pub trait RadialProfile {
    fn value(&self, r: f64) -> f64;
    fn slope(&self, r: f64) -> f64;
    /// Radius beyond which the profile vanishes identically, if any.
    fn support(&self) -> Option<f64> {
        None
    }
}

/// Where the derivative values at the quadrature nodes came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeSource {
    Analytic,
    /// Piecewise-linear interpolation of nodal values.
    Difference,
}

#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    nodal: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    source: DerivativeSource,
}

impl RadialFunction {
    /// Piecewise-linear function through `nodal` (one value per breakpoint).
    /// The last value is the boundary value and must be zero.
    pub fn from_nodal(grid: Arc<RadialGrid>, nodal: Vec<f64>) -> Result<Self> {
        let expected = grid.breaks().len();
        if nodal.len() != expected {
            return Err(FunkError::Length {
                expected,
                got: nodal.len(),
            });
        }
        if nodal.iter().any(|v| !v.is_finite()) {
            return Err(FunkError::NonFinite("nodal value".into()));
        }
        if *nodal.last().unwrap() != 0.0 {
            return Err(FunkError::Config("boundary value u(R_max) must be 0".into()));
        }
        let (values, slopes) = interpolate(&grid, &nodal);
        Ok(Self {
            grid,
            nodal,
            values,
            slopes,
            source: DerivativeSource::Difference,
        })
    }

    /// Piecewise-linear function from the free values `u_0 .. u_{M-1}`; the
    /// boundary value is pinned to zero.
    pub fn from_free(grid: Arc<RadialGrid>, free: &[f64]) -> Result<Self> {
        let mut nodal = Vec::with_capacity(free.len() + 1);
        nodal.extend_from_slice(free);
        nodal.push(0.0);
        Self::from_nodal(grid, nodal)
    }

    pub fn zero(grid: Arc<RadialGrid>) -> Self {
        let m = grid.breaks().len();
        Self::from_nodal(grid, vec![0.0; m]).expect("zero function is valid")
    }

    /// Samples an analytic profile exactly at the quadrature nodes.
    pub fn from_profile<P: RadialProfile + ?Sized>(grid: Arc<RadialGrid>, profile: &P) -> Result<Self> {
        let nodal: Vec<f64> = grid.breaks().iter().map(|&r| profile.value(r)).collect();
        let values: Vec<f64> = grid.nodes().iter().map(|&r| profile.value(r)).collect();
        let slopes: Vec<f64> = grid.nodes().iter().map(|&r| profile.slope(r)).collect();
        if values.iter().chain(&slopes).any(|v| !v.is_finite()) {
            return Err(FunkError::NonFinite("profile sample".into()));
        }
        Ok(Self {
            grid,
            nodal,
            values,
            slopes,
            source: DerivativeSource::Analytic,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Values at the mesh nodes, boundary included.
    pub fn nodal(&self) -> &[f64] {
        &self.nodal
    }

    /// Values at the mesh nodes with the pinned boundary value dropped.
    pub fn free(&self) -> &[f64] {
        &self.nodal[..self.nodal.len() - 1]
    }

    /// Values at the quadrature nodes.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Radial derivatives at the quadrature nodes.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn source(&self) -> DerivativeSource {
        self.source
    }

    /// `t u` for any real `t`.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            nodal: self.nodal.iter().map(|v| t * v).collect(),
            values: self.values.iter().map(|v| t * v).collect(),
            slopes: self.slopes.iter().map(|v| t * v).collect(),
            source: self.source,
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// Smallest nodal value.
    pub fn min_nodal(&self) -> f64 {
        self.nodal.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(r, u(r))` rows at the mesh nodes.
    pub fn profile_rows(&self) -> Vec<(f64, f64)> {
        self.grid.breaks().iter().copied().zip(self.nodal.iter().copied()).collect()
    }
}

fn interpolate(grid: &RadialGrid, nodal: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let breaks = grid.breaks();
    let mut values = Vec::with_capacity(grid.len());
    let mut slopes = Vec::with_capacity(grid.len());
    for (q, &r) in grid.nodes().iter().enumerate() {
        let e = grid.panel_of(q);
        let h = breaks[e + 1] - breaks[e];
        let xi = (r - breaks[e]) / h;
        values.push(nodal[e] * (1.0 - xi) + nodal[e + 1] * xi);
        slopes.push((nodal[e + 1] - nodal[e]) / h);
    }
    (values, slopes)
}

/// `u(r) = -sqrt(1 - r) = -exp(-d_{F_1}(0, x) / 2)`: lies in the Funk Sobolev
/// class while its negative does not.
#[derive(Debug, Clone, Copy, Default)]
pub struct CounterexampleProfile;

impl RadialProfile for CounterexampleProfile {
    fn value(&self, r: f64) -> f64 {
        -(1.0 - r).sqrt()
    }

    fn slope(&self, r: f64) -> f64 {
        0.5 / (1.0 - r).sqrt()
    }
}

/// `h (1 - (r/rho)^2)_+^2 (1 + sum_k c_k (r/rho)^{2k})`, a compactly supported
/// `C^1` profile, smooth in `|x|` across the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpProfile {
    pub height: f64,
    pub radius: f64,
    pub coeffs: Vec<f64>,
}

impl BumpProfile {
    pub fn new(height: f64, radius: f64) -> Self {
        Self {
            height,
            radius,
            coeffs: Vec::new(),
        }
    }

    /// Random bump: radius in `[0.15, max_radius]`, height in `[-3, 3]`, up to
    /// three even polynomial modes.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_radius: f64) -> Self {
        let radius = rng.random_range(0.15..max_radius);
        let mut height: f64 = rng.random_range(-3.0..3.0);
        if height.abs() < 0.05 {
            height = 0.05f64.copysign(height);
        }
        let modes = rng.random_range(0..=3);
        let coeffs = (0..modes).map(|_| rng.random_range(-1.0..1.0)).collect();
        Self { height, radius, coeffs }
    }

    fn poly(&self, z: f64) -> (f64, f64) {
        let z2 = z * z;
        let mut p = 1.0;
        let mut dp = 0.0;
        let mut pow = 1.0; // z^{2k-2}
        for (k, c) in self.coeffs.iter().enumerate() {
            let k = (k + 1) as f64;
            dp += 2.0 * k * c * pow * z;
            pow *= z2;
            p += c * pow;
        }
        (p, dp)
    }
}

impl RadialProfile for BumpProfile {
    fn value(&self, r: f64) -> f64 {
        let z = r / self.radius;
        if z >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - z * z;
        self.height * w * w * self.poly(z).0
    }

    fn slope(&self, r: f64) -> f64 {
        let z = r / self.radius;
        if z >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - z * z;
        let (p, dp) = self.poly(z);
        self.height / self.radius * (-4.0 * z * w * p + w * w * dp)
    }

    fn support(&self) -> Option<f64> {
        Some(self.radius)
    }
}

/// Wraps a pair of closures as a profile.
pub struct FnProfile<U, D> {
    pub value: U,
    pub slope: D,
}

impl<U: Fn(f64) -> f64, D: Fn(f64) -> f64> RadialProfile for FnProfile<U, D> {
    fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }

    fn slope(&self, r: f64) -> f64 {
        (self.slope)(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{QuadratureConfig, Scheme};
    use rand::SeedableRng;

    fn mesh(elements: usize) -> Arc<RadialGrid> {
        let cfg = QuadratureConfig {
            nodes_per_panel: 4,
            r_max: 0.99,
            scheme: Scheme::Clustered { elements },
            breakpoints: vec![],
        };
        Arc::new(RadialGrid::new(&cfg).unwrap())
    }

    #[test]
    fn nodal_interpolation_is_exact_for_linear_data() {
        let grid = mesh(10);
        let nodal: Vec<f64> = grid.breaks().iter().map(|r| 2.0 * (0.99 - r)).collect();
        let u = RadialFunction::from_nodal(Arc::clone(&grid), nodal).unwrap();
        for (q, &r) in grid.nodes().iter().enumerate() {
            assert!((u.values()[q] - 2.0 * (0.99 - r)).abs() < 1e-14);
            assert!((u.slopes()[q] + 2.0).abs() < 1e-12);
        }
        assert_eq!(u.source(), DerivativeSource::Difference);
    }

    #[test]
    fn boundary_value_is_pinned() {
        let grid = mesh(4);
        assert!(RadialFunction::from_nodal(Arc::clone(&grid), vec![1.0; 5]).is_err());
        assert!(RadialFunction::from_nodal(Arc::clone(&grid), vec![1.0; 3]).is_err());
        let u = RadialFunction::from_free(grid, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(u.nodal(), &[1.0, 2.0, 3.0, 4.0, 0.0]);
        assert_eq!(u.free(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn counterexample_values() {
        let u = CounterexampleProfile;
        assert_eq!(u.value(0.0), -1.0);
        assert!((u.slope(0.75) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bump_derivative_matches_difference_quotient() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let b = BumpProfile::random(&mut rng, 0.95);
            for k in 1..40 {
                let r = b.radius * k as f64 / 40.0;
                let h = 1e-6;
                let fd = (b.value(r + h) - b.value(r - h)) / (2.0 * h);
                assert!((fd - b.slope(r)).abs() < 1e-6 * (1.0 + b.height.abs() / b.radius));
            }
            assert_eq!(b.value(b.radius), 0.0);
            assert_eq!(b.slope(b.radius * 1.01), 0.0);
        }
    }
}
