//! Closed-form metric calculus for the Funk-type Randers family on the unit ball.
//!
//! For `a` in `[0, 1]` the metric is the Klein metric `h_K` perturbed by the
//! one-form `beta = a x / (1 - |x|^2)`:
//!
//! ```text
//!   F_a(x, y) = sqrt(h_K(y, y)) + a <x, y> / (1 - |x|^2)
//! ```
//!
//! `a = 0` is the Riemannian Klein model, `a = 1` the Funk metric. Everything
//! here is a pure function of its inputs. The brute-force counterparts used to
//! cross-check the closed forms live in [`oracle`].

pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{FunkError, Result};

/// Points with `|x|` at or beyond this radius are rejected; every formula is
/// singular on the unit sphere.
pub const BOUNDARY_GUARD: f64 = 1.0 - 1e-14;

/// Dimension `n` and interpolation parameter `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    n: usize,
    a: f64,
}

impl ModelParams {
    pub fn new(n: usize, a: f64) -> Result<Self> {
        if n < 2 {
            return Err(FunkError::Dimension(n));
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(FunkError::Parameter(a));
        }
        Ok(Self { n, a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// True for the Funk endpoint `a = 1`.
    pub fn is_funk(&self) -> bool {
        self.a == 1.0
    }

    /// Fails with [`FunkError::FunkLimit`] at `a = 1`.
    pub fn require_subfunk(&self) -> Result<()> {
        if self.is_funk() {
            Err(FunkError::FunkLimit)
        } else {
            Ok(())
        }
    }
}

/// A point of the open unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    x: Vec<f64>,
    norm_sq: f64,
}

impl BallPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(FunkError::Length { expected: 2, got: 0 });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FunkError::NonFinite("ball point coordinate".into()));
        }
        let norm_sq = dot(&x, &x);
        let norm = norm_sq.sqrt();
        if norm >= BOUNDARY_GUARD {
            return Err(FunkError::OutsideBall(norm));
        }
        Ok(Self { x, norm_sq })
    }

    /// The origin of `R^n`.
    pub fn origin(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            norm_sq: 0.0,
        }
    }

    /// The point `r e_1`.
    pub fn on_axis(n: usize, r: f64) -> Result<Self> {
        let mut x = vec![0.0; n];
        x[0] = r;
        Self::new(x)
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    fn check_dim(&self, params: &ModelParams) -> Result<()> {
        check_len(params.n(), self.dim())
    }
}

/// A tangent vector `y` at a ball point.
#[derive(Debug, Clone, PartialEq)]
pub struct TanVec(pub Vec<f64>);

/// A covector `alpha` at a ball point; houses `Du(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoVec(pub Vec<f64>);

impl TanVec {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl CoVec {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Pairing `alpha(y)`.
    pub fn apply(&self, y: &TanVec) -> f64 {
        dot(&self.0, &y.0)
    }
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(FunkError::Length { expected, got })
    }
}

/// Klein quadratic form `h_K(y, y)`.
pub fn klein_metric(p: &BallPoint, y: &TanVec) -> Result<f64> {
    check_len(p.dim(), y.0.len())?;
    let s = 1.0 - p.norm_sq();
    let xy = dot(p.coords(), &y.0);
    let yy = dot(&y.0, &y.0);
    Ok((yy * s + xy * xy) / (s * s))
}

/// Klein co-metric `h_K^*(alpha, alpha)`.
pub fn klein_cometric(p: &BallPoint, alpha: &CoVec) -> Result<f64> {
    check_len(p.dim(), alpha.0.len())?;
    Ok(klein_cometric_pair(p, &alpha.0, &alpha.0))
}

/// Bilinear co-metric `h_K^*(alpha, gamma)`.
pub(crate) fn klein_cometric_pair(p: &BallPoint, alpha: &[f64], gamma: &[f64]) -> f64 {
    let s = 1.0 - p.norm_sq();
    s * (dot(alpha, gamma) - dot(p.coords(), alpha) * dot(p.coords(), gamma))
}

/// Matrix of `h_K` at `p`, row-major `n x n`.
pub fn klein_matrix(p: &BallPoint) -> Vec<f64> {
    let n = p.dim();
    let s = 1.0 - p.norm_sq();
    let x = p.coords();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            m[i * n + j] = delta / s + x[i] * x[j] / (s * s);
        }
    }
    m
}

/// Matrix of `h_K^*` at `p`, row-major `n x n`.
pub fn klein_comatrix(p: &BallPoint) -> Vec<f64> {
    let n = p.dim();
    let s = 1.0 - p.norm_sq();
    let x = p.coords();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            m[i * n + j] = s * (delta - x[i] * x[j]);
        }
    }
    m
}

/// The Randers metric `F_a(x, y)`.
pub fn randers_f(params: &ModelParams, p: &BallPoint, y: &TanVec) -> Result<f64> {
    p.check_dim(params)?;
    check_len(params.n(), y.0.len())?;
    let s = 1.0 - p.norm_sq();
    let xy = dot(p.coords(), &y.0);
    let yy = dot(&y.0, &y.0);
    // |y|^2 - (|x|^2 |y|^2 - <x,y>^2); the bracket is >= 0 by Cauchy-Schwarz
    let radicand = (yy - (p.norm_sq() * yy - xy * xy)).max(0.0);
    Ok(radicand.sqrt() / s + params.a() * xy / s)
}

/// Closed-form polar transform `F_a^*(x, alpha)`.
pub fn polar_f_star(params: &ModelParams, p: &BallPoint, alpha: &CoVec) -> Result<f64> {
    p.check_dim(params)?;
    check_len(params.n(), alpha.0.len())?;
    let a = params.a();
    let r2 = p.norm_sq();
    let s = 1.0 - r2;
    let t = 1.0 - a * a * r2;
    let q = dot(p.coords(), &alpha.0);
    let aa = dot(&alpha.0, &alpha.0);
    let radicand = (s * t * aa - (1.0 - a * a) * s * q * q).max(0.0);
    Ok(((radicand.sqrt() - a * s * q) / t).max(0.0))
}

/// `||beta||_{h_K}(x) = a |x|`.
///
/// Debug builds also evaluate the co-metric on `beta = a x / (1 - |x|^2)` and
/// check that both routes agree.
pub fn beta_norm(params: &ModelParams, p: &BallPoint) -> Result<f64> {
    p.check_dim(params)?;
    let value = params.a() * p.norm();
    // the cometric route loses digits like 1 / (1 - |x|^2) near the sphere
    debug_assert!({
        let beta = beta_form(params, p);
        (klein_cometric_pair(p, &beta, &beta).sqrt() - value).abs() <= 1e-12 * (1.0 + value) / (1.0 - p.norm_sq())
    });
    Ok(value)
}

/// The one-form `beta_x = a x / (1 - |x|^2)`.
pub fn beta_form(params: &ModelParams, p: &BallPoint) -> Vec<f64> {
    let s = 1.0 - p.norm_sq();
    p.coords().iter().map(|v| params.a() * v / s).collect()
}

/// Global reversibility constant `(1 + a) / (1 - a)`; `+inf` at `a = 1`.
pub fn reversibility(params: &ModelParams) -> f64 {
    let a = params.a();
    if a == 1.0 {
        f64::INFINITY
    } else {
        (1.0 + a) / (1.0 - a)
    }
}

/// Pointwise reversibility `(1 + a|x|) / (1 - a|x|)`.
pub fn reversibility_at(params: &ModelParams, p: &BallPoint) -> Result<f64> {
    let b = beta_norm(params, p)?;
    Ok((1.0 + b) / (1.0 - b))
}

/// Global uniformity constant `((1 - a) / (1 + a))^2`.
pub fn uniformity_lf(params: &ModelParams) -> f64 {
    let a = params.a();
    ((1.0 - a) / (1.0 + a)).powi(2)
}

/// Pointwise uniformity constant `((1 - a|x|) / (1 + a|x|))^2`.
pub fn uniformity_at(params: &ModelParams, p: &BallPoint) -> Result<f64> {
    let b = beta_norm(params, p)?;
    Ok(((1.0 - b) / (1.0 + b)).powi(2))
}

/// Density of `dV_{F_a}` against Lebesgue measure.
pub fn volume_density(params: &ModelParams, p: &BallPoint) -> Result<f64> {
    p.check_dim(params)?;
    Ok(finsler_density(params.n(), params.a(), p.norm()))
}

/// Klein density `(1 - r^2)^{-(n+1)/2}`.
pub fn klein_density(n: usize, r: f64) -> f64 {
    (1.0 - r * r).powf(-0.5 * (n as f64 + 1.0))
}

/// `((1 - a^2 r^2) / (1 - r^2))^{(n+1)/2}` as a function of the radius.
pub fn finsler_density(n: usize, a: f64, r: f64) -> f64 {
    ((1.0 - a * a * r * r) / (1.0 - r * r)).powf(0.5 * (n as f64 + 1.0))
}

/// Legendre transform `J^*(x, alpha)`, the gradient of `F^{*2} / 2` in `alpha`.
///
/// Returns the Finsler gradient `nabla_F u(x)` when `alpha = Du(x)`. The zero
/// covector maps to the zero vector.
pub fn legendre_gradient(params: &ModelParams, p: &BallPoint, alpha: &CoVec) -> Result<TanVec> {
    p.check_dim(params)?;
    check_len(params.n(), alpha.0.len())?;
    let n = params.n();
    if alpha.0.iter().all(|v| *v == 0.0) {
        return Ok(TanVec(vec![0.0; n]));
    }
    let a = params.a();
    let r2 = p.norm_sq();
    let s = 1.0 - r2;
    let t = 1.0 - a * a * r2;
    let c = (1.0 - a * a) * s;
    let x = p.coords();
    let q = dot(x, &alpha.0);
    let aa = dot(&alpha.0, &alpha.0);
    // radicand >= s^2 |alpha|^2 > 0 for alpha != 0
    let root = (s * t * aa - c * q * q).sqrt();
    let fstar = (root - a * s * q) / t;
    let y = (0..n)
        .map(|i| {
            let dfstar = ((s * t * alpha.0[i] - c * q * x[i]) / root - a * s * x[i]) / t;
            fstar * dfstar
        })
        .collect();
    Ok(TanVec(y))
}

/// Central finite-difference approximation of [`legendre_gradient`].
pub fn legendre_gradient_fd(
    params: &ModelParams,
    p: &BallPoint,
    alpha: &CoVec,
    step: f64,
) -> Result<TanVec> {
    let half_sq = |v: &[f64]| -> Result<f64> {
        let f = polar_f_star(params, p, &CoVec(v.to_vec()))?;
        Ok(0.5 * f * f)
    };
    let mut work = alpha.0.clone();
    let mut out = Vec::with_capacity(work.len());
    for i in 0..work.len() {
        let h = step * (1.0 + alpha.0[i].abs());
        work[i] = alpha.0[i] + h;
        let plus = half_sq(&work)?;
        work[i] = alpha.0[i] - h;
        let minus = half_sq(&work)?;
        work[i] = alpha.0[i];
        out.push((plus - minus) / (2.0 * h));
    }
    Ok(TanVec(out))
}

/// Funk distance `d_{F_1}(x_1, x_2)`, directed from `x_1` to `x_2`.
pub fn funk_distance(p1: &BallPoint, p2: &BallPoint) -> Result<f64> {
    check_len(p1.dim(), p2.dim())?;
    if p1 == p2 {
        return Ok(0.0);
    }
    let (x1, x2) = (p1.coords(), p2.coords());
    let diff: Vec<f64> = x2.iter().zip(x1).map(|(b, a)| b - a).collect();
    let dd = dot(&diff, &diff);
    let x12 = dot(x1, x2);
    let root = (dd - (p1.norm_sq() * p2.norm_sq() - x12 * x12)).max(0.0).sqrt();
    let num = root - dot(x1, &diff);
    let den = root - dot(x2, &diff);
    let d = (num / den).ln();
    Ok(d.max(0.0))
}

/// `Dd_{F_1}(0, x) = x / (|x| (1 - |x|))`, the derivative of the Funk distance from the origin.
pub fn funk_distance_gradient(p: &BallPoint) -> Result<CoVec> {
    let r = p.norm();
    if r == 0.0 {
        return Err(FunkError::Undefined(
            "the Funk distance from the origin is not differentiable at the origin".into(),
        ));
    }
    Ok(CoVec(p.coords().iter().map(|v| v / (r * (1.0 - r))).collect()))
}
