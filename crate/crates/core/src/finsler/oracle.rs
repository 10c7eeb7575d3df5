//! Derivative-free sup oracles over the unit sphere.
//!
//! Each oracle evaluates a defining supremum literally: coarse sampling of the
//! sphere followed by golden-section line searches along great circles through
//! the incumbent. The result is always attained at an actual direction, so it
//! is a lower bound for the true supremum.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{dot, klein_cometric_pair, polar_f_star, randers_f, BallPoint, CoVec, ModelParams, TanVec};
use crate::error::{FunkError, Result};

/// Sampling and refinement knobs for the sphere oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub samples: usize,
    /// Great-circle sweeps after the coarse pass.
    pub refine_sweeps: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            refine_sweeps: 40,
            seed: 0x5eed_f00d,
        }
    }
}

impl OracleConfig {
    pub fn with_samples(samples: usize) -> Self {
        Self {
            samples,
            ..Self::default()
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `objective` over unit vectors of `R^n`.
///
/// Returns the best value and the direction attaining it.
pub fn sphere_sup<F>(n: usize, cfg: &OracleConfig, mut objective: F) -> Result<(f64, Vec<f64>)>
where
    F: FnMut(&[f64]) -> f64,
{
    if cfg.samples < 100 {
        return Err(FunkError::Config(format!(
            "sphere oracle needs at least 100 samples, got {}",
            cfg.samples
        )));
    }
    let mut best_dir = vec![0.0; n];
    best_dir[0] = 1.0;
    let mut best = f64::NEG_INFINITY;
    let mut consider = |dir: &[f64], best: &mut f64, best_dir: &mut Vec<f64>| {
        let v = objective(dir);
        if v > *best {
            *best = v;
            best_dir.copy_from_slice(dir);
        }
    };

    if n == 2 {
        for k in 0..cfg.samples {
            let th = std::f64::consts::TAU * k as f64 / cfg.samples as f64;
            consider(&[th.cos(), th.sin()], &mut best, &mut best_dir);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut dir = vec![0.0; n];
        for _ in 0..cfg.samples {
            loop {
                for d in dir.iter_mut() {
                    *d = StandardNormal.sample(&mut rng);
                }
                let len = dot(&dir, &dir).sqrt();
                if len > 1e-12 {
                    dir.iter_mut().for_each(|d| *d /= len);
                    break;
                }
            }
            consider(&dir, &mut best, &mut best_dir);
        }
    }

    // initial bracket: a few times the coarse angular spacing
    let spacing = std::f64::consts::PI * (cfg.samples as f64).powf(-1.0 / (n as f64 - 1.0));
    let mut half_width = (4.0 * spacing).min(std::f64::consts::FRAC_PI_2);
    let mut current = best_dir;
    let mut trial = vec![0.0; n];
    for _ in 0..cfg.refine_sweeps {
        let start = best;
        for basis in tangent_basis(&current) {
            let mut along = |theta: f64| {
                let (s, c) = theta.sin_cos();
                for i in 0..n {
                    trial[i] = c * current[i] + s * basis[i];
                }
                objective(&trial)
            };
            let (theta, value) = golden_max(&mut along, -half_width, half_width, 1e-13);
            if value > best {
                best = value;
                let (s, c) = theta.sin_cos();
                for i in 0..n {
                    current[i] = c * current[i] + s * basis[i];
                }
                let len = dot(&current, &current).sqrt();
                current.iter_mut().for_each(|v| *v /= len);
            }
        }
        if best - start <= 1e-16 * best.abs() {
            half_width *= 0.25;
        } else {
            half_width *= 0.7;
        }
        half_width = half_width.max(1e-10);
    }
    Ok((best, current))
}

/// Orthonormal basis of the tangent space at unit vector `u` (Gram-Schmidt on
/// the standard basis).
fn tangent_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let pu = dot(&e, u);
        e.iter_mut().zip(u).for_each(|(v, w)| *v -= pu * w);
        for b in &basis {
            let pb = dot(&e, b);
            e.iter_mut().zip(b).for_each(|(v, w)| *v -= pb * w);
        }
        let len = dot(&e, &e).sqrt();
        if len > 1e-8 {
            e.iter_mut().for_each(|v| *v /= len);
            basis.push(e);
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

/// Golden-section maximization on `[lo, hi]`; returns the best abscissa seen,
/// including the midpoint so that a flat function never loses the incumbent.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(f: &mut F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut best = (0.5 * (lo + hi), f(0.5 * (lo + hi)));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (hi - lo) > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        if f1 > best.1 {
            best = (x1, f1);
        }
        if f2 > best.1 {
            best = (x2, f2);
        }
    }
    best
}

/// `sup_y alpha(y) / F_a(x, y)` by sphere search.
pub fn polar_f_star_oracle(
    params: &ModelParams,
    p: &BallPoint,
    alpha: &CoVec,
    cfg: &OracleConfig,
) -> Result<f64> {
    if alpha.0.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let (value, _) = sphere_sup(params.n(), cfg, |y| {
        let f = randers_f(params, p, &TanVec(y.to_vec())).unwrap_or(f64::NAN);
        let v = dot(&alpha.0, y) / f;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    })?;
    Ok(value)
}

/// `sup_alpha alpha(y) / F_a^*(x, alpha)`: the polar construction applied to
/// the closed-form co-metric, which should give back `F_a(x, y)`.
pub fn bipolar_oracle(params: &ModelParams, p: &BallPoint, y: &TanVec, cfg: &OracleConfig) -> Result<f64> {
    if y.0.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let (value, _) = sphere_sup(params.n(), cfg, |alpha| {
        let f = polar_f_star(params, p, &CoVec(alpha.to_vec())).unwrap_or(f64::NAN);
        let v = dot(alpha, &y.0) / f;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    })?;
    Ok(value)
}

/// `sup_y F_a(x, y) / F_a(x, -y)` at a fixed point.
pub fn reversibility_oracle(params: &ModelParams, p: &BallPoint, cfg: &OracleConfig) -> Result<f64> {
    let (value, _) = sphere_sup(params.n(), cfg, |y| {
        let fwd = randers_f(params, p, &TanVec(y.to_vec())).unwrap_or(f64::NAN);
        let bwd = randers_f(params, p, &TanVec(y.iter().map(|v| -v).collect())).unwrap_or(f64::NAN);
        let v = fwd / bwd;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    })?;
    Ok(value)
}

/// Polar transform of a general Randers metric `sqrt(h) + beta`, evaluated with
/// the Klein co-metric and `beta = a x / (1 - |x|^2)`. Independent of the
/// specialized closed form in [`polar_f_star`].
pub fn general_randers_polar(params: &ModelParams, p: &BallPoint, alpha: &CoVec) -> f64 {
    let beta = super::beta_form(params, p);
    let ab = klein_cometric_pair(p, &alpha.0, &beta);
    let bb = klein_cometric_pair(p, &beta, &beta);
    let aa = klein_cometric_pair(p, &alpha.0, &alpha.0);
    ((ab * ab + (1.0 - bb) * aa).sqrt() - ab) / (1.0 - bb)
}
