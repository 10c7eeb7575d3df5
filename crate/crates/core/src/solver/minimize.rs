//! Global minimization of `J_lambda` and the trial-family estimate of the
//! two-solution threshold `inf E / (2 G)`.

use serde::{Deserialize, Serialize};

use crate::error::{FunkError, Result};
use crate::finsler::oracle::golden_max;

use super::energy::EnergyModel;
use super::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOutcome {
    /// Free nodal values of the terminal iterate.
    pub u: Vec<f64>,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(FunkError::Parameter(lambda))
    }
}

/// Descent on `J_lambda` from `init` until the weak residual drops below
/// `cfg.tol`.
///
/// Each step solves `(H + mu A) d = -J'(u)` where `H` is the Hessian and `A`
/// the `H^1_2` Gram matrix; `mu >= 0` is raised until the shifted matrix is
/// positive definite, so `d` is always a descent direction, and relaxed after
/// full steps so the iteration ends in Newton's method. A backtracking line
/// search enforces the Armijo condition. Non-convergence is reported through
/// [`MinimizeOutcome::converged`] with the last iterate.
pub fn minimize(model: &EnergyModel, lambda: f64, init: &[f64], cfg: &SolverConfig) -> Result<MinimizeOutcome> {
    check_lambda(lambda)?;
    if init.len() != model.dim() {
        return Err(FunkError::Length {
            expected: model.dim(),
            got: init.len(),
        });
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(FunkError::NonFinite("initial guess".into()));
    }
    let gram = model.gram();
    let mut u = init.to_vec();
    let mut j = model.j(&u, lambda);
    let mut g = model.gradient(&u, lambda);
    let mut res = model.dual_norm(&g);
    let mut mu: f64 = 0.0;
    let mut iterations = 0;
    while iterations < cfg.max_iter && res >= cfg.tol {
        iterations += 1;
        let hess = model.hessian(&u, lambda);
        let mut shifted = hess.plus_scaled(gram, mu);
        while !shifted.is_positive_definite() && mu < 1e12 {
            mu = if mu == 0.0 { 1e-6 } else { 10.0 * mu };
            shifted = hess.plus_scaled(gram, mu);
        }
        let d: Vec<f64> = shifted.solve_spd(&g).iter().map(|v| -v).collect();
        let slope = dot(&g, &d);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = axpy(&u, t, &d);
            let jt = model.j(&trial, lambda);
            if jt <= j + 1e-4 * t * slope {
                accepted = Some((trial, jt, None));
                break;
            }
            if t == 1.0 && jt <= j + 1e-10 * (1.0 + j.abs()) {
                // near a minimizer the energy decrease drowns in roundoff;
                // accept the full step if it contracts the residual
                let gt = model.gradient(&trial, lambda);
                let rt = model.dual_norm(&gt);
                if rt < 0.5 * res {
                    accepted = Some((trial, jt, Some((gt, rt))));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, jt, cached)) => {
                u = trial;
                j = jt;
                (g, res) = match cached {
                    Some(c) => c,
                    None => {
                        let gt = model.gradient(&u, lambda);
                        let rt = model.dual_norm(&gt);
                        (gt, rt)
                    }
                };
                if t == 1.0 {
                    mu = if mu < 1e-9 { 0.0 } else { 0.1 * mu };
                }
            }
            None => {
                if mu >= 1e12 {
                    break;
                }
                mu = (10.0 * mu).max(1e-6);
            }
        }
    }
    Ok(MinimizeOutcome {
        converged: res < cfg.tol,
        u,
        energy: j,
        residual: res,
        iterations,
    })
}

/// Trial profiles for [`tilde_lambda_estimate`]: plateau-and-ramp profiles
/// equal to 1 on `[0, w1]` and decaying linearly to 0 at `w2`, and smooth
/// bumps, each scaled over a logarithmic range of heights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFamily {
    pub plateaus: Vec<f64>,
    /// Ramp lengths `w2 - w1`; ramps are cut at `R_max`.
    pub ramps: Vec<f64>,
    pub bump_radii: Vec<f64>,
    pub height_lo: f64,
    pub height_hi: f64,
    pub heights: usize,
}

impl Default for TrialFamily {
    fn default() -> Self {
        Self {
            plateaus: (0..=10).map(|k| 0.05 * k as f64).collect(),
            ramps: (0..16).map(|k| 0.02 * 1.3f64.powi(k)).collect(),
            bump_radii: (1..=19).map(|k| 0.05 * k as f64).collect(),
            height_lo: 1e-3,
            height_hi: 1e6,
            heights: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TildeLambda {
    /// `min E(u) / (2 G(u))` over the family; an upper bound for the infimum.
    pub value: f64,
    /// Minimizing trial (free nodal values), scaled to the optimal height.
    pub trial: Vec<f64>,
    pub height: f64,
    pub description: String,
}

/// `min_{h > 0} h^2 E(phi) / (2 G(h phi))` using `E(h phi) = h^2 E(phi)`.
fn best_height(model: &EnergyModel, phi: &[f64], family: &TrialFamily) -> Option<(f64, f64)> {
    let e = model.energy(phi);
    if e <= 0.0 {
        return None;
    }
    let ratio = |lh: f64| -> f64 {
        let h = lh.exp();
        let scaled: Vec<f64> = phi.iter().map(|v| h * v).collect();
        let g = model.g_functional(&scaled);
        if g > 0.0 {
            h * h * e / (2.0 * g)
        } else {
            f64::INFINITY
        }
    };
    let (llo, lhi) = (family.height_lo.ln(), family.height_hi.ln());
    let steps = family.heights.max(2);
    let dl = (lhi - llo) / (steps - 1) as f64;
    let mut best = (llo, f64::INFINITY);
    for k in 0..steps {
        let lh = llo + dl * k as f64;
        let v = ratio(lh);
        if v < best.1 {
            best = (lh, v);
        }
    }
    if !best.1.is_finite() {
        return None;
    }
    let (lh, neg) = golden_max(&mut |x| -ratio(x), best.0 - dl, best.0 + dl, 1e-10);
    let refined = if -neg < best.1 { (lh, -neg) } else { best };
    Some((refined.1, refined.0.exp()))
}

/// Upper bound for `inf_{G(u) > 0} E(u) / (2 G(u))` from a trial family on the
/// model's mesh.
pub fn tilde_lambda_estimate(model: &EnergyModel, family: &TrialFamily) -> Result<TildeLambda> {
    let breaks = model.grid().breaks();
    let r_max = model.grid().r_max();
    let mut candidates: Vec<(Vec<f64>, String)> = Vec::new();
    for &w1 in &family.plateaus {
        for &ramp in &family.ramps {
            let w2 = (w1 + ramp).min(r_max);
            if w2 <= w1 {
                continue;
            }
            let phi = model.interpolate(|r| {
                if r <= w1 {
                    1.0
                } else if r >= w2 {
                    0.0
                } else {
                    (w2 - r) / (w2 - w1)
                }
            });
            candidates.push((phi, format!("ramp(w1={w1:.3}, w2={w2:.4})")));
        }
    }
    for &rho in &family.bump_radii {
        let rho = rho.min(r_max);
        let phi = model.interpolate(|r| {
            let z = r / rho;
            if z >= 1.0 {
                0.0
            } else {
                (1.0 - z * z).powi(2)
            }
        });
        candidates.push((phi, format!("bump(rho={rho:.3})")));
    }
    debug_assert!(candidates.iter().all(|(p, _)| p.len() + 1 == breaks.len()));
    let mut best: Option<(f64, f64, usize)> = None;
    for (i, (phi, _)) in candidates.iter().enumerate() {
        if let Some((v, h)) = best_height(model, phi, family) {
            if best.is_none_or(|(bv, _, _)| v < bv) {
                best = Some((v, h, i));
            }
        }
    }
    let (value, height, i) = best.ok_or_else(|| {
        FunkError::Undefined("no trial profile gives G > 0; kappa and g are incompatible".into())
    })?;
    let (phi, description) = &candidates[i];
    Ok(TildeLambda {
        value,
        trial: phi.iter().map(|v| height * v).collect(),
        height,
        description: description.clone(),
    })
}
