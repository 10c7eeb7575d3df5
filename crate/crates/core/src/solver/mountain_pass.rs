//! Discretized mountain pass between `0` and a negative-energy state.
//!
//! A polyline path `0 = gamma_0, gamma_1, ..., gamma_{P+1} = u_target` is
//! deformed by repeatedly taking its highest point and pushing it downhill
//! perpendicular to the path (Riesz gradient in the `H^1_2` metric). Nodes are
//! re-equidistributed in `H^1_2` arc length every few sweeps. Once the top of
//! the path is close to critical, Newton's method on `J'_lambda = 0` finishes
//! the job; if that lands on the wrong critical point the hand-off threshold
//! is tightened and the sweeps continue.

use serde::{Deserialize, Serialize};

use crate::error::{FunkError, Result};
use crate::finsler::oracle::golden_max;

use super::energy::EnergyModel;
use super::minimize::{axpy, check_lambda, dot};
use super::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MountainPassOutcome {
    /// Free nodal values of the critical point.
    pub u: Vec<f64>,
    pub energy: f64,
    pub residual: f64,
    pub sweeps: usize,
    pub newton_iterations: usize,
    /// `H^1_2` distance to the target.
    pub separation: f64,
}

fn a_norm(model: &EnergyModel, v: &[f64]) -> f64 {
    model.inner(v, v).max(0.0).sqrt()
}

fn diff(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// `segments + 1` points at equal `H^1_2` arc length along the polyline
/// through `nodes`, endpoints included.
fn resample(model: &EnergyModel, nodes: &[Vec<f64>], segments: usize) -> Vec<Vec<f64>> {
    let last = nodes.len() - 1;
    let mut arc = vec![0.0; nodes.len()];
    for i in 1..=last {
        arc[i] = arc[i - 1] + a_norm(model, &diff(&nodes[i], &nodes[i - 1]));
    }
    let total = arc[last];
    let mut out = Vec::with_capacity(segments + 1);
    out.push(nodes[0].clone());
    let mut seg = 0;
    for k in 1..segments {
        let s = total * k as f64 / segments as f64;
        while seg + 1 < last && arc[seg + 1] < s {
            seg += 1;
        }
        let len = arc[seg + 1] - arc[seg];
        let t = if len > 0.0 { (s - arc[seg]) / len } else { 0.0 };
        out.push(nodes[seg].iter().zip(&nodes[seg + 1]).map(|(a, b)| a + t * (b - a)).collect());
    }
    out.push(nodes[last].clone());
    out
}

/// Re-equidistributes the path on either side of node `top`, which moves to
/// the middle index. Keeping half of the nodes on each side resolves barriers
/// that sit close to one endpoint.
fn equidistribute(model: &EnergyModel, path: &[Vec<f64>], top: usize) -> Vec<Vec<f64>> {
    let last = path.len() - 1;
    let mid = last / 2;
    let mut out = resample(model, &path[..=top], mid);
    out.extend(resample(model, &path[top..], last - mid).into_iter().skip(1));
    out
}

/// Highest point of `J(t u)` for `t` in `(0, 1]`, by a logarithmic scan and
/// golden-section refinement.
fn ray_maximum(model: &EnergyModel, lambda: f64, u: &[f64]) -> (f64, f64) {
    let j = |lt: f64| {
        let t = lt.exp();
        model.j(&u.iter().map(|v| t * v).collect::<Vec<_>>(), lambda)
    };
    let (lo, hi) = (1e-10f64.ln(), 0.0);
    let steps = 200;
    let dl = (hi - lo) / steps as f64;
    let mut best = (lo, j(lo));
    for k in 1..=steps {
        let lt = lo + dl * k as f64;
        let v = j(lt);
        if v > best.1 {
            best = (lt, v);
        }
    }
    let (lt, v) = golden_max(&mut |x| j(x), best.0 - dl, (best.0 + dl).min(hi), 1e-10);
    if v > best.1 {
        (lt.exp(), v)
    } else {
        (best.0.exp(), best.1)
    }
}

/// Newton's method on `J'_lambda(u) = 0` with backtracking on the residual.
fn newton(model: &EnergyModel, lambda: f64, u0: &[f64], cfg: &SolverConfig) -> (Vec<f64>, f64, usize, bool) {
    let mut u = u0.to_vec();
    let mut g = model.gradient(&u, lambda);
    let mut res = model.dual_norm(&g);
    for it in 0..60 {
        if res < cfg.tol {
            return (u, res, it, true);
        }
        let hess = model.hessian(&u, lambda);
        let Some(step) = hess.solve_general(&g) else {
            return (u, res, it, false);
        };
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-6 {
            let trial = axpy(&u, -t, &step);
            let gt = model.gradient(&trial, lambda);
            let rt = model.dual_norm(&gt);
            if rt.is_finite() && rt < (1.0 - 1e-4 * t) * res {
                u = trial;
                g = gt;
                res = rt;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            return (u, res, it, res < cfg.tol);
        }
    }
    let ok = res < cfg.tol;
    (u, res, 60, ok)
}

/// Mountain-pass critical point of `J_lambda` between `0` and `u_target`,
/// which must have negative energy.
pub fn mountain_pass(
    model: &EnergyModel,
    lambda: f64,
    u_target: &[f64],
    cfg: &SolverConfig,
) -> Result<MountainPassOutcome> {
    check_lambda(lambda)?;
    if u_target.len() != model.dim() {
        return Err(FunkError::Length {
            expected: model.dim(),
            got: u_target.len(),
        });
    }
    let j_target = model.j(u_target, lambda);
    if !(j_target < 0.0) {
        return Err(FunkError::Undefined(format!(
            "mountain pass needs a target with negative energy, got J = {j_target:e}"
        )));
    }
    let p = cfg.path_nodes;
    let target_norm = a_norm(model, u_target);
    let (t_top, j_top) = ray_maximum(model, lambda, u_target);
    if !(j_top > 0.0) {
        return Err(FunkError::PathCollapse(format!(
            "no barrier between 0 and the target along the segment (max J = {j_top:e})"
        )));
    }
    let mid = p.div_ceil(2);
    let mut path: Vec<Vec<f64>> = (0..=p + 1)
        .map(|k| {
            let t = if k <= mid {
                t_top * k as f64 / mid as f64
            } else {
                t_top + (1.0 - t_top) * (k - mid) as f64 / (p + 1 - mid) as f64
            };
            u_target.iter().map(|v| t * v).collect()
        })
        .collect();
    let mut energies: Vec<f64> = path.iter().map(|u| model.j(u, lambda)).collect();
    let mut step: f64 = 1.0;
    let mut handoff = cfg.handoff;
    let mut last_residual = f64::INFINITY;

    for sweep in 1..=cfg.max_sweeps {
        let mut k = (1..=p).max_by(|&i, &j| energies[i].total_cmp(&energies[j])).unwrap();
        if sweep % cfg.reparam_every == 0 {
            path = equidistribute(model, &path, k);
            energies = path.iter().map(|u| model.j(u, lambda)).collect();
            k = (1..=p).max_by(|&i, &j| energies[i].total_cmp(&energies[j])).unwrap();
        }
        if !(energies[k] > 0.0) {
            return Err(FunkError::PathCollapse(format!(
                "no barrier left on the path after {sweep} sweeps: max J = {:e} at node {k}",
                energies[k]
            )));
        }

        // move the top node to the highest point of its two adjacent segments
        for (lo, hi) in [(k - 1, k), (k, k + 1)] {
            let (a, b) = (&path[lo], &path[hi]);
            let (t, jt) = golden_max(
                &mut |t| model.j(&axpy(a, t, &diff(b, a)), lambda),
                0.0,
                1.0,
                1e-6,
            );
            if jt > energies[k] {
                path[k] = axpy(a, t, &diff(b, a));
                energies[k] = jt;
            }
        }
        let top = path[k].clone();
        let norm = a_norm(model, &top);
        if norm < cfg.zero_norm || a_norm(model, &diff(&top, u_target)) < cfg.separation * (target_norm + 1.0) {
            return Err(FunkError::PathCollapse(format!(
                "top of the path reached an endpoint after {sweep} sweeps (node {k}, |u| = {norm:e})"
            )));
        }

        let g = model.gradient(&top, lambda);
        let rg = model.riesz(&g);
        let res = dot(&rg, &g).max(0.0).sqrt();
        last_residual = res;
        if res < handoff * norm.max(1.0) {
            let (u, res, newton_iterations, ok) = newton(model, lambda, &top, cfg);
            let energy = model.j(&u, lambda);
            let separation = a_norm(model, &diff(&u, u_target));
            let distinct = separation > cfg.separation * (a_norm(model, &u) + target_norm + 1.0);
            if ok && energy > 0.0 && distinct && a_norm(model, &u) > cfg.zero_norm {
                return Ok(MountainPassOutcome {
                    u,
                    energy,
                    residual: res,
                    sweeps: sweep,
                    newton_iterations,
                    separation,
                });
            }
            handoff *= 0.1;
        }

        // Armijo step along the part of -grad perpendicular to the path
        let tangent = diff(&path[k + 1], &path[k - 1]);
        let tlen = a_norm(model, &tangent);
        let mut d: Vec<f64> = rg.iter().map(|v| -v).collect();
        if tlen > 0.0 {
            let tau: Vec<f64> = tangent.iter().map(|v| v / tlen).collect();
            let c = model.inner(&d, &tau);
            d = axpy(&d, -c, &tau);
        }
        let slope = dot(&g, &d);
        if slope >= 0.0 {
            continue;
        }
        let mut t = (2.0 * step).min(1.0);
        loop {
            let trial = axpy(&top, t, &d);
            let jt = model.j(&trial, lambda);
            if jt <= energies[k] + 1e-4 * t * slope {
                path[k] = trial;
                energies[k] = jt;
                step = t;
                break;
            }
            t *= 0.5;
            if t < 1e-14 {
                step = t;
                break;
            }
        }
    }
    Err(FunkError::NoConvergence {
        iterations: cfg.max_sweeps,
        residual: last_residual,
    })
}
