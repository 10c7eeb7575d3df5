//! Reference computations for the integration tests, written independently of
//! the library routines they check.
#![allow(dead_code)]

use std::f64::consts::PI;

use funkball::finsler::randers_f;
use funkball::solver::EnergyModel;
use funkball::{BallPoint, ModelParams, RadialGrid, TanVec};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-9 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

/// `sup_{|y| = 1} alpha(y) / F(x, y)` by random sampling followed by a random
/// local search with a shrinking radius.
pub fn brute_polar<R: Rng>(rng: &mut R, params: &ModelParams, x: &BallPoint, alpha: &[f64]) -> f64 {
    let n = params.n();
    let objective = |y: &[f64]| {
        let f = randers_f(params, x, &TanVec(y.to_vec())).unwrap();
        alpha.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / f
    };
    let mut best_y = random_unit(rng, n);
    let mut best = objective(&best_y);
    for _ in 0..4000 {
        let y = random_unit(rng, n);
        let v = objective(&y);
        if v > best {
            best = v;
            best_y = y;
        }
    }
    let mut radius = 0.1;
    while radius > 1e-7 {
        let mut improved = false;
        for _ in 0..40 {
            let step = random_unit(rng, n);
            let cand: Vec<f64> = best_y.iter().zip(&step).map(|(a, b)| a + radius * b).collect();
            let len = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cand: Vec<f64> = cand.into_iter().map(|v| v / len).collect();
            let v = objective(&cand);
            if v > best {
                best = v;
                best_y = cand;
                improved = true;
            }
        }
        if !improved {
            radius *= 0.5;
        }
    }
    best.max(0.0)
}

/// Central differences of `J_lambda` with an absolute step `h (1 + |u_i|)`.
pub fn fd_gradient(model: &EnergyModel, u: &[f64], lambda: f64, h: f64) -> Vec<f64> {
    let mut w = u.to_vec();
    (0..u.len())
        .map(|i| {
            let hi = h * (1.0 + u[i].abs());
            w[i] = u[i] + hi;
            let plus = model.j(&w, lambda);
            w[i] = u[i] - hi;
            let minus = model.j(&w, lambda);
            w[i] = u[i];
            (plus - minus) / (2.0 * hi)
        })
        .collect()
}

pub fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let num = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den = y.iter().map(|b| b * b).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

/// `C2(R)` for `n = 2` in closed form: with `s = 1 - r`,
/// `(1 + r)^2 r / (1 - r) = 4/s - 8 + 5 s - s^2`, so
/// `C2 = (pi / 2) [4 ln(1/d) - 8 (1 - d) + 5 (1 - d^2) / 2 - (1 - d^3) / 3]`, `d = 1 - R`.
pub fn c2_closed_form_n2(r_max: f64) -> f64 {
    let d = 1.0 - r_max;
    0.5 * PI * (-4.0 * d.ln() - 8.0 * (1.0 - d) + 2.5 * (1.0 - d * d) - (1.0 - d * d * d) / 3.0)
}

/// Surface area of the unit sphere in `R^n` by the recursion
/// `A_1 = 2, A_2 = 2 pi, A_{n+2} = 2 pi A_n / n`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(n - 2) / (n as f64 - 2.0),
    }
}

/// Riemannian (Klein) stiffness assembly on the P1 mesh of `grid`:
/// `K_ij = int (1 - r^2)^2 phi_i' phi_j' dV_{h_K}`, coded from scratch as a
/// dense matrix.
pub fn klein_stiffness(grid: &RadialGrid, n: usize) -> Vec<Vec<f64>> {
    let breaks = grid.breaks();
    let m = breaks.len() - 1;
    let mut k = vec![vec![0.0; m]; m];
    let area = sphere_area(n);
    let per = grid.per_panel();
    for e in 0..m {
        let h = breaks[e + 1] - breaks[e];
        let mut c = 0.0;
        for q in e * per..(e + 1) * per {
            let r = grid.nodes()[q];
            let w = grid.weights()[q];
            let density = 1.0 / (1.0 - r * r).powf(0.5 * (n as f64 + 1.0));
            c += w * area * r.powi(n as i32 - 1) * density * (1.0 - r * r).powi(2) / (h * h);
        }
        // phi_e' = -1/h, phi_{e+1}' = 1/h on element e
        k[e][e] += c;
        if e + 1 < m {
            k[e + 1][e + 1] += c;
            k[e][e + 1] -= c;
            k[e + 1][e] -= c;
        }
    }
    k
}

/// `lambda int kappa g(u) phi_i dV` with `u` interpolated linearly on each element.
pub fn klein_load<G: Fn(f64) -> f64, K: Fn(f64) -> f64>(
    grid: &RadialGrid,
    n: usize,
    u: &[f64],
    lambda: f64,
    kappa: K,
    g: G,
) -> Vec<f64> {
    let breaks = grid.breaks();
    let m = breaks.len() - 1;
    let area = sphere_area(n);
    let per = grid.per_panel();
    let mut load = vec![0.0; m];
    let node = |i: usize| if i < m { u[i] } else { 0.0 };
    for e in 0..m {
        let h = breaks[e + 1] - breaks[e];
        for q in e * per..(e + 1) * per {
            let r = grid.nodes()[q];
            let w = grid.weights()[q];
            let xi = (r - breaks[e]) / h;
            let val = node(e) * (1.0 - xi) + node(e + 1) * xi;
            let density = 1.0 / (1.0 - r * r).powf(0.5 * (n as f64 + 1.0));
            let f = lambda * w * area * r.powi(n as i32 - 1) * density * kappa(r) * g(val);
            load[e] += f * (1.0 - xi);
            if e + 1 < m {
                load[e + 1] += f * xi;
            }
        }
    }
    load
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// The default weight, restated.
pub fn kappa_default(r: f64) -> f64 {
    let d = 0.25 - r * r;
    if d > 0.0 {
        (-1.0 / d).exp()
    } else {
        0.0
    }
}

/// The default nonlinearity, restated.
pub fn g_default(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        s * s / (1.0 + s.powf(1.5))
    }
}
