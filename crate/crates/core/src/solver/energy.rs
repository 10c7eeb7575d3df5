//! Energy `J_lambda = E/2 - lambda G` on radial functions and its exact
//! discrete gradient and Hessian.
//!
//! For a radial `u` with `Du = u'(r) x / r` the polar transform collapses to
//!
//! ```text
//!   F_a^*(x, Du) = (1 - r^2)(|u'| - a r u') / (1 - a^2 r^2)
//! ```
//!
//! so `F^{*2}/2 = c(r)^2 u'^2 (sign(u') - a r)^2 / 2` with
//! `c = (1 - r^2) / (1 - a^2 r^2)`. That is `C^1` in `u'` with a zero derivative
//! at `u' = 0`, so the gradient needs no subgradient selection; only the
//! Hessian jumps there.

use std::sync::Arc;

use crate::error::{finite, FunkError, Result};
use crate::finsler::ModelParams;
use crate::quadrature::{Measure, RadialGrid};
use crate::radial::RadialFunction;

use super::linalg::Tridiagonal;
use super::problem::{Nonlinearity, WeightKappa};

/// `F_a^*(x, u'(r) x / r)` at radius `r`.
pub fn radial_fstar(params: &ModelParams, r: f64, du: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(FunkError::OutsideBall(r));
    }
    let a = params.a();
    Ok(((1.0 - r * r) * (du.abs() - a * r * du) / (1.0 - a * a * r * r)).max(0.0))
}

fn fstar_unchecked(a: f64, r: f64, du: f64) -> f64 {
    (1.0 - r * r) * (du.abs() - a * r * du) / (1.0 - a * a * r * r)
}

/// `E(u) = int F_a^{*2}(x, Du) dV_{F_a}`.
pub fn energy_e(u: &RadialFunction, params: &ModelParams) -> Result<f64> {
    params.require_subfunk()?;
    energy_unchecked(u, params)
}

pub(crate) fn energy_unchecked(u: &RadialFunction, params: &ModelParams) -> Result<f64> {
    let grid = u.grid();
    let weights = grid.measure_weights(params, Measure::Finsler);
    let a = params.a();
    let sum: f64 = grid
        .nodes()
        .iter()
        .zip(u.slopes())
        .zip(&weights)
        .map(|((&r, &du), &w)| w * fstar_unchecked(a, r, du).powi(2))
        .sum();
    finite(sum, "energy")
}

/// `G(u) = int kappa G(u) dV_{F_a}`.
pub fn g_functional(u: &RadialFunction, params: &ModelParams, kappa: &WeightKappa, nl: &Nonlinearity) -> Result<f64> {
    params.require_subfunk()?;
    let grid = u.grid();
    let weights = grid.measure_weights(params, Measure::Finsler);
    let sum: f64 = grid
        .nodes()
        .iter()
        .zip(u.values())
        .zip(&weights)
        .map(|((&r, &v), &w)| w * kappa.value(r) * nl.big_g(v))
        .sum();
    finite(sum, "G functional")
}

/// `J_lambda(u) = E(u)/2 - lambda G(u)`.
pub fn j_lambda(
    u: &RadialFunction,
    lambda: f64,
    params: &ModelParams,
    kappa: &WeightKappa,
    nl: &Nonlinearity,
) -> Result<f64> {
    Ok(0.5 * energy_e(u, params)? - lambda * g_functional(u, params, kappa, nl)?)
}

/// Discretized problem on a piecewise-linear mesh with precomputed quadrature
/// data. Vectors passed to its methods hold the free nodal values
/// `u_0 .. u_{M-1}`; `u_M = 0` is implicit.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    params: ModelParams,
    kappa: WeightKappa,
    nl: Nonlinearity,
    grid: Arc<RadialGrid>,
    /// Finsler measure weight per quadrature node.
    mw: Vec<f64>,
    /// `mw * kappa`.
    kw: Vec<f64>,
    /// `((1 - r^2) / (1 - a^2 r^2))^2`.
    c2: Vec<f64>,
    ar: Vec<f64>,
    /// Local panel coordinate in `[0, 1]`.
    xi: Vec<f64>,
    h: Vec<f64>,
    gram: Tridiagonal,
}

impl EnergyModel {
    pub fn new(params: ModelParams, kappa: WeightKappa, nl: Nonlinearity, grid: Arc<RadialGrid>) -> Result<Self> {
        params.require_subfunk()?;
        let a = params.a();
        let breaks = grid.breaks();
        let mw = grid.measure_weights(&params, Measure::Finsler);
        let kw = grid.nodes().iter().zip(&mw).map(|(&r, &w)| w * kappa.value(r)).collect();
        let c2 = grid
            .nodes()
            .iter()
            .map(|&r| ((1.0 - r * r) / (1.0 - a * a * r * r)).powi(2))
            .collect();
        let ar = grid.nodes().iter().map(|&r| a * r).collect();
        let xi = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(q, &r)| {
                let e = grid.panel_of(q);
                (r - breaks[e]) / (breaks[e + 1] - breaks[e])
            })
            .collect();
        let h = breaks.windows(2).map(|w| w[1] - w[0]).collect();
        let gram = h12_gram(&params, &grid);
        Ok(Self {
            params,
            kappa,
            nl,
            grid,
            mw,
            kw,
            c2,
            ar,
            xi,
            h,
            gram,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn kappa(&self) -> &WeightKappa {
        &self.kappa
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nl
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Number of free nodal values.
    pub fn dim(&self) -> usize {
        self.grid.panels()
    }

    /// Gram matrix of the discrete `H^1_2` inner product.
    pub fn gram(&self) -> &Tridiagonal {
        &self.gram
    }

    #[inline]
    fn node(u: &[f64], i: usize) -> f64 {
        if i < u.len() {
            u[i]
        } else {
            0.0
        }
    }

    #[inline]
    fn slope(&self, u: &[f64], e: usize) -> f64 {
        (Self::node(u, e + 1) - u[e]) / self.h[e]
    }

    #[inline]
    fn value_at(&self, u: &[f64], q: usize, e: usize) -> f64 {
        let xi = self.xi[q];
        u[e] * (1.0 - xi) + Self::node(u, e + 1) * xi
    }

    fn check(&self, u: &[f64]) {
        assert_eq!(u.len(), self.dim(), "nodal vector has the wrong length");
    }

    /// `E(u)` on nodal values.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.check(u);
        let k = self.grid.per_panel();
        let mut sum = 0.0;
        for e in 0..self.dim() {
            let s = self.slope(u, e);
            let sigma = s.signum();
            for q in e * k..(e + 1) * k {
                let m = sigma - self.ar[q];
                sum += self.mw[q] * self.c2[q] * s * s * m * m;
            }
        }
        sum
    }

    /// `G(u)` on nodal values.
    pub fn g_functional(&self, u: &[f64]) -> f64 {
        self.check(u);
        let k = self.grid.per_panel();
        let mut sum = 0.0;
        for e in 0..self.dim() {
            for q in e * k..(e + 1) * k {
                if self.kw[q] != 0.0 {
                    sum += self.kw[q] * self.nl.big_g(self.value_at(u, q, e));
                }
            }
        }
        sum
    }

    pub fn j(&self, u: &[f64], lambda: f64) -> f64 {
        0.5 * self.energy(u) - lambda * self.g_functional(u)
    }

    /// Exact gradient of the discrete `J_lambda` with respect to the free nodal values.
    pub fn gradient(&self, u: &[f64], lambda: f64) -> Vec<f64> {
        self.check(u);
        let m = self.dim();
        let k = self.grid.per_panel();
        let mut grad = vec![0.0; m];
        for e in 0..m {
            let s = self.slope(u, e);
            let sigma = s.signum();
            let mut flux = 0.0;
            let mut load_left = 0.0;
            let mut load_right = 0.0;
            for q in e * k..(e + 1) * k {
                let mm = sigma - self.ar[q];
                flux += self.mw[q] * self.c2[q] * s * mm * mm;
                if self.kw[q] != 0.0 {
                    let gq = self.kw[q] * self.nl.g(self.value_at(u, q, e));
                    load_left += gq * (1.0 - self.xi[q]);
                    load_right += gq * self.xi[q];
                }
            }
            let h = self.h[e];
            grad[e] += -flux / h - lambda * load_left;
            if e + 1 < m {
                grad[e + 1] += flux / h - lambda * load_right;
            }
        }
        grad
    }

    /// Hessian of the discrete `J_lambda`. At a panel with zero slope the
    /// one-sided curvature of a decreasing profile is used.
    pub fn hessian(&self, u: &[f64], lambda: f64) -> Tridiagonal {
        self.check(u);
        let m = self.dim();
        let k = self.grid.per_panel();
        let mut hess = Tridiagonal::zeros(m);
        for e in 0..m {
            let s = self.slope(u, e);
            let sigma = if s > 0.0 { 1.0 } else { -1.0 };
            let mut stiff = 0.0;
            let (mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0);
            for q in e * k..(e + 1) * k {
                let mm = sigma - self.ar[q];
                stiff += self.mw[q] * self.c2[q] * mm * mm;
                if self.kw[q] != 0.0 {
                    let d = self.kw[q] * self.nl.dg(self.value_at(u, q, e));
                    let xi = self.xi[q];
                    m00 += d * (1.0 - xi) * (1.0 - xi);
                    m01 += d * (1.0 - xi) * xi;
                    m11 += d * xi * xi;
                }
            }
            let h2 = self.h[e] * self.h[e];
            hess.add(e, e, stiff / h2 - lambda * m00);
            if e + 1 < m {
                hess.add(e, e + 1, -stiff / h2 - lambda * m01);
                hess.add(e + 1, e, -stiff / h2 - lambda * m01);
                hess.add(e + 1, e + 1, stiff / h2 - lambda * m11);
            }
        }
        hess
    }

    /// Discrete `||u||_{H^1_2}`.
    pub fn h12_norm(&self, u: &[f64]) -> f64 {
        self.check(u);
        let au = self.gram.mul_vec(u);
        au.iter().zip(u).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    }

    /// Riesz representative `A^{-1} g` of a gradient in the `H^1_2` inner product.
    pub fn riesz(&self, g: &[f64]) -> Vec<f64> {
        self.gram.solve_spd(g)
    }

    /// Dual norm `sqrt(g^T A^{-1} g)`: the weak-form residual measured in `(H^1_2)^*`.
    pub fn dual_norm(&self, g: &[f64]) -> f64 {
        let d = self.riesz(g);
        d.iter().zip(g).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    }

    /// Weak-form residual `||J'_lambda(u)||_*`.
    pub fn residual(&self, u: &[f64], lambda: f64) -> f64 {
        self.dual_norm(&self.gradient(u, lambda))
    }

    /// `(H^1_2)` inner product `<u, v>_A`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.gram.mul_vec(u).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Wraps nodal values as a [`RadialFunction`].
    pub fn function(&self, u: &[f64]) -> Result<RadialFunction> {
        RadialFunction::from_free(Arc::clone(&self.grid), u)
    }

    /// Nodal interpolant of `f` (boundary value dropped).
    pub fn interpolate<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        let breaks = self.grid.breaks();
        breaks[..breaks.len() - 1].iter().map(|&r| f(r)).collect()
    }
}

/// Gradient of the discrete `J_lambda` together with the elements where the
/// slope vanishes while `a > 0` (the kink of `|u'|`, where the selection 0 is used).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGradient {
    pub gradient: Vec<f64>,
    pub kinks: Vec<usize>,
}

pub fn discrete_gradient(model: &EnergyModel, u: &[f64], lambda: f64) -> DiscreteGradient {
    let kinks = if model.params().a() > 0.0 {
        (0..model.dim()).filter(|&e| model.slope(u, e) == 0.0).collect()
    } else {
        Vec::new()
    };
    DiscreteGradient {
        gradient: model.gradient(u, lambda),
        kinks,
    }
}

/// Central differences of `J_lambda` with relative step `step`; a diagnostic
/// for [`EnergyModel::gradient`].
pub fn finite_difference_gradient(model: &EnergyModel, u: &[f64], lambda: f64, step: f64) -> Vec<f64> {
    let mut w = u.to_vec();
    (0..u.len())
        .map(|i| {
            let h = step * (1.0 + u[i].abs());
            w[i] = u[i] + h;
            let jp = model.j(&w, lambda);
            w[i] = u[i] - h;
            let jm = model.j(&w, lambda);
            w[i] = u[i];
            (jp - jm) / (2.0 * h)
        })
        .collect()
}

/// Tridiagonal Gram matrix of `int (h_K^*(Du, Du) + u^2) dV_{h_K}` on the free
/// nodal basis.
pub fn h12_gram(params: &ModelParams, grid: &RadialGrid) -> Tridiagonal {
    let m = grid.panels();
    let k = grid.per_panel();
    let breaks = grid.breaks();
    let kw = grid.measure_weights(params, Measure::Klein);
    let mut gram = Tridiagonal::zeros(m);
    for e in 0..m {
        let h = breaks[e + 1] - breaks[e];
        let (mut stiff, mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0, 0.0);
        let span = e * k..(e + 1) * k;
        for (&r, &w) in grid.nodes()[span.clone()].iter().zip(&kw[span]) {
            let xi = (r - breaks[e]) / h;
            stiff += w * (1.0 - r * r).powi(2);
            m00 += w * (1.0 - xi) * (1.0 - xi);
            m01 += w * (1.0 - xi) * xi;
            m11 += w * xi * xi;
        }
        let h2 = h * h;
        gram.add(e, e, stiff / h2 + m00);
        if e + 1 < m {
            gram.add(e, e + 1, -stiff / h2 + m01);
            gram.add(e + 1, e, -stiff / h2 + m01);
            gram.add(e + 1, e + 1, stiff / h2 + m11);
        }
    }
    gram
}
