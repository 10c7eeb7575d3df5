//! Radial variational solver for `-div_F(grad_F u) = lambda kappa g(u)` on the
//! ball with `u -> 0` at the boundary.
//!
//! Radial functions are discretized by continuous piecewise-linear elements on
//! a mesh clustered at both ends of `[0, R_max]`. Below the threshold of
//! [`nonexistence_threshold`] only `u = 0` solves the problem; far above it a
//! global minimizer with negative energy and a mountain-pass critical point
//! with positive energy coexist.

pub mod energy;
pub mod linalg;
pub mod minimize;
pub mod mountain_pass;
pub mod problem;
pub mod scan;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FunkError, Result};
use crate::quadrature::{QuadratureConfig, RadialGrid, Scheme};

pub use energy::{
    discrete_gradient, energy_e, finite_difference_gradient, g_functional, h12_gram, j_lambda, radial_fstar,
    DiscreteGradient, EnergyModel,
};
pub use linalg::Tridiagonal;
pub use minimize::{minimize, tilde_lambda_estimate, MinimizeOutcome, TildeLambda, TrialFamily};
pub use mountain_pass::{mountain_pass, MountainPassOutcome};
pub use problem::{
    compute_cg, nonexistence_threshold, threshold_from_constants, CgWindow, Nonlinearity, WeightKappa,
};
pub use scan::{
    lambda_scan, lambda_scan_with, log_schedule, random_inits, solve, solve_with, subquadraticity_diagnostic,
    Classification, LambdaScanReport, ScanEntry, Setup, SolutionRecord, SolveReport, SubquadraticityRow,
    NONNEGATIVITY_SLACK,
};

/// Discretization, tolerances and seeds of the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Finite elements on `[0, R_max]`.
    pub elements: usize,
    /// Gauss points per element.
    pub gauss_points: usize,
    pub r_max: f64,
    /// Certification tolerance on the weak residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Interior nodes of the mountain-pass path.
    pub path_nodes: usize,
    /// Sweeps between re-equidistributions of the path.
    pub reparam_every: usize,
    pub max_sweeps: usize,
    /// Relative residual at which the path's top node is handed to Newton.
    pub handoff: f64,
    /// Random initial guesses per minimization.
    pub random_inits: usize,
    pub seed: u64,
    /// Relative `H^1_2` separation required between the two solutions.
    pub separation: f64,
    /// `H^1_2` norm below which a solution counts as zero.
    pub zero_norm: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            elements: 160,
            gauss_points: 6,
            r_max: 1.0 - 1e-6,
            tol: 1e-8,
            max_iter: 500,
            path_nodes: 32,
            reparam_every: 10,
            max_sweeps: 4000,
            handoff: 1e-3,
            random_inits: 8,
            seed: 0xf00d_ba11,
            separation: 1e-4,
            zero_norm: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol", self.tol),
            ("handoff", self.handoff),
            ("separation", self.separation),
            ("zero_norm", self.zero_norm),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FunkError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.elements < 4 || self.gauss_points < 2 {
            return Err(FunkError::Config("mesh needs at least 4 elements and 2 Gauss points".into()));
        }
        if self.path_nodes < 3 || self.reparam_every == 0 {
            return Err(FunkError::Config("path needs at least 3 nodes and a positive reparametrization period".into()));
        }
        if self.max_iter == 0 || self.max_sweeps == 0 {
            return Err(FunkError::Config("iteration limits must be positive".into()));
        }
        self.quadrature().validate()
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            nodes_per_panel: self.gauss_points,
            r_max: self.r_max,
            scheme: Scheme::Clustered { elements: self.elements },
            breakpoints: Vec::new(),
        }
    }

    pub fn mesh(&self) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::new(&self.quadrature())?))
    }

    /// Same settings on a mesh with twice as many elements.
    pub fn refined(&self) -> Self {
        Self {
            elements: 2 * self.elements,
            ..self.clone()
        }
    }
}
