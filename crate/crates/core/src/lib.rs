//! Funk-type Randers metrics `F_a` on the unit ball, the Sobolev spaces they
//! induce, and a radial solver for the sublinear problem
//!
//! ```text
//!   -div_{F_a}(grad_{F_a} u) = lambda kappa(|x|) g(u),   u -> 0 at |x| -> 1.
//! ```
//!
//! `a = 0` is the Klein model of hyperbolic space, `a = 1` the Funk metric;
//! in between `F_a` is a non-reversible Randers metric with bounded
//! reversibility. Modules:
//!
//! * [`finsler`]: the metric, its polar transform, Legendre map, constants and
//!   the Funk distance, plus brute-force oracles for checking them;
//! * [`quadrature`]: radial integration against the singular volume densities;
//! * [`sobolev`]: `W^{1,2,a}` norms and the `a = 1` counterexample;
//! * [`solver`]: energy assembly, minimization, mountain pass and `lambda` scans.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod finsler;
pub mod quadrature;
pub mod radial;
pub mod report;
pub mod sobolev;
pub mod solver;

pub use error::{FunkError, Result};
pub use finsler::{BallPoint, CoVec, ModelParams, TanVec};
pub use quadrature::{Measure, QuadratureConfig, RadialGrid, Scheme};
pub use radial::{BumpProfile, CounterexampleProfile, RadialFunction, RadialProfile};
pub use sobolev::NormReport;
pub use solver::{
    Classification, EnergyModel, LambdaScanReport, Nonlinearity, SolveReport, SolverConfig, WeightKappa,
};
