//! Predictors trained together with locally fitted transparent witnesses.
//!
//! A *predictor* `f` is any model (free per-anchor values, an MLP, a windowed
//! sequence model). A *witness* `g` is drawn from a transparent family
//! (constant, linear, ridge, depth-bounded tree, autoregressive) and is fitted
//! per neighborhood as the best response to `f`. The crate provides:
//!
//! - [`dataset`], [`neighborhood`], [`deviation`]: the data model, neighborhood
//!   systems with assumption checks, and local deviation functions.
//! - [`witness`]: best-response fitting for every witness family.
//! - [`game`]: the uniform (δ-margin), symmetric, asymmetric and adjusted
//!   symmetric training criteria with alternating updates.
//! - [`equilibrium`]: closed-form fixed-point solvers and residual checks for
//!   tabular predictors with linear or constant witnesses.
//! - [`predictor`]: tabular, piecewise-linear, MLP and sequence predictors.
//! - [`metrics`]: generalized AUC, deviation RMSE, witness-parameter total
//!   variation, and effective-neighborhood-size verification.
//! - [`experiment`]: synthetic generators, CSV and JSON I/O, SVG plots and the
//!   config-driven experiment runner behind the `transparency-game` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod dataset;
pub mod deviation;
pub mod equilibrium;
pub mod error;
pub mod experiment;
pub mod game;
pub mod linalg;
pub mod metrics;
pub mod neighborhood;
pub mod predictor;
pub mod witness;

pub use dataset::{Dataset, FeatureKind};
pub use deviation::{local_deviation, DeviationFn};
pub use error::{Error, Result};
pub use neighborhood::{verify_assumptions, AssumptionReport, NeighborhoodKind, NeighborhoodSystem};
pub use witness::{WitnessFamily, WitnessFit, WitnessParams};
