//! Lipschitz matrix estimation and its applications.
//!
//! A Lipschitz matrix L generalizes the scalar Lipschitz constant by bounding
//! function variation in a reshaped metric: |f(x1) - f(x2)| <= ||L(x1 - x2)||.
//! This crate estimates the squared Lipschitz matrix H = L^T L from samples
//! and/or gradients by trace-minimization semidefinite programming, and builds
//! on it for:
//!
//! - pointwise and set-valued uncertainty bounds ([`uncertainty`]),
//! - sequential maximin space-filling designs ([`design`]),
//! - active-subspace dimension reduction ([`reduction`]),
//! - covering-number and volume complexity analysis ([`complexity`]).
//!
//! [`testfns`] supplies the benchmark functions with analytic gradients these
//! pipelines are exercised on, and [`geometry`] / [`solvers`] provide the
//! polytope primitives and dense LP/SDP kernels underneath.

pub mod complexity;
pub mod design;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod lipschitz;
pub mod reduction;
pub mod rng;
pub mod solvers;
pub mod testfns;
pub mod uncertainty;

pub use geometry::{Domain, PointSet};
pub use lipschitz::{LipschitzMatrix, SampleSet};
pub use solvers::{SolveReport, SolveStatus};
pub use uncertainty::{MinimaxConfig, UncertaintyInterval};

/// Schema version stamped into every JSON artifact the CLI writes.
pub const SCHEMA_VERSION: &str = "1";
