//! Numerical tools for a degenerate quotient metric on the strip ℝ × [0, π].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod error;
pub mod export;
pub mod geodesics;
pub mod metrics;
pub mod morse;
pub mod ode;
pub mod plot;
pub mod quadrature;
pub mod shooting;

pub use error::{GeoError, Result};
pub use geodesics::{GeodesicState, PhiState, Trajectory};
pub use metrics::{
    gaussian_curvature, ricci_diagonal, validate_profile, LambdaProfile, SurfaceMetric,
    ValidationReport,
};
