//! Conformal Ricci flow on symmetry-reduced geometries.
//!
//! Rotationally symmetric asymptotically flat metrics and left-invariant
//! metrics on a compact 3-dimensional group are evolved by conformal Ricci
//! flow, its DeTurck-gauged form, or plain Ricci flow. The conformal pressure
//! is recomputed at every Runge-Kutta stage, and the [`diagnostics`] module
//! checks the conservation and monotonicity identities along trajectories.

pub mod band;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod initial;
pub mod pressure;

pub use error::{Error, Result};
pub use geometry::*;
pub use initial::{GridSpec, InitialData};
pub use flow::{
    cfl_time_step, crf_rhs, dtcrf_rhs, flow_rhs, gauge_pullback, ricci_rhs, run_flow, FlowConfig, FlowKind, FlowState,
    FlowTrajectory, GeometryKind, ReferenceMetric, Termination,
};
pub use pressure::{
    invertibility_estimate, pressure_homogeneous, project_scalar_curvature, solve_pressure_radial, InvertibilityReport,
    PressureField, PressureStatus,
};
