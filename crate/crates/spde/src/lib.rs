//! Semilinear parabolic SPDE solvers on the unit interval with coupled-path
//! convergence studies.
//!
//! Two spatial discretizations of
//! `dU = A U dt + F(t,U) dt + G(t,U) dW(t)` with homogeneous Dirichlet
//! conditions are provided: a spectral Galerkin truncation onto the sine
//! eigenbasis ([`spectral`]) and piecewise-linear finite elements ([`fem`]).
//! Driving noise is cylindrical or Q-Wiener, sampled from counter-based
//! streams keyed by `(seed, path, mode, step)` so that every truncation level
//! consumes the identical Brownian increments ([`noise`], [`streams`]). The
//! [`harness`] module runs multi-level experiments: coupled-path error decay,
//! empirical order fitting, pathwise constants, resolvent/elliptic defect
//! tables, and ball-cutoff localization studies.

pub mod cli;
pub mod dst;
pub mod error;
pub mod fem;
pub mod grid;
pub mod harness;
pub mod initial;
pub mod io;
pub mod modes;
pub mod noise;
pub mod nonlin;
pub mod spectral;
pub mod streams;

pub use error::{Result, SpdeError};
pub use grid::TimeGrid;
pub use initial::InitialCondition;
pub use modes::{fractional_norm, resolvent_shift, ModeVector};
pub use noise::{
    check_refinement_consistency, sample_increments, GenMode, IncrementTable, NoiseBasisSpec,
    NoiseKind,
};
pub use nonlin::{
    apply_drift, cutoff, first_exit_step, CutoffContext, CutoffLevel, DiffusionSpec, DriftSpec,
    LipschitzKind, ScalarFn,
};
pub use streams::{derive_stream, NormalStream, StreamKey, StreamTag};
