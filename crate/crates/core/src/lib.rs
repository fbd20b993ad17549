//! Simulation and numerical verification of the Vervaat transform of
//! Brownian bridges and Brownian motion.
//!
//! The crate is organized bottom-up:
//!
//! * [`path`] holds grid paths and the deterministic transforms.
//! * [`samplers`] draws exact grid skeletons of the processes involved.
//! * [`analytic`] evaluates densities, kernels and drifts.
//! * [`numerics`] provides quadrature, special functions and test statistics.
//! * [`verify`] turns each statement into a reproducible pass/fail experiment.

pub mod analytic;
pub mod error;
pub mod numerics;
pub mod path;
pub mod samplers;
pub mod verify;

pub use error::{Error, Result};
pub use path::{PathGrid, SplitKind, SplitRecord};
