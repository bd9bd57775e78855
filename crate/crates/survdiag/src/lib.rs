//! Diagnostics for censored failure-time regression models: AFT and Cox
//! model fitting, the classical and randomized survival-probability
//! residual families, goodness-of-fit tests, and a Monte Carlo harness
//! for calibration and power studies.

pub mod aft;
pub mod coxph;
pub mod data;
pub mod dist;
pub mod error;
pub mod gof;
pub mod linalg;
pub mod nonparam;
pub mod residuals;
pub mod rng;
pub mod simlab;

pub use error::{Error, Result};
