//! Asymptotically flat initial data for the S¹-symmetric vacuum Einstein
//! equations, built by solving the coupled momentum and Lichnerowicz
//! constraints on ℝ² with a Picard iteration.
//!
//! Fields are truncated Fourier series in θ sampled on a radial grid that is
//! uniform in `s = ln(1 + r)`. Every singular `1/r` profile the construction
//! needs is carried in closed form; only decaying remainders are discretized.

pub mod cli;
pub mod elliptic;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod lichnerowicz;
pub mod momentum;
pub mod picard;

pub use error::{Error, Result};
