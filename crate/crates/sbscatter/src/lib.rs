//! Complex-dilated spin-boson models: resonances, one-photon transition amplitudes,
//! infrared-cutoff ladders, and contour-integral dynamics, with numerical cross-checks.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod multiscale;
pub mod output;
pub mod quad;
pub mod scattering;
pub mod spectral;
pub mod studies;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
