//! Independent per-output Gaussian-process surrogates.
//!
//! Inputs are rescaled to the unit cube and targets standardized before any
//! kernel computation; every public value (means, variances, path outputs)
//! is reported in the caller's original units.

mod gp;
mod kernel;
mod optimize;
mod rff;

pub use gp::{FitOptions, GpModel, Hyperparameters};
pub use kernel::Matern52;
pub use rff::{sample_path, sample_prior_path, SampledPath};
