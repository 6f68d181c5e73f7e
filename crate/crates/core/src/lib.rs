//! Multi-objective Bayesian optimization by adaptive ε-constraint gap filling.
//!
//! Each iteration draws one Thompson sample per objective from independent
//! Gaussian-process posteriors, solves the cheap sampled problem with NSGA-II,
//! picks the point of the sampled front that is farthest from every
//! observation, and turns its coordinates into ε-constraint thresholds. The
//! resulting single-objective constrained subproblem is solved with
//! constrained expected improvement.
//!
//! Modules:
//! * [`problems`] benchmark problems (maximization convention) and reference fronts
//! * [`surrogate`] Matérn-5/2 GP regression and random-feature posterior paths
//! * [`evo`] NSGA-II with constraint domination
//! * [`metrics`] hypervolume, IGD, IGD+, fill distance, feasible ratio
//! * [`acquisition`] constrained expected improvement and its maximizer
//! * [`stage`] the outer optimization loop

pub mod acquisition;
pub mod design;
mod error;
pub mod evo;
pub mod metrics;
pub mod normal;
pub mod par;
pub mod problems;
pub mod stage;
pub mod surrogate;

pub use error::{Error, Result};
