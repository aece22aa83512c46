//! Text-independent closed-set speaker identification with second-order
//! statistical measures over covariance models of log mel filterbank
//! features.
//!
//! The pipeline runs [`frontend`] (PCM to 24-dimensional log filterbank
//! vectors), [`model`] (mean/covariance estimation and SPD algebra),
//! [`measures`] (the three symmetrized measures), and [`identification`]
//! (argmin over a speaker registry). [`phonetic`] and [`harness`] implement
//! the utterance-duration and phonetic-content experiment protocols, and
//! [`synth`] generates Gaussian speakers with known parameters.

pub mod corpus;
pub mod error;
pub mod frames;
pub mod frontend;
pub mod harness;
pub mod identification;
pub mod measures;
pub mod model;
pub mod phonetic;
pub mod synth;

pub use error::{Error, Result};
pub use frames::FrameSequence;
pub use measures::{Measure, MeasureKind, ScConvention};
pub use model::{FactorizedModel, GaussianModel, ModelAccumulator};
