//! Free Fisher information and free entropy for compactly supported
//! measures, R-diagonal moment calculus and conjugate-variable verification.

pub mod conjugates;
pub mod engine;
pub mod error;
pub mod functionals;
pub mod measures;
pub mod ncpartitions;
pub mod quadrature;
pub mod rmt;
pub mod scalar;
pub mod suites;

pub use error::{Error, Result};
pub use measures::{CompactMeasure, MomentSequence};
