//! Generalized LU (GLU) randomized low-rank approximation and its relatives,
//! with numerical checks of their deterministic bounds.

pub mod bounds;
pub mod error;
pub mod factor;
pub mod growth;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod sketch;

pub use error::{Error, Result};
pub use linalg::Matrix;
