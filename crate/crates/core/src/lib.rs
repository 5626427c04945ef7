//! Random geometric complexes over stationary point processes.

pub mod cli;
pub mod complexes;
pub mod error;
pub mod experiments;
pub mod geograph;
pub mod geometry;
pub mod grid;
pub mod homology;
pub mod limits;
pub mod morse;
pub mod par;
pub mod pointproc;
pub mod stats;

pub use error::{Error, Result};
