//! Pre- and post-selected quantum scenarios: ABL probabilities, logical
//! paradox certification, operator algebras and causal circuit analysis.

pub mod algebra;
pub mod boolean;
pub mod builtin;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod files;
pub mod matrix;
pub mod random;
pub mod report;
pub mod scenario;

pub use error::{Error, Result};
pub use matrix::{Cplx, Mat, Projector, StateVec, Tol};
pub use scenario::{Generator, PpsScenario};
