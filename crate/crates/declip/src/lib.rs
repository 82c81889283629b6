//! Audio declipping: degradation model, sparsity-based and statistical
//! restoration methods, and a benchmark harness.

pub mod error;
pub mod frames;
pub mod harness;
pub mod janssen;
pub mod l1;
pub mod learned;
pub mod omp;
pub mod shrinkage;
pub mod signal;
pub mod social;
pub mod spade;
pub mod wav;

pub use error::{DeclipError, Result};
