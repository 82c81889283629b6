//! Learned-model declipping: dictionary learning with consistent sparse
//! coding, and a low-rank NMF spectral model with Wiener reconstruction.

pub mod dict;
pub mod nmf;

pub use dict::{dl_declip, DlParams};
pub use nmf::{nmf_declip, NmfParams};
