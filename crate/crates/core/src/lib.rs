//! Numerical geometric tomography: the spherical Radon (Funk) transform and
//! its inverses, parallel-section volumes, intersection-body testers and a
//! Busemann–Petty experiment harness.

pub mod bodies;
pub mod bodyspec;
pub mod bpharness;
pub mod cli;
pub mod error;
pub mod export;
pub mod gauss;
pub mod intersect;
pub mod linalg;
pub mod optim;
pub mod radon;
pub mod sections;
pub mod spherequad;

pub use error::{Error, Result};
