//! Gray-soliton Bogoliubov theory and NLSE numerics on a periodic ring.
//!
//! Lengths are in healing lengths, speeds in units of the healing speed,
//! and the asymptotic density is `mu = c²`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod evolve;
pub mod measure;
pub mod ring;
pub mod spectral;
pub mod synthesis;

pub use error::{Error, Result};
pub use num_complex::Complex64;
