//! Spectral form factor statistics for the circular (CUE) and Gaussian (GUE)
//! unitary ensembles.
//!
//! The crate has no `std` dependency; it needs only an allocator. It covers
//! sampling the two ensembles, their eigenvalue problems, a batched Monte-Carlo
//! moment estimator, closed-form predictions for the first two moments of the
//! form factor, the sine-kernel box-convolution rules and the supersymmetric
//! saddle-point expressions for the second moment.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analytics;
mod dd;
pub mod ensembles;
mod error;
pub mod estimator;
pub mod linalg;
mod math;
pub mod rng;
pub mod saddle;
pub mod sine_kernel;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;
