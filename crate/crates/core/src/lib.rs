//! Finite-dimensional quantum probability kernels.
//!
//! The crate is `no_std` (with `alloc`) and contains the pure numerical core:
//! dense operators and densities with the projector lattice, the matrix Itô
//! algebra, instantaneous measurement models, time-continuous stochastic
//! decoherence and filtering equations, the grid filter for continuously
//! observed position, and the closed-form collapse of an observed free
//! particle. File formats, the command line and parallel ensemble runners
//! live in the `qfilter` crate.

#![no_std]
// Float math resolves through `num_traits::Float` (libm). Builds that link
// std see the inherent methods first, hence the per-import allows.
// Guards are written `!(x > 0.0)` so that NaN is rejected as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod fft;
pub mod filter;
pub mod ito;
pub mod lattice;
pub mod linalg;
pub mod measurement;
pub mod operator;
pub mod oscillator;
pub mod particle;
pub mod position;
pub mod rng;

pub use num_complex::Complex64 as C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use operator::{DensityOperator, Operator, StateVector, Tolerance};
