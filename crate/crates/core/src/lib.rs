//! Dynamics of finite-order transcendental self-maps of the punctured plane
//! f(z) = z^n·exp(P(z) + Q(1/z)): logarithmic coordinates, symbolic dynamics,
//! dynamic rays and escape-time classification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod error;
pub mod escape;
pub mod logspace;
pub mod map_core;
pub mod poly;
pub mod rays;
pub mod symbolic;

pub use error::{Error, Result};
pub use num_complex::Complex64;
