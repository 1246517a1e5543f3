//! Time-domain Maxwell solvers for Havriliak-Negami dispersive media.
//!
//! The crate is `no_std` (with `alloc`) and holds only numerics:
//! Prabhakar kernels and convolution weights, the backward-Euler
//! convolution stepper, the fast history ladder, a Legendre-Galerkin
//! 2D backend, a 1D FDTD backend and frequency-domain recovery.
#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

mod error;
pub mod fastconv;
pub mod fdtd1d;
pub mod prabhakar;
pub mod recovery;
pub mod spectral2d;
pub mod timestepper;

pub use error::{Error, Result};
pub use num_complex::Complex64;
