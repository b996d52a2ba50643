//! Weighted sub-fractional covariance kernels and the particle systems whose
//! occupation-time fluctuations converge to them.
//!
//! The crate is `no_std` with `alloc`. Everything here is deterministic given
//! a seed; parallel drivers, file formats and the command line live in the
//! companion `wsfbm` crate.
//!
//! Layout:
//! - [`kernels`]: the kernel family `Q_{a,b}`, its logarithmic boundary case,
//!   sub-fractional and weighted fractional kernels, and limit constants.
//! - [`gp`]: Gram matrices, Cholesky factorization with jitter, path sampling
//!   and ensemble statistics.
//! - [`simulate`]: stable motion, lifetime laws, renewal functions and the
//!   critical binary branching particle system.
//! - [`analysis`]: checks of positive-definiteness regions, long-range
//!   dependence, non-Markovianity and rescaled increment limits.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod gp;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
pub use quadrature::QuadratureSpec;
