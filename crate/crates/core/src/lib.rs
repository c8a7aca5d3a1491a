//! Robust adaptive beamforming by maximum-entropy covariance reconstruction.
//!
//! The crate computes MVDR-style beamforming weights without inverting or
//! materializing any `M x M` covariance on the solve path:
//!
//! * [`covariance`] treats the sample covariance as an operator built from the
//!   snapshots and solves `R v = u1` iteratively, which yields the maximum
//!   entropy power spectrum.
//! * [`npic`] samples that spectrum over the desired-signal and
//!   interference sectors, refines the desired steering vector and solves for
//!   the weights with conjugate-gradient iterations that only ever apply the
//!   reconstructed covariance as a sum of rank-one actions.
//! * [`dense`] and [`metrics`] hold the small-`M` dense reference
//!   implementation (Cholesky solves, MVDR/SMI baselines, output SINR) used to
//!   cross-check the matrix-free path.
//!
//! The crate is `no_std` with `alloc`; the `std` feature only enables
//! `std::error::Error`-adjacent conveniences in downstream crates.

#![cfg_attr(not(feature = "std"), no_std)]
// NaN-rejecting guards are written as `!(x > y)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod array;
pub mod covariance;
pub mod dense;
mod error;
pub mod linalg;
pub mod metrics;
pub mod npic;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Complex sample type used throughout the crate.
pub type C64 = Complex64;

/// A dense complex column vector (steering vectors, weights, snapshots).
pub type ComplexVector = alloc::vec::Vec<C64>;
