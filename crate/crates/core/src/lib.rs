//! Truncated Fock-space engine for spin-boson models: the multi-tone
//! generalised Rabi model, the nth-order Rabi models it reproduces in a
//! rotated frame, and the standard QRM with its closed-form approximations.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod error;
pub mod frames;
pub mod hilbert;
pub mod linalg;
pub mod models;
pub mod phase;
pub mod propagate;
pub mod verify;

pub use error::{Error, Result};
