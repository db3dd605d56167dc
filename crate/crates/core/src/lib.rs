//! Uniform observability of linear time-varying systems.
//!
//! - [`ltv`]: matrix-valued functions, transition matrices, (extended)
//!   observability Gramians and weakest-direction scans.
//! - [`observability`]: the `N_k` chain, the C1/C2 sufficient conditions and
//!   a counterexample showing that a positive averaged `MᵀM` alone does not
//!   give uniform observability.
//! - [`range`]: position and velocity-bias estimation from range
//!   measurements, lifted to an LTV system, with a persistent-excitation check.
//! - [`observer`]: a continuous Riccati observer on the lifted system.
//! - [`cli`]: the `ltvobs` command-line front end.
//!
//! Runnable walkthroughs live in `examples/`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod linalg;
pub mod ltv;
pub mod observability;
pub mod observer;
pub mod range;

pub use error::{Error, Result};
