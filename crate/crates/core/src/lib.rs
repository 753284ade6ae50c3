//! Density estimation from length-biased samples.
//!
//! Observations come from `g(y) ∝ w(y) f(y)` (length bias: `w(y) = y`). A
//! Dirichlet-process mixture of log-normals is fitted to `g` with a slice
//! sampler ([`dpmm`]); its posterior-predictive draws are turned into draws
//! from `f` by a Metropolis chain whose acceptance probability is
//! `min{1, w(x)/w(y)}` ([`debias`]). Kernel baselines live in [`kde`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod debias;
pub mod density;
pub mod diagnostics;
pub mod dpmm;
pub mod error;
pub mod kde;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
