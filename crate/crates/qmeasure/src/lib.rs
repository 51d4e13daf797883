//! Numerical laboratory for finite-dimensional quantum measurement models.
//!
//! The crate has four layers:
//!
//! - [`linalg`]: dense hermitian linear algebra (eigendecomposition, tensor
//!   products, propagators) with validated operator types.
//! - [`sewell`]: coupled system-apparatus models in the Sewell scheme --
//!   sector Hamiltonians, the pointer coefficient tensor, expectation and
//!   conditional-expectation functionals, decoherence and collapse
//!   diagnostics.
//! - [`coleman_hepp`]: the finite Coleman-Hepp spin-chain apparatus with
//!   magnetization-band macrostates, computed through counting polynomials
//!   so that chains of 10^4 sites stay tractable, plus error-scaling fits
//!   and reliability probes.
//! - [`approximant`]: discrete measurable approximants of continuous-spectrum
//!   observables on fine-grid proxies, finite instruments with exact
//!   rational readouts, and the resolution/reliability trade-off report.

// Indexed loops over matrix entries are the house style here.
#![allow(clippy::needless_range_loop)]

pub mod approximant;
pub mod coleman_hepp;
pub mod error;
pub mod linalg;
pub mod random;
pub mod sewell;

pub use error::{Error, Result};
