//! Minimax sample-size allocation across a portfolio of concurrent
//! experiments.
//!
//! Given a fixed subject budget `N` shared by `M` one-sided z-tests, the
//! library computes allocations that minimize the worst per-experiment
//! Type-2 error. It covers:
//!
//! - the known-variance closed forms (power-optimal and MSE-optimal
//!   allocations) in [`power`],
//! - exact two-experiment analysis of pilot-based correction factors in
//!   [`pair`],
//! - robust surrogate programs for general portfolio sizes, plus the
//!   data-dependent pipeline that turns pilot estimates into final
//!   allocations, in [`robust`],
//! - a deterministic Monte Carlo harness for policy comparisons and
//!   sweep tables in [`sim`],
//! - the self-contained distribution kernel in [`special`].

pub mod error;
pub mod pair;
pub mod power;
pub mod report;
pub mod robust;
pub mod sim;
pub mod special;
pub mod util;

pub use error::{Error, Result};
