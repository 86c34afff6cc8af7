//! Conjugate-gradient accelerated iteratively re-weighted least squares for
//! sparse recovery.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: vectors, the [`LinearMap`](linalg::LinearMap) abstraction,
//!   dense matrices and the fast partial-DCT sensing operator, rearrangements
//!   and spectral estimates.
//! - [`krylov`]: conjugate gradient, the modified CG for minimum weighted-norm
//!   problems and Jacobi-preconditioned CG.
//! - [`functionals`]: the IRLS surrogate functionals, weight and smoothing
//!   updates, LASSO and critical-point diagnostics.
//! - [`irls_equality`]: IRLS / CG-IRLS for `min ||x||_tau s.t. Phi x = y`.
//! - [`irls_lagrangian`]: IRLS-lambda / CG-IRLS-lambda for the regularized
//!   problem `||x||_tau^tau + ||Phi x - y||^2 / (2 lambda)`.
//! - [`baselines`]: IHT and FISTA.
//! - [`problems`], [`bench`], [`solvers`]: synthetic instances, the
//!   experiment harness and a name-based solver registry.
//! - [`cli`]: command implementations behind the `sparse-irls` binary.

pub mod baselines;
pub mod bench;
pub mod cli;
mod error;
pub mod functionals;
pub mod irls_equality;
pub mod irls_lagrangian;
pub mod krylov;
pub mod linalg;
pub mod problems;
pub mod rng;
pub mod solvers;
pub mod trace;

pub use error::{Error, Result};

/// Crate version, embedded into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
