//! Regge trajectories of the radial Schrödinger equation as ℏ-expansions.
//!
//! The crate computes the series `α(E) = Σ α_k(E) ℏ^k` for bound states
//! with `n` radial nodes by recurrences on the Laurent coefficients of the
//! logarithmic derivative of the wavefunction, improves daughter
//! trajectories by a two-parameter mass renormalization, and checks the
//! results against an independent Numerov eigenvalue solver.
//!
//! ```
//! use regge_core::{engine, potential::PotentialSpec};
//!
//! let harmonic = PotentialSpec::power_law(1.0, 2.0).unwrap();
//! let exp = engine::expand(&harmonic, 2.0, 1.0, 0, 4).unwrap();
//! assert!((exp.evaluate(1.0) - (2f64.sqrt() - 1.5)).abs() < 1e-12);
//! ```

// NaN must fail validation, so `!(x > 0.0)` is intentional
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod engine;
pub mod error;
pub mod numeric;
pub mod oracle;
pub mod par;
pub mod potential;
pub mod renorm;
pub mod table;

pub use engine::{evaluate, expand, CoeffTable, Expansion};
pub use error::{Error, Result};
pub use par::Execution;
pub use potential::{Orbit, PotentialSpec};
