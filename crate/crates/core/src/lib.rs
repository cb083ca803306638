//! Numerical laboratory for the mean-field limit of 2D bosons with attractive
//! pair interactions.
//!
//! The crate simulates the truncated N-boson dynamics in a harmonic-oscillator
//! basis, solves the limiting focusing cubic NLS, and evaluates the operator
//! inequalities and counterexamples that govern the limit.

pub mod error;
pub mod estimates;
pub mod grid;
pub mod hermite;
pub mod interaction;
pub mod io;
pub mod manybody;
pub mod marginals;
pub mod nls;

pub use error::{Error, Result};
pub use grid::GridSpec;
pub use hermite::{HermiteBasis, Mode2D};
pub use interaction::{InteractionSpec, Profile};
