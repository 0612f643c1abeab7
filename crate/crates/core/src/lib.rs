//! Numerical laboratory for transmitter → path → receiver models.
//!
//! A transmitter prepares a density operator, the path acts as a channel and
//! the receiver is described by a family of measurement operators. The
//! conditional probability of a reading is always `Trace(σ(r) ρ(t))`, and the
//! split point between the two descriptions can be moved freely along the
//! path without changing it. This crate builds all three pieces on a
//! truncated Fock space (plus two-level carriers), checks their invariants,
//! and offers the phase-space picture through Wigner distributions.

pub mod channels;
pub mod error;
pub mod fock;
pub mod info;
pub mod io;
pub mod povm;
pub mod spin;
pub mod tolerance;
pub mod wigner;

pub use error::{Error, Result};
pub use fock::{ComplexOperator, DensityOperator, FockSpace, StateVector};
pub use num_complex::Complex64 as C64;
