//! Linear algebra on fixed-point digital states.
//!
//! A digital state stores one fixed-point complex register per basis
//! index. On top of that representation this crate provides sparse
//! Hermitian operators with a block-diagonal (edge-colored) application
//! schedule, a Newton-Raphson linear solver, Chebyshev/Bessel evaluation of
//! `e^{-At} b`, matrix inversion through a quadrature of exponentials,
//! Pauli-string measurement with Chernoff-bounded sampling, and
//! ground-state / thermal expectation ratios built from those pieces.

pub mod cheb;
pub mod dd;
pub mod dense;
pub mod engine;
pub mod error;
pub mod fixed;
pub mod inverse;
pub mod nr;
pub mod pauli;
pub mod phys;
pub mod sparse;
pub mod state;
pub mod wide;

pub use error::{Error, Result};
pub use fixed::{round_to_register, FixedComplex, FixedPointFormat, PlaceValueDecomposition};
pub use state::{add_states, init_state, scale_state, DigitalState};
