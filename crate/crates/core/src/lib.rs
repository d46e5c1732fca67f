//! Theta-trace functions `Z_W(v; u; τ)` of lattice vertex-operator-algebra
//! modules, together with the machinery needed to check their modular
//! behaviour numerically: q-series special functions, even lattices and their
//! discriminant cosets, literal Fock-space traces, exact involution
//! combinatorics, and least-squares fitting of SL₂(ℤ) transition matrices.

pub mod error;
pub mod fock;
pub mod involutions;
pub mod lattice;
pub mod modular;
pub mod qseries;
pub mod trace;

pub use error::{Error, Result};
