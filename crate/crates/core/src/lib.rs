//! Shape-invariant tridiagonal Hamiltonians.
//!
//! A Hamiltonian tridiagonal in some basis is factorized as `H = A†A`; when the
//! partner `AA†` is the same family at a shifted parameter plus a constant,
//! the whole spectrum, ground state, coherent states and superpotential follow
//! from the ladder coefficients.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod models;
pub mod operator;
pub mod quadrature;
pub mod shape;
pub mod special;
pub mod states;

pub use error::{Error, Result};
