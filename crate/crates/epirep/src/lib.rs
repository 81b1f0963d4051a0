//! Epigraphical representations of convex Hamiltonians `H(t, x, p)`.
//!
//! The crate builds control triples `(U, f, l)` whose sup-formula
//! `sup_u { p f - l }` reproduces a given Hamiltonian, checks the standing
//! hypotheses of the associated state-constrained infinite-horizon control
//! problems, solves the value functions on desk-scale grids and runs
//! stability experiments for families `H_n -> H`.

// `!(x > 0.0)` is the NaN-rejecting form used throughout validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convex_core;
pub mod error;
pub mod ext;

pub use error::{Error, Result};
pub mod hamiltonians;
pub mod io;
pub mod legendre;
pub mod representation;
pub mod stability;
pub mod value_fn;
