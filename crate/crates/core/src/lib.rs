//! Excess growth rate of portfolio theory and its information-theoretic
//! companions.
//!
//! Vectors are dense and 0-based. Points of the simplex are [`Weights`];
//! every routine checks its domain and reports problems through [`Error`].

// `!(x > 0.0)` guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtest;
pub mod dirichlet;
pub mod egr;
pub mod error;
pub mod info;
pub mod numeric;
pub mod optimize;
pub mod quadrature;
pub mod simplex;

pub use error::{Error, Result};
pub use simplex::{CompositeSpec, Weights};
