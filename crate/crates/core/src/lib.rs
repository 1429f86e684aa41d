//! Exact computer algebra for first-order q-difference equations: truncated
//! Puiseux series over multivariate rational functions, q-Pochhammer and
//! theta products, solvers, slope limits of monodromy, wall-crossing
//! operators and their ordered products.

pub mod arith;
pub mod error;
pub mod qde;
pub mod models;
pub mod qspecial;
pub mod wall;

pub use error::{Error, Result};
