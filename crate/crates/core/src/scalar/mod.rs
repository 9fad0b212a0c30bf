//! Exact coefficient arithmetic: Gaussian rationals, polynomials and rational functions.

mod gaussian;
mod poly;
mod ratfn;

pub use gaussian::GaussRational;
pub use poly::{Monomial, Polynomial};
pub use ratfn::Scalar;
