//! Numeric pullback and quadrature of symbolic forms on parametrized cycles.

mod crosscheck;
mod eval;
mod manifold;
mod quadrature;

use thiserror::Error;

use crate::classes::ClassError;

pub use crosscheck::{admissible_lambda, derivative_crosscheck, CrosscheckReport};
pub use eval::{class_coefficient, evaluate_form, integrate, CompiledForm, SINGULAR_TOLERANCE};
pub use manifold::{Axis, CoordinateFn, Jet, ParamManifold};
pub use quadrature::{AxisRule, QuadratureSpec, MIN_NODES, REFERENCE_NODES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("symbol `{0}` has no value on this manifold")]
    Unassigned(String),
    #[error("singular evaluation: {scalar} has a vanishing denominator at {point:?}")]
    Singular { scalar: String, point: Vec<f64> },
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("form is not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("quadrature: {0}")]
    Quadrature(String),
    #[error("parameter value {0} is not admissible")]
    Inadmissible(String),
    #[error(transparent)]
    Class(#[from] ClassError),
}
