//! Local models of foliated charts with Bott-connection data.

mod chart;
mod generic;
mod identity;
mod projective;
mod solver;

use thiserror::Error;

use crate::cdga::AlgebraError;

pub use chart::{covariant_d, theta_wedge, ChartFoliation, DeformationData, VectorValuedForm};
pub use generic::{GenericChart, GenericTwist};
pub use identity::{dtheta_pow_sign, verify_identity, Identity, IdentityInstance, IdentityReport, TwistExpansion};
pub use projective::{lp_representative, projective_curvature};
pub use solver::solve_connection;

/// Selects the coefficient field K and the normalization constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Category {
    Real,
    Holomorphic,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Real => "real",
            Category::Holomorphic => "holomorphic",
        }
    }
}

impl std::str::FromStr for Category {
    type Err = FoliationError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" => Ok(Category::Real),
            "holomorphic" | "transversely-holomorphic" => Ok(Category::Holomorphic),
            other => Err(FoliationError::Malformed(format!("unknown category `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoliationError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{what} must be homogeneous of degree {degree}")]
    WrongDegree { what: String, degree: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("deformation relation fails: {residual}")]
    DeformationRelation { residual: String },
    #[error("no solution in the ansatz span; residual {residual}")]
    NoSolution { residual: String },
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("malformed instance: {0}")]
    Malformed(String),
}
