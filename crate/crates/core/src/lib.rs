//! Exact exterior calculus over ℚ(i), foliation data on charts, secondary
//! characteristic class representatives and their numerical integration.

// index loops read closer to the matrix formulas
#![allow(clippy::needless_range_loop)]

pub mod cdga;
pub mod classes;
pub mod foliation;
pub mod models;
pub mod numeric;
pub mod random;
pub mod scalar;

pub use cdga::{AlgebraError, FormExpr, RuleSet, Universe};
pub use classes::{ClassError, ClassKind, ClassRep, PROP31_SIGN};
pub use foliation::{Category, ChartFoliation, DeformationData, FoliationError, Identity, IdentityReport};
pub use numeric::{NumericError, ParamManifold, QuadratureSpec};
pub use scalar::{GaussRational, Scalar};
