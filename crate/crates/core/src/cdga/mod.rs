//! Free graded-commutative differential algebra over rational-function coefficients.

mod error;
mod form;
mod parse;
mod rewrite;
mod universe;

pub use error::AlgebraError;
pub use form::FormExpr;
pub use parse::{is_identifier, parse_scalar};
pub use rewrite::{RewriteRule, RuleSet};
pub use universe::{GeneratorDecl, SymbolRef, Universe, UniverseBuilder};

pub(crate) use form::wedge_sign;
