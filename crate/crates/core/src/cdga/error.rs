use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("undeclared symbol `{0}`")]
    Undeclared(String),
    #[error("symbol `{0}` declared twice")]
    Duplicate(String),
    #[error("`{0}` is a reserved name")]
    Reserved(String),
    #[error("generator `{name}` has unsupported degree {degree} (only 0 and 1 are allowed)")]
    InvalidDegree { name: String, degree: u32 },
    #[error("at most 64 degree-1 generators are supported, got {0}")]
    TooManyGenerators(usize),
    #[error("declared differential of `{name}` must have degree {expected}")]
    DifferentialDegree { name: String, expected: usize },
    #[error("d(d {name}) does not vanish: {residual}")]
    DifferentialNotClosed { name: String, residual: String },
    #[error("operands belong to different generator universes")]
    UniverseMismatch,
    #[error("ideal index must be positive, got {0}")]
    InvalidIdealIndex(i64),
    #[error("`{0}` is not a parameter (its differential is nonzero or it has positive degree)")]
    NotAParameter(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("divisor has positive degree: {0}")]
    NonScalarDivisor(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("rewrite rule `{0}` does not decrease the monomial order")]
    NonTerminating(String),
    #[error("rewrite rules are not confluent: overlap {overlap} reduces to `{left}` and `{right}`")]
    NotConfluent { overlap: String, left: String, right: String },
    #[error("rewrite rule left side must be a monic monomial, got `{0}`")]
    InvalidRuleLhs(String),
    #[error("rewriting sends a denominator to zero")]
    RewriteSingular,
}
