//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("syntax error at offset {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("sort error: {0}")]
    Sort(String),

    #[error("DNF clause budget exceeded: {clauses} clauses, budget {budget}")]
    SizeLimit { clauses: usize, budget: usize },

    #[error("substitution touches bound variable {0}")]
    BoundVarSubstitution(String),

    #[error("polynomial has degree 0 in {0}")]
    ZeroDegree(String),

    #[error("polynomial is not univariate in {var}: also mentions {other}")]
    NotUnivariate { var: String, other: String },

    #[error("unsupported atom under field quantifier elimination: {0}")]
    UnsupportedAtom(String),

    #[error("free variable {0} is not a declared transcendental constant")]
    FreeVariable(String),

    #[error("formula outside the supported fragment: {0}")]
    UnsupportedFragment(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("closure system failed a pregeometry axiom: {0}")]
    NotPregeometry(String),

    #[error("ground set of size {size} exceeds the exhaustive budget {budget}")]
    TooLarge { size: usize, budget: usize },

    #[error("vector dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0} is neither 0 nor a prime")]
    NotPrime(u64),

    #[error("coefficient denominator vanishes in characteristic {0}")]
    DenominatorVanishes(u64),

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("{0}")]
    Invalid(String),
}
