//! Symbolic engine for definable sets in pairs (K, k) of algebraically
//! closed fields, where k is a proper algebraically closed subfield named
//! by a unary predicate U.
//!
//! The crate parses first-order formulas over the ring language extended
//! by U, eliminates field quantifiers over algebraically closed fields,
//! reduces formulas to a disjunction-of-very-special normal form, and
//! computes the pair dimension of the sets they define, together with
//! machine-checkable certificates (fiber partitions, dichotomy labels,
//! almost-internality witnesses).

pub mod acfqe;
pub mod dim2;
pub mod error;
pub mod formula;
pub mod oracle;
pub mod pairnf;
pub mod poly;
pub mod pregeo;

pub use acfqe::Characteristic;
pub use error::EngineError;

/// Engine instance: fixes the working characteristic and the DNF clause
/// budget for every operation run through it.
#[derive(Debug, Clone)]
pub struct Engine {
    pub characteristic: Characteristic,
    pub max_clauses: usize,
}

impl Engine {
    pub fn new(characteristic: Characteristic) -> Self {
        Engine { characteristic, max_clauses: 10_000 }
    }

    pub fn with_max_clauses(mut self, max_clauses: usize) -> Self {
        self.max_clauses = max_clauses;
        self
    }
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(Characteristic::zero())
    }
}
