//! Boolean normal forms and alpha normalization.

use std::collections::BTreeSet;

use super::{fresh, Atom, Formula, Quantifier};
use crate::error::EngineError;
use crate::poly::{Polynomial, Var};

/// Renames bound variables so they are pairwise distinct and disjoint
/// from every free variable name. Free variables keep their names.
pub fn alpha_normalize(f: &Formula) -> Formula {
    let mut used: BTreeSet<String> = f.free_vars().iter().map(|v| v.name().to_string()).collect();
    let mut counter = 0usize;
    fn go(
        f: &Formula,
        scope: &mut Vec<(Var, Var)>,
        used: &mut BTreeSet<String>,
        counter: &mut usize,
    ) -> Formula {
        match f {
            Formula::Atom(Atom::Eq(p)) => Formula::eq(rename(p, scope)),
            Formula::Atom(Atom::Neq(p)) => Formula::neq(rename(p, scope)),
            Formula::Atom(Atom::InU(v)) => Formula::in_u(lookup(v, scope)),
            Formula::Not(g) => Formula::Not(Box::new(go(g, scope, used, counter))),
            Formula::And(a, b) => Formula::And(
                Box::new(go(a, scope, used, counter)),
                Box::new(go(b, scope, used, counter)),
            ),
            Formula::Or(a, b) => Formula::Or(
                Box::new(go(a, scope, used, counter)),
                Box::new(go(b, scope, used, counter)),
            ),
            Formula::Quant(q, v, body) => {
                let name = if used.contains(v.name()) {
                    fresh(v.name(), used, counter)
                } else {
                    used.insert(v.name().to_string());
                    v.name().to_string()
                };
                let nv = Var::new(name, v.sort());
                scope.push((v.clone(), nv.clone()));
                let body = go(body, scope, used, counter);
                scope.pop();
                Formula::Quant(*q, nv, Box::new(body))
            }
        }
    }
    fn lookup(v: &Var, scope: &[(Var, Var)]) -> Var {
        for (from, to) in scope.iter().rev() {
            if from == v {
                return to.clone();
            }
        }
        v.clone()
    }
    fn rename(p: &Polynomial, scope: &[(Var, Var)]) -> Polynomial {
        let mut out = p.clone();
        for (i, (from, _)) in scope.iter().enumerate() {
            if out.contains_var(from) {
                out = out.rename_var(from, &Var::new(format!("#a{i}"), from.sort()));
            }
        }
        for (i, (from, to)) in scope.iter().enumerate() {
            let tmp = Var::new(format!("#a{i}"), from.sort());
            if out.contains_var(&tmp) {
                out = out.rename_var(&tmp, to);
            }
        }
        out
    }
    go(f, &mut Vec::new(), &mut used, &mut counter)
}

/// Negation normal form: negations pushed to the atoms. Negated
/// equations flip polarity; negated U atoms stay as negated atoms.
pub fn nnf(f: &Formula) -> Formula {
    fn go(f: &Formula, neg: bool) -> Formula {
        match f {
            Formula::Atom(Atom::Eq(p)) => {
                if neg {
                    Formula::neq(p.clone())
                } else {
                    Formula::eq(p.clone())
                }
            }
            Formula::Atom(Atom::Neq(p)) => {
                if neg {
                    Formula::eq(p.clone())
                } else {
                    Formula::neq(p.clone())
                }
            }
            Formula::Atom(Atom::InU(v)) => {
                if neg {
                    Formula::Not(Box::new(Formula::in_u(v.clone())))
                } else {
                    Formula::in_u(v.clone())
                }
            }
            Formula::Not(g) => go(g, !neg),
            Formula::And(a, b) => {
                if neg {
                    Formula::Or(Box::new(go(a, true)), Box::new(go(b, true)))
                } else {
                    Formula::And(Box::new(go(a, false)), Box::new(go(b, false)))
                }
            }
            Formula::Or(a, b) => {
                if neg {
                    Formula::And(Box::new(go(a, true)), Box::new(go(b, true)))
                } else {
                    Formula::Or(Box::new(go(a, false)), Box::new(go(b, false)))
                }
            }
            Formula::Quant(q, v, body) => {
                let q = if neg {
                    match q {
                        Quantifier::Exists => Quantifier::Forall,
                        Quantifier::Forall => Quantifier::Exists,
                    }
                } else {
                    *q
                };
                Formula::Quant(q, v.clone(), Box::new(go(body, neg)))
            }
        }
    }
    go(f, false)
}

/// A literal of a DNF clause.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Literal {
    Eq(Polynomial),
    Neq(Polynomial),
    InU(Var),
    NotInU(Var),
}

impl Literal {
    pub fn to_formula(&self) -> Formula {
        match self {
            Literal::Eq(p) => Formula::eq(p.clone()),
            Literal::Neq(p) => Formula::neq(p.clone()),
            Literal::InU(v) => Formula::in_u(v.clone()),
            Literal::NotInU(v) => Formula::Not(Box::new(Formula::in_u(v.clone()))),
        }
    }
}

/// Disjunctive normal form of a quantifier-free formula, as clauses of
/// literals. Errors when input has quantifiers or the clause count would
/// exceed the budget.
pub fn dnf_literals(f: &Formula, max_clauses: usize) -> Result<Vec<Vec<Literal>>, EngineError> {
    if !f.is_quantifier_free() {
        return Err(EngineError::Invalid("dnf requires quantifier-free input".into()));
    }
    fn go(f: &Formula, budget: usize) -> Result<Vec<Vec<Literal>>, EngineError> {
        match f {
            Formula::Atom(Atom::Eq(p)) => Ok(vec![vec![Literal::Eq(p.clone())]]),
            Formula::Atom(Atom::Neq(p)) => Ok(vec![vec![Literal::Neq(p.clone())]]),
            Formula::Atom(Atom::InU(v)) => Ok(vec![vec![Literal::InU(v.clone())]]),
            Formula::Not(g) => match &**g {
                Formula::Atom(Atom::InU(v)) => Ok(vec![vec![Literal::NotInU(v.clone())]]),
                _ => unreachable!("input is in negation normal form"),
            },
            Formula::Or(a, b) => {
                let mut out = go(a, budget)?;
                out.extend(go(b, budget)?);
                if out.len() > budget {
                    return Err(EngineError::SizeLimit { clauses: out.len(), budget });
                }
                Ok(out)
            }
            Formula::And(a, b) => {
                let left = go(a, budget)?;
                let right = go(b, budget)?;
                let count = left.len().saturating_mul(right.len());
                if count > budget {
                    return Err(EngineError::SizeLimit { clauses: count, budget });
                }
                let mut out = Vec::with_capacity(count);
                for l in &left {
                    for r in &right {
                        let mut clause = l.clone();
                        clause.extend(r.iter().cloned());
                        out.push(clause);
                    }
                }
                Ok(out)
            }
            Formula::Quant(..) => unreachable!("checked quantifier-free"),
        }
    }
    go(&nnf(f), max_clauses)
}

/// Disjunctive normal form as a formula.
pub fn dnf(f: &Formula, max_clauses: usize) -> Result<Formula, EngineError> {
    let clauses = dnf_literals(f, max_clauses)?;
    Ok(Formula::or_all(clauses.into_iter().map(|clause| {
        Formula::and_all(clause.into_iter().map(|lit| lit.to_formula()))
    })))
}
