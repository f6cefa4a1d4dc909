//! Quantifier elimination for the pure ring language over algebraically
//! closed fields, and truth decision for sentences in a fixed
//! characteristic.
//!
//! Elimination is recursive case splitting on leading coefficients with
//! pseudo-remainder reduction: inequations merge into a single product,
//! the leading coefficient of the highest-degree equation is split into
//! zero/nonzero branches, and the base cases are decided by coefficient
//! conditions. No real-closed machinery is involved; only degree case
//! analysis over an algebraically closed field.

use num::{BigInt, Integer, Zero};
use std::collections::BTreeSet;
use std::fmt;

use crate::error::EngineError;
use crate::formula::{dnf_literals, nnf, Atom, Formula, Literal, Quantifier};
use crate::poly::{pseudo_divide, Polynomial, Rat, Sort, Var};
use crate::Engine;

/// Characteristic of the working completion: 0 or a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Characteristic(u64);

impl Characteristic {
    pub fn zero() -> Self {
        Characteristic(0)
    }

    pub fn new(value: u64) -> Result<Self, EngineError> {
        if value == 0 || is_prime(value) {
            Ok(Characteristic(value))
        } else {
            Err(EngineError::NotPrime(value))
        }
    }

    pub fn value(&self) -> u64 {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Reduces every coefficient into {0, .., p-1} for characteristic p;
/// identity in characteristic 0. Denominators divisible by p are an
/// error.
pub fn reduce_poly(eng: &Engine, p: &Polynomial) -> Result<Polynomial, EngineError> {
    let ch = eng.characteristic.value();
    if ch == 0 {
        return Ok(p.clone());
    }
    let modulus = BigInt::from(ch);
    let mut failed = false;
    let out = p.map_coefficients(|c| {
        let num = c.numer().mod_floor(&modulus);
        let den = c.denom().mod_floor(&modulus);
        if den.is_zero() {
            failed = true;
            return Rat::zero();
        }
        let inv = den.modpow(&BigInt::from(ch - 2), &modulus);
        Rat::from_integer((num * inv).mod_floor(&modulus))
    });
    if failed {
        return Err(EngineError::DenominatorVanishes(ch));
    }
    Ok(out)
}

/// Equation atom with the polynomial reduced and canonically scaled;
/// constants fold to the truth values.
pub fn atom_eq(eng: &Engine, p: &Polynomial) -> Result<Formula, EngineError> {
    let p = reduce_poly(eng, p)?;
    match p.as_constant() {
        Some(c) if c.is_zero() => Ok(Formula::truth()),
        Some(_) => Ok(Formula::falsity()),
        None => Ok(Formula::eq(p.integer_normalized())),
    }
}

/// Inequation atom, dual to [`atom_eq`].
pub fn atom_neq(eng: &Engine, p: &Polynomial) -> Result<Formula, EngineError> {
    let p = reduce_poly(eng, p)?;
    match p.as_constant() {
        Some(c) if c.is_zero() => Ok(Formula::falsity()),
        Some(_) => Ok(Formula::truth()),
        None => Ok(Formula::neq(p.integer_normalized())),
    }
}

/// Eliminates `exists v` from a conjunction of equations and inequations
/// of the ring language. The result is quantifier-free and equivalent
/// over every algebraically closed field of the working characteristic.
pub fn eliminate_one(eng: &Engine, v: &Var, clause: &[Literal]) -> Result<Formula, EngineError> {
    let mut eqs: Vec<Polynomial> = Vec::new();
    let mut ineqs: Vec<Polynomial> = Vec::new();
    let mut side = Formula::truth();
    for lit in clause {
        match lit {
            Literal::InU(w) | Literal::NotInU(w) => {
                return Err(EngineError::UnsupportedAtom(format!("U({})", w.name())));
            }
            Literal::Eq(p) => {
                let p = reduce_poly(eng, p)?;
                if p.degree_in(v) > 0 {
                    eqs.push(p);
                } else {
                    side = Formula::and(side, atom_eq(eng, &p)?);
                }
            }
            Literal::Neq(p) => {
                let p = reduce_poly(eng, p)?;
                if p.degree_in(v) > 0 {
                    ineqs.push(p);
                } else {
                    side = Formula::and(side, atom_neq(eng, &p)?);
                }
            }
        }
    }
    if side.is_falsity() {
        return Ok(Formula::falsity());
    }
    // Merge all v-relevant inequations into one product.
    let mut q = Polynomial::one();
    for ineq in &ineqs {
        q = reduce_poly(eng, &(&q * ineq))?;
    }
    let core = elim_core(eng, v, eqs, &q, &mut BTreeSet::new(), &mut BTreeSet::new())?;
    Ok(Formula::and(side, core))
}

/// Recursive core: all equations have positive degree in v; `q` is the
/// combined inequation (1 when vacuous). `assumed_nonzero` and
/// `assumed_zero` carry the leading coefficients already split on the
/// current branch, so repeated splits collapse.
fn elim_core(
    eng: &Engine,
    v: &Var,
    eqs: Vec<Polynomial>,
    q: &Polynomial,
    assumed_nonzero: &mut BTreeSet<Polynomial>,
    assumed_zero: &mut BTreeSet<Polynomial>,
) -> Result<Formula, EngineError> {
    // Normalize the equation set: drop zeros, push v-free constraints out
    // as side conditions, sort by degree descending.
    let mut side = Formula::truth();
    let mut active: Vec<Polynomial> = Vec::new();
    for e in eqs {
        if e.is_zero() {
            continue;
        }
        if e.degree_in(v) == 0 {
            side = Formula::and(side, atom_eq(eng, &e)?);
        } else {
            active.push(e);
        }
    }
    if side.is_falsity() {
        return Ok(Formula::falsity());
    }
    active.sort_by(|a, b| {
        b.degree_in(v)
            .cmp(&a.degree_in(v))
            .then_with(|| a.cmp(b))
    });
    active.dedup();

    if active.is_empty() {
        return Ok(Formula::and(side, base_no_equation(eng, v, q)?));
    }

    let p = active[0].clone();
    let lc = reduce_poly(eng, &p.leading_coeff_in(v))?.integer_normalized();
    let lc_const = lc.as_constant();

    // Zero branch: the leading term vanishes and the equation drops to
    // its reductum.
    let zero_branch = if lc_const.is_some() || assumed_nonzero.contains(&lc) {
        Formula::falsity()
    } else {
        let mut eqs2 = active.clone();
        eqs2[0] = p.reductum_in(v);
        assumed_zero.insert(lc.clone());
        let sub = elim_core(eng, v, eqs2, q, assumed_nonzero, assumed_zero)?;
        assumed_zero.remove(&lc);
        Formula::and(Formula::eq(lc.clone()), sub)
    };

    // Nonzero branch.
    let nonzero_branch = if assumed_zero.contains(&lc) {
        Formula::falsity()
    } else {
        let guard = if lc_const.is_some() || assumed_nonzero.contains(&lc) {
            Formula::truth()
        } else {
            Formula::neq(lc.clone())
        };
        let inserted = lc_const.is_none() && assumed_nonzero.insert(lc.clone());
        let sub = if active.len() == 1 {
            base_one_equation(eng, v, &p, q)?
        } else {
            // Reduce a second equation against p. When its degree is
            // lower than deg p the pseudo-remainder cannot drop, so the
            // blocking equation's own leading coefficient is split
            // instead on the next recursion level.
            let other = active[1].clone();
            if other.degree_in(v) == p.degree_in(v) {
                let (_, r, _) = pseudo_divide(&other, &p, v)?;
                let mut eqs2 = active.clone();
                eqs2[1] = reduce_poly(eng, &r)?;
                elim_core(eng, v, eqs2, q, assumed_nonzero, assumed_zero)?
            } else {
                let lc2 = reduce_poly(eng, &other.leading_coeff_in(v))?.integer_normalized();
                let lc2_const = lc2.as_constant();
                let low_zero = if lc2_const.is_some() || assumed_nonzero.contains(&lc2) {
                    Formula::falsity()
                } else {
                    let mut eqs2 = active.clone();
                    eqs2[1] = other.reductum_in(v);
                    assumed_zero.insert(lc2.clone());
                    let sub = elim_core(eng, v, eqs2, q, assumed_nonzero, assumed_zero)?;
                    assumed_zero.remove(&lc2);
                    Formula::and(Formula::eq(lc2.clone()), sub)
                };
                let low_nonzero = if assumed_zero.contains(&lc2) {
                    Formula::falsity()
                } else {
                    let guard2 = if lc2_const.is_some() || assumed_nonzero.contains(&lc2) {
                        Formula::truth()
                    } else {
                        Formula::neq(lc2.clone())
                    };
                    let inserted2 = lc2_const.is_none() && assumed_nonzero.insert(lc2.clone());
                    let (_, r, _) = pseudo_divide(&p, &other, v)?;
                    let mut eqs2 = active.clone();
                    eqs2[0] = reduce_poly(eng, &r)?;
                    let sub = elim_core(eng, v, eqs2, q, assumed_nonzero, assumed_zero)?;
                    if inserted2 {
                        assumed_nonzero.remove(&lc2);
                    }
                    Formula::and(guard2, sub)
                };
                Formula::or(low_zero, low_nonzero)
            }
        };
        if inserted {
            assumed_nonzero.remove(&lc);
        }
        Formula::and(guard, sub)
    };

    Ok(Formula::and(side, Formula::or(zero_branch, nonzero_branch)))
}

/// exists v. q != 0 over an infinite field: q must not vanish
/// identically in v, i.e. some v-coefficient is nonzero.
fn base_no_equation(eng: &Engine, v: &Var, q: &Polynomial) -> Result<Formula, EngineError> {
    if q.is_one() {
        return Ok(Formula::truth());
    }
    let mut out = Formula::falsity();
    for c in q.coeffs_in(v) {
        if !c.is_zero() {
            out = Formula::or(out, atom_neq(eng, &c)?);
        }
    }
    Ok(out)
}

/// exists v (p = 0 and q != 0), with the leading coefficient of p known
/// nonzero on this branch: p has deg_v(p) roots, and they all are roots
/// of q exactly when p divides q^deg(p), i.e. when the pseudo-remainder
/// of q^deg(p) by p vanishes.
fn base_one_equation(
    eng: &Engine,
    v: &Var,
    p: &Polynomial,
    q: &Polynomial,
) -> Result<Formula, EngineError> {
    if q.is_one() {
        return Ok(Formula::truth());
    }
    let d = p.degree_in(v);
    let qd = reduce_poly(eng, &q.pow(d))?;
    let (_, r, _) = pseudo_divide(&qd, p, v)?;
    let r = reduce_poly(eng, &r)?;
    let mut out = Formula::falsity();
    for c in r.coeffs_in(v) {
        if !c.is_zero() {
            out = Formula::or(out, atom_neq(eng, &c)?);
        }
    }
    Ok(out)
}

/// Full quantifier elimination for formulas of the pure ring language:
/// innermost-first, existentials eliminated clause by clause through DNF,
/// universals by duality. The result is in negation normal form.
pub fn qe(eng: &Engine, f: &Formula) -> Result<Formula, EngineError> {
    let g = qe_inner(eng, f)?;
    Ok(nnf(&g))
}

fn qe_inner(eng: &Engine, f: &Formula) -> Result<Formula, EngineError> {
    match f {
        Formula::Atom(Atom::Eq(p)) => atom_eq(eng, p),
        Formula::Atom(Atom::Neq(p)) => atom_neq(eng, p),
        Formula::Atom(Atom::InU(v)) => {
            Err(EngineError::UnsupportedAtom(format!("U({})", v.name())))
        }
        Formula::Not(g) => Ok(Formula::not(qe_inner(eng, g)?)),
        Formula::And(a, b) => Ok(Formula::and(qe_inner(eng, a)?, qe_inner(eng, b)?)),
        Formula::Or(a, b) => Ok(Formula::or(qe_inner(eng, a)?, qe_inner(eng, b)?)),
        Formula::Quant(q, v, body) => {
            if v.sort() == Sort::Small {
                return Err(EngineError::UnsupportedAtom(format!(
                    "small-sort quantifier over {}",
                    v.name()
                )));
            }
            match q {
                Quantifier::Exists => {
                    let inner = qe_inner(eng, body)?;
                    eliminate_exists(eng, v, &inner)
                }
                Quantifier::Forall => {
                    let inner = qe_inner(eng, body)?;
                    let neg = eliminate_exists(eng, v, &Formula::not(inner))?;
                    Ok(Formula::not(neg))
                }
            }
        }
    }
}

fn eliminate_exists(eng: &Engine, v: &Var, body: &Formula) -> Result<Formula, EngineError> {
    let clauses = dnf_literals(body, eng.max_clauses)?;
    let mut out = Formula::falsity();
    for clause in clauses {
        out = Formula::or(out, eliminate_one(eng, v, &clause)?);
    }
    Ok(out)
}

/// Decides a sentence of the pure ring language in the working
/// characteristic. Declared transcendental constants may occur free;
/// they are algebraically independent over the prime field, so a
/// polynomial condition on them holds exactly when it holds identically.
pub fn decide_sentence(eng: &Engine, f: &Formula) -> Result<bool, EngineError> {
    let g = qe(eng, f)?;
    eval_closed(eng, &g)
}

fn eval_closed(eng: &Engine, f: &Formula) -> Result<bool, EngineError> {
    match f {
        Formula::Atom(Atom::Eq(p)) => Ok(closed_poly_is_zero(eng, p)?),
        Formula::Atom(Atom::Neq(p)) => Ok(!closed_poly_is_zero(eng, p)?),
        Formula::Atom(Atom::InU(v)) => {
            Err(EngineError::UnsupportedAtom(format!("U({})", v.name())))
        }
        Formula::Not(g) => Ok(!eval_closed(eng, g)?),
        Formula::And(a, b) => Ok(eval_closed(eng, a)? && eval_closed(eng, b)?),
        Formula::Or(a, b) => Ok(eval_closed(eng, a)? || eval_closed(eng, b)?),
        Formula::Quant(_, v, _) => Err(EngineError::Invalid(format!(
            "quantifier over {} survived elimination",
            v.name()
        ))),
    }
}

fn closed_poly_is_zero(eng: &Engine, p: &Polynomial) -> Result<bool, EngineError> {
    for v in p.vars() {
        if v.sort() != Sort::Transcendental {
            return Err(EngineError::FreeVariable(v.name().to_string()));
        }
    }
    Ok(reduce_poly(eng, p)?.is_zero())
}
