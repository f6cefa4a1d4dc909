//! Dimension engine for definable sets in a pair (K, k).
//!
//! For a very special formula in (y, z), the fiber over a parameter point
//! is either of dimension at most 0 or cofinite in K; both conditions are
//! definable by coefficient extraction with respect to z. Stacking the
//! resulting three-way fiber partition (empty, small nonempty, co-small)
//! coordinate by coordinate computes the dimension of any normal form in
//! the supported fragment, with the full partition recorded in a
//! certificate. Sentences are decided exactly: the small field is an
//! algebraically closed field of the working characteristic, and the
//! declared transcendental constants are algebraically independent over
//! it.

use std::collections::BTreeMap;
use std::fmt;

use crate::acfqe::{self, atom_eq, atom_neq, reduce_poly};
use crate::error::EngineError;
use crate::formula::Formula;
use crate::pairnf::{self, Disjunct, PairNormalForm, VerySpecialFormula};
use crate::poly::{Polynomial, Sort, Var};
use crate::Engine;

/// Dimension value: -infinity for the empty set, otherwise a natural
/// number bounded by the ambient power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Dim {
    NegInf,
    Fin(u32),
}

impl Dim {
    pub fn max(self, other: Dim) -> Dim {
        std::cmp::max(self, other)
    }

    /// Adds a fiber contribution; -infinity is absorbing.
    pub fn plus(self, i: u32) -> Dim {
        match self {
            Dim::NegInf => Dim::NegInf,
            Dim::Fin(d) => Dim::Fin(d + i),
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::NegInf => f.write_str("neg_inf"),
            Dim::Fin(d) => write!(f, "{d}"),
        }
    }
}

/// `p != 0` as a polynomial in z, expanded over z-coefficients.
fn poly_nonzero_in(eng: &Engine, p: &Polynomial, z: &Var) -> Result<Formula, EngineError> {
    let p = reduce_poly(eng, p)?;
    let mut out = Formula::falsity();
    for c in p.coeffs_in(z) {
        if !c.is_zero() {
            out = Formula::or(out, atom_neq(eng, &c)?);
        }
    }
    Ok(out)
}

/// `p = 0` as a polynomial in z, expanded over z-coefficients.
fn poly_zero_in(eng: &Engine, p: &Polynomial, z: &Var) -> Result<Formula, EngineError> {
    let p = reduce_poly(eng, p)?;
    let mut out = Formula::truth();
    for c in p.coeffs_in(z) {
        if !c.is_zero() {
            out = Formula::and(out, atom_eq(eng, &c)?);
        }
    }
    Ok(out)
}

fn forall_small_chain(u_vars: &[Var], body: Formula) -> Formula {
    let mut f = body;
    for u in u_vars.iter().rev() {
        f = Formula::forall(u.clone(), f);
    }
    f
}

fn exists_small_chain(u_vars: &[Var], body: Formula) -> Formula {
    let mut f = body;
    for u in u_vars.iter().rev() {
        f = Formula::exists(u.clone(), f);
    }
    f
}

/// The parameter-space formula for "the fiber of psi at y in the
/// z-direction has dimension at most 0": for every block value, either
/// some equation survives as a nonzero polynomial in z, or every defining
/// polynomial including the inequation vanishes identically in z.
pub fn fiber_dim0_formula(
    eng: &Engine,
    vs: &VerySpecialFormula,
    z: &Var,
) -> Result<Formula, EngineError> {
    let mut some_nonzero = Formula::falsity();
    for p in vs.eqs() {
        some_nonzero = Formula::or(some_nonzero, poly_nonzero_in(eng, p, z)?);
    }
    let mut all_zero = Formula::truth();
    for p in vs.eqs() {
        all_zero = Formula::and(all_zero, poly_zero_in(eng, p, z)?);
    }
    all_zero = Formula::and(all_zero, poly_zero_in(eng, vs.ineq(), z)?);
    Ok(forall_small_chain(vs.u_vars(), Formula::or(some_nonzero, all_zero)))
}

/// The parameter-space formula for "the fiber of psi at y is cofinite":
/// some block value kills every equation identically in z while the
/// inequation survives. The complement is then no larger than the
/// z-degree of the surviving inequation.
pub fn fiber_cofinite_formula(
    eng: &Engine,
    vs: &VerySpecialFormula,
    z: &Var,
) -> Result<Formula, EngineError> {
    let mut all_eqs_zero = Formula::truth();
    for p in vs.eqs() {
        all_eqs_zero = Formula::and(all_eqs_zero, poly_zero_in(eng, p, z)?);
    }
    let body = Formula::and(all_eqs_zero, poly_nonzero_in(eng, vs.ineq(), z)?);
    Ok(exists_small_chain(vs.u_vars(), body))
}

/// A special formula in y equivalent to `exists z. psi(y, z)`: the field
/// quantifier moves inside the block and is eliminated.
pub fn fiber_nonempty_formula(
    eng: &Engine,
    vs: &VerySpecialFormula,
    z: &Var,
) -> Result<Formula, EngineError> {
    use crate::formula::Literal;
    let mut clause: Vec<Literal> = vs.eqs().iter().map(|p| Literal::Eq(p.clone())).collect();
    if !vs.ineq().is_one() {
        clause.push(Literal::Neq(vs.ineq().clone()));
    }
    let matrix = acfqe::eliminate_one(eng, z, &clause)?;
    Ok(exists_small_chain(vs.u_vars(), matrix))
}

/// Bundle of the three fiber formulas for one very special target.
#[derive(Debug, Clone)]
pub struct FiberAnalysis {
    pub target: VerySpecialFormula,
    pub dim0: Formula,
    pub cofinite: Formula,
    pub nonempty: Formula,
}

pub fn analyze_fiber(
    eng: &Engine,
    vs: &VerySpecialFormula,
    z: &Var,
) -> Result<FiberAnalysis, EngineError> {
    Ok(FiberAnalysis {
        target: vs.clone(),
        dim0: fiber_dim0_formula(eng, vs, z)?,
        cofinite: fiber_cofinite_formula(eng, vs, z)?,
        nonempty: fiber_nonempty_formula(eng, vs, z)?,
    })
}

/// "The fiber of this disjunct has dimension at most 0": the positive
/// part has a small fiber, or some negated part has a cofinite fiber.
fn disjunct_small_formula(
    eng: &Engine,
    d: &Disjunct,
    z: &Var,
) -> Result<Formula, EngineError> {
    let mut out = fiber_dim0_formula(eng, &d.positive, z)?;
    for n in &d.negatives {
        out = Formula::or(out, fiber_cofinite_formula(eng, n, z)?);
    }
    Ok(out)
}

/// "Every fiber of the union has dimension at most 0": a union is small
/// exactly when each piece is.
pub fn set_small_formula(
    eng: &Engine,
    nf: &PairNormalForm,
    z: &Var,
) -> Result<Formula, EngineError> {
    let mut out = Formula::truth();
    for d in &nf.disjuncts {
        out = Formula::and(out, disjunct_small_formula(eng, d, z)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DichotomyLabel {
    Small,
    CoSmall,
}

impl fmt::Display for DichotomyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DichotomyLabel::Small => f.write_str("Small"),
            DichotomyLabel::CoSmall => f.write_str("CoSmall"),
        }
    }
}

/// Result of the dichotomy decision, with the two formulas that justify
/// the label.
#[derive(Debug, Clone)]
pub struct DichotomyCertificate {
    pub label: DichotomyLabel,
    pub small_formula: Formula,
    pub complement_small_formula: Formula,
}

/// Decides whether a one-variable definable set is small or co-small.
/// Exactly one must hold; anything else is an internal inconsistency.
pub fn dichotomy(
    eng: &Engine,
    nf: &PairNormalForm,
    z: &Var,
) -> Result<DichotomyCertificate, EngineError> {
    for v in nf.free_vars() {
        if v.sort() == Sort::Field && &v != z {
            return Err(EngineError::FreeVariable(v.name().to_string()));
        }
    }
    let small_formula = set_small_formula(eng, nf, z)?;
    let self_small = decide_pair_sentence(eng, &small_formula)?;
    let complement = pairnf::normalize(eng, &Formula::not(nf.to_formula()))?;
    let complement_small_formula = set_small_formula(eng, &complement, z)?;
    let complement_small = decide_pair_sentence(eng, &complement_small_formula)?;
    let label = match (self_small, complement_small) {
        (true, false) => DichotomyLabel::Small,
        (false, true) => DichotomyLabel::CoSmall,
        (both_small, _) => {
            return Err(EngineError::InternalInconsistency(format!(
                "set and complement both {} for {}",
                if both_small { "small" } else { "co-small" },
                nf.to_formula()
            )));
        }
    };
    Ok(DichotomyCertificate { label, small_formula, complement_small_formula })
}

/// Every coefficient of p with respect to all transcendental constants.
fn transcendental_coeffs(p: &Polynomial) -> Vec<Polynomial> {
    let ts: Vec<Var> =
        p.vars().into_iter().filter(|v| v.sort() == Sort::Transcendental).collect();
    let mut acc = vec![p.clone()];
    for t in &ts {
        let mut next = Vec::new();
        for c in &acc {
            if c.contains_var(t) {
                next.extend(c.coeffs_in(t));
            } else {
                next.push(c.clone());
            }
        }
        acc = next;
    }
    acc.into_iter().filter(|c| !c.is_zero()).collect()
}

/// Decides a very special sentence: a subfield element satisfies a
/// polynomial relation involving the transcendental constants exactly
/// when every constant-power coefficient relation holds, which turns the
/// sentence into a pure field sentence over an algebraically closed
/// field of the working characteristic.
fn decide_vs_sentence(eng: &Engine, vs: &VerySpecialFormula) -> Result<bool, EngineError> {
    let mut body = Formula::truth();
    for p in vs.eqs() {
        let p = reduce_poly(eng, p)?;
        for c in transcendental_coeffs(&p) {
            body = Formula::and(body, atom_eq(eng, &c)?);
        }
    }
    let q = reduce_poly(eng, vs.ineq())?;
    let mut q_nonzero = Formula::falsity();
    for c in transcendental_coeffs(&q) {
        q_nonzero = Formula::or(q_nonzero, atom_neq(eng, &c)?);
    }
    body = Formula::and(body, q_nonzero);
    // The block ranges over an algebraically closed field in its own
    // right; requantify it with field-sort variables.
    let mut f = body;
    for u in vs.u_vars().iter().rev() {
        let fu = Var::field(u.name());
        f = rename_var_in_formula(&f, u, &fu);
        f = Formula::exists(fu, f);
    }
    acfqe::decide_sentence(eng, &f)
}

fn rename_var_in_formula(f: &Formula, from: &Var, to: &Var) -> Formula {
    use crate::formula::Atom;
    match f {
        Formula::Atom(Atom::Eq(p)) => Formula::eq(p.rename_var(from, to)),
        Formula::Atom(Atom::Neq(p)) => Formula::neq(p.rename_var(from, to)),
        Formula::Atom(Atom::InU(v)) => {
            Formula::in_u(if v == from { to.clone() } else { v.clone() })
        }
        Formula::Not(g) => Formula::not(rename_var_in_formula(g, from, to)),
        Formula::And(a, b) => Formula::and(
            rename_var_in_formula(a, from, to),
            rename_var_in_formula(b, from, to),
        ),
        Formula::Or(a, b) => Formula::or(
            rename_var_in_formula(a, from, to),
            rename_var_in_formula(b, from, to),
        ),
        Formula::Quant(q, v, body) => {
            if v == from {
                Formula::Quant(*q, v.clone(), body.clone())
            } else {
                Formula::Quant(*q, v.clone(), Box::new(rename_var_in_formula(body, from, to)))
            }
        }
    }
}

fn decide_nf_sentence(eng: &Engine, nf: &PairNormalForm) -> Result<bool, EngineError> {
    for d in &nf.disjuncts {
        if decide_vs_sentence(eng, &d.positive)? {
            let mut excluded = false;
            for n in &d.negatives {
                if decide_vs_sentence(eng, n)? {
                    excluded = true;
                    break;
                }
            }
            if !excluded {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Decides a sentence of the supported fragment over the pair. Free
/// variables other than declared transcendental constants are an error.
pub fn decide_pair_sentence(eng: &Engine, f: &Formula) -> Result<bool, EngineError> {
    let nf = pairnf::normalize(eng, f)?;
    for v in nf.free_vars() {
        if v.sort() == Sort::Field {
            return Err(EngineError::FreeVariable(v.name().to_string()));
        }
    }
    decide_nf_sentence(eng, &nf)
}

/// Recursion certificate: the dimension together with the fiber
/// partition formulas justifying every level.
#[derive(Debug, Clone)]
pub struct DimCertificate {
    pub dimension: Dim,
    pub trace: DimTrace,
}

#[derive(Debug, Clone)]
pub enum DimTrace {
    /// Zero remaining coordinates: the normal form was decided as a
    /// sentence.
    Sentence { holds: bool },
    /// One coordinate peeled, with per-disjunct partitions.
    Peel {
        var: Var,
        disjuncts: Vec<DisjunctTrace>,
        /// Disjuncts dropped because a negated part structurally
        /// contains the positive part.
        dropped: Vec<String>,
    },
}

/// Fiber partition for one disjunct at the peeled coordinate. The three
/// formulas partition the parameter space: empty fibers, fibers of
/// dimension 0, and co-small fibers (which contribute one).
#[derive(Debug, Clone)]
pub struct DisjunctTrace {
    pub formula: String,
    pub empty_formula: String,
    pub small_nonempty_formula: String,
    pub cosmall_formula: String,
    pub small_cert: DimCertificate,
    pub cosmall_cert: DimCertificate,
    pub dimension: Dim,
}

/// Computes the dimension of the set defined by `nf` inside the power of
/// K indexed by `vars`. Coordinates are peeled from the right; each
/// level contributes 0 over the small-nonempty-fiber region and 1 over
/// the co-small-fiber region, and the maximum over disjuncts and regions
/// is the dimension.
pub fn dim(eng: &Engine, nf: &PairNormalForm, vars: &[Var]) -> Result<DimCertificate, EngineError> {
    for v in nf.free_vars() {
        if v.sort() == Sort::Field && !vars.contains(&v) {
            return Err(EngineError::FreeVariable(v.name().to_string()));
        }
    }
    dim_inner(eng, nf, vars)
}

fn dim_inner(
    eng: &Engine,
    nf: &PairNormalForm,
    vars: &[Var],
) -> Result<DimCertificate, EngineError> {
    if vars.is_empty() {
        let holds = decide_nf_sentence(eng, nf)?;
        return Ok(DimCertificate {
            dimension: if holds { Dim::Fin(0) } else { Dim::NegInf },
            trace: DimTrace::Sentence { holds },
        });
    }
    let z = &vars[vars.len() - 1];
    let rest = &vars[..vars.len() - 1];
    let mut total = Dim::NegInf;
    let mut traces = Vec::new();
    let mut dropped = Vec::new();
    for d in &nf.disjuncts {
        let mut negatives = d.negatives.clone();
        negatives.sort();
        negatives.dedup();
        // A negated part that structurally contains the positive one
        // empties the disjunct.
        if negatives.iter().any(|n| n == &d.positive || n.is_truth()) {
            dropped.push(d.to_formula().to_string());
            continue;
        }
        let cleaned = Disjunct { positive: d.positive.clone(), negatives };

        let small_f = disjunct_small_formula(eng, &cleaned, z)?;
        let nonempty_f = fiber_nonempty_formula(eng, &cleaned.positive, z)?;
        let s1_f = Formula::not(small_f.clone());
        let s0_f = Formula::and(small_f.clone(), nonempty_f.clone());
        let e_f = Formula::and(small_f.clone(), Formula::not(nonempty_f.clone()));

        let s1_nf = pairnf::normalize(eng, &s1_f)?;
        let s1_cert = dim_inner(eng, &s1_nf, rest)?;
        let s0_nf = pairnf::normalize(eng, &s0_f)?;
        let s0_cert = dim_inner(eng, &s0_nf, rest)?;

        // With negated parts present, fiber nonemptiness is computed
        // from the positive part alone, which overapproximates the
        // dimension-0 region. The true region is contained in the
        // computed one, so the answer is still exact whenever the
        // co-small contribution dominates; otherwise the overcount could
        // surface, and the honest answer is to refuse.
        if !cleaned.negatives.is_empty() && s0_cert.dimension > s1_cert.dimension.plus(1) {
            return Err(EngineError::UnsupportedFragment(format!(
                "fiber emptiness under negated very special parts is undecidable here: {}",
                cleaned.to_formula()
            )));
        }

        let disjunct_dim = s0_cert.dimension.max(s1_cert.dimension.plus(1));
        total = total.max(disjunct_dim);
        traces.push(DisjunctTrace {
            formula: cleaned.to_formula().to_string(),
            empty_formula: e_f.to_string(),
            small_nonempty_formula: s0_f.to_string(),
            cosmall_formula: s1_f.to_string(),
            small_cert: s0_cert,
            cosmall_cert: s1_cert,
            dimension: disjunct_dim,
        });
    }
    Ok(DimCertificate {
        dimension: total,
        trace: DimTrace::Peel { var: z.clone(), disjuncts: traces, dropped },
    })
}

/// Witness that the set carved out by P over the subfield powers is
/// almost internal: the relation R(u, b) holding when P(u, a, b) = 0 and
/// P(u, a, Z) does not vanish identically, with fiber bound deg_Z P.
#[derive(Debug, Clone)]
pub struct InternalityWitness {
    pub relation: Formula,
    pub bound: u32,
}

/// Builds the witness for P(x, y, z) at closed parameter values for y.
/// Values are rationals or transcendental constants, given as
/// polynomials.
pub fn almost_internal_witness(
    eng: &Engine,
    p: &Polynomial,
    fiber_var: &Var,
    assign: &BTreeMap<Var, Polynomial>,
) -> Result<InternalityWitness, EngineError> {
    let mut inst = p.clone();
    for (v, value) in assign {
        inst = inst.substitute(v, value);
    }
    let inst = reduce_poly(eng, &inst)?;
    if inst.is_zero() {
        return Err(EngineError::ZeroPolynomial);
    }
    let bound = inst.degree_in(fiber_var);
    let relation = Formula::and(
        atom_eq(eng, &inst)?,
        poly_nonzero_in(eng, &inst, fiber_var)?,
    );
    Ok(InternalityWitness { relation, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, parse_with_transcendentals};
    use crate::pairnf::normalize;

    fn eng() -> Engine {
        Engine::default()
    }

    fn nf_of(text: &str) -> PairNormalForm {
        normalize(&eng(), &parse(text).unwrap()).unwrap()
    }

    fn z() -> Var {
        Var::field("z")
    }

    fn first_positive(nf: &PairNormalForm) -> VerySpecialFormula {
        nf.disjuncts[0].positive.clone()
    }

    #[test]
    fn scaled_membership_fibers_are_small() {
        // psi(y, z) = exists u (U(u) and z - u*y = 0): at y = 1 every
        // fiber is the subfield itself, so the dimension-0 formula holds.
        let e = eng();
        let nf = nf_of("exists u in U. z - u*y = 0");
        let vs = first_positive(&nf);
        let dim0 = fiber_dim0_formula(&e, &vs, &z()).unwrap();
        let mut at_one = BTreeMap::new();
        at_one.insert(Var::field("y"), Polynomial::int(1));
        let inst = crate::oracle::substitute_closed(&dim0, &at_one).unwrap();
        assert!(decide_pair_sentence(&e, &inst).unwrap());
    }

    #[test]
    fn constant_block_with_surviving_inequation_is_cofinite() {
        // psi = exists u (U(u) and u = 0 and z*u + 1 != 0): at u = 0 the
        // equation vanishes identically in z and the inequation survives,
        // so every fiber is all of K: cofinite fires, dimension-0 fails.
        let e = eng();
        let nf = nf_of("exists u in U. u = 0 & z*u + 1 != 0");
        let vs = first_positive(&nf);
        let dim0 = fiber_dim0_formula(&e, &vs, &z()).unwrap();
        assert!(!decide_pair_sentence(&e, &dim0).unwrap());
        let cof = fiber_cofinite_formula(&e, &vs, &z()).unwrap();
        assert!(decide_pair_sentence(&e, &cof).unwrap());
    }

    #[test]
    fn monic_equation_never_cofinite() {
        let e = eng();
        let nf = nf_of("exists u in U. z - u = 0");
        let vs = first_positive(&nf);
        let cof = fiber_cofinite_formula(&e, &vs, &z()).unwrap();
        assert!(!decide_pair_sentence(&e, &cof).unwrap());
        // A single finite root set: the dimension-0 formula is plainly
        // true.
        let nf2 = nf_of("z = 0");
        let vs2 = first_positive(&nf2);
        let dim0 = fiber_dim0_formula(&e, &vs2, &z()).unwrap();
        assert!(decide_pair_sentence(&e, &dim0).unwrap());
    }

    #[test]
    fn zero_scaling_gives_cofinite_fiber_with_unit_bound() {
        // psi = exists u (U(u) and u*z = 0 and z - 1 != 0): u = 0 makes
        // the fiber K minus {1}.
        let e = eng();
        let nf = nf_of("exists u in U. u*z = 0 & z - 1 != 0");
        let vs = first_positive(&nf);
        let cof = fiber_cofinite_formula(&e, &vs, &z()).unwrap();
        assert!(decide_pair_sentence(&e, &cof).unwrap());
    }

    #[test]
    fn nonempty_formula_eliminates_fiber_variable() {
        let e = eng();
        // exists z (y*z - 1 = 0): equivalent to y != 0.
        let nf = nf_of("exists u in U. y*z - 1 = 0");
        let vs = first_positive(&nf);
        let bundle = analyze_fiber(&e, &vs, &z()).unwrap();
        assert_eq!(bundle.target, vs);
        let ne = bundle.nonempty.clone();
        assert_eq!(ne, fiber_nonempty_formula(&e, &vs, &z()).unwrap());
        for (val, expect) in [(3i64, true), (0, false)] {
            let mut asg = BTreeMap::new();
            asg.insert(Var::field("y"), Polynomial::int(val));
            let inst = crate::oracle::substitute_closed(&ne, &asg).unwrap();
            assert_eq!(decide_pair_sentence(&e, &inst).unwrap(), expect, "y={val}");
        }
        // k nonempty: a membership fiber always has points.
        let member = nf_of("exists u in U. z - u = 0");
        let always = fiber_nonempty_formula(&e, &first_positive(&member), &z()).unwrap();
        assert!(decide_pair_sentence(&e, &always).unwrap());
        // Unsatisfiable equations give an empty normal form, hence no
        // fibers at all.
        let empty = nf_of("exists u in U. 1 = 0");
        assert!(empty.is_empty_set());
    }

    #[test]
    fn subfield_is_small_and_complement_is_not() {
        let e = eng();
        let nf = nf_of("U(z)");
        let small = set_small_formula(&e, &nf, &z()).unwrap();
        assert!(decide_pair_sentence(&e, &small).unwrap());
        let co = nf_of("~U(z)");
        let co_small = set_small_formula(&e, &co, &z()).unwrap();
        assert!(!decide_pair_sentence(&e, &co_small).unwrap());
    }

    #[test]
    fn dichotomy_labels() {
        let e = eng();
        let small = dichotomy(&e, &nf_of("U(z)"), &z()).unwrap();
        assert_eq!(small.label, DichotomyLabel::Small);
        let cosmall = dichotomy(&e, &nf_of("z != 0"), &z()).unwrap();
        assert_eq!(cosmall.label, DichotomyLabel::CoSmall);
        // {b : b^2 in k} equals k, since the subfield is algebraically
        // closed.
        let squares = dichotomy(&e, &nf_of("exists u in U. z*z = u"), &z()).unwrap();
        assert_eq!(squares.label, DichotomyLabel::Small);
    }

    #[test]
    fn pair_sentence_decisions() {
        let e = eng();
        let (f, _) = parse_with_transcendentals("exists u in U. u*t = 1", &["t".into()]).unwrap();
        assert!(!decide_pair_sentence(&e, &f).unwrap());
        let g = parse("exists u in U. u*u = 2").unwrap();
        assert!(decide_pair_sentence(&e, &g).unwrap());
        let (h, _) = parse_with_transcendentals("exists u in U. u = t", &["t".into()]).unwrap();
        assert!(!decide_pair_sentence(&e, &h).unwrap());
    }

    #[test]
    fn full_powers_have_full_dimension() {
        let e = eng();
        for n in 1..=3u32 {
            let vars: Vec<Var> = (1..=n).map(|i| Var::field(format!("y{i}"))).collect();
            let nf = nf_of("0 = 0");
            let cert = dim(&e, &nf, &vars).unwrap();
            assert_eq!(cert.dimension, Dim::Fin(n), "K^{n}");
        }
    }

    #[test]
    fn subfield_powers_have_dimension_zero() {
        let e = eng();
        for n in 1..=3u32 {
            let vars: Vec<Var> = (1..=n).map(|i| Var::field(format!("y{i}"))).collect();
            let text = (1..=n).map(|i| format!("U(y{i})")).collect::<Vec<_>>().join(" & ");
            let nf = nf_of(&text);
            let cert = dim(&e, &nf, &vars).unwrap();
            assert_eq!(cert.dimension, Dim::Fin(0), "k^{n}");
        }
    }

    #[test]
    fn graph_of_scaling_has_dimension_one() {
        let e = eng();
        let (f, _) = parse_with_transcendentals("z = t*y", &["t".into()]).unwrap();
        let nf = normalize(&e, &f).unwrap();
        let vars = vec![Var::field("y"), Var::field("z")];
        let cert = dim(&e, &nf, &vars).unwrap();
        assert_eq!(cert.dimension, Dim::Fin(1));
    }

    #[test]
    fn scaled_subfield_has_dimension_zero() {
        let e = eng();
        let (f, _) =
            parse_with_transcendentals("exists u in U. z = u*t", &["t".into()]).unwrap();
        let nf = normalize(&e, &f).unwrap();
        let cert = dim(&e, &nf, &[z()]).unwrap();
        assert_eq!(cert.dimension, Dim::Fin(0));
    }

    #[test]
    fn empty_set_has_dimension_neg_inf() {
        let e = eng();
        let nf = nf_of("1 = 0");
        let cert = dim(&e, &nf, &[z()]).unwrap();
        assert_eq!(cert.dimension, Dim::NegInf);
    }

    #[test]
    fn complement_of_subfield_has_dimension_one() {
        let e = eng();
        let nf = nf_of("~U(z)");
        let cert = dim(&e, &nf, &[z()]).unwrap();
        assert_eq!(cert.dimension, Dim::Fin(1));
    }

    #[test]
    fn contradictory_membership_is_empty() {
        let e = eng();
        let nf = nf_of("U(z) & ~U(z)");
        let cert = dim(&e, &nf, &[z()]).unwrap();
        assert_eq!(cert.dimension, Dim::NegInf);
    }

    #[test]
    fn undecidable_negative_interaction_is_refused() {
        // y*k minus the subfield: deciding which fibers the negated part
        // empties would need the general quantifier reduction, which is
        // out of scope; the honest answer is a fragment error.
        let e = eng();
        let nf = nf_of("(exists u in U. z = u*y) & ~U(z)");
        let err = dim(&e, &nf, &[Var::field("y"), z()]);
        assert!(matches!(err, Err(EngineError::UnsupportedFragment(_))));
    }

    #[test]
    fn witness_for_linear_scaling() {
        let e = eng();
        let x1 = Var::small("x1");
        let t = Var::transcendental("t");
        // P = z - x1*y1 at y1 = t: R(u, b) iff b = u*t, bound 1.
        let p = &Polynomial::var(&z())
            - &(&Polynomial::var(&x1) * &Polynomial::var(&Var::field("y1")));
        let mut asg = BTreeMap::new();
        asg.insert(Var::field("y1"), Polynomial::var(&t));
        let w = almost_internal_witness(&e, &p, &z(), &asg).unwrap();
        assert_eq!(w.bound, 1);
        assert!(w.relation.free_vars().contains(&x1));
    }

    #[test]
    fn witness_for_square_roots() {
        let e = eng();
        let x1 = Var::small("x1");
        let p = &Polynomial::var(&z()).pow(2) - &Polynomial::var(&x1);
        let w = almost_internal_witness(&e, &p, &z(), &BTreeMap::new()).unwrap();
        assert_eq!(w.bound, 2);
    }

    #[test]
    fn witness_for_pure_power() {
        let e = eng();
        let p = Polynomial::var(&z()).pow(3);
        let w = almost_internal_witness(&e, &p, &z(), &BTreeMap::new()).unwrap();
        assert_eq!(w.bound, 3);
        // The nonvanishing conjunct is identically true here, so the
        // relation reduces to z^3 = 0.
        assert!(w.relation.alpha_eq(&Formula::eq(Polynomial::var(&z()).pow(3))));
    }

    #[test]
    fn witness_rejects_zero_polynomial() {
        let e = eng();
        let err = almost_internal_witness(&e, &Polynomial::zero(), &z(), &BTreeMap::new());
        assert!(matches!(err, Err(EngineError::ZeroPolynomial)));
    }
}
