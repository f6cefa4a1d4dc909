//! Normal forms for formulas over a pair (K, k): special formulas
//! `exists x (U(x) and phi(x, y))` with phi in the ring language, very
//! special formulas whose matrix is `P_1 = .. = P_r = 0 and Q != 0`, and
//! the disjunction-of-(positive and negated very specials) normal form
//! every supported formula reduces to.
//!
//! The supported fragment is declared and checked: boolean combinations
//! of ring-language formulas and of special formulas whose matrices are
//! U-free, with small-sort quantifiers occurring only positively after
//! negation normal form. A field quantifier scoping over a U atom is
//! reported as unsupported, never approximated.

use std::collections::BTreeSet;

use crate::acfqe::{self, reduce_poly};
use crate::error::EngineError;
use crate::formula::{dnf_literals, nnf, Atom, Formula, Literal, Quantifier};
use crate::poly::{Polynomial, Sort, Var};
use crate::Engine;

/// exists x (U(x) and matrix), with matrix a formula of the pure ring
/// language (field quantifiers allowed, U forbidden).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SpecialFormula {
    u_vars: Vec<Var>,
    matrix: Formula,
}

impl SpecialFormula {
    pub fn new(u_vars: Vec<Var>, matrix: Formula) -> Result<Self, EngineError> {
        if !matrix.is_pure_field() {
            return Err(EngineError::Invalid(format!(
                "special matrix must be U-free: {matrix}"
            )));
        }
        for v in &u_vars {
            if v.sort() != Sort::Small {
                return Err(EngineError::Sort(format!(
                    "special block variable {} is not small-sort",
                    v.name()
                )));
            }
        }
        Ok(SpecialFormula { u_vars, matrix })
    }

    pub fn u_vars(&self) -> &[Var] {
        &self.u_vars
    }

    pub fn matrix(&self) -> &Formula {
        &self.matrix
    }

    /// The plain truth formula as a special with empty block.
    pub fn truth() -> Self {
        SpecialFormula { u_vars: Vec::new(), matrix: Formula::truth() }
    }

    pub fn to_formula(&self) -> Formula {
        let mut f = self.matrix.clone();
        for v in self.u_vars.iter().rev() {
            f = Formula::exists(v.clone(), f);
        }
        f
    }
}

/// Conjunction of two specials: concatenate the blocks, conjoin the
/// matrices. Blocks are renamed apart if they collide.
pub fn special_and(a: &SpecialFormula, b: &SpecialFormula) -> SpecialFormula {
    let (a, b) = rename_apart(a, b);
    SpecialFormula {
        u_vars: [a.u_vars.clone(), b.u_vars.clone()].concat(),
        matrix: Formula::and(a.matrix.clone(), b.matrix.clone()),
    }
}

/// Disjunction of two specials: concatenate the blocks and take the
/// matrix disjunction. Each disjunct constrains only its own block; the
/// other block's variables are unconstrained, which is harmless since
/// the small field is nonempty.
pub fn special_or(a: &SpecialFormula, b: &SpecialFormula) -> SpecialFormula {
    let (a, b) = rename_apart(a, b);
    SpecialFormula {
        u_vars: [a.u_vars.clone(), b.u_vars.clone()].concat(),
        matrix: Formula::or(a.matrix.clone(), b.matrix.clone()),
    }
}

fn rename_apart(a: &SpecialFormula, b: &SpecialFormula) -> (SpecialFormula, SpecialFormula) {
    let a_names: BTreeSet<&str> = a.u_vars.iter().map(|v| v.name()).collect();
    if b.u_vars.iter().all(|v| !a_names.contains(v.name())) {
        return (a.clone(), b.clone());
    }
    let mut avoid: BTreeSet<String> = a.matrix.all_names();
    avoid.extend(b.matrix.all_names());
    avoid.extend(a.u_vars.iter().map(|v| v.name().to_string()));
    avoid.extend(b.u_vars.iter().map(|v| v.name().to_string()));
    let mut counter = 0usize;
    let mut b2 = b.clone();
    for i in 0..b2.u_vars.len() {
        if a_names.contains(b2.u_vars[i].name()) {
            let name = crate::formula::fresh(b2.u_vars[i].name(), &mut avoid, &mut counter);
            let nv = Var::small(name);
            b2.matrix = rename_in_formula(&b2.matrix, &b2.u_vars[i], &nv);
            b2.u_vars[i] = nv;
        }
    }
    (a.clone(), b2)
}

fn rename_in_formula(f: &Formula, from: &Var, to: &Var) -> Formula {
    match f {
        Formula::Atom(Atom::Eq(p)) => Formula::eq(p.rename_var(from, to)),
        Formula::Atom(Atom::Neq(p)) => Formula::neq(p.rename_var(from, to)),
        Formula::Atom(Atom::InU(v)) => {
            Formula::in_u(if v == from { to.clone() } else { v.clone() })
        }
        Formula::Not(g) => Formula::Not(Box::new(rename_in_formula(g, from, to))),
        Formula::And(a, b) => Formula::And(
            Box::new(rename_in_formula(a, from, to)),
            Box::new(rename_in_formula(b, from, to)),
        ),
        Formula::Or(a, b) => Formula::Or(
            Box::new(rename_in_formula(a, from, to)),
            Box::new(rename_in_formula(b, from, to)),
        ),
        Formula::Quant(q, v, body) => {
            if v == from {
                Formula::Quant(*q, v.clone(), body.clone())
            } else {
                Formula::Quant(*q, v.clone(), Box::new(rename_in_formula(body, from, to)))
            }
        }
    }
}

/// exists x (U(x) and P_1 = .. = P_r = 0 and Q != 0), r >= 1. Q may be
/// the constant 1 when there is no inequation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct VerySpecialFormula {
    u_vars: Vec<Var>,
    eqs: Vec<Polynomial>,
    ineq: Polynomial,
}

impl VerySpecialFormula {
    /// Canonical constructor: unused block variables pruned, block
    /// variables renamed positionally, equations sorted and deduplicated.
    pub fn new(u_vars: Vec<Var>, eqs: Vec<Polynomial>, ineq: Polynomial) -> Self {
        let mut eqs = eqs;
        if eqs.is_empty() {
            eqs.push(Polynomial::zero());
        }
        let vs = VerySpecialFormula { u_vars, eqs, ineq };
        vs.canonicalized()
    }

    /// The whole space: eqs = [0], ineq = 1, empty block.
    pub fn truth() -> Self {
        VerySpecialFormula {
            u_vars: Vec::new(),
            eqs: vec![Polynomial::zero()],
            ineq: Polynomial::one(),
        }
    }

    pub fn is_truth(&self) -> bool {
        self.u_vars.is_empty() && self.eqs.iter().all(|p| p.is_zero()) && self.ineq.is_one()
    }

    pub fn u_vars(&self) -> &[Var] {
        &self.u_vars
    }

    pub fn eqs(&self) -> &[Polynomial] {
        &self.eqs
    }

    pub fn ineq(&self) -> &Polynomial {
        &self.ineq
    }

    /// Free variables of the defining polynomials, block excluded.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for p in self.eqs.iter().chain([&self.ineq]) {
            out.extend(p.vars());
        }
        for u in &self.u_vars {
            out.remove(u);
        }
        out
    }

    fn canonicalized(&self) -> VerySpecialFormula {
        // One canonicalization pass can reorder equations whose sort keys
        // depend on the block names it rewrites; iterate to a fixed point
        // so the canonical form is stable under renormalization.
        let mut current = self.canonical_pass();
        for _ in 0..8 {
            let next = current.canonical_pass();
            if next == current {
                break;
            }
            current = next;
        }
        current
    }

    fn canonical_pass(&self) -> VerySpecialFormula {
        // Drop block variables that no polynomial mentions.
        let used: Vec<Var> = self
            .u_vars
            .iter()
            .filter(|u| {
                self.eqs.iter().any(|p| p.contains_var(u)) || self.ineq.contains_var(u)
            })
            .cloned()
            .collect();
        // Order equations by a key blind to block-variable names: each
        // polynomial has its block variables renamed to positional
        // placeholders by first occurrence within that polynomial.
        let erased = |p: &Polynomial| -> Polynomial {
            let mut out = p.clone();
            let mut seen: Vec<Var> = Vec::new();
            for v in p.vars() {
                if used.contains(&v) {
                    seen.push(v);
                }
            }
            for (i, u) in seen.iter().enumerate() {
                out = out.rename_var(u, &Var::small(format!("#p{i}")));
            }
            out
        };
        let mut eqs = self.eqs.clone();
        eqs.sort_by(|a, b| erased(a).cmp(&erased(b)).then_with(|| a.cmp(b)));
        eqs.dedup();
        let free_names: BTreeSet<String> = {
            let mut names: BTreeSet<String> = BTreeSet::new();
            for p in eqs.iter().chain([&self.ineq]) {
                for v in p.vars() {
                    if !used.contains(&v) {
                        names.insert(v.name().to_string());
                    }
                }
            }
            names
        };
        let mut order: Vec<Var> = Vec::new();
        for p in eqs.iter().chain([&self.ineq]) {
            for v in p.vars() {
                if used.contains(&v) && !order.contains(&v) {
                    order.push(v);
                }
            }
        }
        let mut renames: Vec<(Var, Var)> = Vec::new();
        let mut index = 0usize;
        for u in &order {
            loop {
                index += 1;
                let name = format!("u{index}");
                if !free_names.contains(&name) {
                    renames.push((u.clone(), Var::small(name)));
                    break;
                }
            }
        }
        let apply = |p: &Polynomial| -> Polynomial {
            let mut out = p.clone();
            for (i, (from, _)) in renames.iter().enumerate() {
                if out.contains_var(from) {
                    out = out.rename_var(from, &Var::small(format!("#c{i}")));
                }
            }
            for (i, (_, to)) in renames.iter().enumerate() {
                let tmp = Var::small(format!("#c{i}"));
                if out.contains_var(&tmp) {
                    out = out.rename_var(&tmp, to);
                }
            }
            out
        };
        let mut eqs: Vec<Polynomial> = eqs.iter().map(&apply).collect();
        eqs.sort();
        eqs.dedup();
        VerySpecialFormula {
            u_vars: renames.iter().map(|(_, to)| to.clone()).collect(),
            eqs,
            ineq: apply(&self.ineq),
        }
    }

    pub fn to_formula(&self) -> Formula {
        let mut body = Formula::truth();
        for p in &self.eqs {
            body = Formula::and(body, Formula::eq(p.clone()));
        }
        body = Formula::and(body, Formula::neq(self.ineq.clone()));
        let mut f = body;
        for v in self.u_vars.iter().rev() {
            f = Formula::exists(v.clone(), f);
        }
        f
    }
}

/// One disjunct of the pair normal form: a positive very special formula
/// together with negated very special formulas.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Disjunct {
    pub positive: VerySpecialFormula,
    pub negatives: Vec<VerySpecialFormula>,
}

impl Disjunct {
    pub fn to_formula(&self) -> Formula {
        let mut f = self.positive.to_formula();
        for n in &self.negatives {
            f = Formula::and(f, Formula::not(n.to_formula()));
        }
        f
    }
}

/// Disjunction of disjuncts; the empty disjunction is the empty set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct PairNormalForm {
    pub disjuncts: Vec<Disjunct>,
}

impl PairNormalForm {
    pub fn empty() -> Self {
        PairNormalForm { disjuncts: Vec::new() }
    }

    pub fn is_empty_set(&self) -> bool {
        self.disjuncts.is_empty()
    }

    pub fn to_formula(&self) -> Formula {
        if self.disjuncts.is_empty() {
            return Formula::falsity();
        }
        Formula::or_all(self.disjuncts.iter().map(|d| d.to_formula()))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for d in &self.disjuncts {
            out.extend(d.positive.free_vars());
            for n in &d.negatives {
                out.extend(n.free_vars());
            }
        }
        out
    }
}

/// Rewrites a special formula as a disjunction of very special formulas:
/// field quantifiers inside the matrix are eliminated, the matrix is put
/// in disjunctive normal form, and each clause's inequations multiply
/// into a single product.
pub fn to_very_special(
    eng: &Engine,
    s: &SpecialFormula,
) -> Result<Vec<VerySpecialFormula>, EngineError> {
    let matrix = acfqe::qe(eng, &s.matrix)?;
    let clauses = dnf_literals(&matrix, eng.max_clauses)?;
    let mut out = Vec::new();
    'clauses: for clause in clauses {
        let mut eqs: Vec<Polynomial> = Vec::new();
        let mut ineq = Polynomial::one();
        for lit in clause {
            match lit {
                Literal::InU(v) | Literal::NotInU(v) => {
                    return Err(EngineError::Invalid(format!(
                        "U({}) inside a special matrix",
                        v.name()
                    )));
                }
                Literal::Eq(p) => {
                    let p = reduce_poly(eng, &p)?;
                    match p.as_constant() {
                        Some(c) if num::Zero::is_zero(&c) => {}
                        Some(_) => continue 'clauses,
                        None => eqs.push(p.integer_normalized()),
                    }
                }
                Literal::Neq(p) => {
                    let p = reduce_poly(eng, &p)?;
                    match p.as_constant() {
                        Some(c) if num::Zero::is_zero(&c) => continue 'clauses,
                        Some(_) => {}
                        None => ineq = reduce_poly(eng, &(&ineq * &p))?.integer_normalized(),
                    }
                }
            }
        }
        out.push(VerySpecialFormula::new(s.u_vars.clone(), eqs, ineq));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

enum Build {
    Pos(SpecialFormula),
    Neg(SpecialFormula),
    And(Vec<Build>),
    Or(Vec<Build>),
}

/// Reduces a formula of the supported fragment to pair normal form.
pub fn normalize(eng: &Engine, f: &Formula) -> Result<PairNormalForm, EngineError> {
    let f = nnf(f);
    let mut state = BlockState::for_formula(&f);
    let build = build_tree(&f, &mut state)?;
    let clauses = distribute(&build, eng.max_clauses)?;
    let mut disjuncts: Vec<Disjunct> = Vec::new();
    for clause in clauses {
        let positive = match clause.pos.len() {
            0 => SpecialFormula::truth(),
            _ => {
                let mut acc = clause.pos[0].clone();
                for s in &clause.pos[1..] {
                    acc = special_and(&acc, s);
                }
                acc
            }
        };
        let positives = to_very_special(eng, &positive)?;
        let mut negatives: Vec<VerySpecialFormula> = Vec::new();
        for neg in &clause.neg {
            negatives.extend(to_very_special(eng, neg)?);
        }
        negatives.sort();
        negatives.dedup();
        for pos in positives {
            disjuncts.push(Disjunct { positive: pos, negatives: negatives.clone() });
        }
    }
    disjuncts.sort();
    disjuncts.dedup();
    Ok(PairNormalForm { disjuncts })
}

struct BlockState {
    avoid: BTreeSet<String>,
    counter: usize,
}

impl BlockState {
    fn for_formula(f: &Formula) -> Self {
        BlockState { avoid: f.all_names(), counter: 0 }
    }

    fn fresh_small(&mut self, base: &str) -> Var {
        Var::small(crate::formula::fresh(base, &mut self.avoid, &mut self.counter))
    }
}

fn build_tree(f: &Formula, state: &mut BlockState) -> Result<Build, EngineError> {
    if f.is_pure_field() {
        return Ok(Build::Pos(SpecialFormula { u_vars: Vec::new(), matrix: f.clone() }));
    }
    match f {
        Formula::Atom(Atom::InU(v)) => {
            if v.sort() == Sort::Transcendental {
                // A transcendental constant never lies in the subfield.
                return Ok(Build::Pos(SpecialFormula {
                    u_vars: Vec::new(),
                    matrix: Formula::falsity(),
                }));
            }
            Ok(Build::Pos(membership_special(v, state)))
        }
        Formula::Not(inner) => match &**inner {
            Formula::Atom(Atom::InU(v)) => {
                if v.sort() == Sort::Transcendental {
                    return Ok(Build::Pos(SpecialFormula {
                        u_vars: Vec::new(),
                        matrix: Formula::truth(),
                    }));
                }
                Ok(Build::Neg(membership_special(v, state)))
            }
            _ => Err(EngineError::UnsupportedFragment(format!(
                "negation not reduced by negation normal form: {f}"
            ))),
        },
        Formula::And(a, b) => Ok(Build::And(vec![build_tree(a, state)?, build_tree(b, state)?])),
        Formula::Or(a, b) => Ok(Build::Or(vec![build_tree(a, state)?, build_tree(b, state)?])),
        Formula::Quant(Quantifier::Exists, v, body) if v.sort() == Sort::Small => {
            let mut u_vars = vec![v.clone()];
            let matrix = collect_block(body, &mut u_vars, state)?;
            Ok(Build::Pos(SpecialFormula { u_vars, matrix }))
        }
        Formula::Quant(Quantifier::Forall, v, body) if v.sort() == Sort::Small => {
            // forall x in U. b  ==  not exists x in U. not b
            let mut u_vars = vec![v.clone()];
            let matrix = collect_block(&nnf(&Formula::not((**body).clone())), &mut u_vars, state)?;
            Ok(Build::Neg(SpecialFormula { u_vars, matrix }))
        }
        Formula::Quant(_, v, _) => Err(EngineError::UnsupportedFragment(format!(
            "field quantifier over {} scopes over a U atom: {f}",
            v.name()
        ))),
        Formula::Atom(_) => unreachable!("pure atoms handled above"),
    }
}

fn membership_special(v: &Var, state: &mut BlockState) -> SpecialFormula {
    let u = state.fresh_small("u");
    let matrix = Formula::eq(&Polynomial::var(v) - &Polynomial::var(&u));
    SpecialFormula { u_vars: vec![u], matrix }
}

/// Digests the body of a small-quantifier block into a pure matrix,
/// extending the block for nested small existentials and for positive
/// U atoms on outside variables.
fn collect_block(
    f: &Formula,
    u_vars: &mut Vec<Var>,
    state: &mut BlockState,
) -> Result<Formula, EngineError> {
    if f.is_pure_field() {
        return Ok(f.clone());
    }
    match f {
        Formula::Atom(Atom::InU(v)) => {
            if v.sort() == Sort::Small {
                // Guarded by an enclosing block: trivially true.
                return Ok(Formula::truth());
            }
            if v.sort() == Sort::Transcendental {
                return Ok(Formula::falsity());
            }
            let u = state.fresh_small("u");
            u_vars.push(u.clone());
            Ok(Formula::eq(&Polynomial::var(v) - &Polynomial::var(&u)))
        }
        Formula::Not(inner) => match &**inner {
            Formula::Atom(Atom::InU(v)) => match v.sort() {
                Sort::Small => Ok(Formula::falsity()),
                Sort::Transcendental => Ok(Formula::truth()),
                Sort::Field => Err(EngineError::UnsupportedFragment(format!(
                    "negated U atom under a small quantifier: ~U({})",
                    v.name()
                ))),
            },
            _ => Err(EngineError::UnsupportedFragment(format!(
                "negation not reduced by negation normal form: {f}"
            ))),
        },
        Formula::And(a, b) => Ok(Formula::and(
            collect_block(a, u_vars, state)?,
            collect_block(b, u_vars, state)?,
        )),
        Formula::Or(a, b) => Ok(Formula::or(
            collect_block(a, u_vars, state)?,
            collect_block(b, u_vars, state)?,
        )),
        Formula::Quant(Quantifier::Exists, v, body) if v.sort() == Sort::Small => {
            u_vars.push(v.clone());
            collect_block(body, u_vars, state)
        }
        Formula::Quant(Quantifier::Forall, v, _) if v.sort() == Sort::Small => {
            Err(EngineError::UnsupportedFragment(format!(
                "universal small quantifier over {} inside a small block",
                v.name()
            )))
        }
        Formula::Quant(_, v, _) => Err(EngineError::UnsupportedFragment(format!(
            "field quantifier over {} scopes over a U atom: {f}",
            v.name()
        ))),
        Formula::Atom(_) => unreachable!("pure atoms handled above"),
    }
}

struct SignedClause {
    pos: Vec<SpecialFormula>,
    neg: Vec<SpecialFormula>,
}

fn distribute(build: &Build, budget: usize) -> Result<Vec<SignedClause>, EngineError> {
    match build {
        Build::Pos(s) => Ok(vec![SignedClause { pos: vec![s.clone()], neg: vec![] }]),
        Build::Neg(s) => Ok(vec![SignedClause { pos: vec![], neg: vec![s.clone()] }]),
        Build::Or(items) => {
            let mut out = Vec::new();
            for item in items {
                out.extend(distribute(item, budget)?);
                if out.len() > budget {
                    return Err(EngineError::SizeLimit { clauses: out.len(), budget });
                }
            }
            Ok(out)
        }
        Build::And(items) => {
            let mut acc = vec![SignedClause { pos: vec![], neg: vec![] }];
            for item in items {
                let rhs = distribute(item, budget)?;
                let count = acc.len().saturating_mul(rhs.len());
                if count > budget {
                    return Err(EngineError::SizeLimit { clauses: count, budget });
                }
                let mut next = Vec::with_capacity(count);
                for a in &acc {
                    for b in &rhs {
                        next.push(SignedClause {
                            pos: [a.pos.clone(), b.pos.clone()].concat(),
                            neg: [a.neg.clone(), b.neg.clone()].concat(),
                        });
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
    }
}
