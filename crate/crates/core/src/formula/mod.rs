//! First-order formulas over the ring language extended by the unary
//! small-subfield predicate U.
//!
//! Atoms are polynomial (in)equations with the right-hand side folded to
//! zero, plus U applied to a single variable. Quantifiers over the small
//! sort are guarded: `exists x in U. f` abbreviates the existential
//! guarded by U(x), `forall x in U. f` the dual universal.

mod parser;
mod print;
mod transform;

pub use parser::{parse, parse_polynomial, parse_with_transcendentals};
pub use transform::{alpha_normalize, dnf, dnf_literals, nnf, Literal};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::EngineError;
use crate::poly::{Polynomial, Sort, Var};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// p = 0
    Eq(Polynomial),
    /// p != 0
    Neq(Polynomial),
    /// U(v): v is a member of the small subfield
    InU(Var),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// Binds a field-sort variable plainly or a small-sort variable with
    /// an implicit U-guard, depending on the variable's sort.
    Quant(Quantifier, Var, Box<Formula>),
}

impl Formula {
    pub fn eq(p: Polynomial) -> Formula {
        Formula::Atom(Atom::Eq(p))
    }

    pub fn neq(p: Polynomial) -> Formula {
        Formula::Atom(Atom::Neq(p))
    }

    pub fn in_u(v: Var) -> Formula {
        Formula::Atom(Atom::InU(v))
    }

    /// 0 = 0, true in every structure.
    pub fn truth() -> Formula {
        Formula::eq(Polynomial::zero())
    }

    /// 0 != 0, false in every structure.
    pub fn falsity() -> Formula {
        Formula::neq(Polynomial::zero())
    }

    pub fn is_truth(&self) -> bool {
        matches!(self, Formula::Atom(Atom::Eq(p)) if p.is_zero())
    }

    pub fn is_falsity(&self) -> bool {
        matches!(self, Formula::Atom(Atom::Neq(p)) if p.is_zero())
    }

    pub fn not(f: Formula) -> Formula {
        if f.is_truth() {
            return Formula::falsity();
        }
        if f.is_falsity() {
            return Formula::truth();
        }
        Formula::Not(Box::new(f))
    }

    /// Conjunction with folding of the canonical truth values.
    pub fn and(a: Formula, b: Formula) -> Formula {
        if a.is_truth() {
            return b;
        }
        if b.is_truth() {
            return a;
        }
        if a.is_falsity() || b.is_falsity() {
            return Formula::falsity();
        }
        Formula::And(Box::new(a), Box::new(b))
    }

    /// Disjunction with folding of the canonical truth values.
    pub fn or(a: Formula, b: Formula) -> Formula {
        if a.is_falsity() {
            return b;
        }
        if b.is_falsity() {
            return a;
        }
        if a.is_truth() || b.is_truth() {
            return Formula::truth();
        }
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().fold(Formula::truth(), Formula::and)
    }

    pub fn or_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().fold(Formula::falsity(), Formula::or)
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Quant(Quantifier::Exists, v, Box::new(body))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Quant(Quantifier::Forall, v, Box::new(body))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        fn go(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
            match f {
                Formula::Atom(Atom::Eq(p)) | Formula::Atom(Atom::Neq(p)) => {
                    for v in p.vars() {
                        if !bound.contains(&v) {
                            out.insert(v);
                        }
                    }
                }
                Formula::Atom(Atom::InU(v)) => {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
                Formula::Not(g) => go(g, bound, out),
                Formula::And(a, b) | Formula::Or(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Quant(_, v, body) => {
                    bound.push(v.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn bound_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Quant(_, v, _) = f {
                out.insert(v.clone());
            }
        });
        out
    }

    /// All variable names mentioned anywhere, free or bound.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> =
            self.free_vars().iter().map(|v| v.name().to_string()).collect();
        out.extend(self.bound_vars().iter().map(|v| v.name().to_string()));
        self.walk(&mut |f| {
            if let Formula::Atom(Atom::Eq(p)) | Formula::Atom(Atom::Neq(p)) = f {
                out.extend(p.vars().iter().map(|v| v.name().to_string()));
            }
        });
        out
    }

    fn walk(&self, visit: &mut impl FnMut(&Formula)) {
        visit(self);
        match self {
            Formula::Atom(_) => {}
            Formula::Not(g) => g.walk(visit),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            Formula::Quant(_, _, body) => body.walk(visit),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        let mut qf = true;
        self.walk(&mut |f| {
            if matches!(f, Formula::Quant(..)) {
                qf = false;
            }
        });
        qf
    }

    /// True when the formula mentions neither U atoms nor small-sort
    /// bound variables: a formula of the pure ring language.
    pub fn is_pure_field(&self) -> bool {
        let mut pure = true;
        self.walk(&mut |f| match f {
            Formula::Atom(Atom::InU(_)) => pure = false,
            Formula::Quant(_, v, _) if v.sort() == Sort::Small => pure = false,
            _ => {}
        });
        pure
    }

    /// Capture-avoiding substitution of polynomials for free variables.
    /// Substituting for a bound variable is an error.
    pub fn substitute(&self, subst: &BTreeMap<Var, Polynomial>) -> Result<Formula, EngineError> {
        for v in self.bound_vars() {
            if subst.contains_key(&v) {
                return Err(EngineError::BoundVarSubstitution(v.name().to_string()));
            }
        }
        let mut sort_error = None;
        self.walk(&mut |f| {
            if let Formula::Atom(Atom::InU(v)) = f {
                if let Some(p) = subst.get(v) {
                    let vars = p.vars();
                    let is_plain_var = vars.len() == 1
                        && p == &Polynomial::var(vars.iter().next().unwrap());
                    if !is_plain_var && sort_error.is_none() {
                        sort_error = Some(v.name().to_string());
                    }
                }
            }
        });
        if let Some(name) = sort_error {
            return Err(EngineError::Sort(format!(
                "substitution replaces U-argument {name} by a compound term"
            )));
        }
        let mut avoid: BTreeSet<String> = self.all_names();
        for p in subst.values() {
            avoid.extend(p.vars().iter().map(|v| v.name().to_string()));
        }
        let mut counter = 0usize;
        Ok(self.substitute_inner(subst, &mut avoid, &mut counter))
    }

    fn substitute_inner(
        &self,
        subst: &BTreeMap<Var, Polynomial>,
        avoid: &mut BTreeSet<String>,
        counter: &mut usize,
    ) -> Formula {
        match self {
            Formula::Atom(Atom::Eq(p)) => Formula::eq(apply_poly_subst(p, subst)),
            Formula::Atom(Atom::Neq(p)) => Formula::neq(apply_poly_subst(p, subst)),
            Formula::Atom(Atom::InU(v)) => match subst.get(v) {
                None => Formula::in_u(v.clone()),
                // U over a substituted term stays U only for plain variables.
                Some(p) => {
                    let vars = p.vars();
                    if vars.len() == 1 && p == &Polynomial::var(vars.iter().next().unwrap()) {
                        Formula::in_u(vars.into_iter().next().unwrap())
                    } else {
                        // The caller replaced a U-argument by a compound
                        // term; keep the tree well-sorted by refusing.
                        Formula::in_u(v.clone())
                    }
                }
            },
            Formula::Not(g) => Formula::not(g.substitute_inner(subst, avoid, counter)),
            Formula::And(a, b) => Formula::And(
                Box::new(a.substitute_inner(subst, avoid, counter)),
                Box::new(b.substitute_inner(subst, avoid, counter)),
            ),
            Formula::Or(a, b) => Formula::Or(
                Box::new(a.substitute_inner(subst, avoid, counter)),
                Box::new(b.substitute_inner(subst, avoid, counter)),
            ),
            Formula::Quant(q, v, body) => {
                let incoming: BTreeSet<String> = subst
                    .values()
                    .flat_map(|p| p.vars().into_iter().map(|w| w.name().to_string()))
                    .collect();
                if incoming.contains(v.name()) {
                    let fresh_name = fresh(v.name(), avoid, counter);
                    let fresh_var = Var::new(fresh_name, v.sort());
                    let mut renamed = subst.clone();
                    renamed.insert(v.clone(), Polynomial::var(&fresh_var));
                    let body = body.substitute_inner(&renamed, avoid, counter);
                    Formula::Quant(*q, fresh_var, Box::new(body))
                } else {
                    Formula::Quant(*q, v.clone(), Box::new(body.substitute_inner(subst, avoid, counter)))
                }
            }
        }
    }

    /// Alpha-equivalence: equality up to consistent renaming of bound
    /// variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        fn go(a: &Formula, b: &Formula, map: &mut Vec<(Var, Var)>) -> bool {
            match (a, b) {
                (Formula::Atom(x), Formula::Atom(y)) => {
                    let x = rename_atom(x, map);
                    x == *y
                }
                (Formula::Not(x), Formula::Not(y)) => go(x, y, map),
                (Formula::And(x1, x2), Formula::And(y1, y2))
                | (Formula::Or(x1, x2), Formula::Or(y1, y2)) => {
                    go(x1, y1, map) && go(x2, y2, map)
                }
                (Formula::Quant(q1, v1, b1), Formula::Quant(q2, v2, b2)) => {
                    if q1 != q2 || v1.sort() != v2.sort() {
                        return false;
                    }
                    map.push((v1.clone(), v2.clone()));
                    let ok = go(b1, b2, map);
                    map.pop();
                    ok
                }
                _ => false,
            }
        }
        fn rename_atom(a: &Atom, map: &[(Var, Var)]) -> Atom {
            let rename_var = |v: &Var| -> Var {
                for (from, to) in map.iter().rev() {
                    if from == v {
                        return to.clone();
                    }
                }
                v.clone()
            };
            match a {
                Atom::Eq(p) => Atom::Eq(rename_poly(p, map, &rename_var)),
                Atom::Neq(p) => Atom::Neq(rename_poly(p, map, &rename_var)),
                Atom::InU(v) => Atom::InU(rename_var(v)),
            }
        }
        fn rename_poly(
            p: &Polynomial,
            map: &[(Var, Var)],
            rename_var: &impl Fn(&Var) -> Var,
        ) -> Polynomial {
            let mut out = p.clone();
            // Rename through temporaries so swaps cannot collide.
            let mut temps = Vec::new();
            for (i, (from, _)) in map.iter().enumerate() {
                if out.contains_var(from) {
                    let tmp = Var::new(format!("#tmp{i}"), from.sort());
                    out = out.rename_var(from, &tmp);
                    temps.push((tmp, rename_var(from)));
                }
            }
            for (tmp, to) in temps {
                out = out.rename_var(&tmp, &to);
            }
            out
        }
        go(self, other, &mut Vec::new())
    }
}

fn apply_poly_subst(p: &Polynomial, subst: &BTreeMap<Var, Polynomial>) -> Polynomial {
    let mut out = p.clone();
    // Two-phase rename through temporaries, so simultaneous substitution
    // is well-defined even when values mention substituted variables.
    let mut pending = Vec::new();
    for (i, (v, value)) in subst.iter().enumerate() {
        if out.contains_var(v) {
            let tmp = Var::new(format!("#s{i}"), v.sort());
            out = out.rename_var(v, &tmp);
            pending.push((tmp, value));
        }
    }
    for (tmp, value) in pending {
        out = out.substitute(&tmp, value);
    }
    out
}

pub(crate) fn fresh(base: &str, avoid: &mut BTreeSet<String>, counter: &mut usize) -> String {
    loop {
        *counter += 1;
        let candidate = format!("{base}_{counter}");
        if !avoid.contains(&candidate) {
            avoid.insert(candidate.clone());
            return candidate;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, Rat};

    #[test]
    fn parse_guarded_existential() {
        let f = parse("exists u in U. z^2 = u").unwrap();
        match &f {
            Formula::Quant(Quantifier::Exists, v, body) => {
                assert_eq!(v.sort(), Sort::Small);
                let z = Var::field("z");
                let expect = &Polynomial::var(&z).pow(2) - &Polynomial::var(v);
                assert_eq!(**body, Formula::eq(expect));
            }
            other => panic!("unexpected shape: {other:?}"),
        }
    }

    #[test]
    fn parse_negation_and_conjunction() {
        let f = parse("~(x = 0)").unwrap();
        assert_eq!(f, Formula::Not(Box::new(Formula::eq(Polynomial::var(&Var::field("x"))))));
        let g = parse("exists x. x*x = a & x != 0").unwrap();
        match g {
            Formula::Quant(Quantifier::Exists, v, body) => {
                assert_eq!(v.sort(), Sort::Field);
                assert!(matches!(*body, Formula::And(..)));
            }
            other => panic!("unexpected shape: {other:?}"),
        }
    }

    #[test]
    fn parse_reports_positions() {
        match parse("x = ") {
            Err(EngineError::Syntax { pos, .. }) => assert!(pos >= 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(matches!(parse("x + * = 0"), Err(EngineError::Syntax { .. })));
    }

    #[test]
    fn u_of_compound_term_is_a_sort_error() {
        assert!(matches!(parse("U(x + 1)"), Err(EngineError::Sort(_))));
        assert!(matches!(parse("U(3)"), Err(EngineError::Sort(_))));
    }

    #[test]
    fn trans_directive_declares_constants() {
        let f = parse("#trans t. z = t").unwrap();
        let vars = f.free_vars();
        assert!(vars.contains(&Var::transcendental("t")));
        assert!(vars.contains(&Var::field("z")));
    }

    #[test]
    fn shadowed_binders_are_renamed_apart() {
        let f = parse("(exists x. x = 0) & (exists x. x = 1)").unwrap();
        let bound = f.bound_vars();
        assert_eq!(bound.len(), 2);
        let g = parse("exists x. (exists x. x = 0) & x = 1").unwrap();
        assert_eq!(g.bound_vars().len(), 2);
    }

    #[test]
    fn binder_colliding_with_free_name_is_renamed() {
        let f = parse("(exists x. x = 0) & x = 1").unwrap();
        // The free x keeps its name; the bound one moves aside.
        assert!(f.free_vars().contains(&Var::field("x")));
        for b in f.bound_vars() {
            assert_ne!(b.name(), "x");
        }
    }

    #[test]
    fn print_round_trips() {
        for text in crate::oracle::formula_corpus() {
            let (f, trans) = parse_with_transcendentals(text, &[]).unwrap();
            let names: Vec<String> = trans.iter().map(|v| v.name().to_string()).collect();
            let printed = f.to_string();
            let (g, _) = parse_with_transcendentals(&printed, &names)
                .unwrap_or_else(|e| panic!("reparse of {printed:?}: {e}"));
            assert!(f.alpha_eq(&g), "round trip failed:\n  {text}\n  {printed}");
        }
    }

    #[test]
    fn print_examples() {
        let f = parse("exists u in U. z - u = 0").unwrap();
        assert_eq!(f.to_string(), "exists u in U. z - u = 0");
        assert_eq!(Formula::truth().to_string(), "0 = 0");
        let g = Formula::Not(Box::new(Formula::in_u(Var::field("z"))));
        assert_eq!(g.to_string(), "~U(z)");
    }

    #[test]
    fn nnf_pushes_negations_to_atoms() {
        let f = parse("~(p = 0 & q = 0)").unwrap();
        let expect = parse("p != 0 | q != 0").unwrap();
        assert_eq!(nnf(&f), expect);
        let g = parse("~(exists x. x = 0)").unwrap();
        match nnf(&g) {
            Formula::Quant(Quantifier::Forall, _, body) => {
                assert!(matches!(*body, Formula::Atom(Atom::Neq(_))));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn dnf_distributes() {
        let f = parse("(a = 0 | b = 0) & c != 0").unwrap();
        let clauses = dnf_literals(&f, 100).unwrap();
        assert_eq!(clauses.len(), 2);
        for clause in &clauses {
            assert_eq!(clause.len(), 2);
        }
        // Atom fixed point.
        let atom = parse("a = 0").unwrap();
        assert_eq!(dnf(&atom, 100).unwrap(), atom);
    }

    #[test]
    fn dnf_no_nested_disjunction_under_conjunction() {
        let f = parse("(a = 0 | b = 0) & (c = 0 | d = 0)").unwrap();
        let g = dnf(&f, 100).unwrap();
        fn no_or_under_and(f: &Formula, under_and: bool) -> bool {
            match f {
                Formula::Or(a, b) => {
                    !under_and && no_or_under_and(a, false) && no_or_under_and(b, false)
                }
                Formula::And(a, b) => no_or_under_and(a, true) && no_or_under_and(b, true),
                _ => true,
            }
        }
        assert!(no_or_under_and(&g, false));
    }

    #[test]
    fn dnf_budget_is_enforced() {
        let f = parse("(a = 0 | b = 0) & (c = 0 | d = 0) & (e = 0 | f = 0)").unwrap();
        assert!(matches!(dnf(&f, 4), Err(EngineError::SizeLimit { .. })));
        assert!(dnf(&f, 8).is_ok());
    }

    #[test]
    fn nnf_and_dnf_preserve_truth_on_samples() {
        let texts = [
            "~(x = 0 & y != 0)",
            "~(x = 0 | (y = 0 & x != 1))",
            "(x = 0 | y = 0) & (x != 0 | y != 0)",
            "x = 0 -> y = 0",
        ];
        let values: Vec<Rat> = (-2..=2).map(rat).collect();
        for text in texts {
            let f = parse(text).unwrap();
            let n = nnf(&f);
            let d = dnf(&f, 1000).unwrap();
            for x in &values {
                for y in &values {
                    let mut asg = BTreeMap::new();
                    asg.insert(Var::field("x"), Polynomial::constant(x.clone()));
                    asg.insert(Var::field("y"), Polynomial::constant(y.clone()));
                    let vf = crate::oracle::eval_qf(&f, &asg).unwrap();
                    assert_eq!(vf, crate::oracle::eval_qf(&n, &asg).unwrap(), "{text} nnf");
                    assert_eq!(vf, crate::oracle::eval_qf(&d, &asg).unwrap(), "{text} dnf");
                }
            }
        }
    }

    #[test]
    fn free_vars_and_substitution() {
        let f = parse("exists x. x*y = z").unwrap();
        let free = f.free_vars();
        assert_eq!(free.len(), 2);
        assert!(free.contains(&Var::field("y")) && free.contains(&Var::field("z")));

        let g = parse("y = 0").unwrap();
        let mut s = BTreeMap::new();
        let t = Var::field("t");
        s.insert(Var::field("y"), &Polynomial::var(&t) + &Polynomial::one());
        let h = g.substitute(&s).unwrap();
        assert_eq!(h, Formula::eq(&Polynomial::var(&t) + &Polynomial::one()));
    }

    #[test]
    fn substitution_avoids_capture() {
        let f = parse("exists x. x = y").unwrap();
        let mut s = BTreeMap::new();
        s.insert(Var::field("y"), Polynomial::var(&Var::field("x")));
        let g = f.substitute(&s).unwrap();
        match &g {
            Formula::Quant(Quantifier::Exists, v, body) => {
                assert_ne!(v.name(), "x");
                let expect = &Polynomial::var(v) - &Polynomial::var(&Var::field("x"));
                assert_eq!(**body, Formula::eq(expect));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn substituting_bound_variable_is_an_error() {
        let f = parse("exists x. x = y").unwrap();
        let bound = f.bound_vars().into_iter().next().unwrap();
        let mut s = BTreeMap::new();
        s.insert(bound, Polynomial::one());
        assert!(matches!(f.substitute(&s), Err(EngineError::BoundVarSubstitution(_))));
    }

    #[test]
    fn rationals_do_not_appear_in_parsed_text() {
        // The grammar has integer literals only; fractions must come from
        // engine-internal arithmetic, never the parser.
        assert!(parse("x = 1/2").is_err());
    }

    #[test]
    fn implication_desugars() {
        let f = parse("x = 0 -> y = 0").unwrap();
        let expect = parse("~(x = 0) | y = 0").unwrap();
        assert_eq!(f, expect);
    }
}
