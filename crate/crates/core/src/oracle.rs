//! Independent verification oracles. Nothing here shares a code path
//! with the engines it checks: solvability over the algebraic numbers is
//! decided by gcd stripping, dimension is estimated by finite-field
//! point counts, and formulas are compared by sampling.

use num::Integer;
use std::collections::BTreeMap;

use crate::error::EngineError;
use crate::formula::{Atom, Formula};
use crate::poly::{gcd_univariate, Polynomial, Sort, Var};
use crate::Engine;

/// Decides `exists y (p_1 = .. = p_k = 0 and q != 0)` over the algebraic
/// closure of the rationals, for univariate rational polynomials.
///
/// With no equations the witnesses are cofinite, so the answer is `q` not
/// being the zero polynomial. Otherwise the common roots are the roots of
/// g = gcd(p_i); stripping gcd(g, q) factors until none remain leaves
/// exactly the common roots that avoid q.
pub fn exists_root_not_root(
    ps: &[Polynomial],
    q: &Polynomial,
    v: &Var,
) -> Result<bool, EngineError> {
    let live: Vec<&Polynomial> = ps.iter().filter(|p| !p.is_zero()).collect();
    if live.is_empty() {
        return Ok(!q.is_zero());
    }
    let mut g = Polynomial::zero();
    for p in live {
        g = gcd_univariate(&g, p, v)?;
    }
    if g.degree_in(v) == 0 {
        return Ok(false);
    }
    if q.is_zero() {
        return Ok(false);
    }
    loop {
        let h = gcd_univariate(&g, q, v)?;
        if h.degree_in(v) == 0 {
            break;
        }
        g = g.div_exact(&h).expect("gcd divides");
    }
    Ok(g.degree_in(v) >= 1)
}

/// Quantifier-free evaluation under an assignment of values to every free
/// variable. Values are polynomials in the declared transcendental
/// constants; a value lies in the small subfield exactly when it is a
/// rational constant, since the constants are algebraically independent
/// over it.
pub fn eval_qf(f: &Formula, assignment: &BTreeMap<Var, Polynomial>) -> Result<bool, EngineError> {
    match f {
        Formula::Atom(Atom::Eq(p)) => Ok(eval_poly(p, assignment)?.is_zero()),
        Formula::Atom(Atom::Neq(p)) => Ok(!eval_poly(p, assignment)?.is_zero()),
        Formula::Atom(Atom::InU(v)) => {
            let value = assignment
                .get(v)
                .ok_or_else(|| EngineError::FreeVariable(v.name().to_string()))?;
            Ok(value.as_constant().is_some())
        }
        Formula::Not(g) => Ok(!eval_qf(g, assignment)?),
        Formula::And(a, b) => Ok(eval_qf(a, assignment)? && eval_qf(b, assignment)?),
        Formula::Or(a, b) => Ok(eval_qf(a, assignment)? || eval_qf(b, assignment)?),
        Formula::Quant(_, v, _) => Err(EngineError::Invalid(format!(
            "quantifier over {} in quantifier-free evaluation",
            v.name()
        ))),
    }
}

fn eval_poly(
    p: &Polynomial,
    assignment: &BTreeMap<Var, Polynomial>,
) -> Result<Polynomial, EngineError> {
    let mut out = p.clone();
    for (i, (v, _)) in assignment.iter().enumerate() {
        if out.contains_var(v) {
            out = out.rename_var(v, &Var::new(format!("#e{i}"), v.sort()));
        }
    }
    for (i, (v, value)) in assignment.iter().enumerate() {
        let tmp = Var::new(format!("#e{i}"), v.sort());
        if out.contains_var(&tmp) {
            out = out.substitute(&tmp, value);
        }
    }
    for v in out.vars() {
        if v.sort() != Sort::Transcendental {
            return Err(EngineError::FreeVariable(v.name().to_string()));
        }
    }
    Ok(out)
}

/// Substitutes closed values into a formula's free variables, folding
/// U atoms on assigned variables to their truth value. Output is a
/// sentence over the transcendental constants.
pub fn substitute_closed(
    f: &Formula,
    assignment: &BTreeMap<Var, Polynomial>,
) -> Result<Formula, EngineError> {
    fn fold_u(f: &Formula, assignment: &BTreeMap<Var, Polynomial>) -> Formula {
        match f {
            Formula::Atom(Atom::InU(v)) => match assignment.get(v) {
                Some(value) => {
                    if value.as_constant().is_some() {
                        Formula::truth()
                    } else {
                        Formula::falsity()
                    }
                }
                None => f.clone(),
            },
            Formula::Atom(_) => f.clone(),
            Formula::Not(g) => Formula::Not(Box::new(fold_u(g, assignment))),
            Formula::And(a, b) => {
                Formula::And(Box::new(fold_u(a, assignment)), Box::new(fold_u(b, assignment)))
            }
            Formula::Or(a, b) => {
                Formula::Or(Box::new(fold_u(a, assignment)), Box::new(fold_u(b, assignment)))
            }
            Formula::Quant(q, v, body) => {
                Formula::Quant(*q, v.clone(), Box::new(fold_u(body, assignment)))
            }
        }
    }
    fold_u(f, assignment).substitute(assignment)
}

/// One disagreement found by [`sample_check`].
#[derive(Debug, Clone)]
pub struct Disagreement {
    pub assignment: Vec<(Var, Polynomial)>,
    pub engine_verdict: bool,
    pub oracle_verdict: bool,
}

/// Point-by-point comparison report.
#[derive(Debug, Clone)]
pub struct SampleReport {
    pub total: usize,
    pub agreements: usize,
    pub disagreements: Vec<Disagreement>,
}

impl SampleReport {
    pub fn all_agree(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Compares two formulas pointwise over the given assignments of closed
/// values; each side is decided as a pair sentence.
pub fn sample_check(
    eng: &Engine,
    engine_formula: &Formula,
    reference_formula: &Formula,
    assignments: &[BTreeMap<Var, Polynomial>],
) -> Result<SampleReport, EngineError> {
    let mut report =
        SampleReport { total: assignments.len(), agreements: 0, disagreements: Vec::new() };
    for asg in assignments {
        let lhs = crate::dim2::decide_pair_sentence(eng, &substitute_closed(engine_formula, asg)?)?;
        let rhs =
            crate::dim2::decide_pair_sentence(eng, &substitute_closed(reference_formula, asg)?)?;
        if lhs == rhs {
            report.agreements += 1;
        } else {
            report.disagreements.push(Disagreement {
                assignment: asg.iter().map(|(v, p)| (v.clone(), p.clone())).collect(),
                engine_verdict: lhs,
                oracle_verdict: rhs,
            });
        }
    }
    Ok(report)
}

/// Least-squares slope of log(point count) against log(p) over the given
/// primes: a heuristic dimension estimate for the variety of the given
/// integer-coefficient equations. Never part of an acceptance decision.
pub fn ffield_dim_estimate(eqs: &[Polynomial], primes: &[u64]) -> f64 {
    let vars: Vec<Var> = {
        let mut set = std::collections::BTreeSet::new();
        for e in eqs {
            set.extend(e.vars());
        }
        set.into_iter().collect()
    };
    let n = vars.len();
    let mut points = Vec::new();
    for &p in primes {
        let count = if eqs.is_empty() {
            (p as f64).powi(n as i32) as u64
        } else {
            count_points_mod_p(eqs, &vars, p)
        };
        if count > 0 {
            points.push(((p as f64).ln(), (count as f64).ln()));
        }
    }
    if points.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let m = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    (m * sxy - sx * sy) / (m * sxx - sx * sx)
}

fn count_points_mod_p(eqs: &[Polynomial], vars: &[Var], p: u64) -> u64 {
    let modulus = num::BigInt::from(p);
    let compiled: Vec<Vec<(u64, Vec<u32>)>> = eqs
        .iter()
        .map(|e| {
            e.terms()
                .map(|(m, c)| {
                    let num: u64 = c.numer().mod_floor(&modulus).try_into().unwrap();
                    let den: u64 = c.denom().mod_floor(&modulus).try_into().unwrap();
                    let coeff = num * mod_inv(den, p) % p;
                    (coeff, vars.iter().map(|v| m.exp_of(v)).collect())
                })
                .collect()
        })
        .collect();
    let n = vars.len();
    let mut assignment = vec![0u64; n];
    let mut count = 0u64;
    loop {
        let all_zero = compiled.iter().all(|terms| {
            let mut acc = 0u64;
            for (c, exps) in terms {
                let mut t = *c;
                for (i, e) in exps.iter().enumerate() {
                    t = t * mod_pow(assignment[i], *e as u64, p) % p;
                }
                acc = (acc + t) % p;
            }
            acc == 0
        });
        if all_zero {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            assignment[i] += 1;
            if assignment[i] < p {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut out = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            out = out * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    out
}

fn mod_inv(a: u64, p: u64) -> u64 {
    mod_pow(a, p - 2, p)
}

/// Rank of a set of vectors over F_p by Gaussian elimination.
pub fn gaussian_rank(vectors: &[Vec<i64>], modulus: u64) -> Result<u32, EngineError> {
    if !small_prime(modulus) {
        return Err(EngineError::NotPrime(modulus));
    }
    let dim = vectors.first().map(|v| v.len()).unwrap_or(0);
    for v in vectors {
        if v.len() != dim {
            return Err(EngineError::DimensionMismatch { expected: dim, got: v.len() });
        }
    }
    let mut rows: Vec<Vec<u64>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x.rem_euclid(modulus as i64) as u64).collect())
        .collect();
    let mut rank = 0usize;
    for col in 0..dim {
        let pivot = (rank..rows.len()).find(|&r| rows[r][col] != 0);
        let Some(pivot) = pivot else { continue };
        rows.swap(rank, pivot);
        let inv = mod_inv(rows[rank][col], modulus);
        for c in 0..dim {
            rows[rank][c] = rows[rank][c] * inv % modulus;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let factor = rows[r][col];
                for c in 0..dim {
                    rows[r][c] = (rows[r][c] + (modulus - factor) * rows[rank][c]) % modulus;
                }
            }
        }
        rank += 1;
    }
    Ok(rank as u32)
}

fn small_prime(n: u64) -> bool {
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

/// Fixture corpus: formulas spanning the supported fragment. Used by the
/// round-trip, normalization, and sampling suites.
pub fn formula_corpus() -> Vec<&'static str> {
    vec![
        "0 = 0",
        "1 != 0",
        "x = 0",
        "x*x - 1 = 0",
        "~(x = 0)",
        "x != 0 & x*x = 1",
        "x = 0 | y = 0",
        "x = 0 -> y = 0",
        "U(z)",
        "~U(z)",
        "U(z) & z != 1",
        "U(z) | U(w)",
        "exists x. x*x = a",
        "exists x. x*x = a & x != 0",
        "forall x. x = 0 -> x*y = 0",
        "exists x. exists w. x*w = 1 & x = a",
        "exists u in U. z = u",
        "#trans t. exists u in U. z = u*t",
        "exists u in U. z*z = u",
        "exists u in U. u*z = 1",
        "#trans t. exists u in U. exists v in U. z = u + v*t",
        "forall u in U. u*z != 1 | u = 0",
        "exists u in U. (z = u | z = u + 1)",
        "exists u in U. z - u != 0",
        "exists u in U. u = 0 & z*u + 1 != 0",
        "exists u in U. z = u & z != 1 & z != 2",
        "U(y) & U(z)",
        "U(y) | ~U(z)",
        "(exists u in U. y = u) & (exists v in U. z = v)",
        "#trans t. ~(exists u in U. z = u*t)",
        "#trans t. exists u in U. exists x. x*x = u & z = x + t",
        "forall x. x*z = 0 -> x = 0",
        "(exists u in U. z = u) | ~U(z)",
        "#trans t. z = t",
        "#trans t. z != t & U(z)",
        "#trans t. exists u in U. t*z = u",
        "#trans t. U(z) -> z*z != t",
        "exists u in U. exists v in U. u*z + v = 0 & u != 0",
        "forall u in U. z != u",
        "exists u in U. y*u = z",
        "(exists u in U. z = u) & z != 0",
        "U(y) & exists u in U. z = u*y",
        "exists u in U. (z - u)*(z - u - 1) = 0",
        "#trans t. exists u in U. z*z - u = 0 & z != t",
        "forall x. exists w. w*w = x",
    ]
}
