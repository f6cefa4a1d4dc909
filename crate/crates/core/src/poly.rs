//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Monomials are ordered graded-lexicographically, so equality of
//! polynomials is structural equality and printed forms are canonical.
//! All values are immutable after construction; every operation is a pure
//! function.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::EngineError;

pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair.
pub fn rat_frac(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Variable sort: field variables range over K, small variables over the
/// distinguished subfield k, and transcendental constants are declared
/// elements of K algebraically independent from k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Field,
    Small,
    Transcendental,
}

// Field variables order before small and transcendental ones; the
// derived order is (sort, name).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    sort: Sort,
    name: String,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Var { name: name.into(), sort }
    }

    pub fn field(name: impl Into<String>) -> Self {
        Var::new(name, Sort::Field)
    }

    pub fn small(name: impl Into<String>) -> Self {
        Var::new(name, Sort::Small)
    }

    pub fn transcendental(name: impl Into<String>) -> Self {
        Var::new(name, Sort::Transcendental)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A monomial: finitely many variables with positive exponents, kept
/// sorted by variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<(Var, u32)>,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial { exps: Vec::new() }
    }

    pub fn var(v: &Var) -> Self {
        Monomial { exps: vec![(v.clone(), 1)] }
    }

    pub fn is_unit(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|(_, e)| e).sum()
    }

    pub fn exp_of(&self, v: &Var) -> u32 {
        self.exps
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.exps.iter().map(|(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            match self.exps[i].0.cmp(&other.exps[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(self.exps[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.exps[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((self.exps[i].0.clone(), self.exps[i].1 + other.exps[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.exps[i..]);
        out.extend_from_slice(&other.exps[j..]);
        Monomial { exps: out }
    }

    /// Monomial with `v` removed entirely.
    pub fn without(&self, v: &Var) -> Monomial {
        Monomial { exps: self.exps.iter().filter(|(w, _)| w != v).cloned().collect() }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().all(|(v, e)| other.exp_of(v) >= *e)
    }

    /// Quotient monomial; caller must have checked divisibility.
    pub fn div(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (v, e) in &self.exps {
            let d = e - other.exp_of(v);
            if d > 0 {
                out.push((v.clone(), d));
            }
        }
        Monomial { exps: out }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded lexicographic order: total degree first, ties broken on the
/// first variable (in variable order) whose exponents differ.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match self.degree().cmp(&other.degree()) {
            std::cmp::Ordering::Equal => {}
            ord => return ord,
        }
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            match self.exps[i].0.cmp(&other.exps[j].0) {
                std::cmp::Ordering::Less => return std::cmp::Ordering::Greater,
                std::cmp::Ordering::Greater => return std::cmp::Ordering::Less,
                std::cmp::Ordering::Equal => {
                    match self.exps[i].1.cmp(&other.exps[j].1) {
                        std::cmp::Ordering::Equal => {}
                        ord => return ord,
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        match (i < self.exps.len(), j < other.exps.len()) {
            (true, false) => std::cmp::Ordering::Greater,
            (false, true) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Equal,
        }
    }
}

/// Sparse multivariate polynomial over the rationals. The zero polynomial
/// is the empty term map; no zero coefficients are ever stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rat>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Polynomial::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::unit(), c);
        }
        Polynomial { terms }
    }

    pub fn int(n: i64) -> Self {
        Polynomial::constant(rat(n))
    }

    pub fn var(v: &Var) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(v), Rat::one());
        Polynomial { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rat)>) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    /// Some(c) when the polynomial is the constant c (including zero).
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_unit() {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars().cloned()).collect()
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.terms.keys().any(|m| m.exp_of(v) > 0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rat) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn map_coefficients(&self, mut f: impl FnMut(&Rat) -> Rat) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Degree in `v` (0 for polynomials not mentioning v, and for zero).
    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.exp_of(v)).max().unwrap_or(0)
    }

    /// Coefficients c_0..c_d with self = sum of c_j v^j, each c_j free of
    /// v. Empty for the zero polynomial.
    pub fn coeffs_in(&self, v: &Var) -> Vec<Polynomial> {
        if self.is_zero() {
            return Vec::new();
        }
        let d = self.degree_in(v) as usize;
        let mut out = vec![Polynomial::zero(); d + 1];
        for (m, c) in &self.terms {
            let e = m.exp_of(v) as usize;
            out[e].add_term(m.without(v), c.clone());
        }
        out
    }

    /// Rebuild from coefficients with respect to v.
    pub fn from_coeffs(v: &Var, coeffs: &[Polynomial]) -> Polynomial {
        let mut out = Polynomial::zero();
        let mut vp = Polynomial::one();
        for c in coeffs {
            out = &out + &(c * &vp);
            vp = &vp * &Polynomial::var(v);
        }
        out
    }

    /// Leading coefficient with respect to v (the whole polynomial when v
    /// is absent).
    pub fn leading_coeff_in(&self, v: &Var) -> Polynomial {
        let d = self.degree_in(v);
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            if m.exp_of(v) == d {
                out.add_term(m.without(v), c.clone());
            }
        }
        out
    }

    /// Polynomial with the leading v-term removed: self - lc(v) * v^deg.
    pub fn reductum_in(&self, v: &Var) -> Polynomial {
        let d = self.degree_in(v);
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            if m.exp_of(v) < d {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Substitutes rationals for the assigned variables; unassigned
    /// variables stay symbolic.
    pub fn evaluate(&self, assignment: &BTreeMap<Var, Rat>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for (v, e) in &m.exps {
                match assignment.get(v) {
                    Some(val) => {
                        for _ in 0..*e {
                            coeff *= val;
                        }
                    }
                    None => rest.push((v.clone(), *e)),
                }
            }
            out.add_term(Monomial { exps: rest }, coeff);
        }
        out
    }

    /// Capture-free substitution of a polynomial for a variable.
    pub fn substitute(&self, v: &Var, value: &Polynomial) -> Polynomial {
        if !self.contains_var(v) {
            return self.clone();
        }
        let coeffs = self.coeffs_in(v);
        // Horner evaluation at `value`.
        let mut out = Polynomial::zero();
        for c in coeffs.iter().rev() {
            out = &(&out * value) + c;
        }
        out
    }

    pub fn rename_var(&self, old: &Var, new: &Var) -> Polynomial {
        self.substitute(old, &Polynomial::var(new))
    }

    /// Canonical integer form: coefficients cleared to integers, content
    /// divided out, leading (largest-monomial) coefficient positive. The
    /// zero polynomial maps to itself. The result differs from self by a
    /// positive rational factor except for a possible sign flip.
    pub fn integer_normalized(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut denom_lcm = BigInt::one();
        for c in self.terms.values() {
            denom_lcm = num::integer::lcm(denom_lcm, c.denom().clone());
        }
        let ints: Vec<(Monomial, BigInt)> = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c.numer() * (&denom_lcm / c.denom())))
            .collect();
        let mut content = BigInt::zero();
        for (_, n) in &ints {
            content = num::integer::gcd(content, n.clone());
        }
        let leading_neg = ints.last().map(|(_, n)| n.is_negative()).unwrap_or(false);
        if leading_neg {
            content = -content;
        }
        Polynomial {
            terms: ints
                .into_iter()
                .map(|(m, n)| (m, Rat::from_integer(n / &content)))
                .collect(),
        }
    }

    /// Exact division; None when other does not divide self.
    pub fn div_exact(&self, other: &Polynomial) -> Option<Polynomial> {
        if other.is_zero() {
            return None;
        }
        let (lead_m, lead_c) = other.terms.iter().next_back().unwrap();
        let mut rem = self.clone();
        let mut quot = Polynomial::zero();
        while !rem.is_zero() {
            let (m, c) = rem.terms.iter().next_back().unwrap();
            if !lead_m.divides(m) {
                return None;
            }
            let qm = m.div(lead_m);
            let qc = c / lead_c;
            let t = Polynomial::from_terms([(qm, qc)]);
            rem = &rem - &(&t * other);
            quot = &quot + &t;
        }
        Some(quot)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rat::one())
    }
}

/// Pseudo-division with respect to v: lc(q,v)^power * p = quot*q + rem
/// with deg_v(rem) < deg_v(q). When deg_v(p) < deg_v(q) this is
/// (0, p, 0); when lc(q,v) = 1 no scaling happens and power stays 0.
pub fn pseudo_divide(
    p: &Polynomial,
    q: &Polynomial,
    v: &Var,
) -> Result<(Polynomial, Polynomial, u32), EngineError> {
    let dq = q.degree_in(v);
    if dq == 0 {
        return Err(EngineError::ZeroDegree(v.name().to_string()));
    }
    let lc = q.leading_coeff_in(v);
    let lc_is_one = lc.is_one();
    let mut rem = p.clone();
    let mut quot = Polynomial::zero();
    let mut power = 0u32;
    while !rem.is_zero() && rem.degree_in(v) >= dq {
        let dr = rem.degree_in(v);
        let lr = rem.leading_coeff_in(v);
        let shift = Polynomial::var(v).pow(dr - dq);
        let t = &lr * &shift;
        if lc_is_one {
            rem = &rem - &(&t * q);
            quot = &quot + &t;
        } else {
            rem = &(&lc * &rem) - &(&t * q);
            quot = &(&lc * &quot) + &t;
            power += 1;
        }
        debug_assert!(rem.is_zero() || rem.degree_in(v) < dr);
    }
    Ok((quot, rem, power))
}

/// Sylvester resultant with respect to v, computed by fraction-free
/// Gaussian elimination. Rows are deg_v(p) shifted copies of q followed
/// by deg_v(q) shifted copies of p, coefficients written from the leading
/// v-power down.
pub fn resultant(p: &Polynomial, q: &Polynomial, v: &Var) -> Result<Polynomial, EngineError> {
    let dp = p.degree_in(v) as usize;
    let dq = q.degree_in(v) as usize;
    if dp == 0 || dq == 0 {
        return Err(EngineError::ZeroDegree(v.name().to_string()));
    }
    let n = dp + dq;
    let pc = p.coeffs_in(v);
    let qc = q.coeffs_in(v);
    let mut m = vec![vec![Polynomial::zero(); n]; n];
    for i in 0..dp {
        for (j, c) in qc.iter().rev().enumerate() {
            m[i][i + j] = c.clone();
        }
    }
    for i in 0..dq {
        for (j, c) in pc.iter().rev().enumerate() {
            m[dp + i][i + j] = c.clone();
        }
    }
    Ok(bareiss_determinant(m))
}

/// Bareiss fraction-free determinant over the polynomial ring.
fn bareiss_determinant(mut m: Vec<Vec<Polynomial>>) -> Polynomial {
    let n = m.len();
    if n == 0 {
        return Polynomial::one();
    }
    let mut sign = 1i32;
    let mut prev = Polynomial::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return Polynomial::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num
                    .div_exact(&prev)
                    .expect("Bareiss division is exact over an integral domain");
            }
            m[i][k] = Polynomial::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -&det
    } else {
        det
    }
}

fn check_univariate(p: &Polynomial, v: &Var) -> Result<(), EngineError> {
    for w in p.vars() {
        if &w != v {
            return Err(EngineError::NotUnivariate {
                var: v.name().to_string(),
                other: w.name().to_string(),
            });
        }
    }
    Ok(())
}

/// Monic gcd over the rationals of two polynomials in the single
/// variable v. gcd(p, 0) is monic(p); gcd(0, 0) is 0.
pub fn gcd_univariate(p: &Polynomial, q: &Polynomial, v: &Var) -> Result<Polynomial, EngineError> {
    check_univariate(p, v)?;
    check_univariate(q, v)?;
    let monic = |p: &Polynomial| -> Polynomial {
        let lc = p.leading_coeff_in(v).as_constant().unwrap_or_else(Rat::one);
        p.scale(&lc.recip())
    };
    let (mut a, mut b) = (p.clone(), q.clone());
    while !b.is_zero() {
        if b.degree_in(v) == 0 {
            return Ok(Polynomial::one());
        }
        let (_, r, _) = pseudo_divide(&a, &b, v)?;
        a = b;
        b = r;
    }
    if a.is_zero() {
        return Ok(Polynomial::zero());
    }
    Ok(monic(&a))
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let abs = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    f.write_str("-")?;
                }
                first = false;
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            write_term(f, m, &abs)?;
        }
        Ok(())
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, m: &Monomial, abs: &Rat) -> fmt::Result {
    if m.is_unit() {
        return write!(f, "{}", abs);
    }
    let mut lead = String::new();
    if !abs.is_one() {
        lead = format!("{}*", abs);
    }
    f.write_str(&lead)?;
    let mut first = true;
    for (v, e) in &m.exps {
        if !first {
            f.write_str("*")?;
        }
        first = false;
        if *e == 1 {
            write!(f, "{}", v)?;
        } else {
            write!(f, "{}^{}", v, e)?;
        }
    }
    Ok(())
}
