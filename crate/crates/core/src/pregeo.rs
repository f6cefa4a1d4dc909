//! Finite closure systems: exhaustive pregeometry axiom checking and
//! relative rank by greedy basis extraction, with linear spans over prime
//! fields as the concrete instance.

use std::sync::OnceLock;

use crate::error::EngineError;

const EXHAUSTIVE_BUDGET: usize = 12;

/// A closure operator on a small finite ground set. Subsets are
/// bitmasks; the closure table is materialized at construction.
pub struct FiniteClosureSystem {
    labels: Vec<String>,
    closure: Vec<u32>,
    axioms: OnceLock<AxiomReport>,
}

impl FiniteClosureSystem {
    /// Builds from an arbitrary closure function on bitmask subsets.
    pub fn from_fn(
        labels: Vec<String>,
        mut f: impl FnMut(u32) -> u32,
    ) -> Result<Self, EngineError> {
        let n = labels.len();
        if n == 0 {
            return Err(EngineError::Invalid("ground set is empty".into()));
        }
        if n > EXHAUSTIVE_BUDGET {
            return Err(EngineError::TooLarge { size: n, budget: EXHAUSTIVE_BUDGET });
        }
        let full = (1u32 << n) - 1;
        let closure = (0..=full).map(|mask| f(mask) & full).collect();
        Ok(FiniteClosureSystem { labels, closure, axioms: OnceLock::new() })
    }

    /// Linear span over F_p: ground points are the given vectors, and the
    /// closure of a subset is the set of ground vectors inside its span.
    pub fn linear_instance(vectors: &[Vec<i64>], modulus: u64) -> Result<Self, EngineError> {
        if !is_prime(modulus) {
            return Err(EngineError::NotPrime(modulus));
        }
        let dim = vectors.first().map(|v| v.len()).unwrap_or(0);
        for v in vectors {
            if v.len() != dim {
                return Err(EngineError::DimensionMismatch { expected: dim, got: v.len() });
            }
        }
        let reduced: Vec<Vec<u64>> = vectors
            .iter()
            .map(|v| v.iter().map(|&x| x.rem_euclid(modulus as i64) as u64).collect())
            .collect();
        let labels = reduced
            .iter()
            .map(|v| {
                let body = v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
                format!("({body})")
            })
            .collect();
        let span = move |mask: u32| -> u32 {
            let rows: Vec<Vec<u64>> = reduced
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, v)| v.clone())
                .collect();
            let echelon = echelon_form(rows, modulus);
            let mut out = 0u32;
            for (i, w) in reduced.iter().enumerate() {
                if in_span(&echelon, w, modulus) {
                    out |= 1 << i;
                }
            }
            out
        };
        Self::from_fn(labels, span)
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn closure(&self, set: u32) -> u32 {
        self.closure[set as usize]
    }

    fn full_mask(&self) -> u32 {
        (1u32 << self.size()) - 1
    }

    fn set_label(&self, mask: u32) -> Vec<String> {
        (0..self.size())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.labels[i].clone())
            .collect()
    }

    /// Exhaustive axiom check, computed once per system.
    pub fn axioms(&self) -> &AxiomReport {
        self.axioms.get_or_init(|| self.check_axioms_uncached())
    }

    fn check_axioms_uncached(&self) -> AxiomReport {
        let n = self.size();
        let full = self.full_mask();

        // Monotone: A is contained in cl(A), and A subset of B implies
        // cl(A) subset of cl(B). Subsets of each B are enumerated
        // directly.
        let mut monotone = AxiomResult::Pass;
        'mono: for b in 0..=full {
            let cb = self.closure(b);
            if b & !self.closure(b) != 0 {
                monotone = AxiomResult::Fail(FailWitness {
                    set: self.set_label(b),
                    a: None,
                    b: None,
                });
                break 'mono;
            }
            let mut a = b;
            loop {
                if self.closure(a) & !cb != 0 {
                    monotone = AxiomResult::Fail(FailWitness {
                        set: self.set_label(a),
                        a: None,
                        b: None,
                    });
                    break 'mono;
                }
                if a == 0 {
                    break;
                }
                a = (a - 1) & b;
            }
        }

        // Idempotent: cl(cl(A)) = cl(A).
        let mut idempotent = AxiomResult::Pass;
        for a in 0..=full {
            let c = self.closure(a);
            if self.closure(c) != c {
                idempotent =
                    AxiomResult::Fail(FailWitness { set: self.set_label(a), a: None, b: None });
                break;
            }
        }

        // Finite character: cl(A) is the union of the closures of the
        // finite subsets of A. On a finite carrier every subset is its
        // own finite subset, so this reduces to the union identity.
        let mut finite_character = AxiomResult::Pass;
        'fc: for b in 0..=full {
            let mut union = 0u32;
            let mut a = b;
            loop {
                union |= self.closure(a);
                if a == 0 {
                    break;
                }
                a = (a - 1) & b;
            }
            if union != self.closure(b) {
                finite_character =
                    AxiomResult::Fail(FailWitness { set: self.set_label(b), a: None, b: None });
                break 'fc;
            }
        }

        // Exchange: a in cl(A + b) \ cl(A) implies b in cl(A + a).
        let mut exchange = AxiomResult::Pass;
        'exch: for set in 0..=full {
            for a in 0..n {
                for b in 0..n {
                    let with_b = set | (1 << b);
                    let in_with_b = self.closure(with_b) & (1 << a) != 0;
                    let in_plain = self.closure(set) & (1 << a) != 0;
                    if in_with_b && !in_plain {
                        let with_a = set | (1 << a);
                        if self.closure(with_a) & (1 << b) == 0 {
                            exchange = AxiomResult::Fail(FailWitness {
                                set: self.set_label(set),
                                a: Some(self.labels[a].clone()),
                                b: Some(self.labels[b].clone()),
                            });
                            break 'exch;
                        }
                    }
                }
            }
        }

        AxiomReport { monotone, idempotent, finite_character, exchange }
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

fn echelon_form(mut rows: Vec<Vec<u64>>, p: u64) -> Vec<Vec<u64>> {
    let dim = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0usize;
    for col in 0..dim {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, pivot);
        let inv = mod_inv(rows[rank][col], p);
        for c in 0..dim {
            rows[rank][c] = rows[rank][c] * inv % p;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let factor = rows[r][col];
                for c in 0..dim {
                    rows[r][c] = (rows[r][c] + (p - factor) * rows[rank][c]) % p;
                }
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

fn in_span(echelon: &[Vec<u64>], w: &[u64], p: u64) -> bool {
    let mut v: Vec<u64> = w.to_vec();
    for row in echelon {
        let Some(lead) = row.iter().position(|&x| x != 0) else { continue };
        if v[lead] != 0 {
            let factor = v[lead];
            for c in 0..v.len() {
                v[c] = (v[c] + (p - factor) * row[c] % p) % p;
            }
        }
    }
    v.iter().all(|&x| x == 0)
}

fn mod_inv(a: u64, p: u64) -> u64 {
    let mut out = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            out = out * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomResult {
    Pass,
    Fail(FailWitness),
}

impl AxiomResult {
    pub fn passed(&self) -> bool {
        matches!(self, AxiomResult::Pass)
    }
}

/// Concrete counterexample: the subset and, for exchange, the pair of
/// points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailWitness {
    pub set: Vec<String>,
    pub a: Option<String>,
    pub b: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub monotone: AxiomResult,
    pub idempotent: AxiomResult,
    pub finite_character: AxiomResult,
    pub exchange: AxiomResult,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.monotone.passed()
            && self.idempotent.passed()
            && self.finite_character.passed()
            && self.exchange.passed()
    }
}

/// Relative rank query: A must be a subset of B.
#[derive(Debug, Clone, Copy)]
pub struct RankQuery {
    pub a: u32,
    pub b: u32,
}

/// rk(B | A): the size of any basis of cl(B) over cl(A), computed by
/// greedily extending A with points of B outside the closure of the
/// current set. Exchange makes the count order-independent.
pub fn rank(sys: &FiniteClosureSystem, q: RankQuery) -> Result<u32, EngineError> {
    if q.a & !q.b != 0 {
        return Err(EngineError::Invalid("rank query needs A contained in B".into()));
    }
    if q.b & !sys.full_mask() != 0 {
        return Err(EngineError::Invalid("rank query leaves the ground set".into()));
    }
    if !sys.axioms().all_pass() {
        return Err(EngineError::NotPregeometry(
            "axiom check failed; rank is undefined".into(),
        ));
    }
    let mut current = q.a;
    let mut count = 0u32;
    for i in 0..sys.size() {
        let bit = 1u32 << i;
        if q.b & bit != 0 && sys.closure(current) & bit == 0 {
            current |= bit;
            count += 1;
        }
    }
    Ok(count)
}
