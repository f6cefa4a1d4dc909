//! Cross-checks between the elimination engines and independent
//! brute-force evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use pairdim::acfqe::{self, Characteristic};
use pairdim::dim2;
use pairdim::formula::{parse_with_transcendentals, Formula};
use pairdim::oracle;
use pairdim::pairnf;
use pairdim::poly::{Polynomial, Var};
use pairdim::Engine;

/// Arithmetic in GF(p^k) as polynomials modulo a root-free monic
/// polynomial; for k <= 3, having no roots in F_p is the same as being
/// irreducible.
struct Gf {
    p: u64,
    k: usize,
    /// Non-leading coefficients of the monic modulus, low to high.
    modulus: Vec<u64>,
}

impl Gf {
    fn new(p: u64, k: usize) -> Gf {
        if k == 1 {
            return Gf { p, k, modulus: vec![0] };
        }
        let mut tail = vec![0u64; k];
        loop {
            let has_root = (0..p).any(|x| {
                let mut acc = pow_mod(x, k as u64, p);
                for (i, &c) in tail.iter().enumerate() {
                    acc = (acc + c * pow_mod(x, i as u64, p)) % p;
                }
                acc == 0
            });
            if !has_root {
                return Gf { p, k, modulus: tail };
            }
            let mut i = 0;
            loop {
                tail[i] += 1;
                if tail[i] < p {
                    break;
                }
                tail[i] = 0;
                i += 1;
                assert!(i < k, "no root-free monic polynomial found");
            }
        }
    }

    fn size(&self) -> u64 {
        self.p.pow(self.k as u32)
    }

    fn element(&self, index: u64) -> Vec<u64> {
        let mut out = vec![0u64; self.k];
        let mut n = index;
        for slot in out.iter_mut() {
            *slot = n % self.p;
            n /= self.p;
        }
        out
    }

    fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut wide = vec![0u64; 2 * self.k];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                wide[i + j] = (wide[i + j] + x * y) % self.p;
            }
        }
        // Reduce x^k = -modulus tail.
        for d in (self.k..2 * self.k).rev() {
            let c = wide[d];
            if c == 0 {
                continue;
            }
            wide[d] = 0;
            for (i, &m) in self.modulus.iter().enumerate() {
                let slot = d - self.k + i;
                wide[slot] = (wide[slot] + (self.p - m % self.p) * c) % self.p;
            }
        }
        wide.truncate(self.k);
        wide
    }

    fn scalar(&self, c: u64) -> Vec<u64> {
        let mut out = vec![0u64; self.k];
        out[0] = c % self.p;
        out
    }

    fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    /// Evaluates a univariate integer polynomial given low-to-high
    /// coefficients.
    fn eval(&self, coeffs: &[i64], at: &[u64]) -> Vec<u64> {
        let mut acc = self.scalar(0);
        for &c in coeffs.iter().rev() {
            let lifted = self.scalar(c.rem_euclid(self.p as i64) as u64);
            acc = self.add(&self.mul(&acc, at), &lifted);
        }
        acc
    }
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut out = 1;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            out = out * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    out
}

fn upoly(v: &Var, coeffs: &[i64]) -> Polynomial {
    Polynomial::from_coeffs(v, &coeffs.iter().map(|&c| Polynomial::int(c)).collect::<Vec<_>>())
}

/// In characteristic p, deciding an existential sentence agrees with a
/// witness search over GF(p^k), k <= 3. With at most two equations and
/// every degree at most 3, a witness exists exactly when one exists in
/// those fields.
#[test]
fn characteristic_coherence_against_extension_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let y = Var::field("y");
    for &p in &[2u64, 3, 5] {
        let eng = Engine::new(Characteristic::new(p).unwrap());
        let fields: Vec<Gf> = (1..=3).map(|k| Gf::new(p, k)).collect();
        for _ in 0..60 {
            let n_eqs = rng.gen_range(0..=2);
            let eqs: Vec<Vec<i64>> = (0..n_eqs)
                .map(|_| {
                    let d = rng.gen_range(1..=3);
                    let mut cs: Vec<i64> = (0..=d).map(|_| rng.gen_range(-4..=4)).collect();
                    if cs[d] == 0 {
                        cs[d] = 1;
                    }
                    cs
                })
                .collect();
            let with_ineq = rng.gen_bool(0.7);
            let q: Option<Vec<i64>> = with_ineq.then(|| {
                let d = rng.gen_range(0..=3);
                let mut cs: Vec<i64> = (0..=d).map(|_| rng.gen_range(-4..=4)).collect();
                if cs.iter().all(|&c| c == 0) {
                    cs[0] = 1;
                }
                cs
            });

            let mut body = Formula::truth();
            for cs in &eqs {
                body = Formula::and(body, Formula::eq(upoly(&y, cs)));
            }
            if let Some(cs) = &q {
                body = Formula::and(body, Formula::neq(upoly(&y, cs)));
            }
            let sentence = Formula::exists(y.clone(), body);
            let engine_says = acfqe::decide_sentence(&eng, &sentence).unwrap();

            let mut search_says = false;
            'fields: for gf in &fields {
                for idx in 0..gf.size() {
                    let at = gf.element(idx);
                    let eqs_hold = eqs.iter().all(|cs| gf.is_zero(&gf.eval(cs, &at)));
                    let q_holds = match &q {
                        Some(cs) => !gf.is_zero(&gf.eval(cs, &at)),
                        None => true,
                    };
                    if eqs_hold && q_holds {
                        search_says = true;
                        break 'fields;
                    }
                }
            }
            assert_eq!(
                engine_says, search_says,
                "char {p}, eqs {eqs:?}, q {q:?}"
            );
        }
    }
}

/// exists_root_not_root agrees with exhaustive rational-root checking on
/// instances built from known rational roots.
#[test]
fn oracle_agrees_with_constructed_rational_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let y = Var::field("y");
    for _ in 0..200 {
        let roots: Vec<i64> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(-3..=3)).collect();
        let excluded: Vec<i64> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(-3..=3)).collect();
        let mut p = Polynomial::one();
        for r in &roots {
            p = &p * &upoly(&y, &[-r, 1]);
        }
        let mut q = Polynomial::one();
        for r in &excluded {
            q = &q * &upoly(&y, &[-r, 1]);
        }
        let got = oracle::exists_root_not_root(&[p], &q, &y).unwrap();
        let expect = roots.iter().any(|r| !excluded.contains(r));
        assert_eq!(got, expect, "roots {roots:?} excluded {excluded:?}");
    }
}

fn closed_assignments(
    free: &[Var],
    rng: &mut ChaCha8Rng,
    count: usize,
) -> Vec<BTreeMap<Var, Polynomial>> {
    let t = Var::transcendental("t");
    (0..count)
        .map(|_| {
            let mut asg = BTreeMap::new();
            for v in free {
                let value = match rng.gen_range(0..4u8) {
                    0 => Polynomial::int(rng.gen_range(-3..=3)),
                    1 => Polynomial::int(rng.gen_range(-1..=1)),
                    2 => Polynomial::var(&t),
                    _ => {
                        let a = rng.gen_range(-2..=2);
                        let b = rng.gen_range(1..=2);
                        &(&Polynomial::var(&t) * &Polynomial::int(b)) + &Polynomial::int(a)
                    }
                };
                asg.insert(v.clone(), value);
            }
            asg
        })
        .collect()
}

/// sample_check of a formula against itself never disagrees, and a
/// corrupted normal form is caught.
#[test]
fn sample_check_reflexivity_and_mutation_detection() {
    let eng = Engine::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for text in oracle::formula_corpus() {
        let (f, _) = parse_with_transcendentals(text, &[]).unwrap();
        let free: Vec<Var> = f
            .free_vars()
            .into_iter()
            .filter(|v| v.sort() == pairdim::poly::Sort::Field)
            .collect();
        let assignments = closed_assignments(&free, &mut rng, 12);
        let report = oracle::sample_check(&eng, &f, &f, &assignments).unwrap();
        assert!(report.all_agree(), "self-disagreement on {text}");
        assert_eq!(report.total, assignments.len());
    }

    // Corrupt one coefficient of a normal form; sampling must notice.
    let (f, _) = parse_with_transcendentals("exists u in U. z = u & z != 1", &[]).unwrap();
    let corrupted = parse_with_transcendentals("exists u in U. z = u & z != 2", &[])
        .unwrap()
        .0;
    let z = Var::field("z");
    let assignments: Vec<BTreeMap<Var, Polynomial>> = (-3..=3)
        .map(|v| {
            let mut asg = BTreeMap::new();
            asg.insert(z.clone(), Polynomial::int(v));
            asg
        })
        .collect();
    let report = oracle::sample_check(&eng, &f, &corrupted, &assignments).unwrap();
    assert!(!report.all_agree());
    assert_eq!(report.agreements + report.disagreements.len(), report.total);
}

/// Every very special formula produced by normalization respects its
/// invariants, and normalization is a fixed point on its own output.
#[test]
fn normal_form_invariants_over_corpus() {
    let eng = Engine::default();
    for text in oracle::formula_corpus() {
        let (f, _) = parse_with_transcendentals(text, &[]).unwrap();
        let nf = pairnf::normalize(&eng, &f).unwrap();
        for d in &nf.disjuncts {
            for vs in std::iter::once(&d.positive).chain(d.negatives.iter()) {
                assert!(!vs.eqs().is_empty(), "empty equation list in {text}");
                for u in vs.u_vars() {
                    assert_eq!(u.sort(), pairdim::poly::Sort::Small);
                }
                // Small-sort variables in the polynomials are exactly the
                // block variables, and every block variable is used.
                for p in vs.eqs().iter().chain([vs.ineq()]) {
                    for v in p.vars() {
                        if v.sort() == pairdim::poly::Sort::Small {
                            assert!(
                                vs.u_vars().contains(&v),
                                "unbound small variable in {text}"
                            );
                        }
                    }
                }
                for u in vs.u_vars() {
                    assert!(
                        vs.eqs().iter().any(|p| p.contains_var(u)) || vs.ineq().contains_var(u),
                        "unused block variable in {text}"
                    );
                }
            }
        }
        let again = pairnf::normalize(&eng, &nf.to_formula()).unwrap();
        assert_eq!(nf, again, "normalize not a fixed point on {text}");
    }
}

/// Sets produced by the almost-internality witness template have
/// dimension zero.
#[test]
fn witness_template_sets_have_dimension_zero() {
    let eng = Engine::default();
    let z = Var::field("z");
    let templates = [
        "exists u in U. z*z = u",
        "exists u in U. z = u",
        "#trans t. exists u in U. z = u*t",
        "#trans t. exists u in U. z*z*z = u + t*u",
        "#trans t. exists u1 in U. exists u2 in U. z*z = u1 + u2*t & z != u1",
    ];
    for text in templates {
        let (f, _) = parse_with_transcendentals(text, &[]).unwrap();
        let nf = pairnf::normalize(&eng, &f).unwrap();
        let cert = dim2::dim(&eng, &nf, &[z.clone()]).unwrap();
        assert!(
            cert.dimension == dim2::Dim::Fin(0) || cert.dimension == dim2::Dim::NegInf,
            "{text} gave {:?}",
            cert.dimension
        );
        assert_eq!(cert.dimension, dim2::Dim::Fin(0), "{text}");
    }
}

fn random_poly(rng: &mut ChaCha8Rng, vars: &[Var], max_deg: u32, max_terms: usize) -> Polynomial {
    loop {
        let terms = rng.gen_range(1..=max_terms);
        let mut p = Polynomial::zero();
        for _ in 0..terms {
            let mut mono = Polynomial::int(rng.gen_range(-3..=3i64));
            let mut left = max_deg;
            for v in vars {
                let e = rng.gen_range(0..=left.min(2));
                for _ in 0..e {
                    mono = &mono * &Polynomial::var(v);
                }
                left -= e;
            }
            p = &p + &mono;
        }
        if !p.is_zero() {
            return p;
        }
    }
}

/// Eliminating quantifiers and then substituting parameter values gives
/// the same verdict as substituting first and deciding the concrete
/// sentence. Exercises the multi-equation reduction paths with symbolic
/// leading coefficients.
#[test]
fn qe_commutes_with_substitution() {
    let eng = Engine::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let y = Var::field("y");
    let w = Var::field("w");
    let a = Var::field("a");
    let b = Var::field("b");
    for _ in 0..80 {
        let depth_two = rng.gen_bool(0.4);
        let inner_vars =
            if depth_two { vec![y.clone(), w.clone(), a.clone(), b.clone()] } else { vec![y.clone(), a.clone(), b.clone()] };
        let n_eqs = rng.gen_range(1..=2);
        let mut body = Formula::truth();
        for _ in 0..n_eqs {
            body = Formula::and(body, Formula::eq(random_poly(&mut rng, &inner_vars, 3, 3)));
        }
        if rng.gen_bool(0.6) {
            body = Formula::and(body, Formula::neq(random_poly(&mut rng, &inner_vars, 2, 2)));
        }
        let quantified = if depth_two {
            Formula::exists(y.clone(), Formula::exists(w.clone(), body))
        } else if rng.gen_bool(0.7) {
            Formula::exists(y.clone(), body)
        } else {
            Formula::forall(y.clone(), body)
        };
        let eliminated = acfqe::qe(&eng, &quantified).unwrap();
        assert!(eliminated.is_quantifier_free());
        for av in -2..=2i64 {
            for bv in -2..=2i64 {
                let mut subst = BTreeMap::new();
                subst.insert(a.clone(), Polynomial::int(av));
                subst.insert(b.clone(), Polynomial::int(bv));
                let via_qe =
                    acfqe::decide_sentence(&eng, &eliminated.substitute(&subst).unwrap()).unwrap();
                let direct =
                    acfqe::decide_sentence(&eng, &quantified.substitute(&subst).unwrap()).unwrap();
                assert_eq!(via_qe, direct, "{quantified} at a={av}, b={bv}");
            }
        }
    }
}

/// On quantifier-free formulas with membership atoms, the pair decision
/// procedure agrees with the direct evaluator.
#[test]
fn pair_decision_matches_direct_evaluation() {
    let eng = Engine::default();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let z = Var::field("z");
    let yv = Var::field("y");
    for _ in 0..120 {
        // Random quantifier-free formula over {z, y, t} with U atoms.
        let mut leaves: Vec<Formula> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            leaves.push(match rng.gen_range(0..4u8) {
                0 => Formula::in_u(z.clone()),
                1 => Formula::in_u(yv.clone()),
                2 => {
                    let p = random_poly(&mut rng, &[z.clone(), Var::transcendental("t")], 2, 2);
                    Formula::eq(p)
                }
                _ => {
                    let p = random_poly(&mut rng, &[z.clone(), yv.clone()], 2, 2);
                    Formula::neq(p)
                }
            });
        }
        let mut f = leaves.pop().unwrap();
        for leaf in leaves {
            f = match rng.gen_range(0..3u8) {
                0 => Formula::and(f, leaf),
                1 => Formula::or(f, leaf),
                _ => Formula::and(f, Formula::not(leaf)),
            };
        }
        let free: Vec<Var> = f
            .free_vars()
            .into_iter()
            .filter(|v| v.sort() == pairdim::poly::Sort::Field)
            .collect();
        for asg in closed_assignments(&free, &mut rng, 6) {
            let direct = oracle::eval_qf(&f, &asg).unwrap();
            let inst = oracle::substitute_closed(&f, &asg).unwrap();
            let decided = dim2::decide_pair_sentence(&eng, &inst).unwrap();
            assert_eq!(direct, decided, "{f} at {asg:?}");
        }
    }
}

/// Relative rank is monotone in the outer set and antitone in the inner
/// set on nested queries.
#[test]
fn rank_monotonicity() {
    use pairdim::pregeo::{rank, FiniteClosureSystem, RankQuery};
    let vectors: Vec<Vec<i64>> = vec![
        vec![1, 0, 0],
        vec![0, 1, 0],
        vec![0, 0, 1],
        vec![1, 1, 0],
        vec![1, 0, 1],
        vec![0, 1, 1],
        vec![1, 1, 1],
    ];
    let sys = FiniteClosureSystem::linear_instance(&vectors, 2).unwrap();
    let full = (1u32 << vectors.len()) - 1;
    for b in 0..=full {
        let rb = rank(&sys, RankQuery { a: 0, b }).unwrap();
        // Monotone in B.
        for i in 0..vectors.len() {
            let bigger = b | (1 << i);
            let rbig = rank(&sys, RankQuery { a: 0, b: bigger }).unwrap();
            assert!(rbig >= rb);
        }
        // Antitone in A on nested queries.
        let mut a = b;
        loop {
            let ra = rank(&sys, RankQuery { a, b }).unwrap();
            if a != 0 {
                let smaller_a = a & (a - 1);
                let ra2 = rank(&sys, RankQuery { a: smaller_a, b }).unwrap();
                assert!(ra2 >= ra);
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
}

/// On one-variable sets the dimension recursion and the dichotomy
/// decision are independent routes to the same classification: dimension
/// one exactly for co-small sets, dimension at most zero exactly for
/// small ones.
#[test]
fn dimension_agrees_with_dichotomy_on_one_variable_sets() {
    let eng = Engine::default();
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let z = Var::field("z");
    let t = Var::transcendental("t");
    let mut checked = 0usize;
    while checked < 80 {
        let mut leaves: Vec<Formula> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            leaves.push(match rng.gen_range(0..5u8) {
                0 => Formula::in_u(z.clone()),
                1 => Formula::not(Formula::in_u(z.clone())),
                2 => {
                    let p = random_poly(&mut rng, &[z.clone(), t.clone()], 2, 2);
                    if rng.gen_bool(0.5) {
                        Formula::eq(p)
                    } else {
                        Formula::neq(p)
                    }
                }
                3 => {
                    let u = Var::small("u");
                    let p = &Polynomial::var(&z)
                        - &(&Polynomial::var(&u) * &random_poly(&mut rng, &[t.clone()], 1, 2));
                    Formula::exists(u, Formula::eq(p))
                }
                _ => {
                    let u = Var::small("u");
                    let p = &Polynomial::var(&z).pow(2) - &Polynomial::var(&u);
                    Formula::exists(u, Formula::eq(p))
                }
            });
        }
        let mut f = leaves.pop().unwrap();
        for leaf in leaves {
            f = if rng.gen_bool(0.5) { Formula::and(f, leaf) } else { Formula::or(f, leaf) };
        }
        if !f.free_vars().contains(&z) {
            continue;
        }
        let nf = pairnf::normalize(&eng, &f).unwrap();
        let dimension = match dim2::dim(&eng, &nf, std::slice::from_ref(&z)) {
            Ok(cert) => cert.dimension,
            Err(pairdim::EngineError::UnsupportedFragment(_)) => continue,
            Err(other) => panic!("unexpected error on {f}: {other}"),
        };
        let label = dim2::dichotomy(&eng, &nf, &z).unwrap().label;
        match dimension {
            dim2::Dim::Fin(1) => assert_eq!(label, dim2::DichotomyLabel::CoSmall, "{f}"),
            _ => assert_eq!(label, dim2::DichotomyLabel::Small, "{f}"),
        }
        checked += 1;
    }
}

/// Printing any generated formula and reparsing it gives back an
/// alpha-equivalent tree.
#[test]
fn print_parse_round_trip_on_generated_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    fn gen(rng: &mut ChaCha8Rng, depth: u32, binder: &mut u32) -> String {
        if depth == 0 {
            return match rng.gen_range(0..4u8) {
                0 => format!("x{} = {}", rng.gen_range(1..=3), rng.gen_range(-2..=2)),
                1 => format!("x{}*x{} != {}*t", rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=2)),
                2 => format!("U(x{})", rng.gen_range(1..=3)),
                _ => format!("x1^{} - x2 = 0", rng.gen_range(1..=3)),
            };
        }
        match rng.gen_range(0..6u8) {
            0 => format!("~({})", gen(rng, depth - 1, binder)),
            1 => format!("({}) & ({})", gen(rng, depth - 1, binder), gen(rng, depth - 1, binder)),
            2 => format!("({}) | ({})", gen(rng, depth - 1, binder), gen(rng, depth - 1, binder)),
            3 => format!("({}) -> ({})", gen(rng, depth - 1, binder), gen(rng, depth - 1, binder)),
            4 => {
                *binder += 1;
                let v = format!("b{binder}");
                let body = gen(rng, depth - 1, binder).replace("x1", &v);
                format!("exists {v}. {body}")
            }
            _ => {
                *binder += 1;
                let v = format!("b{binder}");
                let body = gen(rng, depth - 1, binder).replace("x2", &v);
                format!("forall {v} in U. {body}")
            }
        }
    }
    for _ in 0..200 {
        let mut binder = 0;
        let depth = rng.gen_range(0..=3);
        let text = gen(&mut rng, depth, &mut binder);
        let (f, _) = parse_with_transcendentals(&text, &["t".into()]).unwrap();
        let printed = f.to_string();
        let (g, _) = parse_with_transcendentals(&printed, &["t".into()])
            .unwrap_or_else(|e| panic!("reparse failed on {printed:?} from {text:?}: {e}"));
        assert!(f.alpha_eq(&g), "round trip failed:\n  {text}\n  {printed}");
    }
}

/// The three fiber-partition formulas in every dimension certificate
/// partition the parameter space at sampled closed parameters.
#[test]
fn certificate_partitions_verify_at_samples() {
    let eng = Engine::default();
    let y = Var::field("y");
    let z = Var::field("z");
    let texts = [
        "exists u in U. z = u*y",
        "U(y) & z = y",
        "z*z = y | U(z)",
        "exists u in U. y*z - 1 = 0",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for text in texts {
        let (f, _) = parse_with_transcendentals(text, &[]).unwrap();
        let nf = pairnf::normalize(&eng, &f).unwrap();
        let cert = dim2::dim(&eng, &nf, &[y.clone(), z.clone()]).unwrap();
        let dim2::DimTrace::Peel { disjuncts, .. } = &cert.trace else {
            panic!("expected a peel trace");
        };
        for dt in disjuncts {
            let (e_f, _) = parse_with_transcendentals(&dt.empty_formula, &["t".into()]).unwrap();
            let (s0_f, _) =
                parse_with_transcendentals(&dt.small_nonempty_formula, &["t".into()]).unwrap();
            let (s1_f, _) =
                parse_with_transcendentals(&dt.cosmall_formula, &["t".into()]).unwrap();
            for asg in closed_assignments(&[y.clone()], &mut rng, 8) {
                let hits = [&e_f, &s0_f, &s1_f]
                    .iter()
                    .map(|g| {
                        let inst = oracle::substitute_closed(g, &asg).unwrap();
                        dim2::decide_pair_sentence(&eng, &inst).unwrap() as u32
                    })
                    .sum::<u32>();
                assert_eq!(hits, 1, "partition violated for {text} at {asg:?}");
            }
        }
    }
}
