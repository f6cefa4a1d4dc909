//! Command-line front end: parses formulas, runs the elimination and
//! dimension engines, and emits machine-checkable JSON certificates.

mod cert;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use pairdim::acfqe::{self, Characteristic};
use pairdim::dim2;
use pairdim::formula::{parse_polynomial, parse_with_transcendentals};
use pairdim::oracle;
use pairdim::pairnf;
use pairdim::poly::{rat_frac, Polynomial, Sort, Var};
use pairdim::{Engine, EngineError};

use cert::{certificate, dim_value, render_text, CertContext};

#[derive(Parser)]
#[command(name = "pairdim", version, about = "Dimension engine for pairs of algebraically closed fields")]
struct Cli {
    /// Working characteristic: 0 or a prime.
    #[arg(long = "char", global = true, default_value_t = 0)]
    characteristic: u64,

    /// Comma-separated transcendental constant names.
    #[arg(long, global = true, value_delimiter = ',')]
    trans: Vec<String>,

    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Clause budget for disjunctive normal forms.
    #[arg(long, global = true, default_value_t = 10_000)]
    max_clauses: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula and echo its normalized tree.
    Parse { formula: String },
    /// Eliminate quantifiers from a pure ring-language formula.
    Qe { formula: String },
    /// Reduce a formula to the pair normal form.
    Normalize { formula: String },
    /// Compute the dimension of the definable set.
    Dim {
        /// Ambient coordinates, comma-separated; defaults to the free
        /// field variables in name order.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        formula: String,
    },
    /// Decide whether a one-variable set is small or co-small.
    Dichotomy {
        /// The set's variable; defaults to the unique free field
        /// variable.
        #[arg(long)]
        var: Option<String>,
        formula: String,
    },
    /// Emit the almost-internality witness relation for a polynomial.
    Witness {
        /// Defining polynomial, e.g. "z^2 - x1".
        poly: String,
        /// Variable ranging over the fiber.
        #[arg(long)]
        fiber_var: String,
        /// Comma-separated small-sort variable names.
        #[arg(long, value_delimiter = ',')]
        small_vars: Vec<String>,
        /// Parameter values, e.g. "y=3,w=t" (rationals or declared
        /// transcendentals).
        #[arg(long, value_delimiter = ',')]
        assign: Vec<String>,
    },
    /// Check the pregeometry axioms of a linear instance from JSON.
    PregeoCheck { path: PathBuf },
    /// Sample a formula against its own normal form.
    Check {
        formula: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(value) => {
            let rendered = match cli.format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&value).unwrap()),
                Format::Text => render_text(&value),
            };
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, rendered) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
                None => {
                    let mut stdout = std::io::stdout();
                    let _ = stdout.write_all(rendered.as_bytes());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                EngineError::UnsupportedFragment(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<Value, EngineError> {
    let characteristic = Characteristic::new(cli.characteristic)?;
    let engine = Engine::new(characteristic).with_max_clauses(cli.max_clauses);
    match &cli.cmd {
        Cmd::Parse { formula } => {
            let (f, trans) = parse_with_transcendentals(formula, &cli.trans)?;
            let ctx = ctx(&engine, formula, &trans);
            let free: Vec<String> = f.free_vars().iter().map(|v| v.name().to_string()).collect();
            Ok(certificate(
                &ctx,
                "parse",
                json!({
                    "formula": f.to_string(),
                    "freeVars": free,
                }),
            ))
        }
        Cmd::Qe { formula } => {
            let (f, trans) = parse_with_transcendentals(formula, &cli.trans)?;
            let ctx = ctx(&engine, formula, &trans);
            let g = acfqe::qe(&engine, &f)?;
            Ok(certificate(&ctx, "qe", json!({ "result": g.to_string() })))
        }
        Cmd::Normalize { formula } => {
            let (f, trans) = parse_with_transcendentals(formula, &cli.trans)?;
            let ctx = ctx(&engine, formula, &trans);
            let nf = pairnf::normalize(&engine, &f)?;
            Ok(certificate(
                &ctx,
                "normalForm",
                json!({
                    "formula": nf.to_formula().to_string(),
                    "disjuncts": nf.disjuncts.iter().map(|d| json!({
                        "positive": vs_value(&d.positive),
                        "negatives": d.negatives.iter().map(vs_value).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                }),
            ))
        }
        Cmd::Dim { vars, formula } => {
            let (f, trans) = parse_with_transcendentals(formula, &cli.trans)?;
            let ctx = ctx(&engine, formula, &trans);
            let free_field: Vec<Var> = f
                .free_vars()
                .into_iter()
                .filter(|v| v.sort() == Sort::Field)
                .collect();
            let ambient: Vec<Var> = if vars.is_empty() {
                free_field.clone()
            } else {
                vars.iter().map(Var::field).collect()
            };
            for v in &free_field {
                if !ambient.contains(v) {
                    return Err(EngineError::FreeVariable(v.name().to_string()));
                }
            }
            let nf = pairnf::normalize(&engine, &f)?;
            let cert = dim2::dim(&engine, &nf, &ambient)?;
            Ok(certificate(
                &ctx,
                "dim",
                json!({
                    "vars": ambient.iter().map(|v| v.name()).collect::<Vec<_>>(),
                    "normalForm": nf.to_formula().to_string(),
                    "dimension": dim_value(cert.dimension),
                    "trace": cert::dim_trace_value(&cert.trace),
                }),
            ))
        }
        Cmd::Dichotomy { var, formula } => {
            let (f, trans) = parse_with_transcendentals(formula, &cli.trans)?;
            let ctx = ctx(&engine, formula, &trans);
            let free_field: Vec<Var> = f
                .free_vars()
                .into_iter()
                .filter(|v| v.sort() == Sort::Field)
                .collect();
            let z = match var {
                Some(name) => Var::field(name),
                None => match free_field.as_slice() {
                    [only] => only.clone(),
                    [] => {
                        return Err(EngineError::Invalid(
                            "no free field variable; pass --var".into(),
                        ))
                    }
                    _ => {
                        return Err(EngineError::Invalid(
                            "several free field variables; pass --var".into(),
                        ))
                    }
                },
            };
            let nf = pairnf::normalize(&engine, &f)?;
            let cert = dim2::dichotomy(&engine, &nf, &z)?;
            Ok(certificate(
                &ctx,
                "dichotomy",
                json!({
                    "variable": z.name(),
                    "label": cert.label.to_string(),
                    "smallFormula": cert.small_formula.to_string(),
                    "complementSmallFormula": cert.complement_small_formula.to_string(),
                }),
            ))
        }
        Cmd::Witness { poly, fiber_var, small_vars, assign } => {
            let p = parse_polynomial(poly, small_vars, &cli.trans)?;
            let fiber = Var::field(fiber_var);
            let mut assignment = BTreeMap::new();
            for entry in assign {
                let (name, value) = parse_assignment(entry, &cli.trans)?;
                assignment.insert(Var::field(name), value);
            }
            let trans: Vec<Var> = cli.trans.iter().map(Var::transcendental).collect();
            let ctx = ctx(&engine, poly, &trans);
            let w = dim2::almost_internal_witness(&engine, &p, &fiber, &assignment)?;
            Ok(certificate(
                &ctx,
                "witness",
                json!({
                    "fiberVar": fiber.name(),
                    "smallVars": small_vars,
                    "assign": assign,
                    "relationFormula": w.relation.to_string(),
                    "bound": w.bound,
                }),
            ))
        }
        Cmd::PregeoCheck { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| EngineError::Invalid(format!("cannot read {}: {e}", path.display())))?;
            let desc: Value = serde_json::from_str(&text)
                .map_err(|e| EngineError::Invalid(format!("bad JSON: {e}")))?;
            let modulus = desc["modulus"]
                .as_u64()
                .ok_or_else(|| EngineError::Invalid("missing \"modulus\"".into()))?;
            let vectors: Vec<Vec<i64>> = desc["vectors"]
                .as_array()
                .ok_or_else(|| EngineError::Invalid("missing \"vectors\"".into()))?
                .iter()
                .map(|row| {
                    row.as_array()
                        .map(|xs| xs.iter().filter_map(|x| x.as_i64()).collect())
                        .ok_or_else(|| EngineError::Invalid("bad vector row".into()))
                })
                .collect::<Result<_, _>>()?;
            let trans: Vec<Var> = Vec::new();
            let ctx = ctx(&engine, &text, &trans);
            let sys = pairdim::pregeo::FiniteClosureSystem::linear_instance(&vectors, modulus)?;
            let report = sys.axioms();
            // Cross-check greedy rank against Gaussian elimination over
            // every subset when the ground set is small.
            let rank_checks = if sys.size() <= 10 && report.all_pass() {
                let full = (1u32 << sys.size()) - 1;
                let mut agreements = 0u64;
                for mask in 0..=full {
                    let selected: Vec<Vec<i64>> = vectors
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, v)| v.clone())
                        .collect();
                    let greedy = pairdim::pregeo::rank(
                        &sys,
                        pairdim::pregeo::RankQuery { a: 0, b: mask },
                    )?;
                    let gauss = oracle::gaussian_rank(&selected, modulus)?;
                    if greedy == gauss {
                        agreements += 1;
                    }
                }
                json!({ "total": u64::from(full) + 1, "agreements": agreements })
            } else {
                Value::Null
            };
            Ok(certificate(
                &ctx,
                "checkReport",
                json!({
                    "modulus": modulus,
                    "groundSize": sys.size(),
                    "axioms": {
                        "monotone": axiom_value(&report.monotone),
                        "idempotent": axiom_value(&report.idempotent),
                        "finiteCharacter": axiom_value(&report.finite_character),
                        "exchange": axiom_value(&report.exchange),
                    },
                    "rankChecks": rank_checks,
                }),
            ))
        }
        Cmd::Check { formula, samples, seed } => {
            let (f, trans) = parse_with_transcendentals(formula, &cli.trans)?;
            let ctx = ctx(&engine, formula, &trans);
            let nf = pairnf::normalize(&engine, &f)?;
            let reference = nf.to_formula();
            let free: Vec<Var> = f
                .free_vars()
                .into_iter()
                .filter(|v| v.sort() == Sort::Field)
                .collect();
            let t = trans.first().cloned();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let assignments: Vec<BTreeMap<Var, Polynomial>> = (0..*samples)
                .map(|_| {
                    free.iter()
                        .map(|v| (v.clone(), sample_value(&mut rng, t.as_ref())))
                        .collect()
                })
                .collect();
            let report = oracle::sample_check(&engine, &f, &reference, &assignments)?;
            Ok(certificate(
                &ctx,
                "checkReport",
                json!({
                    "samples": samples,
                    "seed": seed,
                    "total": report.total,
                    "agreements": report.agreements,
                    "disagreements": report.disagreements.iter().map(|d| json!({
                        "assignment": d.assignment.iter()
                            .map(|(v, p)| format!("{} = {}", v.name(), p))
                            .collect::<Vec<_>>(),
                        "engine": d.engine_verdict,
                        "oracle": d.oracle_verdict,
                    })).collect::<Vec<_>>(),
                }),
            ))
        }
    }
}

fn ctx<'a>(engine: &'a Engine, input: &'a str, trans: &[Var]) -> CertContext<'a> {
    CertContext {
        engine,
        input,
        transcendentals: trans.iter().map(|v| v.name().to_string()).collect(),
    }
}

fn vs_value(vs: &pairdim::pairnf::VerySpecialFormula) -> Value {
    json!({
        "uVars": vs.u_vars().iter().map(|v| v.name()).collect::<Vec<_>>(),
        "eqs": vs.eqs().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "ineq": vs.ineq().to_string(),
        "formula": vs.to_formula().to_string(),
    })
}

fn axiom_value(r: &pairdim::pregeo::AxiomResult) -> Value {
    match r {
        pairdim::pregeo::AxiomResult::Pass => json!({ "status": "pass" }),
        pairdim::pregeo::AxiomResult::Fail(w) => json!({
            "status": "fail",
            "witness": { "set": w.set, "a": w.a, "b": w.b },
        }),
    }
}

fn parse_assignment(entry: &str, trans: &[String]) -> Result<(String, Polynomial), EngineError> {
    let Some((name, value)) = entry.split_once('=') else {
        return Err(EngineError::Invalid(format!("bad assignment '{entry}', expected name=value")));
    };
    let name = name.trim().to_string();
    let value = value.trim();
    if trans.iter().any(|t| t == value) {
        return Ok((name, Polynomial::var(&Var::transcendental(value))));
    }
    let rational = if let Some((num, den)) = value.split_once('/') {
        let n: i64 = num.trim().parse().map_err(|_| bad_value(entry))?;
        let d: i64 = den.trim().parse().map_err(|_| bad_value(entry))?;
        if d == 0 {
            return Err(bad_value(entry));
        }
        rat_frac(n, d)
    } else {
        let n: i64 = value.parse().map_err(|_| bad_value(entry))?;
        rat_frac(n, 1)
    };
    Ok((name, Polynomial::constant(rational)))
}

fn bad_value(entry: &str) -> EngineError {
    EngineError::Invalid(format!("bad assignment value in '{entry}'"))
}

fn sample_value(rng: &mut ChaCha8Rng, t: Option<&Var>) -> Polynomial {
    match (rng.gen_range(0..4u8), t) {
        (0, _) | (_, None) => Polynomial::int(rng.gen_range(-3..=3)),
        (1, Some(t)) => Polynomial::var(t),
        (2, Some(t)) => {
            &(&Polynomial::var(t) * &Polynomial::int(rng.gen_range(1..=2)))
                + &Polynomial::int(rng.gen_range(-2..=2))
        }
        (_, Some(_)) => Polynomial::constant(rat_frac(rng.gen_range(-3..=3), rng.gen_range(1..=2))),
    }
}
