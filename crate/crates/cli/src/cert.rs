//! Certificate construction. Certificates are self-describing JSON
//! objects: the original input, the engine configuration, and a
//! kind-specific payload with every formula serialized in the grammar's
//! text form. Repeated runs of the same invocation produce byte-identical
//! output; keys are emitted in sorted order and no timestamps appear.

use serde_json::{json, Value};

use pairdim::dim2::{Dim, DimCertificate, DimTrace};
use pairdim::Engine;

pub const SCHEMA: &str = "pairdim.certificate/1";

pub struct CertContext<'a> {
    pub engine: &'a Engine,
    pub input: &'a str,
    pub transcendentals: Vec<String>,
}

pub fn certificate(ctx: &CertContext, kind: &str, payload: Value) -> Value {
    json!({
        "schema": SCHEMA,
        "kind": kind,
        "input": ctx.input,
        "char": ctx.engine.characteristic.value(),
        "maxClauses": ctx.engine.max_clauses,
        "transcendentals": ctx.transcendentals,
        "engineVersion": env!("CARGO_PKG_VERSION"),
        "payload": payload,
    })
}

pub fn dim_value(d: Dim) -> Value {
    match d {
        Dim::NegInf => Value::String("neg_inf".into()),
        Dim::Fin(n) => Value::from(n),
    }
}

pub fn dim_trace_value(trace: &DimTrace) -> Value {
    match trace {
        DimTrace::Sentence { holds } => json!({
            "kind": "sentence",
            "holds": holds,
        }),
        DimTrace::Peel { var, disjuncts, dropped } => json!({
            "kind": "peel",
            "var": var.name(),
            "dropped": dropped,
            "disjuncts": disjuncts.iter().map(|d| json!({
                "formula": d.formula,
                "emptyFibers": d.empty_formula,
                "smallNonemptyFibers": d.small_nonempty_formula,
                "coSmallFibers": d.cosmall_formula,
                "smallCert": dim_cert_value(&d.small_cert),
                "coSmallCert": dim_cert_value(&d.cosmall_cert),
                "dimension": dim_value(d.dimension),
            })).collect::<Vec<_>>(),
        }),
    }
}

pub fn dim_cert_value(cert: &DimCertificate) -> Value {
    json!({
        "dimension": dim_value(cert.dimension),
        "trace": dim_trace_value(&cert.trace),
    })
}

/// Human-oriented rendering; the JSON form is the contract.
pub fn render_text(cert: &Value) -> String {
    let mut out = String::new();
    render_into(cert, 0, &mut out);
    out
}

fn render_into(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match val {
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_into(val, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {val}\n")),
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match item {
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{pad}-\n"));
                        render_into(item, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}- {item}\n")),
                }
            }
        }
        other => out.push_str(&format!("{pad}{other}\n")),
    }
}
