//! Canonical text form. `parse(print(f))` is alpha-equivalent to f.

use std::fmt;

use super::{Atom, Formula, Quantifier};
use crate::poly::Sort;

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Eq(p) => write!(f, "{p} = 0"),
            Atom::Neq(p) => write!(f, "{p} != 0"),
            Atom::InU(v) => write!(f, "U({v})"),
        }
    }
}

// Precedence levels: Or = 1, And = 2, Not = 3, atoms = 4. Quantifier
// bodies extend as far right as possible, so a quantifier prints at
// level 0 and is parenthesized whenever it appears under a connective.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Not(..) => 3,
        Formula::Atom(_) => 4,
        Formula::Quant(..) => 0,
    }
}

fn write_at(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(f) < min {
        write!(out, "(")?;
        write_at(f, 0, out)?;
        return write!(out, ")");
    }
    match f {
        Formula::Atom(a) => write!(out, "{a}"),
        Formula::Not(g) => {
            write!(out, "~")?;
            // ~U(z) reads fine bare; everything else gets parentheses.
            if matches!(**g, Formula::Atom(Atom::InU(_))) {
                write_at(g, 4, out)
            } else {
                write!(out, "(")?;
                write_at(g, 0, out)?;
                write!(out, ")")
            }
        }
        // The parser associates connectives to the left; right-nested
        // same-connective children need parentheses to round-trip.
        Formula::And(a, b) => {
            write_at(a, 2, out)?;
            write!(out, " & ")?;
            write_at(b, 3, out)
        }
        Formula::Or(a, b) => {
            write_at(a, 1, out)?;
            write!(out, " | ")?;
            write_at(b, 2, out)
        }
        Formula::Quant(q, v, body) => {
            let kw = match q {
                Quantifier::Exists => "exists",
                Quantifier::Forall => "forall",
            };
            if v.sort() == Sort::Small {
                write!(out, "{kw} {v} in U. ")?;
            } else {
                write!(out, "{kw} {v}. ")?;
            }
            write_at(body, 0, out)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, out)
    }
}
