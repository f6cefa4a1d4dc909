//! Recursive-descent parser for the formula grammar.
//!
//! Grammar (UTF-8 text):
//!   directive  := '#trans' ident (',' ident)* '.'
//!   formula    := imp
//!   imp        := or ('->' imp)?
//!   or         := and ('|' and)*
//!   and        := unary ('&' unary)*
//!   unary      := '~' unary | quantifier | primary
//!   quantifier := ('exists' | 'forall') ident ('in' 'U')? '.' imp
//!   primary    := 'U' '(' ident ')' | term ('='|'!=') term | '(' imp ')'
//!   term       := product (('+'|'-') product)*
//!   product    := power ('*' power)*
//!   power      := factor ('^' int)?
//!   factor     := int | ident | '-' factor | '(' term ')'
//!
//! Implications desugar to negation and disjunction at parse time. Bound
//! variables are alpha-renamed so they are distinct from free variables
//! and from each other.

use num::BigInt;
use std::collections::BTreeSet;

use super::{alpha_normalize, Formula};
use crate::error::EngineError;
use crate::poly::{Polynomial, Rat, Var};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Caret,
    Eq,
    Neq,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    LParen,
    RParen,
    Dot,
    Comma,
    Hash,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Lexer, EngineError> {
    let bytes: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                toks.push((Tok::Plus, start));
                i += 1;
            }
            '-' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '>' {
                    toks.push((Tok::Arrow, start));
                    i += 2;
                } else {
                    toks.push((Tok::Minus, start));
                    i += 1;
                }
            }
            '*' => {
                toks.push((Tok::Star, start));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, start));
                i += 1;
            }
            '=' => {
                toks.push((Tok::Eq, start));
                i += 1;
            }
            '!' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '=' {
                    toks.push((Tok::Neq, start));
                    i += 2;
                } else {
                    return Err(EngineError::Syntax {
                        pos: start,
                        message: "expected '=' after '!'".into(),
                    });
                }
            }
            '~' => {
                toks.push((Tok::Tilde, start));
                i += 1;
            }
            '&' => {
                toks.push((Tok::Amp, start));
                i += 1;
            }
            '|' => {
                toks.push((Tok::Pipe, start));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, start));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, start));
                i += 1;
            }
            '.' => {
                toks.push((Tok::Dot, start));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, start));
                i += 1;
            }
            '#' => {
                toks.push((Tok::Hash, start));
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    s.push(bytes[i]);
                    i += 1;
                }
                toks.push((Tok::Int(s.parse().unwrap()), start));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    s.push(bytes[i]);
                    i += 1;
                }
                toks.push((Tok::Ident(s), start));
            }
            other => {
                return Err(EngineError::Syntax {
                    pos: start,
                    message: format!("unexpected character '{other}'"),
                });
            }
        }
    }
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_pos(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(usize::MAX)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), EngineError> {
        let pos = self.peek_pos();
        match self.next() {
            Some(t) if t == tok => Ok(()),
            _ => Err(EngineError::Syntax { pos, message: format!("expected {what}") }),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, EngineError> {
        let pos = self.peek_pos();
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => Err(EngineError::Syntax { pos, message: format!("expected {what}") }),
        }
    }
}

const KEYWORDS: [&str; 4] = ["exists", "forall", "in", "U"];

struct Parser {
    lx: Lexer,
    transcendentals: BTreeSet<String>,
    /// Variables bound by enclosing quantifiers, innermost last.
    scope: Vec<Var>,
}

impl Parser {
    fn err(&self, message: impl Into<String>) -> EngineError {
        EngineError::Syntax { pos: self.lx.peek_pos(), message: message.into() }
    }

    fn directives(&mut self) -> Result<(), EngineError> {
        while self.lx.peek() == Some(&Tok::Hash) {
            self.lx.next();
            let kw = self.lx.expect_ident("directive name after '#'")?;
            if kw != "trans" {
                return Err(self.err(format!("unknown directive '#{kw}'")));
            }
            loop {
                let name = self.lx.expect_ident("transcendental constant name")?;
                self.check_var_name(&name)?;
                self.transcendentals.insert(name);
                match self.lx.next() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::Dot) => break,
                    _ => return Err(self.err("expected ',' or '.' in #trans directive")),
                }
            }
        }
        Ok(())
    }

    fn check_var_name(&self, name: &str) -> Result<(), EngineError> {
        if KEYWORDS.contains(&name) {
            return Err(self.err(format!("'{name}' is a reserved word")));
        }
        Ok(())
    }

    fn resolve(&self, name: &str) -> Var {
        for v in self.scope.iter().rev() {
            if v.name() == name {
                return v.clone();
            }
        }
        if self.transcendentals.contains(name) {
            Var::transcendental(name)
        } else {
            Var::field(name)
        }
    }

    fn formula(&mut self) -> Result<Formula, EngineError> {
        let lhs = self.or_formula()?;
        if self.lx.peek() == Some(&Tok::Arrow) {
            self.lx.next();
            let rhs = self.formula()?;
            return Ok(Formula::Or(Box::new(Formula::Not(Box::new(lhs))), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or_formula(&mut self) -> Result<Formula, EngineError> {
        let mut lhs = self.and_formula()?;
        while self.lx.peek() == Some(&Tok::Pipe) {
            self.lx.next();
            let rhs = self.and_formula()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_formula(&mut self) -> Result<Formula, EngineError> {
        let mut lhs = self.unary_formula()?;
        while self.lx.peek() == Some(&Tok::Amp) {
            self.lx.next();
            let rhs = self.unary_formula()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary_formula(&mut self) -> Result<Formula, EngineError> {
        match self.lx.peek() {
            Some(Tok::Tilde) => {
                self.lx.next();
                Ok(Formula::Not(Box::new(self.unary_formula()?)))
            }
            Some(Tok::Ident(s)) if s == "exists" || s == "forall" => self.quantifier(),
            _ => self.primary(),
        }
    }

    fn quantifier(&mut self) -> Result<Formula, EngineError> {
        let kw = self.lx.expect_ident("quantifier")?;
        let name = self.lx.expect_ident("quantified variable")?;
        self.check_var_name(&name)?;
        let small = match self.lx.peek() {
            Some(Tok::Ident(s)) if s == "in" => {
                self.lx.next();
                let u = self.lx.expect_ident("'U'")?;
                if u != "U" {
                    return Err(self.err("expected 'U' after 'in'"));
                }
                true
            }
            _ => false,
        };
        self.lx.expect(Tok::Dot, "'.' after quantified variable")?;
        let var = if small { Var::small(&name) } else { Var::field(&name) };
        self.scope.push(var.clone());
        let body = self.formula()?;
        self.scope.pop();
        let q = if kw == "exists" { super::Quantifier::Exists } else { super::Quantifier::Forall };
        Ok(Formula::Quant(q, var, Box::new(body)))
    }

    fn primary(&mut self) -> Result<Formula, EngineError> {
        if let Some(Tok::Ident(s)) = self.lx.peek() {
            if s == "U" {
                self.lx.next();
                self.lx.expect(Tok::LParen, "'(' after U")?;
                // U takes a single variable, never a compound term.
                let checkpoint = self.lx.pos;
                let name = match self.lx.next() {
                    Some(Tok::Ident(name)) => name,
                    _ => {
                        return Err(EngineError::Sort(
                            "U is applied to a non-variable term".into(),
                        ))
                    }
                };
                if self.lx.peek() != Some(&Tok::RParen) {
                    self.lx.pos = checkpoint;
                    return Err(EngineError::Sort(
                        "U is applied to a non-variable term".into(),
                    ));
                }
                self.lx.next();
                self.check_var_name(&name)?;
                return Ok(Formula::in_u(self.resolve(&name)));
            }
        }
        // A '(' may open either a parenthesized formula or a term;
        // attempt the relational-atom parse first and backtrack.
        let checkpoint = self.lx.pos;
        match self.relation_atom() {
            Ok(f) => Ok(f),
            Err(first_err) => {
                self.lx.pos = checkpoint;
                if self.lx.peek() == Some(&Tok::LParen) {
                    self.lx.next();
                    let f = self.formula()?;
                    self.lx.expect(Tok::RParen, "')'")?;
                    Ok(f)
                } else {
                    Err(first_err)
                }
            }
        }
    }

    fn relation_atom(&mut self) -> Result<Formula, EngineError> {
        let lhs = self.term()?;
        match self.lx.next() {
            Some(Tok::Eq) => {
                let rhs = self.term()?;
                Ok(Formula::eq(&lhs - &rhs))
            }
            Some(Tok::Neq) => {
                let rhs = self.term()?;
                Ok(Formula::neq(&lhs - &rhs))
            }
            _ => Err(self.err("expected '=' or '!=' after term")),
        }
    }

    fn term(&mut self) -> Result<Polynomial, EngineError> {
        let mut acc = self.product()?;
        loop {
            match self.lx.peek() {
                Some(Tok::Plus) => {
                    self.lx.next();
                    acc = &acc + &self.product()?;
                }
                Some(Tok::Minus) => {
                    self.lx.next();
                    acc = &acc - &self.product()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<Polynomial, EngineError> {
        let mut acc = self.power()?;
        while self.lx.peek() == Some(&Tok::Star) {
            self.lx.next();
            acc = &acc * &self.power()?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Polynomial, EngineError> {
        let base = self.factor()?;
        if self.lx.peek() == Some(&Tok::Caret) {
            self.lx.next();
            let pos = self.lx.peek_pos();
            match self.lx.next() {
                Some(Tok::Int(n)) => {
                    let e: u32 = n.try_into().map_err(|_| EngineError::Syntax {
                        pos,
                        message: "exponent out of range".into(),
                    })?;
                    Ok(base.pow(e))
                }
                _ => Err(EngineError::Syntax {
                    pos,
                    message: "expected integer exponent after '^'".into(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn factor(&mut self) -> Result<Polynomial, EngineError> {
        let pos = self.lx.peek_pos();
        match self.lx.next() {
            Some(Tok::Int(n)) => Ok(Polynomial::constant(Rat::from_integer(n))),
            Some(Tok::Ident(s)) => {
                if KEYWORDS.contains(&s.as_str()) {
                    return Err(EngineError::Syntax {
                        pos,
                        message: format!("'{s}' is a reserved word"),
                    });
                }
                Ok(Polynomial::var(&self.resolve(&s)))
            }
            Some(Tok::Minus) => Ok(-&self.factor()?),
            Some(Tok::LParen) => {
                let t = self.term()?;
                self.lx.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => Err(EngineError::Syntax { pos, message: "expected a term".into() }),
        }
    }
}

/// Parses a formula; transcendental constants come from `#trans`
/// directives in the text itself.
pub fn parse(text: &str) -> Result<Formula, EngineError> {
    parse_with_transcendentals(text, &[]).map(|(f, _)| f)
}

/// Parses with additional transcendental constant names declared outside
/// the text. Returns the formula and the full list of declared constants.
pub fn parse_with_transcendentals(
    text: &str,
    extra: &[String],
) -> Result<(Formula, Vec<Var>), EngineError> {
    let lx = lex(text)?;
    let mut p = Parser {
        lx,
        transcendentals: extra.iter().cloned().collect(),
        scope: Vec::new(),
    };
    for name in extra {
        p.check_var_name(name)?;
    }
    p.directives()?;
    let f = p.formula()?;
    if p.lx.peek().is_some() {
        return Err(p.err("trailing input after formula"));
    }
    let trans = p.transcendentals.iter().map(Var::transcendental).collect();
    Ok((alpha_normalize(&f), trans))
}

/// Parses a bare polynomial term, with the named variables given small or
/// transcendental sorts and all others field sort.
pub fn parse_polynomial(
    text: &str,
    small: &[String],
    transcendental: &[String],
) -> Result<Polynomial, EngineError> {
    let lx = lex(text)?;
    let mut p = Parser {
        lx,
        transcendentals: transcendental.iter().cloned().collect(),
        scope: small.iter().map(Var::small).collect(),
    };
    let t = p.term()?;
    if p.lx.peek().is_some() {
        return Err(p.err("trailing input after polynomial"));
    }
    Ok(t)
}

