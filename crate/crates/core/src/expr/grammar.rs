//! Text form of expressions: a canonical printer and the matching parser.
//!
//! This is grammar version 1 (see [`crate::GRAMMAR_VERSION`]); any breaking
//! change to the syntax must bump that constant and keep this module able
//! to reject newer input cleanly.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := '-' factor | primary ('^' exponent)?
//! exponent := uint | ident | '(' expr ')'
//! primary  := uint | '(' expr ')'
//!           | 'ln' '(' expr ')' | 'exp' '(' expr ')'
//!           | 'sin' '(' expr ')' | 'cos' '(' expr ')'
//!           | ident                      -- variable, jet, parameter, 'e'
//!           | ident '(' args ')'         -- function application
//!           | ident primes '(' args ')'  -- derivative, single argument
//!           | ident '[' uints ']' '(' args ')'  -- derivative, per slot
//! args     := expr (',' expr)*
//! ```
//!
//! Reserved names: `t x y u e ln exp sin cos` and everything starting with
//! `u_` (jet variables, e.g. `u_txx`). `e` is Euler's number. `#` starts a
//! comment running to the end of the line; whitespace is insignificant.
//! Numbers are unsigned integer literals; rationals are spelled as
//! quotients (`3/4`), which the exact arithmetic folds. Exponents may be
//! integers, parenthesized rationals, or parameter-only expressions
//! (`x^n`, `x^(n+1)`, `2^(1/2)`).
//!
//! Printing is deterministic and total; `parse(print(e)) == e` for every
//! expression the engine can build (checked by a property test below).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::{Atom, Expo, Expr, Jet, Monomial, Poly, Rat, Trig, Var};

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        if self.den().is_one() {
            return write_poly(f, self.num());
        }
        if self.num().terms.len() == 1 {
            write_poly(f, self.num())?;
        } else {
            f.write_str("(")?;
            write_poly(f, self.num())?;
            f.write_str(")")?;
        }
        f.write_str("/")?;
        if is_one_factor(self.den()) {
            write_poly(f, self.den())
        } else {
            f.write_str("(")?;
            write_poly(f, self.den())?;
            f.write_str(")")
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, self)
    }
}

/// True when the polynomial prints as a single juxtaposition-free factor,
/// so it can follow `/` without parentheses.
fn is_one_factor(p: &Poly) -> bool {
    if p.terms.len() != 1 {
        return false;
    }
    let (m, c) = p.terms.iter().next().unwrap();
    if m.powers.is_empty() {
        return !c.is_negative() && c.denom().is_one();
    }
    m.powers.len() == 1 && c.is_one()
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &Poly) -> fmt::Result {
    if p.terms.is_empty() {
        return f.write_str("0");
    }
    for (i, (m, c)) in p.terms.iter().enumerate() {
        if i == 0 {
            if c.is_negative() {
                f.write_str("-")?;
            }
        } else if c.is_negative() {
            f.write_str(" - ")?;
        } else {
            f.write_str(" + ")?;
        }
        write_term(f, m, &c.abs())?;
    }
    Ok(())
}

fn write_term(f: &mut fmt::Formatter<'_>, m: &Monomial, c: &Rat) -> fmt::Result {
    let mut lead = true;
    if !c.is_one() || m.powers.is_empty() {
        write_rat(f, c)?;
        lead = false;
    }
    for (a, e) in &m.powers {
        if !lead {
            f.write_str("*")?;
        }
        lead = false;
        write_atom(f, a)?;
        write_expo(f, e)?;
    }
    Ok(())
}

fn write_rat(f: &mut fmt::Formatter<'_>, c: &Rat) -> fmt::Result {
    if c.denom().is_one() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

fn write_atom(f: &mut fmt::Formatter<'_>, a: &Atom) -> fmt::Result {
    match a {
        Atom::Param(p) => f.write_str(p.name()),
        Atom::Prime(p) => write!(f, "{p}"),
        Atom::Var(v) => f.write_str(v.name()),
        Atom::Jet(j) => write!(f, "{j}"),
        Atom::Log(base) => {
            f.write_str("ln(")?;
            write_poly(f, base)?;
            f.write_str(")")
        }
        Atom::Exp(arg) => {
            if arg.is_one() {
                f.write_str("e")
            } else {
                write!(f, "exp({arg})")
            }
        }
        Atom::Pow(base) => {
            f.write_str("(")?;
            write_poly(f, base)?;
            f.write_str(")")
        }
        Atom::Trig(Trig::Sin, arg) => write!(f, "sin({arg})"),
        Atom::Trig(Trig::Cos, arg) => write!(f, "cos({arg})"),
        Atom::Fun(app) => {
            f.write_str(app.sym.name())?;
            if app.deriv_order() > 0 {
                if app.args.len() == 1 && app.deriv[0] <= 3 {
                    for _ in 0..app.deriv[0] {
                        f.write_str("'")?;
                    }
                } else {
                    f.write_str("[")?;
                    for (i, d) in app.deriv.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{d}")?;
                    }
                    f.write_str("]")?;
                }
            }
            f.write_str("(")?;
            for (i, x) in app.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        }
    }
}

fn write_expo(f: &mut fmt::Formatter<'_>, e: &Expo) -> fmt::Result {
    match e {
        Expo::Int(1) => Ok(()),
        Expo::Int(k) if *k >= 0 => write!(f, "^{k}"),
        Expo::Int(k) => write!(f, "^({k})"),
        Expo::Rat(r) => {
            f.write_str("^(")?;
            if r.is_negative() {
                f.write_str("-")?;
            }
            write_rat(f, &r.abs())?;
            f.write_str(")")
        }
        Expo::Sym(inner) => {
            if let Some(name) = bare_param(inner) {
                write!(f, "^{name}")
            } else {
                write!(f, "^({inner})")
            }
        }
    }
}

/// `Some(name)` when the expression is exactly one parameter.
fn bare_param(e: &Expr) -> Option<&str> {
    if !e.den().is_one() || e.num().terms.len() != 1 {
        return None;
    }
    let (m, c) = e.num().terms.iter().next().unwrap();
    if !c.is_one() || m.powers.len() != 1 {
        return None;
    }
    match m.powers.iter().next().unwrap() {
        (Atom::Param(p), Expo::Int(1)) => Some(p.name()),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

/// A syntax or domain error at a byte offset of the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.pos, self.msg)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Prime,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

/// Parses grammar-v1 source into a canonical expression.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses source that must denote a polynomial (canonical denominator 1).
pub fn parse_poly(src: &str) -> Result<Poly, ParseError> {
    let e = parse(src)?;
    if !e.den().is_one() {
        return Err(ParseError {
            pos: 0,
            msg: "expected a polynomial, but the expression has a denominator".to_string(),
        });
    }
    Ok(e.num().clone())
}

fn reserved(name: &str) -> bool {
    matches!(name, "t" | "x" | "y" | "u" | "e" | "ln" | "exp" | "sin" | "cos")
        || name.starts_with("u_")
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ParseError> {
        let mut toks = Vec::new();
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let b = bytes[i];
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => i += 1,
                b'#' => {
                    while i < bytes.len() && bytes[i] != b'\n' {
                        i += 1;
                    }
                }
                b'0'..=b'9' => {
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let text = &src[start..i];
                    let n: BigInt = text.parse().expect("digit run");
                    toks.push((start, Tok::Int(n)));
                }
                b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                    let start = i;
                    while i < bytes.len()
                        && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    toks.push((start, Tok::Ident(src[start..i].to_string())));
                }
                _ => {
                    let tok = match b {
                        b'+' => Tok::Plus,
                        b'-' => Tok::Minus,
                        b'*' => Tok::Star,
                        b'/' => Tok::Slash,
                        b'^' => Tok::Caret,
                        b'(' => Tok::LParen,
                        b')' => Tok::RParen,
                        b'[' => Tok::LBracket,
                        b']' => Tok::RBracket,
                        b',' => Tok::Comma,
                        b'\'' => Tok::Prime,
                        _ => {
                            return Err(ParseError {
                                pos: i,
                                msg: format!("unexpected character {:?}", b as char),
                            })
                        }
                    };
                    toks.push((i, tok));
                    i += 1;
                }
            }
        }
        Ok(Parser {
            toks,
            at: 0,
            end: src.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.at == self.toks.len() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input".to_string()))
        }
    }

    fn err(&self, msg: String) -> ParseError {
        ParseError {
            pos: self.pos(),
            msg,
        }
    }

    fn lift(&self, r: Result<Expr, super::ExprError>) -> Result<Expr, ParseError> {
        r.map_err(|e| self.err(e.to_string()))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc.add(&self.term()?);
            } else if self.eat(&Tok::Minus) {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(&Tok::Star) {
                acc = acc.mul(&self.factor()?);
            } else if self.eat(&Tok::Slash) {
                let rhs = self.factor()?;
                acc = self.lift(acc.div(&rhs))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(-&self.factor()?);
        }
        let base = self.primary()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let e = self.exponent()?;
        let powed = self.lift(base.pow(&e))?;
        if self.peek() == Some(&Tok::Caret) {
            return Err(self.err("chained exponents need parentheses".to_string()));
        }
        Ok(powed)
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.at += 1;
                Ok(Expr::rational(Rat::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                if reserved(&name) {
                    return Err(self.err(format!(
                        "exponent must be an integer, a rational, or parameter-only; `{name}` is reserved"
                    )));
                }
                self.at += 1;
                Ok(Expr::param(&name))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.err("expected an exponent".to_string())),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.bump() {
            Some(Tok::Int(n)) => Ok(Expr::rational(Rat::from_integer(n))),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.after_ident(name),
            Some(other) => Err(ParseError {
                pos: self.toks[self.at - 1].0,
                msg: format!("unexpected token {other:?}"),
            }),
            None => Err(self.err("unexpected end of input".to_string())),
        }
    }

    fn after_ident(&mut self, name: String) -> Result<Expr, ParseError> {
        // Built-in unary functions.
        if matches!(name.as_str(), "ln" | "exp" | "sin" | "cos") {
            self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
            let arg = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return match name.as_str() {
                "ln" => self.lift(arg.ln()),
                "exp" => Ok(arg.exp()),
                "sin" => Ok(arg.sin()),
                _ => Ok(arg.cos()),
            };
        }

        // Derivative tags: primes (single argument) or a bracketed list.
        if self.peek() == Some(&Tok::Prime) {
            let mut d: u8 = 0;
            while self.eat(&Tok::Prime) {
                d += 1;
            }
            let args = self.call_args(&name)?;
            if args.len() != 1 {
                return Err(self.err(
                    "prime derivative marks need exactly one argument; use [..] tags".to_string(),
                ));
            }
            return self.apply_fun(&name, &[d], args);
        }
        if self.peek() == Some(&Tok::LBracket) {
            self.at += 1;
            let mut deriv = Vec::new();
            loop {
                match self.bump() {
                    Some(Tok::Int(n)) => {
                        use num_traits::ToPrimitive;
                        let d = n.to_u8().ok_or_else(|| {
                            self.err("derivative order out of range".to_string())
                        })?;
                        deriv.push(d);
                    }
                    _ => return Err(self.err("expected a derivative order".to_string())),
                }
                if self.eat(&Tok::RBracket) {
                    break;
                }
                self.expect(Tok::Comma, "`,` or `]`")?;
            }
            let args = self.call_args(&name)?;
            if deriv.len() != args.len() {
                return Err(self.err(format!(
                    "derivative tag lists {} slots but the call has {} arguments",
                    deriv.len(),
                    args.len()
                )));
            }
            return self.apply_fun(&name, &deriv, args);
        }

        // Plain application.
        if self.peek() == Some(&Tok::LParen) {
            let args = self.call_args(&name)?;
            let deriv = alloc::vec![0u8; args.len()];
            return self.apply_fun(&name, &deriv, args);
        }

        // Bare name: variable, jet, Euler, or parameter.
        if let Some(v) = Var::from_name(&name) {
            return Ok(Expr::var(v));
        }
        if let Some(suffix) = name.strip_prefix("u_") {
            return match Jet::from_suffix(suffix) {
                Some(j) => Ok(Expr::jet(j)),
                None => Err(self.err(format!("invalid jet variable `{name}`"))),
            };
        }
        if name == "e" {
            return Ok(Expr::one().exp());
        }
        Ok(Expr::param(&name))
    }

    fn call_args(&mut self, name: &str) -> Result<Vec<Expr>, ParseError> {
        if reserved(name) {
            return Err(self.err(format!("`{name}` is reserved and not a function symbol")));
        }
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        loop {
            args.push(self.expr()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(Tok::Comma, "`,` or `)`")?;
        }
    }

    fn apply_fun(&mut self, name: &str, deriv: &[u8], args: Vec<Expr>) -> Result<Expr, ParseError> {
        if deriv.iter().all(|&d| d == 0) {
            Ok(Expr::fun(name, &args))
        } else {
            Ok(Expr::fun_deriv(name, deriv, &args))
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
