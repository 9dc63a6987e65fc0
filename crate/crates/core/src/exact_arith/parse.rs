//! Recursive-descent parser for polynomial expressions.
//!
//! Grammar:
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*      division only by constants
//! unary  := '-' unary | '+' unary | power
//! power  := atom ('^' integer)?
//! atom   := number | identifier | '(' expr ')'
//! ```

use std::fmt;

use super::poly::{Polynomial, Var};
use super::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub position: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at position {}: expected {}, found {}",
            self.position,
            self.expected.join(" or "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".into(),
        }
    }
}

pub(crate) fn tokenize(src: &str, offset: usize) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|(_, c)| c).collect();
            out.push((offset + pos, Tok::Num(s)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|(_, c)| c).collect();
            out.push((offset + pos, Tok::Ident(s)));
        } else if "+-*/^(),".contains(c) {
            out.push((offset + pos, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(SyntaxError {
                position: offset + pos,
                expected: vec!["number".into(), "identifier".into(), "operator".into()],
                found: format!("`{c}`"),
            });
        }
    }
    out.push((offset + src.len(), Tok::End));
    Ok(out)
}

/// Resolves identifiers to polynomials; `None` rejects the identifier.
pub trait Resolver {
    fn resolve(&self, ident: &str) -> Option<Polynomial>;
    fn describe(&self) -> &'static str {
        "variable"
    }
}

/// Accepts any identifier verbatim as a variable name.
pub struct AnyVar;

impl Resolver for AnyVar {
    fn resolve(&self, ident: &str) -> Option<Polynomial> {
        Some(Polynomial::var(Var::new(ident)))
    }
}

impl<F: Fn(&str) -> Option<Polynomial>> Resolver for F {
    fn resolve(&self, ident: &str) -> Option<Polynomial> {
        self(ident)
    }
}

pub(crate) struct Parser<'a, R: Resolver + ?Sized> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    resolver: &'a R,
}

impl<'a, R: Resolver + ?Sized> Parser<'a, R> {
    pub(crate) fn new(toks: Vec<(usize, Tok)>, resolver: &'a R) -> Self {
        Parser {
            toks,
            pos: 0,
            resolver,
        }
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    pub(crate) fn position(&self) -> usize {
        self.toks[self.pos].0
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError {
            position: self.position(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    pub(crate) fn expect_sym(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.peek() == &Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{c}`")]))
        }
    }

    pub(crate) fn expr(&mut self) -> Result<Polynomial, SyntaxError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    let t = self.term()?;
                    acc.add_assign_ref(&t);
                }
                Tok::Sym('-') => {
                    self.bump();
                    let t = self.term()?;
                    acc.sub_assign_ref(&t);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, SyntaxError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    let f = self.unary()?;
                    acc = &acc * &f;
                }
                Tok::Sym('/') => {
                    self.bump();
                    let at = self.position();
                    let f = self.unary()?;
                    match f.as_constant() {
                        Some(c) if !c.is_zero() => acc = acc.scale(&c.recip()),
                        _ => {
                            return Err(SyntaxError {
                                position: at,
                                expected: vec!["nonzero constant divisor".into()],
                                found: format!("`{f}`"),
                            })
                        }
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, SyntaxError> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial, SyntaxError> {
        let base = self.atom()?;
        if self.peek() == &Tok::Sym('^') {
            self.bump();
            match self.bump() {
                Tok::Num(n) => {
                    let e: u32 = n.parse().map_err(|_| SyntaxError {
                        position: self.position(),
                        expected: vec!["small exponent".into()],
                        found: n.clone(),
                    })?;
                    Ok(base.pow(e))
                }
                _ => {
                    self.pos -= 1;
                    Err(self.error(&["integer exponent"]))
                }
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Polynomial, SyntaxError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                let c: Rational = n.parse().expect("digits");
                Ok(Polynomial::constant(c))
            }
            Tok::Ident(name) => {
                let at = self.position();
                self.bump();
                self.resolver.resolve(&name).ok_or_else(|| SyntaxError {
                    position: at,
                    expected: vec![format!("declared {}", self.resolver.describe())],
                    found: format!("identifier `{name}`"),
                })
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            _ => Err(self.error(&["number", "identifier", "`(`"])),
        }
    }
}

/// Parse a polynomial, taking identifiers verbatim as variable names.
pub fn parse_polynomial(src: &str) -> Result<Polynomial, SyntaxError> {
    parse_polynomial_with(src, &AnyVar)
}

pub fn parse_polynomial_with<R: Resolver + ?Sized>(
    src: &str,
    resolver: &R,
) -> Result<Polynomial, SyntaxError> {
    let toks = tokenize(src, 0)?;
    let mut p = Parser::new(toks, resolver);
    let out = p.expr()?;
    if p.peek() != &Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(out)
}
