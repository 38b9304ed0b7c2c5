//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr     := sign? term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := base ('^' uint)?
//! base     := rational | 'i' | var | nu | '(' expr ')'
//! var      := 'x' uint
//! nu       := 'nu' | 'ν'
//! rational := uint ('/' uint)?
//! ```
//!
//! Whitespace is insignificant. `nu` is only accepted by [`parse_nu_series`].

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{GaussianRational, NuSeries, Rational, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable x{index} at position {pos} exceeds chart dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize, pos: usize },
    #[error("`nu` is not allowed in a plain scalar (position {pos})")]
    UnexpectedNu { pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Var(usize),
    I,
    Nu,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut k = 0;
    let digits = |k: &mut usize| -> String {
        let mut s = String::new();
        while *k < chars.len() && chars[*k].1.is_ascii_digit() {
            s.push(chars[*k].1);
            *k += 1;
        }
        s
    };
    while k < chars.len() {
        let (pos, c) = chars[k];
        match c {
            c if c.is_whitespace() => k += 1,
            '0'..='9' => {
                let s = digits(&mut k);
                out.push((pos, Tok::Int(s.parse().expect("digit string"))));
            }
            'x' => {
                k += 1;
                let s = digits(&mut k);
                if s.is_empty() {
                    return Err(ParseError::Syntax { pos, msg: "expected index after `x`".into() });
                }
                let index = s.parse::<usize>().map_err(|_| ParseError::Syntax {
                    pos,
                    msg: "variable index too large".into(),
                })?;
                out.push((pos, Tok::Var(index)));
            }
            'n' if chars.get(k + 1).map(|c| c.1) == Some('u') => {
                k += 2;
                out.push((pos, Tok::Nu));
            }
            'ν' => {
                k += 1;
                out.push((pos, Tok::Nu));
            }
            'i' => {
                k += 1;
                out.push((pos, Tok::I));
            }
            '+' => {
                k += 1;
                out.push((pos, Tok::Plus));
            }
            '-' => {
                k += 1;
                out.push((pos, Tok::Minus));
            }
            '*' => {
                k += 1;
                out.push((pos, Tok::Star));
            }
            '/' => {
                k += 1;
                out.push((pos, Tok::Slash));
            }
            '^' => {
                k += 1;
                out.push((pos, Tok::Caret));
            }
            '(' => {
                k += 1;
                out.push((pos, Tok::LParen));
            }
            ')' => {
                k += 1;
                out.push((pos, Tok::RParen));
            }
            other => {
                return Err(ParseError::Syntax { pos, msg: format!("unexpected character `{other}`") })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    dim: usize,
    allow_nu: bool,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.0).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.pos(), msg: msg.to_string() })
    }

    fn expr(&mut self) -> Result<NuSeries, ParseError> {
        let mut negate = false;
        match self.peek() {
            Some(Tok::Minus) => {
                negate = true;
                self.at += 1;
            }
            Some(Tok::Plus) => self.at += 1,
            _ => {}
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<NuSeries, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.at += 1;
            let rhs = self.factor()?;
            acc = full_product(&acc, &rhs);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<NuSeries, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.at += 1;
            let e = match self.peek() {
                Some(Tok::Int(n)) => n.clone(),
                _ => return self.err("expected unsigned integer exponent"),
            };
            let e: u32 = e
                .try_into()
                .or_else(|_| self.err("exponent too large"))?;
            self.at += 1;
            let mut acc = NuSeries::from_scalar(Scalar::one());
            for _ in 0..e {
                acc = full_product(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<NuSeries, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.at += 1;
                let mut q = Rational::from_integer(n);
                if self.peek() == Some(&Tok::Slash) {
                    self.at += 1;
                    let d = match self.peek() {
                        Some(Tok::Int(d)) => d.clone(),
                        _ => return self.err("expected denominator"),
                    };
                    if d.is_zero() {
                        return self.err("zero denominator");
                    }
                    self.at += 1;
                    q /= Rational::from_integer(d);
                }
                Ok(Scalar::constant(GaussianRational::real(q)).into())
            }
            Some(Tok::I) => {
                self.at += 1;
                Ok(Scalar::i().into())
            }
            Some(Tok::Var(index)) => {
                self.at += 1;
                if index == 0 || index > self.dim {
                    return Err(ParseError::VariableOutOfRange { index, dim: self.dim, pos });
                }
                Ok(Scalar::var(index - 1).into())
            }
            Some(Tok::Nu) => {
                if !self.allow_nu {
                    return Err(ParseError::UnexpectedNu { pos });
                }
                self.at += 1;
                Ok(NuSeries::monomial(1, Scalar::one()))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.at += 1;
                Ok(inner)
            }
            _ => self.err("expected number, `i`, variable or `(`"),
        }
    }
}

fn full_product(a: &NuSeries, b: &NuSeries) -> NuSeries {
    let order = a.coeffs().len() + b.coeffs().len();
    a.mul_trunc(b, order)
}

fn run(text: &str, dim: usize, allow_nu: bool) -> Result<NuSeries, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, at: 0, end: text.len(), dim, allow_nu };
    if p.toks.is_empty() {
        return p.err("empty expression");
    }
    let value = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(value)
}

/// Parse a polynomial in `x1..x{dim}`.
pub fn parse_scalar(text: &str, dim: usize) -> Result<Scalar, ParseError> {
    Ok(run(text, dim, false)?.coeff(0))
}

/// Parse a polynomial in `x1..x{dim}` and the formal parameter `nu`.
pub fn parse_nu_series(text: &str, dim: usize) -> Result<NuSeries, ParseError> {
    run(text, dim, true)
}
