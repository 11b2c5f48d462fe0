//! Parser and evaluator for user-supplied scalar functions of `t`.
//!
//! The grammar is a fixed minimal calculator fragment: constants, the
//! variable `t`, `pi`, `+ - * /`, integer powers `^`, and `sin cos sqrt exp`.
//! Precedence is `^` > unary minus > `* /` > `+ -`, with left associativity
//! for same-precedence binary operators (including `^`). Expressions evaluate
//! both on plain reals and on [`Jet`]s.

use std::fmt;

use crate::error::{Error, Result};
use crate::jets::Jet;

/// Abstract syntax tree of a scalar expression in `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Const(f64),
    Pi,
    Var,
    Neg(Box<ExprAst>),
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Div(Box<ExprAst>, Box<ExprAst>),
    PowInt(Box<ExprAst>, i32),
    Sin(Box<ExprAst>),
    Cos(Box<ExprAst>),
    Sqrt(Box<ExprAst>),
    Exp(Box<ExprAst>),
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("syntax error at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
        }
    }
}

fn lex(src: &str) -> std::result::Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i], b'0'..=b'9' | b'.') {
                    i += 1;
                }
                // exponent part
                if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j], b'+' | b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: "a numeric literal".into(),
                    found: format!("`{text}`"),
                })?;
                toks.push((Tok::Num(v), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError {
                    offset: i,
                    expected: "an operator, number, identifier or parenthesis".into(),
                    found: format!("`{}`", &src[i..i + 1]),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn err(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.into(),
            found: self
                .peek()
                .map(|t| t.to_string())
                .unwrap_or_else(|| "end of input".into()),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> std::result::Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(expected))
        }
    }

    fn sum(&mut self) -> std::result::Result<ExprAst, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = ExprAst::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = ExprAst::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> std::result::Result<ExprAst, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = ExprAst::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = ExprAst::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> std::result::Result<ExprAst, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            Ok(ExprAst::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> std::result::Result<ExprAst, ParseError> {
        let mut base = self.atom()?;
        while self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let neg = if self.peek() == Some(&Tok::Minus) {
                self.pos += 1;
                true
            } else {
                false
            };
            let off = self.offset();
            match self.bump() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                    let e = v as i32;
                    base = ExprAst::PowInt(Box::new(base), if neg { -e } else { e });
                }
                other => {
                    return Err(ParseError {
                        offset: off,
                        expected: "an integer exponent".into(),
                        found: other
                            .map(|t| t.to_string())
                            .unwrap_or_else(|| "end of input".into()),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> std::result::Result<ExprAst, ParseError> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(ExprAst::Const(v)),
            Some(Tok::LParen) => {
                let e = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "t" => Ok(ExprAst::Var),
                "pi" => Ok(ExprAst::Pi),
                "sin" | "cos" | "sqrt" | "exp" => {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = Box::new(self.sum()?);
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(match name.as_str() {
                        "sin" => ExprAst::Sin(arg),
                        "cos" => ExprAst::Cos(arg),
                        "sqrt" => ExprAst::Sqrt(arg),
                        _ => ExprAst::Exp(arg),
                    })
                }
                _ => Err(ParseError {
                    offset: off,
                    expected: "`t`, `pi`, `sin`, `cos`, `sqrt` or `exp`".into(),
                    found: format!("unknown identifier `{name}`"),
                }),
            },
            other => Err(ParseError {
                offset: off,
                expected: "a number, `t`, `pi`, a function call or `(`".into(),
                found: other
                    .map(|t| t.to_string())
                    .unwrap_or_else(|| "end of input".into()),
            }),
        }
    }
}

/// Parse an expression source string into an AST.
pub fn parse(src: &str) -> std::result::Result<ExprAst, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let ast = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(p.err("end of input"));
    }
    Ok(ast)
}

impl ExprAst {
    /// Evaluate on a jet of the requested order at t0.
    pub fn eval_jet(&self, t0: f64, order: usize) -> Result<Jet> {
        let wrap = |e: Error| e.in_expr(self.to_string());
        match self {
            ExprAst::Const(c) => Ok(Jet::constant(*c, t0, order)),
            ExprAst::Pi => Ok(Jet::constant(std::f64::consts::PI, t0, order)),
            ExprAst::Var => {
                if order == 0 {
                    // order-0 jet of t is just its value
                    Ok(Jet::constant(t0, t0, 0))
                } else {
                    Jet::variable(t0, order)
                }
            }
            ExprAst::Neg(a) => Ok(a.eval_jet(t0, order)?.neg()),
            ExprAst::Add(a, b) => Ok(a.eval_jet(t0, order)?.add(&b.eval_jet(t0, order)?)),
            ExprAst::Sub(a, b) => Ok(a.eval_jet(t0, order)?.sub(&b.eval_jet(t0, order)?)),
            ExprAst::Mul(a, b) => Ok(a.eval_jet(t0, order)?.mul(&b.eval_jet(t0, order)?)),
            ExprAst::Div(a, b) => a
                .eval_jet(t0, order)?
                .div(&b.eval_jet(t0, order)?)
                .map_err(wrap),
            ExprAst::PowInt(a, e) => a.eval_jet(t0, order)?.powi(*e).map_err(wrap),
            ExprAst::Sin(a) => Ok(a.eval_jet(t0, order)?.sin()),
            ExprAst::Cos(a) => Ok(a.eval_jet(t0, order)?.cos()),
            ExprAst::Sqrt(a) => a.eval_jet(t0, order)?.sqrt().map_err(wrap),
            ExprAst::Exp(a) => Ok(a.eval_jet(t0, order)?.exp()),
        }
    }

    /// Plain real evaluation.
    pub fn eval_f64(&self, t: f64) -> Result<f64> {
        Ok(self.eval_jet(t, 0)?.value())
    }
}

fn prec(e: &ExprAst) -> u8 {
    match e {
        ExprAst::Add(..) | ExprAst::Sub(..) => 1,
        ExprAst::Mul(..) | ExprAst::Div(..) => 2,
        ExprAst::Neg(..) => 3,
        ExprAst::PowInt(..) => 4,
        _ => 5,
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Children print parenthesized whenever their precedence does not
        // dominate, so parse(print(ast)) == ast structurally.
        let child = |e: &ExprAst, min: u8| {
            if prec(e) < min {
                format!("({e})")
            } else {
                format!("{e}")
            }
        };
        match self {
            ExprAst::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            ExprAst::Pi => write!(f, "pi"),
            ExprAst::Var => write!(f, "t"),
            ExprAst::Neg(a) => write!(f, "-{}", child(a, 3)),
            ExprAst::Add(a, b) => write!(f, "{}+{}", child(a, 1), child(b, 2)),
            ExprAst::Sub(a, b) => write!(f, "{}-{}", child(a, 1), child(b, 2)),
            ExprAst::Mul(a, b) => write!(f, "{}*{}", child(a, 2), child(b, 3)),
            ExprAst::Div(a, b) => write!(f, "{}/{}", child(a, 2), child(b, 3)),
            ExprAst::PowInt(a, e) => {
                if *e < 0 {
                    write!(f, "{}^-{}", child(a, 5), -(*e as i64))
                } else {
                    write!(f, "{}^{}", child(a, 5), e)
                }
            }
            ExprAst::Sin(a) => write!(f, "sin({a})"),
            ExprAst::Cos(a) => write!(f, "cos({a})"),
            ExprAst::Sqrt(a) => write!(f, "sqrt({a})"),
            ExprAst::Exp(a) => write!(f, "exp({a})"),
        }
    }
}
