//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor (("*"|"/") factor)* ;
//! factor := base ("^" integer)? ;
//! base   := number | "i" | coord | func "(" expr ")" | "(" expr ")" | "-" base ;
//! ```
//!
//! Unary minus belongs to `base`, so `-p1^2` reads as `(-p1)^2`. Exponents
//! may carry a leading minus (`p1^-1`).

use num_complex::Complex64;
use thiserror::Error;

use super::{Coord, Func, ScalarExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Int(i64),
    Sym(char),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_char(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    /// Reads a decimal literal: digits, optional fraction, optional exponent.
    fn number(&mut self) -> Result<(f64, bool), ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        let mut integral = true;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'.' {
            integral = false;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                integral = false;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.src[start..i];
        let v = text.parse::<f64>().map_err(|_| ParseError::Syntax {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })?;
        self.pos = i;
        Ok((v, integral))
    }

    fn next(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        let Some(c) = self.peek_char() else {
            return Ok(None);
        };
        let pos = self.pos;
        if c.is_ascii_digit() || c == '.' {
            let (v, integral) = self.number()?;
            if integral && v.abs() < 2f64.powi(53) {
                return Ok(Some((pos, Tok::Int(v as i64))));
            }
            return Ok(Some((pos, Tok::Num(v))));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let end = self.src[pos..]
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .map_or(self.src.len(), |k| pos + k);
            self.pos = end;
            return Ok(Some((pos, Tok::Ident(self.src[pos..end].to_string()))));
        }
        if "+-*/^()".contains(c) {
            self.pos += 1;
            return Ok(Some((pos, Tok::Sym(c))));
        }
        Err(ParseError::Syntax {
            pos,
            msg: format!("unexpected character `{c}`"),
        })
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(Tok::Sym('+')) => {
                    self.at += 1;
                    terms.push(self.term()?);
                }
                Some(Tok::Sym('-')) => {
                    self.at += 1;
                    terms.push(-self.term()?);
                }
                _ => break,
            }
        }
        Ok(ScalarExpr::sum(terms))
    }

    fn term(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Sym('*')) => {
                    self.at += 1;
                    acc = &acc * &self.factor()?;
                }
                Some(Tok::Sym('/')) => {
                    self.at += 1;
                    acc = ScalarExpr::quotient(acc, self.factor()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<ScalarExpr, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::Sym('^')) {
            self.at += 1;
            let negative = if self.peek() == Some(&Tok::Sym('-')) {
                self.at += 1;
                true
            } else {
                false
            };
            match self.bump() {
                Some(Tok::Int(n)) => {
                    let n = if negative { -n } else { n };
                    let n = i32::try_from(n).or_else(|_| {
                        self.at -= 1;
                        self.err("exponent out of range")
                    })?;
                    return Ok(ScalarExpr::pow(base, n));
                }
                _ => {
                    self.at -= 1;
                    return self.err("expected integer exponent");
                }
            }
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<ScalarExpr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(ScalarExpr::real(n as f64)),
            Some(Tok::Num(v)) => Ok(ScalarExpr::real(v)),
            Some(Tok::Sym('-')) => Ok(-self.base()?),
            Some(Tok::Sym('(')) => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if name == "i" {
                    return Ok(ScalarExpr::constant(Complex64::new(0.0, 1.0)));
                }
                if let Some(c) = Coord::from_name(&name) {
                    return Ok(ScalarExpr::var(c));
                }
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(ScalarExpr::func(f, arg));
                }
                Err(ParseError::UnknownIdentifier { pos, name })
            }
            Some(_) => {
                self.at -= 1;
                self.err("unexpected token")
            }
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses an expression in `q1, q2, p1, p2` with complex unit `i`.
pub fn parse_expr(src: &str) -> Result<ScalarExpr, ParseError> {
    let mut lex = Lexer { src, pos: 0 };
    let mut toks = Vec::new();
    while let Some(t) = lex.next()? {
        toks.push(t);
    }
    let mut p = Parser {
        toks,
        at: 0,
        end: src.len(),
    };
    let e = p.expr()?;
    if p.at < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Node, Point};

    #[test]
    fn zero_literal() {
        assert!(parse_expr("0").unwrap().is_const_zero());
    }

    #[test]
    fn born_infeld_coefficient() {
        let e = parse_expr("1 - p1^2").unwrap();
        assert!(matches!(e.node(), Node::Sum(_)));
        let v = e.evaluate(&Point::new([0.0, 0.0, 3.0, 0.0])).unwrap();
        assert_eq!(v.re, -8.0);
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        let e = parse_expr("-p1^2").unwrap();
        let v = e.evaluate(&Point::new([0.0, 0.0, 3.0, 0.0])).unwrap();
        assert_eq!(v.re, 9.0);
        let e = parse_expr("-(p1^2)").unwrap();
        let v = e.evaluate(&Point::new([0.0, 0.0, 3.0, 0.0])).unwrap();
        assert_eq!(v.re, -9.0);
    }

    #[test]
    fn numbers_with_fraction_and_exponent() {
        let e = parse_expr("1.5e1 * q1 + .25").unwrap();
        let v = e.evaluate(&Point::new([2.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(v.re, 30.25);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_expr("q1 + x3"),
            Err(ParseError::UnknownIdentifier {
                pos: 5,
                name: "x3".into()
            })
        );
        assert!(matches!(parse_expr("q1 +"), Err(ParseError::Syntax { pos: 4, .. })));
        assert!(matches!(parse_expr("(q1"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_expr("q1 ^ p1"), Err(ParseError::Syntax { pos: 5, .. })));
        assert!(matches!(parse_expr("q1 # 2"), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_expr("sqrt q1"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_expr("q1 q2"), Err(ParseError::Syntax { pos: 3, .. })));
    }
}
