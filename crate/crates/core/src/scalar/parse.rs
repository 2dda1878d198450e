//! Reader for the textual scalar form.
//!
//! Accepts sums of signed products of integers, `z^k`, `r^e` and parenthesised
//! sums, with `·` or `*` as the product sign. Everything [`Scalar`]'s `Display`
//! prints reads back to the same value.

use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use super::{Ambient, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("scalar parse error at byte {pos}: {msg}")]
pub struct ParseScalarError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Z,
    R,
    Caret,
    Times,
    Plus,
    Minus,
    Open,
    Close,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseScalarError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(pos, ch)) = chars.peek() {
        match ch {
            c if c.is_whitespace() => {
                chars.next();
            }
            '0'..='9' => {
                let mut digits = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((pos, Tok::Int(digits.parse().expect("digits"))));
            }
            _ => {
                let tok = match ch {
                    'z' => Tok::Z,
                    'r' => Tok::R,
                    '^' => Tok::Caret,
                    '·' | '*' => Tok::Times,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '(' => Tok::Open,
                    ')' => Tok::Close,
                    other => {
                        return Err(ParseScalarError {
                            pos,
                            msg: format!("unexpected character {other:?}"),
                        })
                    }
                };
                out.push((pos, tok));
                chars.next();
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    amb: &'a Arc<Ambient>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseScalarError> {
        Err(ParseScalarError {
            pos: self.pos(),
            msg: msg.to_string(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Scalar, ParseScalarError> {
        let mut acc = self.signed_product()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc + self.product()?;
            } else if self.eat(&Tok::Minus) {
                acc = acc - self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn signed_product(&mut self) -> Result<Scalar, ParseScalarError> {
        if self.eat(&Tok::Minus) {
            Ok(-self.product()?)
        } else {
            self.product()
        }
    }

    fn product(&mut self) -> Result<Scalar, ParseScalarError> {
        let mut acc = self.factor()?;
        while self.eat(&Tok::Times) {
            acc = acc * self.factor()?;
        }
        Ok(acc)
    }

    fn exponent(&mut self) -> Result<i64, ParseScalarError> {
        if !self.eat(&Tok::Caret) {
            return self.err("expected '^'");
        }
        let neg = self.eat(&Tok::Minus);
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.at += 1;
                let v: i64 = match i64::try_from(v) {
                    Ok(v) => v,
                    Err(_) => return self.err("exponent out of range"),
                };
                Ok(if neg { -v } else { v })
            }
            _ => self.err("expected exponent"),
        }
    }

    fn factor(&mut self) -> Result<Scalar, ParseScalarError> {
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.at += 1;
                Ok(Scalar::from_bigint(self.amb, v))
            }
            Some(Tok::Z) => {
                self.at += 1;
                let k = self.exponent()?;
                Ok(Scalar::root(self.amb, k))
            }
            Some(Tok::R) => {
                self.at += 1;
                let e = self.exponent()?;
                match i32::try_from(e) {
                    Ok(e) => Ok(Scalar::radical_pow(self.amb, e)),
                    Err(_) => self.err("radical exponent out of range"),
                }
            }
            Some(Tok::Open) => {
                self.at += 1;
                let inner = self.sum()?;
                if !self.eat(&Tok::Close) {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            _ => self.err("expected integer, z^k, r^e or '('"),
        }
    }
}

impl Scalar {
    /// Parses the textual form within the given ring.
    pub fn parse(amb: &Arc<Ambient>, src: &str) -> Result<Scalar, ParseScalarError> {
        let toks = lex(src)?;
        if toks.is_empty() {
            return Err(ParseScalarError {
                pos: 0,
                msg: "empty input".into(),
            });
        }
        let mut p = Parser {
            toks,
            at: 0,
            end: src.len(),
            amb,
        };
        let value = p.sum()?;
        if p.at != p.toks.len() {
            return p.err("trailing input");
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_display_form() {
        let amb = Ambient::new(6, 12).unwrap();
        let x = Scalar::root(&amb, 5) * Scalar::radical_pow(&amb, -1)
            + Scalar::from_int(&amb, 3)
            - Scalar::root(&amb, 2);
        let text = x.to_string();
        assert_eq!(Scalar::parse(&amb, &text).unwrap(), x);
    }

    #[test]
    fn ascii_and_reduction() {
        let amb = Ambient::new(3, 3).unwrap();
        // z^3 = -1 for ζ of order 6
        let v = Scalar::parse(&amb, "1 + 1*z^3").unwrap();
        assert!(v.is_zero());
        let w = Scalar::parse(&amb, "(2)·r^2").unwrap();
        assert_eq!(w, Scalar::from_int(&amb, 6));
        assert_eq!(Scalar::parse(&amb, "0").unwrap(), Scalar::zero(&amb));
    }

    #[test]
    fn errors_carry_position() {
        let amb = Ambient::new(2, 2).unwrap();
        let e = Scalar::parse(&amb, "1 + q").unwrap_err();
        assert_eq!(e.pos, 4);
        assert!(Scalar::parse(&amb, "(1 + z^1").is_err());
        assert!(Scalar::parse(&amb, "").is_err());
        assert!(Scalar::parse(&amb, "1 2").is_err());
    }
}
