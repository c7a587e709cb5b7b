//! Recursive-descent parser for scalar text.
//!
//! Grammar:
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary | atom)*      // juxtaposition multiplies
//! unary := ('+' | '-') unary | atom
//! atom  := integer | decimal | 'sqrt2' | 'sqrt(2)' | '√2' | '(' expr ')'
//! ```

use std::str::FromStr;

use num_bigint::BigInt;

use super::{Rational, Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Int(BigInt),
    Decimal(f64),
    Sqrt2,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ScalarError> {
    let err = || ScalarError::Parse(src.to_string());
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1
            }
            '-' | '−' => {
                out.push(Token::Minus);
                i += 1
            }
            '*' | '·' => {
                out.push(Token::Star);
                i += 1
            }
            '/' => {
                out.push(Token::Slash);
                i += 1
            }
            '(' => {
                out.push(Token::LParen);
                i += 1
            }
            ')' => {
                out.push(Token::RParen);
                i += 1
            }
            '√' => {
                if chars.get(i + 1) == Some(&'2') {
                    out.push(Token::Sqrt2);
                    i += 2;
                } else {
                    return Err(err());
                }
            }
            's' => {
                let rest: String = chars[i..].iter().collect();
                if rest.starts_with("sqrt(2)") {
                    out.push(Token::Sqrt2);
                    i += 7;
                } else if rest.starts_with("sqrt2") {
                    out.push(Token::Sqrt2);
                    i += 5;
                } else {
                    return Err(err());
                }
            }
            '0'..='9' | '.' => {
                let start = i;
                let mut decimal = false;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    decimal |= chars[i] == '.';
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    decimal = true;
                    i += 1;
                    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                        i += 1;
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                if decimal {
                    out.push(Token::Decimal(f64::from_str(&text).map_err(|_| err())?));
                } else {
                    out.push(Token::Int(BigInt::from_str(&text).map_err(|_| err())?));
                }
            }
            _ => return Err(err()),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self) -> ScalarError {
        ScalarError::Parse(self.src.to_string())
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t {
                Token::Plus => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Token::Minus => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.unary()?;
        while let Some(t) = self.peek() {
            match t {
                Token::Star => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Token::Slash => {
                    self.pos += 1;
                    let d = self.unary()?;
                    acc = acc.checked_div(&d)?;
                }
                Token::Sqrt2 | Token::LParen => {
                    acc = &acc * &self.atom()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Scalar, ScalarError> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Scalar, ScalarError> {
        match self.next() {
            Some(Token::Int(n)) => Ok(Scalar::from(Rational::from_bigints(n, BigInt::from(1))?)),
            Some(Token::Decimal(v)) => Ok(Scalar::Approx(v)),
            Some(Token::Sqrt2) => Ok(Scalar::sqrt2()),
            Some(Token::LParen) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(v),
                    _ => Err(self.err()),
                }
            }
            _ => Err(self.err()),
        }
    }
}

pub(super) fn parse_scalar(src: &str) -> Result<Scalar, ScalarError> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(ScalarError::Parse(src.to_string()));
    }
    let mut p = Parser { tokens, pos: 0, src };
    let v = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.err());
    }
    Ok(v)
}
