//! Recursive-descent parser for the Lagrangian expression language.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-" factor | base ("^" integer)?
//! base   := number | param | coord | "t" | "(" expr ")" | func "(" expr ")"
//! coord  := "x" "'"{0,3} | "d(x," integer ")"
//! func   := "sin" | "cos" | "exp"
//! ```
//!
//! Unary minus binds looser than `^`, so `-x^2` reads as `-(x^2)`.

use thiserror::Error;

use super::{Expr, Func};

const MAX_PRIMES: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("invalid number")]
    InvalidNumber,
    #[error("derivative order must be >= 0")]
    NegativeOrder,
    #[error("derivative order must be an integer")]
    NonIntegerOrder,
    #[error("exponent must be an integer")]
    NonIntegerExponent,
    #[error("integer out of range")]
    IntegerOverflow,
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("at most {MAX_PRIMES} primes are allowed; use d(x,k)")]
    TooManyPrimes,
}

/// Syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

/// Parses DSL text into a canonical [`Expr`].
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    match p.peek() {
        None => Ok(e),
        Some(c) => Err(p.error(ParseErrorKind::UnexpectedChar(c as char))),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.pos,
            kind,
        }
    }

    fn error_at(&self, offset: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { offset, kind }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    /// Consumes `c` after optional whitespace.
    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, what: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &'static str) -> ParseError {
        match self.peek() {
            None => self.error(ParseErrorKind::UnexpectedEnd),
            Some(_) => self.error(ParseErrorKind::Expected(what)),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(self.term()?.neg());
            } else {
                break;
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.eat(b'*') {
                factors.push(self.factor()?);
            } else if self.eat(b'/') {
                factors.push(Expr::pow(self.factor()?, -1));
            } else {
                break;
            }
        }
        Ok(Expr::product(factors))
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(self.factor()?.neg());
        }
        let base = self.base()?;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            let n = self.integer()?;
            if self.peek() == Some(b'.') {
                return Err(self.error_at(start, ParseErrorKind::NonIntegerExponent));
            }
            let n = i32::try_from(n)
                .map_err(|_| self.error_at(start, ParseErrorKind::IntegerOverflow))?;
            Ok(Expr::pow(base, n))
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let name = self.identifier();
                self.named(name, start)
            }
            Some(c) => Err(self.error(ParseErrorKind::UnexpectedChar(c as char))),
        }
    }

    fn named(&mut self, name: &'a str, start: usize) -> Result<Expr, ParseError> {
        match name {
            "x" => {
                let mut primes = 0;
                while self.peek() == Some(b'\'') {
                    primes += 1;
                    self.pos += 1;
                }
                if primes > MAX_PRIMES {
                    return Err(self.error_at(start, ParseErrorKind::TooManyPrimes));
                }
                Ok(Expr::deriv(primes))
            }
            "t" => Ok(Expr::Time),
            "d" => {
                self.expect(b'(', "'(' after d")?;
                self.skip_ws();
                let at = self.pos;
                if self.identifier() != "x" {
                    return Err(self.error_at(at, ParseErrorKind::Expected("x in d(x,k)")));
                }
                self.expect(b',', "','")?;
                self.skip_ws();
                let at = self.pos;
                let order = self.integer()?;
                if self.peek() == Some(b'.') || self.peek() == Some(b'e') {
                    return Err(self.error_at(at, ParseErrorKind::NonIntegerOrder));
                }
                if order < 0 {
                    return Err(self.error_at(at, ParseErrorKind::NegativeOrder));
                }
                let order = u32::try_from(order)
                    .map_err(|_| self.error_at(at, ParseErrorKind::IntegerOverflow))?;
                self.expect(b')', "')'")?;
                Ok(Expr::deriv(order))
            }
            _ => {
                self.skip_ws();
                let is_call = self.peek() == Some(b'(');
                match Func::from_name(name) {
                    Some(func) => {
                        self.expect(b'(', "'(' after function name")?;
                        let arg = self.expr()?;
                        self.expect(b')', "')'")?;
                        Ok(Expr::call(func, arg))
                    }
                    None if is_call => {
                        Err(self.error_at(start, ParseErrorKind::UnknownFunction(name.to_string())))
                    }
                    None => Ok(Expr::param(name)),
                }
            }
        }
    }

    fn identifier(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier")
    }

    /// Optionally signed decimal integer.
    fn integer(&mut self) -> Result<i64, ParseError> {
        let start = self.pos;
        if self.peek() == Some(b'-') || self.peek() == Some(b'+') {
            self.pos += 1;
        }
        let digits = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.unexpected("integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse::<i64>()
            .map_err(|_| self.error_at(start, ParseErrorKind::IntegerOverflow))
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Expr::constant)
            .ok_or_else(|| self.error_at(start, ParseErrorKind::InvalidNumber))
    }
}
