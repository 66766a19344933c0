//! Recursive-descent parser.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := base ('^' ['-'] integer)?
//! base  := number | 'i' | 'x' | 'pi' | name '(' args ')' | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{indicator_bounds_valid, Constant, Func, FuncExpr, Node};
use crate::error::{Error, Result};

/// Parses a function of `x`.
pub fn parse_function(text: &str) -> Result<FuncExpr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let node = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(format!("unexpected '{}'", p.peek_char())));
    }
    Ok(FuncExpr::new(node))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

const FOLD_LIMIT: u64 = 1 << 53;

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_char(&self) -> char {
        std::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
            .unwrap_or('?')
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax { offset: self.pos, message: message.into() }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else if self.at_end() {
            Err(self.error(format!("expected '{}' but input ended", c as char)))
        } else {
            Err(self.error(format!("expected '{}', found '{}'", c as char, self.peek_char())))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = Node::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = Node::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                lhs = fold_div(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(match inner {
                // -0 keeps its node so that the sign of zero survives a round trip.
                Node::Real(c) if !c.exact().is_zero() => Node::Real(Constant::new(-c.exact().clone())),
                other => Node::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.base()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let negative = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer exponent"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let k: i32 = digits.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("exponent {digits} too large"),
        })?;
        Ok(Node::Pow(Box::new(base), if negative { -k } else { k }))
    }

    fn base(&mut self) -> Result<Node> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'0'..=b'9' | b'.') => self.number(),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match name {
                    "x" => Ok(Node::Var),
                    "i" => Ok(Node::Imag),
                    "pi" => Ok(Node::Pi),
                    "indicator" => self.indicator(start),
                    _ => match Func::from_name(name) {
                        Some(func) => {
                            self.expect(b'(')?;
                            let arg = self.expr()?;
                            self.expect(b')')?;
                            Ok(Node::Call(func, Box::new(arg)))
                        }
                        None => Err(Error::Syntax { offset: start, message: format!("unknown identifier '{name}'") }),
                    },
                }
            }
            Some(_) => Err(self.error(format!("unexpected '{}'", self.peek_char()))),
        }
    }

    fn indicator(&mut self, start: usize) -> Result<Node> {
        self.expect(b'(')?;
        let a = self.constant_arg()?;
        self.expect(b',')?;
        let b = self.constant_arg()?;
        self.expect(b')')?;
        if !indicator_bounds_valid(a.exact(), b.exact()) {
            return Err(Error::Syntax {
                offset: start,
                message: "indicator bounds must satisfy 0 <= a < b <= 1".into(),
            });
        }
        Ok(Node::Indicator(a, b))
    }

    fn constant_arg(&mut self) -> Result<Constant> {
        self.skip_ws();
        let start = self.pos;
        match self.expr()? {
            Node::Real(c) => Ok(c),
            _ => Err(Error::Syntax { offset: start, message: "indicator bounds must be rational constants".into() }),
        }
    }

    /// Decimal literal, converted exactly to a rational.
    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let mut int_digits = String::new();
        let mut frac_digits = String::new();
        while let Some(c @ b'0'..=b'9') = self.peek() {
            int_digits.push(c as char);
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while let Some(c @ b'0'..=b'9') = self.peek() {
                frac_digits.push(c as char);
                self.pos += 1;
            }
        }
        if int_digits.is_empty() && frac_digits.is_empty() {
            return Err(Error::Syntax { offset: start, message: "malformed number".into() });
        }
        let mut exponent: i64 = 0;
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            let negative = match self.peek() {
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            let exp_start = self.pos;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
            if exp_start == self.pos {
                self.pos = save;
                return Err(self.error("malformed exponent"));
            }
            let text = std::str::from_utf8(&self.src[exp_start..self.pos]).unwrap();
            exponent = text
                .parse::<i64>()
                .ok()
                .filter(|e| *e <= 10_000)
                .ok_or_else(|| Error::Syntax { offset: exp_start, message: "exponent out of range".into() })?;
            if negative {
                exponent = -exponent;
            }
        }
        let digits = format!("{int_digits}{frac_digits}");
        let mantissa: BigInt = digits.parse().unwrap_or_default();
        let scale = exponent - frac_digits.len() as i64;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            BigRational::from_integer(mantissa * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(mantissa, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Node::Real(Constant::new(value)))
    }
}

fn small_integer(node: &Node) -> Option<&BigRational> {
    match node {
        Node::Real(c) if c.exact().is_integer() && c.exact().numer().abs() <= BigInt::from(FOLD_LIMIT) => Some(c.exact()),
        _ => None,
    }
}

// Integers up to 2^53 are exact doubles and IEEE division is correctly rounded, so
// replacing `a/b` by the rational literal leaves every evaluation unchanged.
fn fold_div(lhs: Node, rhs: Node) -> Node {
    if let (Some(a), Some(b)) = (small_integer(&lhs), small_integer(&rhs)) {
        if !b.is_zero() {
            return Node::Real(Constant::new(a / b));
        }
    }
    Node::Div(Box::new(lhs), Box::new(rhs))
}
