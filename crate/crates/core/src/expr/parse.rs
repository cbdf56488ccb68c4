//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right associative
//! primary := number | 'x' | func '(' expr ')' | '(' expr ')'
//! func    := 'exp' | 'log' | 'sqrt'
//! ```
//!
//! Exponents must be constant integers. The tree is returned as written.

use std::sync::Arc;

use super::Expr;
use crate::error::{Error, Result};

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = Expr::Add(Arc::new(lhs), Arc::new(rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = Expr::Sub(Arc::new(lhs), Arc::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                lhs = Expr::Mul(Arc::new(lhs), Arc::new(rhs));
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                lhs = Expr::Div(Arc::new(lhs), Arc::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(Expr::Neg(Arc::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let at = self.pos;
        let exponent = self.unary()?;
        let k = constant_integer(&exponent).ok_or(Error::Syntax {
            offset: at,
            message: "exponent must be a constant integer".into(),
        })?;
        Ok(Expr::Pow(Arc::new(base), k))
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Expr::Const).map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let func: fn(Arc<Expr>) -> Expr = match name {
            "x" => return Ok(Expr::Var),
            "exp" => Expr::Exp,
            "log" => Expr::Log,
            "sqrt" => Expr::Sqrt,
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unknown identifier `{name}`"),
                })
            }
        };
        if !self.eat(b'(') {
            return Err(self.error(format!("expected `(` after `{name}`")));
        }
        let arg = self.expr()?;
        if !self.eat(b')') {
            return Err(self.error("expected `)`"));
        }
        Ok(func(Arc::new(arg)))
    }
}

fn constant_integer(e: &Expr) -> Option<i32> {
    if e.contains_var() {
        return None;
    }
    let v: f64 = e.eval(&0.0).ok()?;
    (v.fract() == 0.0 && v.abs() <= i32::MAX as f64).then_some(v as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn offset(src: &str) -> usize {
        match parse(src) {
            Err(Error::Syntax { offset, .. }) => offset,
            other => panic!("expected a syntax error for {src:?}, got {other:?}"),
        }
    }

    #[test]
    fn parses_grammar() {
        let e = parse("2*x^3 - exp(x)/sqrt(x) + log(1.5e0 + x)").unwrap();
        let v: f64 = e.eval(&2.0).unwrap();
        let want = 16.0 - 2f64.exp() / 2f64.sqrt() + 3.5f64.ln();
        assert!((v - want).abs() < 1e-14);
        // right associativity and unary minus binding looser than ^
        assert_eq!(parse("2^3^2").unwrap().eval(&0.0).unwrap(), 512.0);
        assert_eq!(parse("-x^2").unwrap().eval(&3.0).unwrap(), -9.0);
        assert_eq!(parse("x^-1").unwrap().eval(&4.0).unwrap(), 0.25);
        assert_eq!(parse("x^(2*2-1)").unwrap(), Expr::Pow(Arc::new(Expr::Var), 3));
    }

    #[test]
    fn reports_offsets() {
        assert_eq!(offset("x +"), 3);
        assert_eq!(offset("x ^ 0.5"), 4);
        assert_eq!(offset("sin(x)"), 0);
        assert_eq!(offset("(x + 1"), 6);
        assert_eq!(offset("x x"), 2);
        assert_eq!(offset("x^x"), 2);
        assert_eq!(offset(""), 0);
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "x - (x - 1)",
            "x/(x*x)",
            "-(-x)",
            "(x + 1)^(-2)",
            "exp(-x)*log(x)",
            "2 - -x",
            "(-2)^2",
        ] {
            let e = parse(src).unwrap();
            let again = parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src} printed as {e}");
        }
    }
}
