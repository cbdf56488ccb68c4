//! Scalar expressions in one variable.
//!
//! [`Expr`] is an immutable tree with shared (`Arc`) children. The
//! constructors on `Expr` (`Expr::add`, `Expr::mul`, ...) fold constants and
//! apply 0/1 identities; nothing else is rewritten.

mod catalog;
mod diff;
mod model;
mod parse;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use catalog::{catalog, catalog_entry, catalog_power, composites, CatalogEntry, GroundTruth, OrderSet};
pub use diff::{derivative, differentiate};
pub use model::{FunctionModel, MAX_DERIVATIVE_ORDER};
pub use parse::parse;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Arc<Expr>),
    Exp(Arc<Expr>),
    Log(Arc<Expr>),
    Sqrt(Arc<Expr>),
    Recip(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    /// Integer power.
    Pow(Arc<Expr>, i32),
    /// Real power of a positive base. Not produced by the parser.
    Powf(Arc<Expr>, f64),
}

impl Expr {
    pub fn x() -> Expr {
        Expr::Var
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const(&self, v: f64) -> bool {
        matches!(self, Expr::Const(c) if *c == v)
    }

    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var => true,
            Expr::Neg(u)
            | Expr::Exp(u)
            | Expr::Log(u)
            | Expr::Sqrt(u)
            | Expr::Recip(u)
            | Expr::Pow(u, _)
            | Expr::Powf(u, _) => u.contains_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.contains_var() || b.contains_var()
            }
        }
    }

    /// Number of nodes, counting shared subtrees once per reference.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var => 1,
            Expr::Neg(u)
            | Expr::Exp(u)
            | Expr::Log(u)
            | Expr::Sqrt(u)
            | Expr::Recip(u)
            | Expr::Pow(u, _)
            | Expr::Powf(u, _) => 1 + u.size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(u) => (*u).clone(),
            Expr::Mul(a, b) if a.as_const().is_some() => {
                Expr::mul(Expr::Const(-a.as_const().unwrap()), (*b).clone())
            }
            other => Expr::Neg(Arc::new(other)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            _ if a.is_const(0.0) => b,
            _ if b.is_const(0.0) => a,
            (_, Expr::Neg(u)) => Expr::sub(a.clone(), (**u).clone()),
            (_, Expr::Const(y)) if *y < 0.0 => Expr::sub(a.clone(), Expr::Const(-y)),
            _ => Expr::Add(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            _ if b.is_const(0.0) => a,
            _ if a.is_const(0.0) => Expr::neg(b),
            (_, Expr::Neg(u)) => Expr::add(a.clone(), (**u).clone()),
            (_, Expr::Const(y)) if *y < 0.0 => Expr::add(a.clone(), Expr::Const(-y)),
            _ => Expr::Sub(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        // constants are kept on the left and merged
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (Expr::Const(c), _) | (_, Expr::Const(c)) if c == 0.0 => Expr::Const(0.0),
            (Expr::Const(c), e) | (e, Expr::Const(c)) if c == 1.0 => e,
            (e, Expr::Const(c)) if !matches!(e, Expr::Const(_)) => Expr::mul(Expr::Const(c), e),
            (Expr::Const(c), Expr::Mul(l, r)) if l.as_const().is_some() => {
                Expr::mul(Expr::Const(c * l.as_const().unwrap()), (*r).clone())
            }
            (Expr::Const(c), Expr::Neg(u)) => Expr::mul(Expr::Const(-c), (*u).clone()),
            (Expr::Mul(l, r), e) if l.as_const().is_some() => Expr::mul(
                Expr::Const(l.as_const().unwrap()),
                Expr::mul((*r).clone(), e),
            ),
            (e, Expr::Mul(l, r)) if l.as_const().is_some() && e.as_const().is_none() => {
                Expr::mul(
                    Expr::Const(l.as_const().unwrap()),
                    Expr::mul(e, (*r).clone()),
                )
            }
            (Expr::Neg(u), e) => Expr::neg(Expr::mul((*u).clone(), e)),
            (e, Expr::Neg(u)) => Expr::neg(Expr::mul(e, (*u).clone())),
            (a, b) => {
                if let Some(merged) = merge_powers(&a, &b) {
                    return merged;
                }
                Expr::Mul(Arc::new(a), Arc::new(b))
            }
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => Expr::Const(x / y),
            _ if b.is_const(1.0) => a,
            _ if a.is_const(0.0) && b.as_const().is_none() => Expr::Const(0.0),
            (_, Expr::Const(y)) if *y != 0.0 => Expr::mul(Expr::Const(1.0 / y), a),
            _ => Expr::Div(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn pow(u: Expr, k: i32) -> Expr {
        match (&u, k) {
            (_, 0) => Expr::Const(1.0),
            (_, 1) => u,
            (Expr::Const(c), _) if *c != 0.0 || k > 0 => Expr::Const(c.powi(k)),
            (Expr::Pow(v, j), _) if j.checked_mul(k).is_some() => Expr::pow((**v).clone(), j * k),
            _ => Expr::Pow(Arc::new(u), k),
        }
    }

    pub fn powf(u: Expr, p: f64) -> Expr {
        if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
            // integer exponents on a positive base agree with the integer power
            return Expr::pow(u, p as i32);
        }
        match &u {
            Expr::Const(c) if *c > 0.0 => Expr::Const(c.powf(p)),
            Expr::Powf(v, q) => Expr::powf((**v).clone(), p * q),
            _ => Expr::Powf(Arc::new(u), p),
        }
    }

    pub fn exp(u: Expr) -> Expr {
        match u {
            Expr::Const(c) => Expr::Const(c.exp()),
            u => Expr::Exp(Arc::new(u)),
        }
    }

    pub fn log(u: Expr) -> Expr {
        match u {
            Expr::Const(c) if c > 0.0 => Expr::Const(c.ln()),
            u => Expr::Log(Arc::new(u)),
        }
    }

    pub fn sqrt(u: Expr) -> Expr {
        match u {
            Expr::Const(c) if c >= 0.0 => Expr::Const(c.sqrt()),
            u => Expr::Sqrt(Arc::new(u)),
        }
    }

    pub fn recip(u: Expr) -> Expr {
        match u {
            Expr::Const(c) if c != 0.0 => Expr::Const(1.0 / c),
            u => Expr::Recip(Arc::new(u)),
        }
    }

    /// Rebuilds the tree bottom-up through the simplifying constructors.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var => self.clone(),
            Expr::Neg(u) => Expr::neg(u.simplify()),
            Expr::Exp(u) => Expr::exp(u.simplify()),
            Expr::Log(u) => Expr::log(u.simplify()),
            Expr::Sqrt(u) => Expr::sqrt(u.simplify()),
            Expr::Recip(u) => Expr::recip(u.simplify()),
            Expr::Add(a, b) => Expr::add(a.simplify(), b.simplify()),
            Expr::Sub(a, b) => Expr::sub(a.simplify(), b.simplify()),
            Expr::Mul(a, b) => Expr::mul(a.simplify(), b.simplify()),
            Expr::Div(a, b) => Expr::div(a.simplify(), b.simplify()),
            Expr::Pow(u, k) => Expr::pow(u.simplify(), *k),
            Expr::Powf(u, p) => Expr::powf(u.simplify(), *p),
        }
    }

    /// Evaluates at `x`; domain violations and overflow become errors.
    pub fn eval<S: Scalar>(&self, x: &S) -> Result<S> {
        let v = match self {
            Expr::Const(c) => S::from_f64(*c),
            Expr::Var => x.clone(),
            Expr::Neg(u) => -u.eval(x)?,
            Expr::Exp(u) => u.eval(x)?.exp(),
            Expr::Log(u) => {
                let v = u.eval(x)?;
                if v <= S::zero() {
                    return Err(domain("log", x));
                }
                v.ln()
            }
            Expr::Sqrt(u) => {
                let v = u.eval(x)?;
                if v < S::zero() {
                    return Err(domain("sqrt", x));
                }
                v.sqrt()
            }
            Expr::Recip(u) => {
                let v = u.eval(x)?;
                if v.is_zero() {
                    return Err(domain("reciprocal", x));
                }
                S::one() / v
            }
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                if d.is_zero() {
                    return Err(domain("division", x));
                }
                a.eval(x)? / d
            }
            Expr::Pow(u, k) => {
                let v = u.eval(x)?;
                if *k < 0 && v.is_zero() {
                    return Err(domain("negative power", x));
                }
                v.powi(*k)
            }
            Expr::Powf(u, p) => {
                let v = u.eval(x)?;
                if v < S::zero() || (v.is_zero() && *p <= 0.0) {
                    return Err(domain("real power", x));
                }
                if v.is_zero() {
                    S::zero()
                } else {
                    v.powf(*p)
                }
            }
        };
        if !v.is_finite() {
            return Err(domain("overflow", x));
        }
        Ok(v)
    }
}

fn domain<S: Scalar>(op: &'static str, x: &S) -> Error {
    Error::Domain { op, x: x.to_f64() }
}

/// `u^a * u^b -> u^(a+b)` when both exponents have the same sign.
fn merge_powers(a: &Expr, b: &Expr) -> Option<Expr> {
    let split = |e: &Expr| -> (Expr, i32) {
        match e {
            Expr::Pow(u, k) => ((**u).clone(), *k),
            other => (other.clone(), 1),
        }
    };
    let (ua, ka) = split(a);
    let (ub, kb) = split(b);
    if ua == ub && ka.signum() == kb.signum() && !matches!(ua, Expr::Const(_)) {
        Some(Expr::pow(ua, ka.checked_add(kb)?))
    } else {
        None
    }
}

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => PREC_ADD,
        Expr::Mul(..) | Expr::Div(..) | Expr::Recip(_) => PREC_MUL,
        Expr::Neg(_) => PREC_UNARY,
        Expr::Const(c) if *c < 0.0 || c.is_sign_negative() => PREC_UNARY,
        Expr::Pow(..) | Expr::Powf(..) => PREC_POW,
        _ => PREC_ATOM,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, need_parens: bool) -> fmt::Result {
    if need_parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => f.write_str("x"),
            Expr::Neg(u) => {
                f.write_str("-")?;
                write_operand(f, u, precedence(u) < PREC_UNARY)
            }
            Expr::Exp(u) => write!(f, "exp({u})"),
            Expr::Log(u) => write!(f, "log({u})"),
            Expr::Sqrt(u) => write!(f, "sqrt({u})"),
            Expr::Recip(u) => {
                f.write_str("1/")?;
                write_operand(f, u, precedence(u) <= PREC_MUL)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let (op, prec) = match self {
                    Expr::Add(..) => (" + ", PREC_ADD),
                    Expr::Sub(..) => (" - ", PREC_ADD),
                    Expr::Mul(..) => ("*", PREC_MUL),
                    _ => ("/", PREC_MUL),
                };
                write_operand(f, a, precedence(a) < prec)?;
                f.write_str(op)?;
                write_operand(f, b, precedence(b) <= prec)
            }
            Expr::Pow(u, k) => {
                write_operand(f, u, precedence(u) < PREC_ATOM)?;
                if *k < 0 {
                    write!(f, "^({k})")
                } else {
                    write!(f, "^{k}")
                }
            }
            Expr::Powf(u, p) => {
                write_operand(f, u, precedence(u) < PREC_ATOM)?;
                write!(f, "^({p})")
            }
        }
    }
}
