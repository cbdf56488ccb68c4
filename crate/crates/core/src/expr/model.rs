use std::fmt;
use std::sync::{Arc, OnceLock};

use super::{derivative, parse, Expr};
use crate::error::{invalid, Error, Result};
use crate::interval::Interval;
use crate::scalar::{Ext, Precision, Scalar};

/// Highest derivative order a model will produce.
pub const MAX_DERIVATIVE_ORDER: usize = 24;

/// A scalar function with lazily built symbolic derivatives.
///
/// Derivatives are computed on first use and cached; a model is immutable
/// from the outside and can be shared between threads.
#[derive(Clone)]
pub struct FunctionModel {
    inner: Arc<Inner>,
    max_order: usize,
}

struct Inner {
    name: String,
    domain: Interval,
    body: Body,
}

enum Body {
    Symbolic(DerivCache),
    /// Right-continuous pieces: piece `i` is used on `[breaks[i-1], breaks[i])`.
    Piecewise {
        breaks: Vec<f64>,
        pieces: Vec<DerivCache>,
    },
}

struct DerivCache {
    slots: Vec<OnceLock<Expr>>,
}

impl DerivCache {
    fn new(e: Expr, max_order: usize) -> Self {
        let slots: Vec<OnceLock<Expr>> = (0..=max_order).map(|_| OnceLock::new()).collect();
        let _ = slots[0].set(e);
        Self { slots }
    }

    fn get(&self, k: usize) -> &Expr {
        self.slots[k].get_or_init(|| derivative(self.get(k - 1)))
    }
}

impl FunctionModel {
    pub fn new(expr: Expr, domain: Interval) -> Self {
        Self::with_name(expr.to_string(), expr, domain)
    }

    pub fn with_name(name: impl Into<String>, expr: Expr, domain: Interval) -> Self {
        Self {
            inner: Arc::new(Inner {
                name: name.into(),
                domain,
                body: Body::Symbolic(DerivCache::new(expr, MAX_DERIVATIVE_ORDER)),
            }),
            max_order: MAX_DERIVATIVE_ORDER,
        }
    }

    /// Parses `text`; the domain defaults to the real line.
    pub fn parse(text: &str, domain: Option<Interval>) -> Result<Self> {
        let e = parse(text)?;
        Ok(Self::with_name(text.trim(), e, domain.unwrap_or_else(Interval::real_line)))
    }

    /// Caps the available derivative order below the default.
    pub fn limit_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order.min(MAX_DERIVATIVE_ORDER);
        self
    }

    /// Function defined by different expressions on consecutive pieces.
    pub fn piecewise(
        name: impl Into<String>,
        breaks: Vec<f64>,
        pieces: Vec<Expr>,
        domain: Interval,
    ) -> Result<Self> {
        if pieces.len() != breaks.len() + 1 {
            return Err(invalid("piecewise function needs one more piece than breakpoints"));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) || breaks.iter().any(|b| !domain.contains(*b)) {
            return Err(invalid("breakpoints must be increasing and inside the domain"));
        }
        Ok(Self {
            inner: Arc::new(Inner {
                name: name.into(),
                domain,
                body: Body::Piecewise {
                    breaks,
                    pieces: pieces
                        .into_iter()
                        .map(|e| DerivCache::new(e, MAX_DERIVATIVE_ORDER))
                        .collect(),
                },
            }),
            max_order: MAX_DERIVATIVE_ORDER,
        })
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn domain(&self) -> Interval {
        self.inner.domain
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn is_piecewise(&self) -> bool {
        matches!(self.inner.body, Body::Piecewise { .. })
    }

    /// The expression itself, for models that are not piecewise.
    pub fn expr(&self) -> Option<&Expr> {
        self.derivative_expr(0).ok()
    }

    /// Symbolic `k`-th derivative of a non-piecewise model.
    pub fn derivative_expr(&self, k: usize) -> Result<&Expr> {
        self.check_order(k)?;
        match &self.inner.body {
            Body::Symbolic(c) => Ok(c.get(k)),
            Body::Piecewise { .. } => Err(invalid("piecewise model has no single expression")),
        }
    }

    fn check_order(&self, k: usize) -> Result<()> {
        if k > self.max_order {
            return Err(Error::DerivativeUnavailable {
                requested: k,
                available: self.max_order,
            });
        }
        Ok(())
    }

    fn cache_at(&self, x: f64) -> &DerivCache {
        match &self.inner.body {
            Body::Symbolic(c) => c,
            Body::Piecewise { breaks, pieces } => {
                let i = breaks.partition_point(|b| *b <= x);
                &pieces[i]
            }
        }
    }

    /// `f^(k)(x)` in the scalar type `S`.
    pub fn deriv<S: Scalar>(&self, k: usize, x: &S) -> Result<S> {
        self.check_order(k)?;
        let xf = x.to_f64();
        if !self.inner.domain.contains(xf) {
            return Err(Error::Domain {
                op: "outside domain",
                x: xf,
            });
        }
        self.cache_at(xf).get(k).eval(x)
    }

    pub fn value<S: Scalar>(&self, x: &S) -> Result<S> {
        self.deriv(0, x)
    }

    /// Taylor coefficients `f^(j)(x)/j!` for `j < m`.
    pub fn taylor<S: Scalar>(&self, x: &S, m: usize) -> Result<Vec<S>> {
        let mut out = Vec::with_capacity(m);
        let mut fact = S::one();
        for j in 0..m {
            if j > 1 {
                fact = fact * S::from_usize(j);
            }
            out.push(self.deriv(j, x)? / fact.clone());
        }
        Ok(out)
    }

    /// `f^(k)(x)` as a double, computed in the requested precision.
    pub fn eval_deriv(&self, k: usize, x: f64, precision: Precision) -> Result<f64> {
        match precision {
            Precision::Extended => Ok(self.deriv(k, &Ext::from_f64(x))?.to_f64()),
            Precision::Standard | Precision::Auto => self.deriv(k, &x),
        }
    }
}

impl fmt::Debug for FunctionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionModel")
            .field("name", &self.inner.name)
            .field("domain", &self.inner.domain)
            .finish()
    }
}

impl fmt::Display for FunctionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.inner.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(src: &str) -> FunctionModel {
        FunctionModel::parse(src, Some(Interval::positive())).unwrap()
    }

    #[test]
    fn eval_deriv_examples() {
        assert_eq!(model("-1/x").eval_deriv(3, 1.0, Precision::Standard).unwrap(), 6.0);
        assert_eq!(model("x^2").eval_deriv(1, 5.0, Precision::Standard).unwrap(), 10.0);
        assert_eq!(model("log(x)").eval_deriv(0, 1.0, Precision::Extended).unwrap(), 0.0);
    }

    #[test]
    fn cache_holds_successive_derivatives() {
        let f = model("x^3 - 1/x");
        assert_eq!(f.derivative_expr(0).unwrap(), &parse("x^3 - 1/x").unwrap());
        for k in 0..6 {
            assert_eq!(f.derivative_expr(k + 1).unwrap(), &derivative(f.derivative_expr(k).unwrap()));
        }
    }

    #[test]
    fn domain_and_order_errors() {
        let f = model("log(x)");
        assert!(matches!(f.deriv(0, &-1.0), Err(Error::Domain { .. })));
        let g = f.clone().limit_order(2);
        assert!(matches!(
            g.deriv(3, &1.0),
            Err(Error::DerivativeUnavailable { requested: 3, available: 2 })
        ));
        // the original keeps its own cap
        assert!(f.deriv(3, &1.0).is_ok());
    }

    #[test]
    fn piecewise_is_right_continuous() {
        let f = FunctionModel::piecewise(
            "kink",
            vec![1.0],
            vec![parse("x").unwrap(), parse("2*x - 1").unwrap()],
            Interval::real_line(),
        )
        .unwrap();
        assert_eq!(f.deriv(1, &0.5).unwrap(), 1.0);
        assert_eq!(f.deriv(1, &1.0).unwrap(), 2.0);
        assert_eq!(f.value(&1.0).unwrap(), 1.0);
        assert!(f.expr().is_none());
    }

    #[test]
    fn taylor_coefficients() {
        let t = model("exp(x)").taylor(&0.5f64, 5).unwrap();
        let e = 0.5f64.exp();
        let want = [e, e, e / 2.0, e / 6.0, e / 24.0];
        for (a, b) in t.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
