//! Built-in functions with known matrix monotonicity / convexity classes.

use serde::{Deserialize, Serialize};

use super::{model::FunctionModel, parse, Expr};
use crate::error::{invalid, Result};
use crate::interval::Interval;

/// Set of orders `n >= 1` for which a property holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderSet {
    Empty,
    UpTo(usize),
    All,
}

impl OrderSet {
    pub fn contains(&self, n: usize) -> bool {
        match self {
            OrderSet::Empty => false,
            OrderSet::UpTo(k) => n <= *k,
            OrderSet::All => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub monotone: OrderSet,
    pub convex: OrderSet,
    pub monotone_reason: String,
    pub convex_reason: String,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub model: FunctionModel,
    /// Interval on which the ground truth is stated and tests are run.
    pub interval: Interval,
    pub truth: GroundTruth,
}

fn truth(monotone: OrderSet, mr: &str, convex: OrderSet, cr: &str) -> GroundTruth {
    GroundTruth {
        monotone,
        convex,
        monotone_reason: mr.into(),
        convex_reason: cr.into(),
    }
}

fn entry(id: &str, src: &str, domain: Interval, interval: (f64, f64), truth: GroundTruth) -> CatalogEntry {
    let expr = parse(src).expect("catalog expression parses");
    CatalogEntry {
        id: id.into(),
        model: FunctionModel::with_name(src, expr, domain),
        interval: Interval::new(interval.0, interval.1).expect("catalog interval"),
        truth,
    }
}

/// The standard catalog.
pub fn catalog() -> Vec<CatalogEntry> {
    use OrderSet::*;
    let mut out = vec![
        entry(
            "x",
            "x",
            Interval::real_line(),
            (-2.0, 2.0),
            truth(All, "f(A) = A", All, "f(A) = A is affine"),
        ),
        entry(
            "x2",
            "x^2",
            Interval::real_line(),
            (0.1, 10.0),
            truth(
                UpTo(1),
                "increasing on (0,inf); 2x2 Dobsch matrix [[2t,1],[1,0]] has determinant -1",
                All,
                "Hankel matrix is e1 e1^T for every n",
            ),
        ),
        entry(
            "x3",
            "x^3",
            Interval::real_line(),
            (-1.0, 1.0),
            truth(
                UpTo(1),
                "increasing; Loewner matrix at (0,y) is [[0,y^2],[y^2,3y^2]] with determinant -y^4",
                Empty,
                "second derivative 6x is negative on (-1,0)",
            ),
        ),
        entry(
            "neg_recip",
            "-1/x",
            Interval::positive(),
            (0.5, 4.0),
            truth(
                All,
                "Loewner entries 1/(x_i x_j) form a rank-one PSD matrix",
                Empty,
                "-1/x is concave on (0,inf)",
            ),
        ),
        entry(
            "sqrt",
            "sqrt(x)",
            Interval::positive(),
            (0.5, 4.0),
            truth(
                All,
                "x^p with 0 <= p <= 1 is operator monotone on (0,inf)",
                Empty,
                "sqrt is strictly concave",
            ),
        ),
        entry(
            "log",
            "log(x)",
            Interval::positive(),
            (0.5, 4.0),
            truth(
                All,
                "log(x) = integral of (1/(1+s) - 1/(x+s)) ds, a positive mix of -1/(x+s)",
                Empty,
                "log is strictly concave",
            ),
        ),
        entry(
            "exp",
            "exp(x)",
            Interval::real_line(),
            (-1.0, 1.0),
            truth(
                UpTo(1),
                "2x2 Dobsch determinant e^(2t)(1/6 - 1/4) < 0",
                UpTo(1),
                "2x2 Hankel determinant e^(2t)(1/48 - 1/36) < 0",
            ),
        ),
    ];
    out.push(catalog_power(0.25));
    out.push(catalog_power(1.5));
    out.push(catalog_power(-0.5));
    out
}

/// `x^p` on `(0, inf)` with the ground truth of the power family.
pub fn catalog_power(p: f64) -> CatalogEntry {
    use OrderSet::*;
    let (monotone, mr) = if (0.0..=1.0).contains(&p) {
        (All, "x^p with 0 <= p <= 1 is operator monotone")
    } else if p > 1.0 {
        (UpTo(1), "2x2 Dobsch determinant is proportional to p^2 (1-p)(1+p) < 0")
    } else {
        (Empty, "x^p is decreasing for p < 0")
    };
    let (convex, cr) = if (1.0..=2.0).contains(&p) || (-1.0..=0.0).contains(&p) {
        (All, "x^p is operator convex for p in [-1,0] and [1,2]")
    } else if (0.0..1.0).contains(&p) {
        (Empty, "x^p is concave for 0 < p < 1")
    } else {
        (UpTo(1), "convex, but the 2x2 Hankel determinant p^2(p-1)^2(p-2)(-p-1)/144 t^(2p-6) is negative")
    };
    let expr = Expr::powf(Expr::Var, p);
    CatalogEntry {
        id: format!("pow:{p}"),
        model: FunctionModel::with_name(format!("x^{p}"), expr, Interval::positive()),
        interval: Interval::new(0.1, 10.0).expect("interval"),
        truth: truth(monotone, mr, convex, cr),
    }
}

/// Piecewise-defined functions used for locality and regularity checks.
pub fn composites() -> Vec<CatalogEntry> {
    use OrderSet::*;
    let p = |s: &str| parse(s).expect("composite piece parses");
    vec![
        CatalogEntry {
            id: "log_sqrt_glue".into(),
            model: FunctionModel::piecewise(
                "log(x) for x < 1, 2*sqrt(x) - 2 for x >= 1",
                vec![1.0],
                vec![p("log(x)"), p("2*sqrt(x) - 2")],
                Interval::positive(),
            )
            .expect("composite"),
            interval: Interval::new(0.3, 3.0).expect("interval"),
            truth: truth(
                UpTo(2),
                "C^1 with convex derivative and PSD Dobsch matrix on each piece; third derivative jumps",
                Empty,
                "concave on both pieces",
            ),
        },
        CatalogEntry {
            id: "kinked_recip".into(),
            model: FunctionModel::piecewise(
                "-1/x for x < 1, -1/2 - 1/(2x) for x >= 1",
                vec![1.0],
                vec![p("-1/x"), p("-0.5 - 0.5/x")],
                Interval::positive(),
            )
            .expect("composite"),
            interval: Interval::new(0.5, 2.0).expect("interval"),
            truth: truth(
                UpTo(1),
                "increasing, but the derivative drops from 1 to 1/2 at x = 1",
                Empty,
                "concave on both pieces with a concave kink",
            ),
        },
    ]
}

/// Looks up a catalog id: any entry of [`catalog`] or [`composites`], or
/// `pow:<p>` for an arbitrary real `p`.
pub fn catalog_entry(id: &str) -> Result<CatalogEntry> {
    if let Some(p) = id.strip_prefix("pow:") {
        let p: f64 = p
            .parse()
            .map_err(|_| invalid(format!("malformed exponent in `{id}`")))?;
        if !p.is_finite() {
            return Err(invalid(format!("malformed exponent in `{id}`")));
        }
        return Ok(catalog_power(p));
    }
    catalog()
        .into_iter()
        .chain(composites())
        .find(|e| e.id == id)
        .ok_or_else(|| invalid(format!("unknown catalog id `{id}`")))
}
