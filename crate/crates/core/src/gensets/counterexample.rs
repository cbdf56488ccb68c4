//! A function on `2n + 2` points that is `n`-monotone but has no
//! `n`-monotone extension to a point of the middle gap.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_order, genset_check, weights, FiniteFunction, GensetConfig};
use crate::criteria::Verdict;
use crate::error::{invalid, Error, Result};
use crate::polynomial::Poly;

/// `constant - sum a_k / (z - p_k)`. Pick (increasing between poles) when
/// every weight `a_k` is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    pub constant: f64,
    /// `(pole, weight)` pairs.
    pub terms: Vec<(f64, f64)>,
}

impl RationalFunction {
    pub fn eval(&self, x: f64) -> f64 {
        self.constant - self.terms.iter().map(|(p, a)| a / (x - p)).sum::<f64>()
    }

    pub fn degree(&self) -> usize {
        self.terms.len()
    }

    pub fn poles(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.0).collect()
    }

    /// Positive weights and no pole in `[lo, hi]`.
    pub fn is_pick_on(&self, lo: f64, hi: f64) -> bool {
        self.terms.iter().all(|&(p, a)| a > 0.0 && !(lo..=hi).contains(&p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleBundle {
    pub n: usize,
    pub f: FiniteFunction,
    pub r1: RationalFunction,
    pub r2: RationalFunction,
    /// Open interval `(x_{n+1}, x_{n+2})` where no extension exists.
    pub gap: (f64, f64),
    pub aux_poles: Vec<f64>,
    /// Residues of `g` at the auxiliary poles.
    pub residues: Vec<f64>,
    /// `r1 - r2 = g` rather than `r2 - r1 = g`: an odd number of auxiliary
    /// poles lie above the hull, making `g(x_{2n+1}) < 0`.
    pub flipped: bool,
}

/// Builds the bundle from `g(z) = prod_{i=3}^{2n} (z - x_i) / prod_j (z - λ_j)`
/// split by residue sign into two Pick functions, and checks that `F` passes.
pub fn build_counterexample(n: usize, points: &[f64], aux_poles: &[f64]) -> Result<CounterexampleBundle> {
    if n < 2 {
        return Err(invalid("the counterexample needs n >= 2"));
    }
    if points.len() != 2 * n + 2 {
        return Err(invalid(format!("need {} points, got {}", 2 * n + 2, points.len())));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) || points.iter().any(|p| !p.is_finite()) {
        return Err(invalid("points must be finite and strictly increasing"));
    }
    if aux_poles.len() != 2 * n - 2 {
        return Err(invalid(format!("need {} auxiliary poles, got {}", 2 * n - 2, aux_poles.len())));
    }
    let (lo, hi) = (points[0], points[2 * n + 1]);
    if aux_poles.iter().any(|p| !p.is_finite() || (lo..=hi).contains(p)) {
        return Err(invalid(format!("auxiliary poles must lie outside [{lo}, {hi}]")));
    }
    let zeros = &points[2..2 * n];
    let mut residues = Vec::with_capacity(aux_poles.len());
    for (j, &lam) in aux_poles.iter().enumerate() {
        let mut r: f64 = zeros.iter().map(|x| lam - x).product();
        for (l, &mu) in aux_poles.iter().enumerate() {
            if l != j {
                if lam == mu {
                    return Err(invalid("auxiliary poles must be distinct"));
                }
                r /= lam - mu;
            }
        }
        if r.abs() < 1e-12 {
            return Err(invalid(format!("residue {r:e} at {lam} is degenerate")));
        }
        residues.push(r);
    }
    // g = 1 + sum r_j / (z - λ_j) splits into a Pick part carrying the
    // negative residues and one carrying the positive ones. f follows the
    // first on the left when g(x_{2n+1}) > 0, the second otherwise, so the
    // right-hand function always lies above the left one at x_{2n+1}.
    let neg = RationalFunction {
        constant: 1.0,
        terms: aux_poles.iter().zip(&residues).filter(|(_, r)| **r < 0.0).map(|(p, r)| (*p, -*r)).collect(),
    };
    let pos = RationalFunction {
        constant: 0.0,
        terms: aux_poles.iter().zip(&residues).filter(|(_, r)| **r > 0.0).map(|(p, r)| (*p, *r)).collect(),
    };
    let above = aux_poles.iter().filter(|&&p| p > hi).count();
    let flipped = above % 2 == 1;
    let (r1, r2) = if flipped { (neg, pos) } else { (pos, neg) };
    if r1.degree() != n - 1 || r2.degree() != n - 1 {
        return Err(Error::Hypothesis(format!(
            "residue signs split {}/{} instead of {}/{}",
            r1.degree(),
            r2.degree(),
            n - 1,
            n - 1
        )));
    }
    let values: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, &x)| if i < 2 * n { r1.eval(x) } else { r2.eval(x) })
        .collect();
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for &x in zeros {
        let d = (r1.eval(x) - r2.eval(x)).abs();
        if d > 1e-10 * scale {
            return Err(Error::Numerical(format!("r1 and r2 differ by {d:e} at shared point {x}")));
        }
    }
    let bundle = CounterexampleBundle {
        n,
        f: FiniteFunction::new(points.to_vec(), values)?,
        r1,
        r2,
        gap: (points[n], points[n + 1]),
        aux_poles: aux_poles.to_vec(),
        residues,
        flipped,
    };
    let check = genset_check(&bundle.f, n, &GensetConfig::default())?;
    if check.verdict != Verdict::Pass {
        return Err(Error::Numerical(format!(
            "constructed function fails its own check (worst score {:e})",
            check.order(n).map_or(0.0, |r| r.worst_score)
        )));
    }
    Ok(bundle)
}

/// `y` for which `[window]_{f N(q)} = 0`, where `f(x0) = y` and the rest of
/// the window carries the values of `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    /// `"r1"` or `"r2"`: whose poles are the roots of `q`.
    pub side: String,
    pub window: Vec<f64>,
    pub q: Poly,
    pub y: f64,
}

fn binding(side: &str, f: &FiniteFunction, x0: f64, others: &[f64], q: &Poly) -> Result<Binding> {
    let mut window = vec![x0];
    window.extend_from_slice(others);
    let w = weights::<f64>(&window);
    let nq = |x: f64| q.eval(Complex64::new(x, 0.0)).norm_sqr();
    let mut a = 0.0;
    for (i, &x) in others.iter().enumerate() {
        let v = f.value_at(x).ok_or_else(|| invalid(format!("{x} is not a point of F")))?;
        a += v * nq(x) * w[i + 1];
    }
    let b = nq(x0) * w[0];
    if b == 0.0 {
        return Err(Error::Numerical(format!("q vanishes at {x0}")));
    }
    window.sort_by(f64::total_cmp);
    Ok(Binding {
        side: side.into(),
        window,
        q: q.clone(),
        y: -a / b,
    })
}

/// Grid scan of `y` such that `F ∪ {(x0, y)}` shows no violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionScan {
    pub x0: f64,
    pub range: (f64, f64),
    pub grid: usize,
    /// Maximal runs of feasible grid values, as `(first, last)`.
    pub feasible: Vec<(f64, f64)>,
}

fn passes(f: &FiniteFunction, n: usize, config: &GensetConfig) -> Result<bool> {
    if f.len() > 2 * n {
        Ok(check_order(f, n, config)?.pass)
    } else {
        Ok(genset_check(f, n, config)?.verdict == Verdict::Pass)
    }
}

/// Scans `grid` evenly spaced values over `range` (default: the values of
/// `f` padded by 20% of their span), plus any `extra` candidates.
pub fn extension_scan(
    f: &FiniteFunction,
    n: usize,
    x0: f64,
    grid: usize,
    range: Option<(f64, f64)>,
    extra: &[f64],
    config: &GensetConfig,
) -> Result<ExtensionScan> {
    if f.value_at(x0).is_some() {
        return Err(invalid(format!("{x0} is already a point of F")));
    }
    if grid < 2 {
        return Err(invalid("grid needs at least two points"));
    }
    let range = range.unwrap_or_else(|| {
        let lo = f.values().iter().chain(extra).copied().fold(f64::INFINITY, f64::min);
        let hi = f.values().iter().chain(extra).copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = 0.2 * (hi - lo).max(1e-12 * lo.abs().max(1.0));
        (lo - pad, hi + pad)
    });
    let mut ys: Vec<f64> = (0..grid)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (grid - 1) as f64)
        .chain(extra.iter().copied())
        .collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let quiet = GensetConfig {
        q_samples: 0,
        ..config.clone()
    };
    let ok: Vec<bool> = ys
        .par_iter()
        .map(|&y| passes(&f.with_point(x0, y)?, n, &quiet))
        .collect::<Result<_>>()?;
    let mut feasible = Vec::new();
    let mut run: Option<(f64, f64)> = None;
    for (y, good) in ys.iter().zip(ok) {
        match (good, run.as_mut()) {
            (true, Some(r)) => r.1 = *y,
            (true, None) => run = Some((*y, *y)),
            (false, _) => feasible.extend(run.take()),
        }
    }
    feasible.extend(run);
    Ok(ExtensionScan {
        x0,
        range,
        grid,
        feasible,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub x0: f64,
    pub r1_value: f64,
    pub r2_value: f64,
    /// Two windows per side; each forces `f(x0)` to one value.
    pub bindings: Vec<Binding>,
    /// The binding constraints admit no common value.
    pub empty: bool,
    pub scan: ExtensionScan,
    /// The grid scan found no feasible value either.
    pub grid_empty: bool,
}

/// Values `y = f(x0)` compatible with `n`-monotonicity of the extension.
///
/// The verdict comes from the binding constraints: with `q` vanishing at
/// the poles of `r1`, both windows obtained by inserting `x0` into the first
/// `2n` points must vanish, which pins `y = r1(x0)`; the mirror argument
/// pins `y = r2(x0)`. The grid scan is a cross-check.
pub fn extension_feasibility(bundle: &CounterexampleBundle, x0: f64, grid: usize, config: &GensetConfig) -> Result<FeasibilityReport> {
    let (a, b) = bundle.gap;
    if !(a < x0 && x0 < b) {
        return Err(invalid(format!("x0 = {x0} is outside the gap ({a}, {b})")));
    }
    let n = bundle.n;
    let p = bundle.f.points();
    let roots = |r: &RationalFunction| -> Vec<Complex64> { r.poles().iter().map(|&x| Complex64::new(x, 0.0)).collect() };
    let q1 = Poly::from_roots(&roots(&bundle.r1));
    let q2 = Poly::from_roots(&roots(&bundle.r2));
    let bindings = vec![
        binding("r1", &bundle.f, x0, &p[1..2 * n], &q1)?,
        binding("r1", &bundle.f, x0, &p[..2 * n - 1], &q1)?,
        binding("r2", &bundle.f, x0, &p[2..2 * n + 1], &q2)?,
        binding("r2", &bundle.f, x0, &p[3..], &q2)?,
    ];
    let (r1v, r2v) = (bundle.r1.eval(x0), bundle.r2.eval(x0));
    let scale = bundle.f.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let margin = 1e-10 * scale;
    let pinned = |side: &str| -> Vec<f64> { bindings.iter().filter(|b| b.side == side).map(|b| b.y).collect() };
    let empty = pinned("r1")
        .iter()
        .all(|y1| pinned("r2").iter().all(|y2| (y1 - y2).abs() > margin));
    let scan = extension_scan(&bundle.f, n, x0, grid, None, &[r1v, r2v], config)?;
    Ok(FeasibilityReport {
        x0,
        r1_value: r1v,
        r2_value: r2v,
        bindings,
        empty,
        grid_empty: scan.feasible.is_empty(),
        scan,
    })
}
