//! Matrix monotonicity on finite sets: the divided-difference test over
//! subsets, gluing, the non-extendable counterexample and affine rigidity.
//!
//! For a fixed tuple of `2k` points, `q -> [nodes]_{f N(q)}` is a Hermitian
//! form in the coefficients of `q`, so every subset is checked exactly by
//! the smallest eigenvalue of its moment matrix; sampled `q` are evaluated
//! on top of that and reported.

mod counterexample;
mod rigidity;

use std::fmt;

use itertools::Itertools;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{basis_poly, rounding_guard, Verdict};
use crate::divdiff::NodeSampler;
use crate::error::{invalid, Error, Result};
use crate::expr::FunctionModel;
use crate::linalg::{eigh, HermitianMatrix, PSD_TOL};
use crate::polynomial::Poly;
use crate::scalar::{Ext, Precision, PrecisionPolicy, Scalar};

pub use counterexample::{
    build_counterexample, extension_feasibility, extension_scan, Binding, CounterexampleBundle, ExtensionScan,
    FeasibilityReport, RationalFunction,
};
pub use rigidity::{affine_rigidity_check, decay_exponent, resolvent_numerator, RigidityReport, RigidityStep};

/// A function given by its values on a finite set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFinite", into = "RawFinite")]
pub struct FiniteFunction {
    points: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawFinite {
    points: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawFinite> for FiniteFunction {
    type Error = Error;
    fn try_from(r: RawFinite) -> Result<Self> {
        FiniteFunction::new(r.points, r.values)
    }
}

impl From<FiniteFunction> for RawFinite {
    fn from(f: FiniteFunction) -> Self {
        RawFinite {
            points: f.points,
            values: f.values,
        }
    }
}

impl FiniteFunction {
    /// Points must be finite and strictly increasing.
    pub fn new(points: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(invalid(format!("{} points but {} values", points.len(), values.len())));
        }
        if points.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(invalid("points and values must be finite"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("points must be strictly increasing"));
        }
        Ok(Self { points, values })
    }

    /// Sorts the pairs first; repeated points are an error.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let mut p = pairs.to_vec();
        p.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self::new(p.iter().map(|v| v.0).collect(), p.iter().map(|v| v.1).collect())
    }

    /// `f` restricted to `points`.
    pub fn restrict(f: &FunctionModel, points: &[f64]) -> Result<Self> {
        let pairs = points.iter().map(|&x| Ok((x, f.value(&x)?))).collect::<Result<Vec<_>>>()?;
        Self::from_pairs(&pairs)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.points
            .binary_search_by(|p| p.total_cmp(&x))
            .ok()
            .map(|i| self.values[i])
    }

    /// A copy with `(x, y)` added.
    pub fn with_point(&self, x: f64, y: f64) -> Result<Self> {
        if self.value_at(x).is_some() {
            return Err(invalid(format!("{x} is already a point")));
        }
        let mut pairs: Vec<(f64, f64)> = self.points.iter().copied().zip(self.values.iter().copied()).collect();
        pairs.push((x, y));
        Self::from_pairs(&pairs)
    }

    /// Two-column text: `point value` per line, `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(invalid(format!("line {}: expected two columns, got {}", no + 1, cols.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| invalid(format!("line {}: `{s}` is not a number", no + 1)))
            };
            pairs.push((num(cols[0])?, num(cols[1])?));
        }
        Self::from_pairs(&pairs)
    }

    pub fn to_text(&self) -> String {
        self.points
            .iter()
            .zip(&self.values)
            .map(|(x, y)| format!("{x:e} {y:e}\n"))
            .collect()
    }
}

impl fmt::Display for FiniteFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GensetConfig {
    pub tol: f64,
    pub seed: u64,
    /// Random `q` evaluated per subset, on top of the exact eigenvalue test.
    pub q_samples: usize,
    /// Exhaustive enumeration up to this many subsets per order; beyond it,
    /// sliding windows plus seeded random subsets up to the same count.
    pub max_subsets: usize,
    pub precision: Precision,
    pub policy: PrecisionPolicy,
}

impl Default for GensetConfig {
    fn default() -> Self {
        Self {
            tol: PSD_TOL,
            seed: 0,
            q_samples: 16,
            max_subsets: 100_000,
            precision: Precision::Auto,
            policy: PrecisionPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GensetWitness {
    pub k: usize,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub q: Poly,
    /// `[nodes]_{f N(q)}`.
    pub value: f64,
    pub scale: f64,
}

impl GensetWitness {
    /// Recomputes `[nodes]_{f N(q)}` from the stored data.
    pub fn reevaluate(&self) -> f64 {
        let w = weights::<f64>(&self.nodes);
        self.nodes
            .iter()
            .zip(&self.values)
            .zip(&w)
            .map(|((x, y), wi)| y * wi * self.q.eval(Complex64::new(*x, 0.0)).norm_sqr())
            .sum()
    }
}

/// Result at one order `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub k: usize,
    pub subsets: usize,
    pub exhaustive: bool,
    pub q_evaluations: usize,
    pub pass: bool,
    pub worst_score: f64,
    pub worst: Option<GensetWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GensetReport {
    pub n: usize,
    pub points: usize,
    /// `#F > 2n`: the order-`n` condition alone decides.
    pub cutoff: bool,
    pub orders: Vec<OrderRecord>,
    /// Verdict of the order-`n` condition alone.
    pub order_n_verdict: Verdict,
    /// Verdict of the conditions for every `k = 1..n`.
    pub all_orders_verdict: Verdict,
    pub verdict: Verdict,
    /// False when the cutoff applies and the two verdicts differ.
    pub consistent: bool,
    pub seed: u64,
    pub tol: f64,
}

impl GensetReport {
    pub fn order(&self, k: usize) -> Option<&OrderRecord> {
        self.orders.iter().find(|r| r.k == k)
    }

    /// Worst witness over all orders, if any failed.
    pub fn witness(&self) -> Option<&GensetWitness> {
        self.orders
            .iter()
            .filter(|r| !r.pass)
            .min_by(|a, b| a.worst_score.total_cmp(&b.worst_score))
            .and_then(|r| r.worst.as_ref())
    }
}

fn verdict(pass: bool) -> Verdict {
    if pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn weights<S: Scalar>(xs: &[f64]) -> Vec<S> {
    (0..xs.len())
        .map(|i| {
            let mut d = S::one();
            for j in 0..xs.len() {
                if j != i {
                    d = d * (S::from_f64(xs[i]) - S::from_f64(xs[j]));
                }
            }
            S::one() / d
        })
        .collect()
}

struct SubsetForm {
    h: Vec<Vec<f64>>,
    scale: f64,
    center: f64,
    width: f64,
    // f_i w_i in double, for sampled q
    fw: Vec<f64>,
    eps: f64,
}

fn subset_form<S: Scalar>(xs: &[f64], ys: &[f64], k: usize) -> SubsetForm {
    let w = weights::<S>(xs);
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let center = 0.5 * (lo + hi);
    let width = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE);
    let fw: Vec<S> = ys.iter().zip(&w).map(|(y, wi)| S::from_f64(*y) * wi.clone()).collect();
    let phi: Vec<Vec<S>> = xs
        .iter()
        .map(|&x| {
            let u = (S::from_f64(x) - S::from_f64(center)) / S::from_f64(width);
            let mut p = vec![S::one()];
            for s in 1..k {
                let next = p[s - 1].clone() * u.clone();
                p.push(next);
            }
            p
        })
        .collect();
    let mut h = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let v = fw
                .iter()
                .zip(&phi)
                .fold(S::zero(), |acc, (c, p)| acc + c.clone() * p[a].clone() * p[b].clone())
                .to_f64();
            h[a][b] = v;
            h[b][a] = v;
        }
    }
    let scale = fw
        .iter()
        .zip(&phi)
        .map(|(c, p)| c.abs().to_f64() * p.iter().map(|v| v.to_f64().powi(2)).sum::<f64>())
        .sum();
    SubsetForm {
        h,
        scale,
        center,
        width,
        fw: fw.iter().map(|v| v.to_f64()).collect(),
        eps: S::epsilon(),
    }
}

fn min_separation(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

struct SubsetOutcome {
    score: f64,
    violated: bool,
    q_evaluations: usize,
    witness: GensetWitness,
}

fn check_subset(f: &FiniteFunction, idx: &[usize], k: usize, config: &GensetConfig, salt: u64) -> Result<SubsetOutcome> {
    let xs: Vec<f64> = idx.iter().map(|&i| f.points[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| f.values[i]).collect();
    let form = match config.policy.resolve(config.precision, xs.len() - 1, min_separation(&xs)) {
        Precision::Extended => subset_form::<Ext>(&xs, &ys, k),
        _ => subset_form::<f64>(&xs, &ys, k),
    };
    let e = eigh(&HermitianMatrix::from_real_rows(&form.h)?);
    let lam = e.min();
    let v = e.vectors.column(0);
    let big = v.iter().cloned().fold(Complex64::new(0.0, 0.0), |a, z| if z.norm() > a.norm() { z } else { a });
    let phase = if big.norm() > 0.0 { big.conj() / big.norm() } else { Complex64::new(1.0, 0.0) };
    let coeffs: Vec<Complex64> = v.iter().map(|z| z * phase).collect();
    let q = basis_poly(&coeffs, form.center, form.width);
    let mut witness = GensetWitness {
        k,
        nodes: xs.clone(),
        values: ys,
        q,
        value: lam,
        scale: form.scale,
    };
    witness.value = witness.reevaluate();
    let mut sampled = f64::INFINITY;
    // sampled q: complex Gaussian coefficients, and roots at subset points
    let mut rng = NodeSampler::new(config.seed ^ salt).with_tag("genset-q").rng(idx.iter().fold(0, |a, &i| a * 31 + i));
    // [nodes]_{f N(q)} by the product formula, for unit coefficients in the
    // centred basis (the normalization of the eigenvalue test)
    let eval = |c: &[Complex64]| -> f64 {
        let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let unit: Vec<Complex64> = c.iter().map(|z| z / norm).collect();
        let q = basis_poly(&unit, form.center, form.width);
        xs.iter()
            .zip(&form.fw)
            .map(|(x, w)| w * q.eval(Complex64::new(*x, 0.0)).norm_sqr())
            .sum::<f64>()
    };
    for s in 0..config.q_samples {
        let c: Vec<Complex64> = if s % 2 == 1 && k > 1 {
            let roots: Vec<Complex64> = (0..k - 1)
                .map(|_| Complex64::new((xs[rng.random_range(0..xs.len())] - form.center) / form.width, 0.0))
                .collect();
            Poly::from_roots(&roots).coeffs().to_vec()
        } else {
            (0..k)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        };
        sampled = sampled.min(eval(&c));
    }
    // tolerance relative to the form, as for the matrix criteria; the
    // guards cover cancellation in the weighted sums
    let natural = e.norm().max(1.0);
    let allowed = |eps: f64| config.tol * natural + rounding_guard(eps, form.scale);
    Ok(SubsetOutcome {
        score: lam.min(sampled) / natural,
        violated: lam < -allowed(form.eps) || sampled < -allowed(f64::EPSILON),
        q_evaluations: config.q_samples + 1,
        witness,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn subsets(len: usize, size: usize, config: &GensetConfig, salt: u64) -> (Vec<Vec<usize>>, bool) {
    if size > len {
        return (Vec::new(), true);
    }
    if binomial(len, size) <= config.max_subsets as f64 {
        return ((0..len).combinations(size).collect(), true);
    }
    // sliding windows always; they bind by the refinement argument
    let mut out: Vec<Vec<usize>> = (0..=len - size).map(|s| (s..s + size).collect()).collect();
    let sampler = NodeSampler::new(config.seed ^ salt).with_tag("genset-subsets");
    let mut i = 0;
    while out.len() < config.max_subsets {
        let mut rng = sampler.rng(i);
        let mut idx = sample(&mut rng, len, size).into_vec();
        idx.sort_unstable();
        out.push(idx);
        i += 1;
    }
    (out, false)
}

fn check_order(f: &FiniteFunction, k: usize, config: &GensetConfig) -> Result<OrderRecord> {
    let (subs, exhaustive) = subsets(f.len(), 2 * k, config, k as u64);
    let outs: Vec<SubsetOutcome> = subs
        .par_iter()
        .map(|idx| check_subset(f, idx, k, config, k as u64))
        .collect::<Result<_>>()?;
    let q_evaluations = outs.iter().map(|o| o.q_evaluations).sum();
    let pass = !outs.iter().any(|o| o.violated);
    let worst = outs.into_iter().min_by(|a, b| a.score.total_cmp(&b.score));
    Ok(OrderRecord {
        k,
        subsets: subs.len(),
        exhaustive,
        q_evaluations,
        pass,
        worst_score: worst.as_ref().map_or(0.0, |w| w.score),
        worst: worst.map(|w| w.witness),
    })
}

/// `[x_0, ..., x_{2k-1}]_{f N(q)} >= 0` over subsets of `F`, `q` of degree
/// `< k`, for `k = 1..n`. With `#F > 2n` the order-`n` condition decides;
/// both verdicts are reported either way.
pub fn genset_check(f: &FiniteFunction, n: usize, config: &GensetConfig) -> Result<GensetReport> {
    if n == 0 {
        return Err(invalid("order n must be at least 1"));
    }
    let orders = (1..=n).map(|k| check_order(f, k, config)).collect::<Result<Vec<_>>>()?;
    let order_n = orders[n - 1].pass;
    let all = orders.iter().all(|r| r.pass);
    let cutoff = f.len() > 2 * n;
    Ok(GensetReport {
        n,
        points: f.len(),
        cutoff,
        order_n_verdict: verdict(order_n),
        all_orders_verdict: verdict(all),
        verdict: verdict(if cutoff { order_n } else { all }),
        consistent: !cutoff || order_n == all,
        orders,
        seed: config.seed,
        tol: config.tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueReport {
    pub n: usize,
    pub hypothesis_met: bool,
    /// Fewest shared points found strictly between a point only in one set
    /// and a point only in the other; `None` if no such pair exists.
    pub min_shared_between: Option<usize>,
    pub required: usize,
    pub left: GensetReport,
    pub right: GensetReport,
    pub union: GensetReport,
    /// False if the hypothesis holds, both parts pass and the union fails.
    pub consistent: bool,
}

/// Checks the gluing hypothesis for `f1`, `f2` and certifies the union.
///
/// The hypothesis is read symmetrically: between any point only in one set
/// and any point only in the other there must be at least `2n - 1` common
/// points.
pub fn glue_check(f1: &FiniteFunction, f2: &FiniteFunction, n: usize, config: &GensetConfig) -> Result<GlueReport> {
    let mut pairs: Vec<(f64, f64)> = f1.points.iter().copied().zip(f1.values.iter().copied()).collect();
    for (&x, &y) in f2.points.iter().zip(&f2.values) {
        match f1.value_at(x) {
            Some(v) if (v - y).abs() > 1e-12 * v.abs().max(y.abs()).max(1.0) => {
                return Err(invalid(format!("values disagree at shared point {x}: {v} vs {y}")));
            }
            Some(_) => {}
            None => pairs.push((x, y)),
        }
    }
    let union = FiniteFunction::from_pairs(&pairs)?;
    let shared: Vec<f64> = f1.points.iter().copied().filter(|&x| f2.value_at(x).is_some()).collect();
    let only1: Vec<f64> = f1.points.iter().copied().filter(|&x| f2.value_at(x).is_none()).collect();
    let only2: Vec<f64> = f2.points.iter().copied().filter(|&x| f1.value_at(x).is_none()).collect();
    let between = |a: f64, b: f64| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        shared.iter().filter(|&&s| lo < s && s < hi).count()
    };
    let min_shared_between = only1
        .iter()
        .flat_map(|&a| only2.iter().map(move |&b| (a, b)))
        .map(|(a, b)| between(a, b))
        .min();
    let required = 2 * n - 1;
    let hypothesis_met = min_shared_between.is_none_or(|m| m >= required);
    let left = genset_check(f1, n, config)?;
    let right = genset_check(f2, n, config)?;
    let union_report = genset_check(&union, n, config)?;
    let consistent = !(hypothesis_met
        && left.verdict == Verdict::Pass
        && right.verdict == Verdict::Pass
        && union_report.verdict == Verdict::Fail);
    Ok(GlueReport {
        n,
        hypothesis_met,
        min_shared_between,
        required,
        left,
        right,
        union: union_report,
        consistent,
    })
}

#[cfg(test)]
mod tests;
