//! Complex univariate polynomials, `N(q) = q q*`, roots and the
//! sum-of-squares style decompositions built on them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative tolerance under which two roots are conjugate partners, or a
/// root is considered real.
pub const PAIRING_TOL: f64 = 1e-7;

/// Complex coefficients in ascending degree, trailing zeros removed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|z| *z == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::constant(c(1.0))
    }

    pub fn constant(z: Complex64) -> Self {
        Self::new(vec![z])
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| c(x)).collect())
    }

    /// `x - r`.
    pub fn linear(r: Complex64) -> Self {
        Self::new(vec![-r, c(1.0)])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| &acc * &Self::linear(r))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// True when every imaginary part is at most `tol` times the largest
    /// coefficient magnitude.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.max_abs_coeff();
        self.coeffs.iter().all(|z| z.im.abs() <= tol * scale)
    }

    pub fn real_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|z| z.re).collect()
    }

    pub fn imag_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|z| z.im).collect()
    }

    /// `q*`: conjugated coefficients.
    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|z| z * s).collect())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(c(0.0), |acc, &a| acc * z + a)
    }

    /// `sum |c_i| |z|^i`, the natural size of rounding errors in `eval(z)`.
    pub fn eval_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * k as f64)
                .collect(),
        )
    }

    /// Coefficients of `p(x)` in powers of `(x - t)`, ascending
    /// (repeated synthetic division).
    pub fn taylor_shift(&self, t: Complex64) -> Vec<Complex64> {
        let mut a = self.coeffs.clone();
        let n = a.len();
        for k in 0..n {
            for j in (k..n - 1).rev() {
                let next = a[j + 1];
                a[j] += t * next;
            }
        }
        a
    }

    /// Largest coefficient difference relative to the larger polynomial.
    pub fn relative_distance(&self, other: &Poly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Poly, i: usize| p.coeffs.get(i).copied().unwrap_or_default();
        let diff = (0..n).map(|i| (get(self, i) - get(other, i)).norm()).fold(0.0, f64::max);
        let scale = self.max_abs_coeff().max(other.max_abs_coeff());
        if scale == 0.0 {
            0.0
        } else {
            diff / scale
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |p: &Poly, i: usize| p.coeffs.get(i).copied().unwrap_or_default();
        Poly::new((0..n).map(|i| get(self, i) + get(rhs, i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|z| -z).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![c(0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, z) in self.coeffs.iter().enumerate().rev() {
            if *z == c(0.0) {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if z.im == 0.0 {
                write!(f, "{}", z.re)?;
            } else {
                write!(f, "({}{:+}i)", z.re, z.im)?;
            }
            match k {
                0 => {}
                1 => f.write_str("x")?,
                _ => write!(f, "x^{k}")?,
            }
        }
        Ok(())
    }
}

/// `N(q) = q q*`.
pub fn n_of(q: &Poly) -> Poly {
    let p = q * &q.conj();
    // the product is real in exact arithmetic
    Poly::new(p.coeffs.iter().map(|z| c(z.re)).collect())
}

/// Taylor coefficients of `N(q)` at the real point `x`, for `j < m`,
/// evaluated as `a^2 + b^2` with `q = a + i b`, so the result is
/// nonnegative by construction in any precision.
pub fn n_of_taylor<S: Scalar>(q: &Poly, x: &S, m: usize) -> Vec<S> {
    let a = real_taylor(&q.real_coeffs(), x, m);
    let b = real_taylor(&q.imag_coeffs(), x, m);
    let mut out = vec![S::zero(); m];
    for i in 0..m {
        for j in 0..m - i {
            out[i + j] = out[i + j].clone() + a[i].clone() * a[j].clone() + b[i].clone() * b[j].clone();
        }
    }
    out
}

/// Taylor coefficients at `x` of the real polynomial with the given
/// ascending coefficients, first `m` of them.
pub fn real_taylor<S: Scalar>(coeffs: &[f64], x: &S, m: usize) -> Vec<S> {
    let mut a: Vec<S> = coeffs.iter().map(|&v| S::from_f64(v)).collect();
    let n = a.len();
    for k in 0..n.min(m) {
        for j in (k..n - 1).rev() {
            a[j] = a[j].clone() + x.clone() * a[j + 1].clone();
        }
    }
    a.resize(m.max(n), S::zero());
    a.truncate(m);
    a
}

/// All roots with multiplicity (Aberth–Ehrlich iteration).
///
/// Every returned root satisfies `|p(r)| <= tol * sum |c_i| |r|^i`.
pub fn roots(p: &Poly, tol: f64) -> Result<Vec<Complex64>> {
    let d = match p.degree() {
        None | Some(0) => return Err(Error::InvalidInput("roots of a constant polynomial".into())),
        Some(d) => d,
    };
    // exact zero roots are split off first
    let zeros = p.coeffs().iter().take_while(|z| **z == c(0.0)).count();
    if zeros > 0 {
        let mut out = vec![c(0.0); zeros];
        if zeros < d {
            out.extend(roots(&Poly::new(p.coeffs()[zeros..].to_vec()), tol)?);
        }
        return Ok(out);
    }
    let lead = p.leading();
    let monic = p.scale(lead.inv());
    let a = monic.coeffs();
    if d == 1 {
        return Ok(vec![-a[0]]);
    }
    let dp = monic.derivative();
    // starting ring: centroid of the roots, radius from the coefficient bound
    let center = -a[d - 1] / d as f64;
    let shifted = Poly::new(monic.taylor_shift(center));
    let radius = (0..d)
        .map(|i| shifted.coeffs()[i].norm().powf(1.0 / (d - i) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4;
            center + Complex64::from_polar(radius, theta)
        })
        .collect();

    const MAX_ITER: usize = 2000;
    for _ in 0..MAX_ITER {
        let mut moved = 0.0f64;
        for k in 0..d {
            let pz = monic.eval(z[k]);
            if pz == c(0.0) {
                continue;
            }
            let ratio = pz / dp.eval(z[k]);
            let sum: Complex64 = (0..d)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (c(1.0) - ratio * sum);
            if step.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if moved <= 1e-15 {
            break;
        }
    }
    for r in &z {
        let resid = monic.eval(*r).norm();
        if !(resid <= tol * monic.eval_scale(*r)) {
            return Err(Error::NonConvergence(format!(
                "root iteration stalled at {r} with residual {resid:e}"
            )));
        }
    }
    Ok(z)
}

fn is_real_root(r: Complex64) -> bool {
    r.im.abs() <= PAIRING_TOL * (1.0 + r.norm())
}

const ROOT_TOL: f64 = 1e-9;

/// Roots grouped into clusters of nearly coincident members (inexact
/// multiple roots). Each cluster is replaced by its mean and refined by
/// Newton steps on `p^(m-1)`, where a root of multiplicity `m` is simple.
fn root_clusters(p: &Poly) -> Result<Vec<(Complex64, usize)>> {
    let rs = roots(p, ROOT_TOL)?;
    let mut group = vec![usize::MAX; rs.len()];
    let mut out = Vec::new();
    for i in 0..rs.len() {
        if group[i] != usize::MAX {
            continue;
        }
        group[i] = out.len();
        let mut members = vec![i];
        let mut stack = vec![i];
        while let Some(k) = stack.pop() {
            for j in 0..rs.len() {
                if group[j] == usize::MAX && (rs[j] - rs[k]).norm() <= 1e-5 * (1.0 + rs[k].norm()) {
                    group[j] = out.len();
                    members.push(j);
                    stack.push(j);
                }
            }
        }
        let m = members.len();
        let mut z = members.iter().map(|&j| rs[j]).sum::<Complex64>() / m as f64;
        if m > 1 {
            let mut d = p.clone();
            for _ in 0..m - 1 {
                d = d.derivative();
            }
            let e = d.derivative();
            for _ in 0..8 {
                let step = d.eval(z) / e.eval(z);
                let cand = z - step;
                if !step.is_finite() || d.eval(cand).norm() >= d.eval(z).norm() {
                    break;
                }
                z = cand;
            }
        }
        out.push((z, m));
    }
    Ok(out)
}

/// Splits the roots of a real polynomial into real clusters `(root,
/// multiplicity)` and the lower-half-plane member of each conjugate pair
/// (repeated by multiplicity).
fn split_roots(p: &Poly) -> Result<(Vec<(f64, usize)>, Vec<Complex64>)> {
    let clusters = root_clusters(p)?;
    let mut real: Vec<(f64, usize)> = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for (z, m) in clusters {
        if is_real_root(z) {
            real.push((z.re, m));
        } else if z.im < 0.0 {
            lower.push((z, m));
        } else {
            upper.push((z, m));
        }
    }
    real.sort_by(|a, b| a.0.total_cmp(&b.0));
    lower.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
    let mut half = Vec::new();
    for (r, m) in lower {
        let partner = upper
            .iter()
            .position(|(u, k)| *k == m && (u - r.conj()).norm() <= PAIRING_TOL * (1.0 + r.norm()));
        let Some(idx) = partner else {
            return Err(Error::NotNonnegative(format!("root {r} has no conjugate partner")));
        };
        let (u, _) = upper.swap_remove(idx);
        half.extend(std::iter::repeat_n((r + u.conj()) * 0.5, m));
    }
    if !upper.is_empty() {
        return Err(Error::NotNonnegative("complex roots do not come in conjugate pairs".into()));
    }
    Ok((real, half))
}

/// `q` with `N(q) = p` for a real polynomial `p >= 0` on the real line.
///
/// `q` takes one root from each conjugate pair (the one in the lower
/// half-plane) and half of each real root of even multiplicity, scaled by
/// the square root of the leading coefficient.
pub fn sos_decompose(p: &Poly) -> Result<Poly> {
    if !p.is_real(1e-10) {
        return Err(Error::NotNonnegative("polynomial has complex coefficients".into()));
    }
    let p = Poly::from_real(&p.real_coeffs());
    let Some(d) = p.degree() else {
        return Ok(Poly::zero());
    };
    let lead = p.leading().re;
    if lead < 0.0 {
        return Err(Error::NotNonnegative("negative leading coefficient".into()));
    }
    if d == 0 {
        return Ok(Poly::constant(c(lead.sqrt())));
    }
    if d % 2 == 1 {
        return Err(Error::NotNonnegative("odd degree".into()));
    }
    let (real, lower) = split_roots(&p)?;
    let mut half: Vec<Complex64> = lower;
    for (r, m) in real {
        if m % 2 == 1 {
            return Err(Error::NotNonnegative(format!("real root {r} has odd multiplicity {m}")));
        }
        half.extend(std::iter::repeat_n(c(r), m / 2));
    }
    Ok(Poly::from_roots(&half).scale(c(lead.sqrt())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbKind {
    /// `N(q)`
    Plain,
    /// `(x - a)(x - b) N(q)`
    Both,
    /// `(x - a) N(q)`
    LowerEnd,
    /// `(x - b) N(q)`
    UpperEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbTerm {
    pub weight: f64,
    pub kind: AbKind,
    pub q: Poly,
}

impl AbTerm {
    /// The polynomial `weight * kind-factor * N(q)`.
    pub fn expand(&self, a: f64, b: f64) -> Poly {
        let factor = match self.kind {
            AbKind::Plain => Poly::one(),
            AbKind::Both => &Poly::linear(c(a)) * &Poly::linear(c(b)),
            AbKind::LowerEnd => Poly::linear(c(a)),
            AbKind::UpperEnd => Poly::linear(c(b)),
        };
        (&factor * &n_of(&self.q)).scale(c(self.weight))
    }
}

/// Writes `p` as a nonnegative combination of `N(q)`, `(x-a)(x-b)N(q)`,
/// `(x-a)N(q)` and `(x-b)N(q)`.
///
/// Hypothesis: for even degree `p >= 0` outside `(a, b)`; for odd degree
/// `p >= 0` on `[b, inf)` and `p <= 0` on `(-inf, a]`.
pub fn ab_decompose(p: &Poly, a: f64, b: f64) -> Result<Vec<AbTerm>> {
    if !(a <= b) {
        return Err(Error::InvalidInput(format!("need a <= b, got ({a}, {b})")));
    }
    if !p.is_real(1e-10) {
        return Err(Error::Hypothesis("polynomial has complex coefficients".into()));
    }
    let p = Poly::from_real(&p.real_coeffs());
    let Some(d) = p.degree() else {
        return Ok(vec![]);
    };
    let lead = p.leading().re;
    if lead < 0.0 {
        return Err(Error::Hypothesis("negative leading coefficient".into()));
    }
    if d == 0 {
        return Ok(vec![AbTerm {
            weight: 1.0,
            kind: AbKind::Plain,
            q: Poly::constant(c(lead.sqrt())),
        }]);
    }
    let (real, lower) = split_roots(&p)?;
    let slack = PAIRING_TOL * (1.0 + a.abs().max(b.abs()) + (b - a));
    let mut half: Vec<Complex64> = lower;
    let mut inside: Vec<f64> = Vec::new();
    for (r, m) in real {
        half.extend(std::iter::repeat_n(c(r), m / 2));
        if m % 2 == 1 {
            if r < a - slack || r > b + slack {
                return Err(Error::Hypothesis(format!(
                    "root {r} of odd multiplicity lies outside [{a}, {b}]"
                )));
            }
            inside.push(r.clamp(a, b));
        }
    }
    let base = Poly::from_roots(&half).scale(c(lead.sqrt()));

    // expand prod (x - y) over weighted averages of (x - a) and (x - b);
    // w[la] collects the weight of (x - a)^la (x - b)^(l - la)
    let l = inside.len();
    let mut w = vec![0.0; l + 1];
    w[0] = 1.0;
    for (count, &y) in inside.iter().enumerate() {
        let (alpha, beta) = if b > a {
            ((b - y) / (b - a), (y - a) / (b - a))
        } else {
            (1.0, 0.0)
        };
        for la in (0..=count + 1).rev() {
            let from_a = if la > 0 { w[la - 1] * alpha } else { 0.0 };
            w[la] = w[la] * beta + from_a;
        }
    }
    let mut terms = Vec::new();
    for (la, &weight) in w.iter().enumerate() {
        if weight <= 0.0 {
            continue;
        }
        let lb = l - la;
        let kind = match (la % 2, lb % 2) {
            (0, 0) => AbKind::Plain,
            (1, 1) => AbKind::Both,
            (1, 0) => AbKind::LowerEnd,
            _ => AbKind::UpperEnd,
        };
        let mut q = base.clone();
        for _ in 0..la / 2 {
            q = &q * &Poly::linear(c(a));
        }
        for _ in 0..lb / 2 {
            q = &q * &Poly::linear(c(b));
        }
        terms.push(AbTerm { weight, kind, q });
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(p: &Poly, q: &Poly, tol: f64) -> bool {
        p.relative_distance(q) <= tol
    }

    #[test]
    fn n_of_examples() {
        let q = Poly::new(vec![z(0.0, 1.0), z(1.0, 0.0)]);
        assert_eq!(n_of(&q), Poly::from_real(&[1.0, 0.0, 1.0]));
        assert_eq!(n_of(&Poly::one()), Poly::one());
        let s = 2f64.sqrt();
        let q = Poly::new(vec![z(1.0 / s, 1.0 / s), z(s, 0.0)]);
        assert!(close(&n_of(&q), &Poly::from_real(&[1.0, 2.0, 2.0]), 1e-15));
    }

    #[test]
    fn root_examples() {
        let mut r = roots(&Poly::from_real(&[1.0, 0.0, 1.0]), 1e-12).unwrap();
        r.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((r[0] - z(0.0, -1.0)).norm() < 1e-12 && (r[1] - z(0.0, 1.0)).norm() < 1e-12);
        let r = roots(&Poly::from_real(&[1.0, -2.0, 1.0]), 1e-12).unwrap();
        assert!(r.iter().all(|x| (x - z(1.0, 0.0)).norm() < 1e-7));
        let mut r = roots(&Poly::from_real(&[-6.0, 11.0, -6.0, 1.0]), 1e-12).unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - z(want, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn sos_examples() {
        let q = sos_decompose(&Poly::from_real(&[1.0, 0.0, 1.0])).unwrap();
        assert!(close(&q, &Poly::new(vec![z(0.0, 1.0), z(1.0, 0.0)]), 1e-12));
        let q = sos_decompose(&Poly::from_real(&[1.0, 0.0, 2.0, 0.0, 1.0])).unwrap();
        assert!(close(&q, &Poly::new(vec![z(-1.0, 0.0), z(0.0, 2.0), z(1.0, 0.0)]), 1e-7));
        let s = 2f64.sqrt();
        let q = sos_decompose(&Poly::from_real(&[1.0, 2.0, 2.0])).unwrap();
        let want = Poly::linear(z(-0.5, -0.5)).scale(z(s, 0.0));
        assert!(close(&q, &want, 1e-12));
        assert_eq!(sos_decompose(&Poly::from_real(&[4.0])).unwrap(), Poly::from_real(&[2.0]));
        assert!(matches!(
            sos_decompose(&Poly::from_real(&[-1.0, 0.0, 1.0])),
            Err(Error::NotNonnegative(_))
        ));
        assert!(sos_decompose(&Poly::from_real(&[1.0, 0.0, -1.0])).is_err());
        // double real roots
        let p = n_of(&Poly::from_roots(&[z(1.0, 0.0), z(-2.0, 0.0), z(0.5, 3.0)]));
        assert!(close(&n_of(&sos_decompose(&p).unwrap()), &p, 1e-9));
    }

    fn sum_terms(terms: &[AbTerm], a: f64, b: f64) -> Poly {
        terms.iter().fold(Poly::zero(), |acc, t| &acc + &t.expand(a, b))
    }

    #[test]
    fn ab_examples() {
        let t = ab_decompose(&Poly::from_real(&[0.0, 1.0]), -1.0, 1.0).unwrap();
        assert_eq!(t.len(), 2);
        for term in &t {
            assert!((term.weight - 0.5).abs() < 1e-15);
            assert!(close(&n_of(&term.q), &Poly::one(), 1e-15));
        }
        assert_eq!(t[0].kind, AbKind::UpperEnd);
        assert_eq!(t[1].kind, AbKind::LowerEnd);

        let t = ab_decompose(&Poly::from_real(&[0.0, 0.0, 1.0]), -1.0, 1.0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].kind, AbKind::Plain);
        assert!(close(&n_of(&t[0].q), &Poly::from_real(&[0.0, 0.0, 1.0]), 1e-7));

        let t = ab_decompose(&Poly::from_real(&[-1.0, 0.0, 1.0]), -1.0, 1.0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].kind, AbKind::Both);
        assert!((t[0].weight - 1.0).abs() < 1e-12);

        // (x - 3) has its root outside [-1, 1]
        assert!(matches!(
            ab_decompose(&Poly::from_real(&[-3.0, 1.0]), -1.0, 1.0),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn taylor_of_n_matches_expansion() {
        let q = Poly::new(vec![z(0.3, -1.0), z(2.0, 0.5), z(-0.7, 0.2)]);
        let p = n_of(&q);
        let x = 0.8;
        let t: Vec<f64> = n_of_taylor(&q, &x, 6);
        let want = p.taylor_shift(z(x, 0.0));
        for i in 0..6 {
            let w = want.get(i).map_or(0.0, |v| v.re);
            assert!((t[i] - w).abs() < 1e-13, "{i}: {} vs {}", t[i], w);
        }
    }

    fn arb_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..=max_deg + 1).prop_map(|v| {
            let mut coeffs: Vec<Complex64> = v.into_iter().map(|(re, im)| z(re, im)).collect();
            let last = coeffs.len() - 1;
            if coeffs[last].norm() < 0.1 {
                coeffs[last] = z(1.0, 0.0);
            }
            Poly::new(coeffs)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn n_of_is_real_and_nonnegative(q in arb_poly(8)) {
            let p = n_of(&q);
            prop_assert!(p.is_real(0.0));
            let scale = p.max_abs_coeff();
            for i in 0..=400 {
                let x = -10.0 + 0.05 * i as f64;
                let v = p.eval(z(x, 0.0)).re;
                prop_assert!(v >= -1e-10 * scale * (1.0 + x.abs()).powi(p.degree().unwrap_or(0) as i32));
            }
        }

        #[test]
        fn sos_inverts_n_of(q in arb_poly(6)) {
            let p = n_of(&q);
            let back = sos_decompose(&p).unwrap();
            prop_assert!(back.degree() == q.degree());
            prop_assert!(n_of(&back).relative_distance(&p) <= 1e-9);
        }

        #[test]
        fn roots_reexpand(p in arb_poly(10)) {
            prop_assume!(p.degree().unwrap_or(0) >= 1);
            let r = roots(&p, 1e-9).unwrap();
            let back = Poly::from_roots(&r).scale(p.leading());
            prop_assert!(back.relative_distance(&p) <= 1e-8);
        }

        #[test]
        fn ab_decomposition_reconstructs(
            q in arb_poly(3).prop_map(|q| Poly::from_real(&q.real_coeffs())),
            ys in prop::collection::vec(0.0f64..1.0, 0..4),
        ) {
            prop_assume!(!q.is_zero());
            let (a, b) = (-1.0, 2.0);
            let mut p = n_of(&q);
            for y in &ys {
                p = &p * &Poly::linear(z(a + (b - a) * y, 0.0));
            }
            let terms = ab_decompose(&p, a, b).unwrap();
            prop_assert!(terms.iter().all(|t| t.weight >= 0.0));
            let d = p.degree().unwrap();
            for t in &terms {
                let extra = match t.kind { AbKind::Plain => 0, AbKind::Both => 2, _ => 1 };
                prop_assert_eq!(extra % 2, d % 2);
                prop_assert_eq!(2 * t.q.degree().unwrap() + extra, d);
            }
            prop_assert!(sum_terms(&terms, a, b).relative_distance(&p) <= 1e-8);
        }
    }
}
