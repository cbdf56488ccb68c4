//! On sets unbounded in both directions, 2-monotone forces affine: the
//! constraint `[x, y, z, M]_{f (. - M)^2} = -M [x, y, z]_f + [x, y, z]_{x f} >= 0`
//! bounds `|[x, y, z]_f|` by `|[x, y, z]_{x f}| / |M|`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{weights, FiniteFunction};
use crate::error::{invalid, Result};
use crate::linalg::{eigh, HermitianMatrix};
use crate::polynomial::Poly;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityStep {
    pub m: f64,
    /// `-M [x, y, z]_f + [x, y, z]_{x f}`.
    pub value: f64,
    pub violated: bool,
    /// `|[x, y, z]_{x f}| / |M|`: the bound on `|[x, y, z]_f|` once
    /// constraints at `±M` hold.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub triple: [f64; 3],
    /// `[x, y, z]_f`.
    pub dd: f64,
    /// `[x, y, z]_{x f}`.
    pub dd_xf: f64,
    pub steps: Vec<RigidityStep>,
    /// Smallest `|M|` at which the constraint fails.
    pub violated_from: Option<f64>,
    /// No constraint failed.
    pub pass: bool,
    /// Fitted exponent of `bound ~ c |M|^p`.
    pub decay_exponent: Option<f64>,
}

/// Least-squares slope of `log bound` against `log |M|`.
pub fn decay_exponent(ms: &[f64], bounds: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ms
        .iter()
        .zip(bounds)
        .filter(|(m, b)| **m != 0.0 && **b > 0.0)
        .map(|(m, b)| (m.abs().ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn affine_rigidity_check(f: &FiniteFunction, triple: [f64; 3], ms: &[f64], tol: f64) -> Result<RigidityReport> {
    let mut t = triple;
    t.sort_by(f64::total_cmp);
    if t[0] == t[1] || t[1] == t[2] {
        return Err(invalid("the triple must be three distinct points"));
    }
    let fv = t
        .iter()
        .map(|&x| f.value_at(x).ok_or_else(|| invalid(format!("{x} is not a point of F"))))
        .collect::<Result<Vec<_>>>()?;
    for &m in ms {
        if f.value_at(m).is_none() {
            return Err(invalid(format!("M = {m} is not a point of F")));
        }
        if t.contains(&m) {
            return Err(invalid(format!("M = {m} coincides with the triple")));
        }
    }
    if !ms.iter().any(|&m| m < t[0]) || !ms.iter().any(|&m| m > t[2]) {
        return Err(invalid("insufficient spread: need M values on both sides of the triple"));
    }
    let w = weights::<f64>(&t);
    let dd: f64 = (0..3).map(|i| fv[i] * w[i]).sum();
    let dd_xf: f64 = (0..3).map(|i| t[i] * fv[i] * w[i]).sum();
    let sd: f64 = (0..3).map(|i| (fv[i] * w[i]).abs()).sum();
    let se: f64 = (0..3).map(|i| (t[i] * fv[i] * w[i]).abs()).sum();
    let steps: Vec<RigidityStep> = ms
        .iter()
        .map(|&m| {
            let value = -m * dd + dd_xf;
            RigidityStep {
                m,
                value,
                violated: value < -tol * (m.abs() * sd + se),
                bound: dd_xf.abs() / m.abs(),
            }
        })
        .collect();
    let violated_from = steps
        .iter()
        .filter(|s| s.violated)
        .map(|s| s.m.abs())
        .fold(None, |a: Option<f64>, m| Some(a.map_or(m, |a| a.min(m))));
    let decay = decay_exponent(
        &steps.iter().map(|s| s.m).collect::<Vec<_>>(),
        &steps.iter().map(|s| s.bound).collect::<Vec<_>>(),
    );
    Ok(RigidityReport {
        triple: t,
        dd,
        dd_xf,
        pass: violated_from.is_none(),
        violated_from,
        steps,
        decay_exponent: decay,
    })
}

/// `<((z - B)^{-1} - (z - A)^{-1}) w, w> = q(z) / prod (z - x_i)` over the
/// distinct eigenvalues `x_i` of `A` and `B`. Returns `(x, q)`.
pub fn resolvent_numerator(a: &HermitianMatrix, b: &HermitianMatrix, w: &[Complex64]) -> Result<(Vec<f64>, Poly)> {
    if a.dim() != b.dim() || w.len() != a.dim() {
        return Err(invalid("dimension mismatch"));
    }
    let mut poles: Vec<(f64, f64)> = Vec::new();
    for (h, sign) in [(b, 1.0), (a, -1.0)] {
        let e = eigh(h);
        for j in 0..h.dim() {
            let u = e.vectors.column(j);
            let r: Complex64 = u.iter().zip(w).map(|(x, y)| x.conj() * y).sum();
            poles.push((e.values[j], sign * r.norm_sqr()));
        }
    }
    poles.sort_by(|x, y| x.0.total_cmp(&y.0));
    let scale = poles.iter().fold(1.0f64, |m, p| m.max(p.0.abs()));
    let mut merged: Vec<(f64, f64, usize)> = Vec::new();
    for (x, r) in poles {
        match merged.last_mut() {
            Some(last) if (x - last.0 / last.2 as f64).abs() <= 1e-9 * scale => {
                last.0 += x;
                last.1 += r;
                last.2 += 1;
            }
            _ => merged.push((x, r, 1)),
        }
    }
    let xs: Vec<f64> = merged.iter().map(|m| m.0 / m.2 as f64).collect();
    let mut q = Poly::zero();
    for (i, m) in merged.iter().enumerate() {
        let roots: Vec<Complex64> = xs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, x)| Complex64::new(*x, 0.0))
            .collect();
        q = &q + &Poly::from_roots(&roots).scale(Complex64::new(m.1, 0.0));
    }
    Ok((xs, q))
}
