use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{eigh, psd_check, HermitianMatrix, PSD_TOL};
use crate::error::{invalid, Error, Result};

/// `B - A = v v^*`; `strict` when `v` is orthogonal to no eigenvector of `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionPair {
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    pub v: Vec<Complex64>,
    pub strict: bool,
}

impl ProjectionPair {
    /// `min |<v, e>| / ‖v‖` over unit eigenvectors `e` of `A`.
    pub fn min_overlap(&self) -> f64 {
        let e = eigh(&self.a);
        let vn = self.v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (0..self.a.dim())
            .map(|j| {
                let col = e.vectors.column(j);
                col.iter().zip(&self.v).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm() / vn
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Pair with spectra `A: x_0, x_2, ...` and `B: x_1, x_3, ...`.
///
/// `B` is diagonal and `v_i^2` is the residue at `x_{2i+1}` of
/// `prod_j (z - x_{2j}) / (z - x_{2j+1})`, which makes
/// `det(z - A) / det(z - B) = 1 + <(z - B)^{-1} v, v>`.
pub fn make_projection_pair(targets: &[f64]) -> Result<ProjectionPair> {
    if targets.is_empty() || targets.len() % 2 != 0 {
        return Err(invalid("projection pair needs an even, nonzero number of targets"));
    }
    if targets.iter().any(|x| !x.is_finite()) {
        return Err(invalid("targets must be finite"));
    }
    let span = targets[targets.len() - 1] - targets[0];
    let min_gap = 1e-8 * span.abs().max(f64::MIN_POSITIVE);
    if targets.windows(2).any(|w| !(w[1] - w[0] >= min_gap)) {
        return Err(invalid("targets must increase strictly, separated by at least 1e-8 of the span"));
    }
    let n = targets.len() / 2;
    let poles: Vec<f64> = (0..n).map(|i| targets[2 * i + 1]).collect();
    let zeros: Vec<f64> = (0..n).map(|i| targets[2 * i]).collect();
    let mut v = Vec::with_capacity(n);
    for (i, &p) in poles.iter().enumerate() {
        let mut r = 1.0;
        for j in 0..n {
            r *= p - zeros[j];
            if j != i {
                r /= p - poles[j];
            }
        }
        if !(r > 0.0) {
            return Err(Error::Numerical(format!("residue {r:e} at {p} is not positive")));
        }
        v.push(Complex64::new(r.sqrt(), 0.0));
    }
    let b = HermitianMatrix::diag(&poles);
    let a = &b - &HermitianMatrix::outer(&v);
    let mut pair = ProjectionPair { a, b, v, strict: false };
    pair.strict = pair.min_overlap() > 1e-10;
    Ok(pair)
}

/// `A = A_0 <= A_1 <= ... <= A_m = B` with rank-one steps, from the
/// eigendecomposition of `B - A`; eigenvalues below the PSD tolerance are
/// dropped.
pub fn rank_one_chain(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<Vec<HermitianMatrix>> {
    if a.dim() != b.dim() {
        return Err(invalid("chain endpoints differ in dimension"));
    }
    let d = b - a;
    let chk = psd_check(&d, PSD_TOL);
    if !chk.psd {
        return Err(Error::Hypothesis(format!(
            "A <= B fails: B - A has eigenvalue {:e}",
            chk.min_eigenvalue
        )));
    }
    let e = eigh(&d);
    let cut = PSD_TOL * e.norm().max(1.0);
    let mut chain = vec![a.clone()];
    let mut cur = a.clone();
    let steps: Vec<usize> = (0..d.dim()).filter(|&j| e.values[j] > cut).collect();
    for (k, &j) in steps.iter().enumerate() {
        if k + 1 == steps.len() {
            // land exactly on B
            chain.push(b.clone());
            break;
        }
        let u: Vec<Complex64> = e.vectors.column(j).iter().map(|z| z * e.values[j].sqrt()).collect();
        cur = &cur + &HermitianMatrix::outer(&u);
        chain.push(cur.clone());
    }
    Ok(chain)
}
