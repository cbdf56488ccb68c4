//! Loewner and Kraus matrices as integrals of congruences of the Dobsch and
//! Hankel matrices against Peano weights:
//!
//! `[x_i, x_j]_f = ∫ (Cᵀ M(t) C)_{ij} w(t; x_1, x_1, ..., x_n, x_n) dt`
//!
//! with `(Cᵀ M(t) C)_{ij} = (f p_i p_j)^{(2n-1)}(t) / (2n-1)!`,
//! `p_j = ∏_{k≠j} (· - x_k)`, and likewise for the Kraus matrix with one
//! extra derivative and the base point added to the knots.

use serde::{Deserialize, Serialize};

use crate::criteria::{kraus_matrix, loewner_matrix};
use crate::divdiff::{peano_weight, NodeMultiset};
use crate::error::{invalid, Result};
use crate::expr::FunctionModel;
use crate::quad::GaussLegendre;

pub const DEFAULT_QUAD_ORDER: usize = 16;

/// Column `j` holds `p_j` expanded in powers of `(x - t)`, highest first:
/// `p_j(x) = Σ_i entries[i][j] (x - t)^{n-1-i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisChangeMatrix {
    pub t: f64,
    pub nodes: Vec<f64>,
    pub entries: Vec<Vec<f64>>,
}

impl BasisChangeMatrix {
    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ_i entries[i][j] (x - t)^{n-1-i}` by Horner.
    pub fn expand(&self, j: usize, x: f64) -> f64 {
        self.entries.iter().fold(0.0, |acc, row| acc * (x - self.t) + row[j])
    }

    /// Largest `|expand(j, x) - p_j(x)|` over the samples, relative to
    /// `max(1, |p_j(x)|)`.
    pub fn identity_error(&self, samples: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.dim() {
            for &x in samples {
                let p = product_except(&self.nodes, j, x);
                worst = worst.max((self.expand(j, x) - p).abs() / p.abs().max(1.0));
            }
        }
        worst
    }

    /// `Cᵀ H C` for a symmetric `H`.
    pub fn congruence(&self, h: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = self.dim();
        let c = &self.entries;
        let mut hc = vec![vec![0.0; n]; n];
        for (k, row) in hc.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..n).map(|l| h[k][l] * c[l][j]).sum();
            }
        }
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..n).map(|k| c[k][i] * hc[k][j]).sum();
            }
        }
        out
    }
}

fn product_except(nodes: &[f64], j: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != j)
        .map(|(_, y)| x - y)
        .product()
}

fn check_distinct(nodes: &[f64]) -> Result<()> {
    if nodes.is_empty() {
        return Err(invalid("need at least one node"));
    }
    if nodes.iter().any(|x| !x.is_finite()) {
        return Err(invalid("nodes must be finite"));
    }
    let mut s = nodes.to_vec();
    s.sort_by(f64::total_cmp);
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("nodes must be distinct"));
    }
    Ok(())
}

/// Synthetic division of each `p_j` about `t`.
pub fn basis_change_matrix(t: f64, nodes: &[f64]) -> Result<BasisChangeMatrix> {
    check_distinct(nodes)?;
    let n = nodes.len();
    let mut entries = vec![vec![0.0; n]; n];
    for j in 0..n {
        // p_j in powers of (x - t): multiply out (y + (t - x_k)), y = x - t
        let mut c = vec![1.0];
        for (k, &xk) in nodes.iter().enumerate() {
            if k == j {
                continue;
            }
            let s = t - xk;
            let mut next = vec![0.0; c.len() + 1];
            for (d, v) in c.iter().enumerate() {
                next[d + 1] += v;
                next[d] += s * v;
            }
            c = next;
        }
        // c[d] is the coefficient of y^d; row i holds y^{n-1-i}
        for (i, row) in entries.iter_mut().enumerate() {
            row[j] = c[n - 1 - i];
        }
    }
    Ok(BasisChangeMatrix {
        t,
        nodes: nodes.to_vec(),
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub nodes: Vec<f64>,
    pub x0: Option<f64>,
    pub quad_order: usize,
    /// Loewner or Kraus matrix.
    pub lhs: Vec<Vec<f64>>,
    /// The integral.
    pub rhs: Vec<Vec<f64>>,
    /// Largest entrywise `|lhs - rhs| / |lhs|`, the denominator floored at
    /// `1e-12` times the largest entry of `lhs`.
    pub max_rel_error: f64,
}

fn max_rel_error(lhs: &[Vec<f64>], rhs: &[Vec<f64>]) -> f64 {
    let norm = lhs.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (1e-12 * norm).max(f64::MIN_POSITIVE);
    lhs.iter()
        .flatten()
        .zip(rhs.iter().flatten())
        .map(|(l, r)| (l - r).abs() / l.abs().max(floor))
        .fold(0.0, f64::max)
}

/// `∫ Cᵀ H(t) C w(t) dt` with `H(t)_{kl} = f^{(k+l+shift-1)}(t) / (k+l+shift-1)!`
/// (`1 <= k, l <= n`) and `w` the Peano weight of `knots`, by Gauss–Legendre
/// on each piece of `w`.
fn integrate(f: &FunctionModel, nodes: &[f64], knots: &[f64], shift: usize, quad_order: usize) -> Result<Vec<Vec<f64>>> {
    if quad_order == 0 {
        return Err(invalid("quad_order must be positive"));
    }
    let n = nodes.len();
    let w = peano_weight(&NodeMultiset::new(knots)?)?;
    let rule = GaussLegendre::<f64>::new(quad_order);
    let mut acc = vec![vec![0.0; n]; n];
    for piece in w.breakpoints().windows(2) {
        let (half, mid) = ((piece[1] - piece[0]) / 2.0, (piece[0] + piece[1]) / 2.0);
        for (x, gw) in rule.nodes.iter().zip(&rule.weights) {
            let t = mid + half * x;
            let weight = w.eval(&t);
            if weight == 0.0 {
                continue;
            }
            let taylor = f.taylor(&t, 2 * n + shift)?;
            let h: Vec<Vec<f64>> = (0..n)
                .map(|k| (0..n).map(|l| taylor[k + l + 1 + shift]).collect())
                .collect();
            let m = basis_change_matrix(t, nodes)?.congruence(&h);
            for i in 0..n {
                for j in 0..n {
                    acc[i][j] += gw * half * weight * m[i][j];
                }
            }
        }
    }
    Ok(acc)
}

/// Loewner matrix against `∫ Cᵀ M(t) C w(t; x_1, x_1, ..., x_n, x_n) dt`.
pub fn verify_monotone_identity(f: &FunctionModel, nodes: &[f64], quad_order: usize) -> Result<IdentityReport> {
    check_distinct(nodes)?;
    let lhs = loewner_matrix(f, nodes)?.real_rows();
    let knots: Vec<f64> = nodes.iter().flat_map(|&x| [x, x]).collect();
    let rhs = if nodes.len() == 1 {
        // the single knot pair has no support: [x, x]_f = f'(x) directly
        vec![vec![f.deriv(1, &nodes[0])?]]
    } else {
        integrate(f, nodes, &knots, 0, quad_order)?
    };
    Ok(IdentityReport {
        nodes: nodes.to_vec(),
        x0: None,
        quad_order,
        max_rel_error: max_rel_error(&lhs, &rhs),
        lhs,
        rhs,
    })
}

/// Kraus matrix against `∫ Cᵀ K(t) C w(t; x_0, x_1, x_1, ..., x_n, x_n) dt`.
pub fn verify_convex_identity(f: &FunctionModel, nodes: &[f64], x0: f64, quad_order: usize) -> Result<IdentityReport> {
    check_distinct(nodes)?;
    if !x0.is_finite() {
        return Err(invalid("x0 must be finite"));
    }
    let lhs = kraus_matrix(f, nodes, x0)?.real_rows();
    let mut knots = vec![x0];
    knots.extend(nodes.iter().flat_map(|&x| [x, x]));
    let rhs = if nodes.len() == 1 && nodes[0] == x0 {
        vec![vec![f.deriv(2, &x0)? / 2.0]]
    } else {
        integrate(f, nodes, &knots, 1, quad_order)?
    };
    Ok(IdentityReport {
        nodes: nodes.to_vec(),
        x0: Some(x0),
        quad_order,
        max_rel_error: max_rel_error(&lhs, &rhs),
        lhs,
        rhs,
    })
}

#[cfg(test)]
mod tests;
