//! Peano weights: normalized B-splines with the node multiset as knots.

use serde::{Deserialize, Serialize};

use super::NodeMultiset;
use crate::error::{invalid, Result};
use crate::expr::FunctionModel;
use crate::quad::GaussLegendre;
use crate::scalar::Scalar;

/// Piecewise polynomial, zero outside `[breaks[0], breaks[last]]`. Piece `i`
/// lives on `[breaks[i], breaks[i+1]]` and stores ascending coefficients in
/// the local variable `t - breaks[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly<S> {
    breaks: Vec<S>,
    pieces: Vec<Vec<S>>,
}

impl<S: Scalar> PiecewisePoly<S> {
    pub fn new(breaks: Vec<S>, pieces: Vec<Vec<S>>) -> Result<Self> {
        if breaks.len() < 2 || pieces.len() + 1 != breaks.len() {
            return Err(invalid("piecewise polynomial needs one piece per break interval"));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("breakpoints must increase strictly"));
        }
        Ok(Self { breaks, pieces })
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Vec<S>] {
        &self.pieces
    }

    pub fn support(&self) -> (S, S) {
        (self.breaks[0].clone(), self.breaks[self.breaks.len() - 1].clone())
    }

    /// Right-continuous, except at the right end of the support, where the
    /// last piece is used.
    pub fn eval(&self, t: &S) -> S {
        let (lo, hi) = self.support();
        if *t < lo || *t > hi {
            return S::zero();
        }
        let i = self.breaks[1..self.breaks.len() - 1]
            .iter()
            .take_while(|b| *b <= t)
            .count();
        horner(&self.pieces[i], &(t.clone() - self.breaks[i].clone()))
    }

    /// Exact integral over the support.
    pub fn integral(&self) -> S {
        let mut acc = S::zero();
        for (i, c) in self.pieces.iter().enumerate() {
            let h = self.breaks[i + 1].clone() - self.breaks[i].clone();
            let mut hp = h;
            for (j, cj) in c.iter().enumerate() {
                acc = acc + cj.clone() * hp.clone() / S::from_usize(j + 1);
                hp = hp * (self.breaks[i + 1].clone() - self.breaks[i].clone());
            }
        }
        acc
    }

    /// `∫ g · self` with `points`-point Gauss–Legendre on every piece.
    pub fn integrate_against<F>(&self, points: usize, mut g: F) -> Result<S>
    where
        F: FnMut(&S) -> Result<S>,
    {
        let rule = GaussLegendre::<S>::new(points);
        let mut acc = S::zero();
        let mut err = None;
        for (i, c) in self.pieces.iter().enumerate() {
            let a = &self.breaks[i];
            let v = rule.integrate(a, &self.breaks[i + 1], |t| match g(t) {
                Ok(gv) => gv * horner(c, &(t.clone() - a.clone())),
                Err(e) => {
                    err.get_or_insert(e);
                    S::zero()
                }
            });
            acc = acc + v;
        }
        match err {
            Some(e) => Err(e),
            None => Ok(acc),
        }
    }

    /// Smallest value over a uniform grid of `per_piece` points per piece.
    pub fn grid_min(&self, per_piece: usize) -> S {
        let mut m: Option<S> = None;
        for (i, c) in self.pieces.iter().enumerate() {
            let h = self.breaks[i + 1].clone() - self.breaks[i].clone();
            for j in 0..=per_piece {
                let v = horner(c, &(h.clone() * S::from_usize(j) / S::from_usize(per_piece)));
                m = Some(match m {
                    Some(m) if m < v => m,
                    _ => v,
                });
            }
        }
        m.unwrap_or_else(S::zero)
    }

    pub fn to_f64(&self) -> PiecewisePoly<f64> {
        PiecewisePoly {
            breaks: self.breaks.iter().map(S::to_f64).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| p.iter().map(S::to_f64).collect())
                .collect(),
        }
    }
}

fn horner<S: Scalar>(c: &[S], s: &S) -> S {
    c.iter().rev().fold(S::zero(), |acc, v| acc * s.clone() + v.clone())
}

// Small dense polynomial helpers on ascending coefficient vectors.
fn poly_add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(S::zero);
            let y = b.get(i).cloned().unwrap_or_else(S::zero);
            x + y
        })
        .collect()
}

// (c0 + c1 s) * p
fn poly_mul_linear<S: Scalar>(p: &[S], c0: &S, c1: &S) -> Vec<S> {
    let mut out = vec![S::zero(); p.len() + 1];
    for (i, v) in p.iter().enumerate() {
        out[i] = out[i].clone() + c0.clone() * v.clone();
        out[i + 1] = out[i + 1].clone() + c1.clone() * v.clone();
    }
    out
}

/// Weight `w` with `[nodes]_f = ∫ f^(n)(t)/n! w(t) dt`, where `n` is the
/// order of `nodes`: `w = n/(x_n - x_0) · B`, with `B` the degree `n-1`
/// B-spline on the knots `nodes`, so that `∫ w = 1`.
pub fn peano_weight_in<S: Scalar>(nodes: &NodeMultiset) -> Result<PiecewisePoly<S>> {
    let n = nodes.order();
    if n == 0 || nodes.lo() == nodes.hi() {
        return Err(invalid("Peano weight needs nodes spanning a nondegenerate interval"));
    }
    let knots: Vec<S> = nodes.flat().into_iter().map(S::from_f64).collect();
    let breaks: Vec<S> = nodes.pairs().iter().map(|&(x, _)| S::from_f64(x)).collect();
    let scale = S::from_usize(n) / (knots[n].clone() - knots[0].clone());
    let mut pieces = Vec::with_capacity(breaks.len() - 1);
    for p in 0..breaks.len() - 1 {
        let u = breaks[p].clone();
        // degree-0 basis on this piece: only knot spans equal to [u_p, u_{p+1})
        let mut basis: Vec<Vec<S>> = (0..n)
            .map(|j| {
                if knots[j] == breaks[p] && knots[j + 1] == breaks[p + 1] {
                    vec![S::one()]
                } else {
                    vec![S::zero()]
                }
            })
            .collect();
        for d in 1..n {
            let mut next = Vec::with_capacity(n - d);
            for j in 0..n - d {
                let mut acc = vec![S::zero()];
                let den_l = knots[j + d].clone() - knots[j].clone();
                if !den_l.is_zero() {
                    // (t - t_j)/den = (s + u - t_j)/den
                    let c0 = (u.clone() - knots[j].clone()) / den_l.clone();
                    let c1 = S::one() / den_l;
                    acc = poly_add(&acc, &poly_mul_linear(&basis[j], &c0, &c1));
                }
                let den_r = knots[j + d + 1].clone() - knots[j + 1].clone();
                if !den_r.is_zero() {
                    // (t_{j+d+1} - t)/den = (t_{j+d+1} - u - s)/den
                    let c0 = (knots[j + d + 1].clone() - u.clone()) / den_r.clone();
                    let c1 = -(S::one() / den_r);
                    acc = poly_add(&acc, &poly_mul_linear(&basis[j + 1], &c0, &c1));
                }
                next.push(acc);
            }
            basis = next;
        }
        let mut piece: Vec<S> = basis.swap_remove(0).into_iter().map(|c| c * scale.clone()).collect();
        piece.resize(n, S::zero());
        pieces.push(piece);
    }
    PiecewisePoly::new(breaks, pieces)
}

/// [`peano_weight_in`] in double precision.
pub fn peano_weight(nodes: &NodeMultiset) -> Result<PiecewisePoly<f64>> {
    peano_weight_in(nodes)
}

/// `∫ f^(n)/n! · w` for the Peano weight of `nodes`; equals `[nodes]_f`.
pub fn peano_quadrature<S: Scalar>(f: &FunctionModel, nodes: &NodeMultiset, points: usize) -> Result<S> {
    let n = nodes.order();
    let w = peano_weight_in::<S>(nodes)?;
    let fact = (1..=n).fold(S::one(), |a, k| a * S::from_usize(k));
    let v = w.integrate_against(points, |t| f.deriv(n, t))?;
    Ok(v / fact)
}
