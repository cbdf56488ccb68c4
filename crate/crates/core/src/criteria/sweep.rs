//! Sampled sweeps behind each criterion.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    dobsch_matrix_with, extended_loewner_matrix_with, hankel_convex_matrix_with, kraus_matrix_with,
    loewner_matrix_with, CertifyConfig, MatrixKind, Witness,
};
use crate::divdiff::{ktone_check, NodeData, NodeMultiset, NodeSampler};
use crate::error::{invalid, Result};
use crate::expr::FunctionModel;
use crate::interval::Interval;
use crate::linalg::{eigh, psd_check, Eigen, HermitianMatrix};
use crate::mode::Mode;
use crate::polynomial::Poly;
use crate::scalar::{Ext, Precision, PrecisionPolicy, Scalar};

/// Where the polynomials `q` come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QFamily {
    /// Real coefficients: `N(q) = q^2`.
    Real,
    Complex,
}

/// Outcome of one configuration.
#[derive(Debug, Clone)]
pub(super) struct Outcome {
    score: f64,
    violated: bool,
    witness: Witness,
}

pub(super) struct Summary {
    pub configs: usize,
    pub violated: bool,
    pub worst_score: f64,
    pub worst: Option<Witness>,
    pub note: Option<String>,
}

impl Summary {
    fn from(outcomes: Vec<Outcome>, note: Option<String>) -> Self {
        let configs = outcomes.len();
        let violated = outcomes.iter().any(|o| o.violated);
        let mut worst: Option<Outcome> = None;
        for o in outcomes {
            if worst.as_ref().is_none_or(|w| o.score < w.score) {
                worst = Some(o);
            }
        }
        Summary {
            configs,
            violated,
            worst_score: worst.as_ref().map_or(0.0, |w| w.score),
            worst: worst.map(|w| w.witness),
            note,
        }
    }
}

/// `2n`, `2n+1`, ... point Chebyshev grid of the first kind, ascending.
pub fn chebyshev_grid(interval: Interval, points: usize) -> Vec<f64> {
    let w = interval.finite_window();
    let mid = 0.5 * (w.lo + w.hi);
    let half = 0.5 * w.length();
    (0..points)
        .map(|k| mid - half * (std::f64::consts::PI * (k as f64 + 0.5) / points as f64).cos())
        .collect()
}

fn binomial_power(center: f64, h: f64, s: usize) -> Vec<f64> {
    // ((x - center)/h)^s
    let mut c = vec![1.0];
    for _ in 0..s {
        let mut next = vec![0.0; c.len() + 1];
        for (k, v) in c.iter().enumerate() {
            next[k] -= v * center / h;
            next[k + 1] += v / h;
        }
        c = next;
    }
    c
}

fn centre_and_width(ms: &NodeMultiset) -> (f64, f64) {
    let (lo, hi) = (ms.lo(), ms.hi());
    let h = 0.5 * (hi - lo);
    (0.5 * (lo + hi), if h > 0.0 { h } else { 1.0 })
}

fn moments_in<S: Scalar>(data: &NodeData<S>, n: usize, center: f64, h: f64) -> Vec<Vec<f64>> {
    let m: Vec<f64> = (0..2 * n - 1)
        .map(|s| data.dd_times_poly(&binomial_power(center, h, s)).value.to_f64())
        .collect();
    (0..n).map(|i| (0..n).map(|j| m[i + j]).collect()).collect()
}

/// `H_{jk} = [nodes]_{f φ_j φ_k}` with `φ_j = ((x - c)/h)^j`, `c` and `h`
/// the centre and half-width of the nodes; `c^T H c = [nodes]_{f q^2}` for
/// `q = sum c_j φ_j`.
pub fn moment_matrix(f: &FunctionModel, nodes: &NodeMultiset, n: usize, precision: Precision) -> Result<Vec<Vec<f64>>> {
    let (c, h) = centre_and_width(nodes);
    Ok(match nodes.precision(precision, &PrecisionPolicy::default()) {
        Precision::Extended => moments_in(&NodeData::<Ext>::new(f, nodes)?, n, c, h),
        _ => moments_in(&NodeData::<f64>::new(f, nodes)?, n, c, h),
    })
}

pub(crate) fn basis_poly(coeffs: &[Complex64], center: f64, h: f64) -> Poly {
    let base = Poly::from_real(&[-center / h, 1.0 / h]);
    coeffs
        .iter()
        .rev()
        .fold(Poly::zero(), |acc, c| &(&acc * &base) + &Poly::constant(*c))
}

fn optimal_from_eigen(e: &Eigen, center: f64, width: f64) -> Poly {
    let v = e.vectors.column(0).to_vec();
    // fix the global phase so the largest component is real and positive
    let big = v.iter().cloned().fold(Complex64::new(0.0, 0.0), |a, z| if z.norm() > a.norm() { z } else { a });
    let phase = if big.norm() > 0.0 { big.conj() / big.norm() } else { Complex64::new(1.0, 0.0) };
    let coeffs: Vec<Complex64> = v.iter().map(|z| Complex64::new((z * phase).re, 0.0)).collect();
    basis_poly(&coeffs, center, width)
}

fn optimal_from_moments(h: &[Vec<f64>], center: f64, width: f64) -> Result<Poly> {
    Ok(optimal_from_eigen(&eigh(&HermitianMatrix::from_real_rows(h)?), center, width))
}

/// Coefficients of `q` in the centred basis: `q(c + h y) = sum a_j y^j`.
pub(crate) fn centred_coeffs(q: &Poly, center: f64, h: f64) -> Vec<Complex64> {
    let base = Poly::from_real(&[center, h]);
    q.coeffs()
        .iter()
        .rev()
        .fold(Poly::zero(), |acc, c| &(&acc * &base) + &Poly::constant(*c))
        .coeffs()
        .to_vec()
}

/// Bound on the rounding error of a sum whose terms have total magnitude
/// `scale`, computed with unit roundoff `eps`.
pub(crate) fn rounding_guard(eps: f64, scale: f64) -> f64 {
    64.0 * eps * scale
}

/// Real `q` of degree `< n` minimizing `[nodes]_{f q^2}` over unit
/// coefficient vectors in the centred basis: the eigenvector of the
/// smallest eigenvalue of [`moment_matrix`].
pub fn optimal_q(f: &FunctionModel, nodes: &NodeMultiset, n: usize, precision: Precision) -> Result<Poly> {
    let (c, h) = centre_and_width(nodes);
    optimal_from_moments(&moment_matrix(f, nodes, n, precision)?, c, h)
}

/// `([nodes]_{f N(q)}, scale)` at the precision the policy picks.
pub fn dd_value(f: &FunctionModel, nodes: &NodeMultiset, q: &Poly, precision: Precision) -> Result<(f64, f64)> {
    Ok(match nodes.precision(precision, &PrecisionPolicy::default()) {
        Precision::Extended => {
            let d = NodeData::<Ext>::new(f, nodes)?.dd_weighted(q);
            (d.value.to_f64(), d.scale.to_f64())
        }
        _ => {
            let d = NodeData::<f64>::new(f, nodes)?.dd_weighted(q);
            (d.value, d.scale)
        }
    })
}

fn gaussian_coeffs(n: usize, family: QFamily, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = match family {
                QFamily::Real => 0.0,
                QFamily::Complex => rng.sample(StandardNormal),
            };
            Complex64::new(re, im)
        })
        .collect()
}

fn dd_config_in<S: Scalar>(
    f: &FunctionModel,
    ms: &NodeMultiset,
    n: usize,
    family: QFamily,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<Outcome> {
    let data = NodeData::<S>::new(f, ms)?;
    let (center, width) = centre_and_width(ms);
    // tolerances are relative to the moment matrix, as for the matrix
    // criteria: [nodes]_{f N(q)} = a^* H a with a the centred coefficients
    let e = eigh(&HermitianMatrix::from_real_rows(&moments_in(&data, n, center, width))?);
    let unit = e.norm().max(1.0);
    let mut qs = vec![optimal_from_eigen(&e, center, width), Poly::one()];
    qs.push(basis_poly(&gaussian_coeffs(n, family, rng), center, width));
    if n > 1 {
        // roots at n-1 of the nodes: the choices that isolate single poles
        let distinct: Vec<f64> = ms.pairs().iter().map(|p| p.0).collect();
        let mut roots = Vec::with_capacity(n - 1);
        for _ in 0..n - 1 {
            let x = distinct[rng.random_range(0..distinct.len())];
            roots.push(Complex64::new(x, 0.0));
        }
        qs.push(Poly::from_roots(&roots));
        if family == QFamily::Complex {
            let shift = Complex64::new(0.0, width * rng.random_range(0.01..1.0));
            let shifted: Vec<Complex64> = roots.iter().map(|r| r + shift).collect();
            qs.push(Poly::from_roots(&shifted));
        }
    }
    let mut best: Option<Outcome> = None;
    for q in qs {
        let d = data.dd_weighted(&q);
        let (value, scale) = (d.value.to_f64(), d.scale.to_f64());
        let natural = unit * centred_coeffs(&q, center, width).iter().map(|z| z.norm_sqr()).sum::<f64>();
        let score = if natural > 0.0 { value / natural } else { 0.0 };
        if best.as_ref().is_none_or(|b| score < b.score) {
            best = Some(Outcome {
                score,
                violated: value < -(tol * natural + rounding_guard(S::epsilon(), scale)),
                witness: Witness::Divided {
                    nodes: ms.flat(),
                    q,
                    value,
                    scale,
                },
            });
        }
    }
    best.ok_or_else(|| invalid("no q candidates"))
}

fn matrix_outcome(
    m: HermitianMatrix,
    kind: MatrixKind,
    nodes: Vec<f64>,
    base: Option<f64>,
    t: Option<f64>,
    tol: f64,
) -> Outcome {
    let chk = psd_check(&m, tol);
    Outcome {
        score: chk.min_eigenvalue / chk.norm.max(1.0),
        violated: !chk.psd,
        witness: Witness::Matrix {
            matrix: kind,
            nodes,
            base,
            t,
            entries: m.real_rows(),
            value: chk.min_eigenvalue,
            norm: chk.norm,
        },
    }
}

pub(super) struct Runner<'a> {
    pub f: &'a FunctionModel,
    pub n: usize,
    pub interval: Interval,
    pub mode: Mode,
    pub config: &'a CertifyConfig,
    pub sampler: NodeSampler,
}

impl Runner<'_> {
    fn sweep<F>(&self, count: usize, eval: F) -> Result<Vec<Outcome>>
    where
        F: Fn(usize) -> Result<Outcome> + Sync,
    {
        (0..count).into_par_iter().map(&eval).collect()
    }

    fn distinct(&self, k: usize, i: usize) -> Vec<f64> {
        self.sampler.distinct(self.interval, k, i)
    }

    fn dd_config(&self, values: &[f64], family: QFamily, i: usize) -> Result<Outcome> {
        let ms = NodeMultiset::new(values)?;
        let mut rng = self.sampler.with_tag("q").rng(i);
        match ms.precision(self.config.precision, &self.config.policy) {
            Precision::Extended => dd_config_in::<Ext>(self.f, &ms, self.n, family, &mut rng, self.config.tol),
            _ => dd_config_in::<f64>(self.f, &ms, self.n, family, &mut rng, self.config.tol),
        }
    }

    // n doubled nodes, plus an extra node for the convex variants:
    // `Some(false)` repeats a node, `Some(true)` draws a free one.
    fn confluent_nodes(&self, i: usize, extra: Option<bool>) -> Vec<f64> {
        let n = self.n;
        match extra {
            None => self.distinct(n, i).into_iter().flat_map(|x| [x, x]).collect(),
            Some(false) => {
                let pts = self.distinct(n, i);
                let mut v: Vec<f64> = pts.iter().flat_map(|&x| [x, x]).collect();
                v.push(pts[i % n]);
                v
            }
            Some(true) => {
                let mut pts = self.distinct(n + 1, i);
                let x0 = pts.remove((i / 2) % (n + 1));
                let mut v: Vec<f64> = pts.iter().flat_map(|&x| [x, x]).collect();
                v.push(x0);
                v
            }
        }
    }

    fn regularity(&self) -> Result<(Vec<Outcome>, String)> {
        let k = match self.mode {
            Mode::Monotone => 2 * self.n - 1,
            Mode::Convex => 2 * self.n,
        };
        let r = ktone_check(
            self.f,
            k,
            self.interval,
            &self.sampler.with_tag("ktone"),
            self.config.configs,
            self.config.tol,
            self.config.precision,
        )?;
        let note = format!("{k}-tone scan over {} tuples: {}", r.configs, if r.pass { "pass" } else { "fail" });
        let out = match r.witness {
            Some(w) => vec![Outcome {
                score: r.worst,
                violated: true,
                witness: Witness::Ktone {
                    nodes: w.nodes,
                    value: w.value,
                    scale: w.scale,
                },
            }],
            None => Vec::new(),
        };
        Ok((out, note))
    }

    // Grid evaluation plus golden-section refinement around the lowest
    // local minima of the score.
    fn grid<F>(&self, eval: F) -> Result<Vec<Outcome>>
    where
        F: Fn(f64) -> Result<Outcome> + Sync,
    {
        let ts = chebyshev_grid(self.interval, self.config.grid.max(3));
        let mut outs: Vec<Outcome> = ts.par_iter().map(|&t| eval(t)).collect::<Result<_>>()?;
        let w = self.interval.finite_window();
        let mut minima: Vec<usize> = (0..ts.len())
            .filter(|&i| {
                let s = outs[i].score;
                (i == 0 || s <= outs[i - 1].score) && (i + 1 == ts.len() || s <= outs[i + 1].score)
            })
            .collect();
        minima.sort_by(|&a, &b| outs[a].score.total_cmp(&outs[b].score));
        minima.truncate(8);
        let extra: Vec<Vec<Outcome>> = minima
            .par_iter()
            .map(|&i| {
                let lo = if i == 0 { w.lo + 1e-9 * w.length() } else { ts[i - 1] };
                let hi = if i + 1 == ts.len() { w.hi - 1e-9 * w.length() } else { ts[i + 1] };
                golden(lo, hi, 30, &eval)
            })
            .collect::<Result<_>>()?;
        outs.extend(extra.into_iter().flatten());
        Ok(outs)
    }

    pub fn run(&self, id: &str) -> Result<Summary> {
        let (n, tol, prec) = (self.n, self.config.tol, self.config.precision);
        let count = self.config.configs;
        let arity = self.mode.arity(n);
        let f = self.f;
        let outs = match id {
            "dd-real" => self.sweep(count, |i| self.dd_config(&self.distinct(arity, i), QFamily::Real, i))?,
            "dd-complex" => self.sweep(count, |i| self.dd_config(&self.distinct(arity, i), QFamily::Complex, i))?,
            "dd-confluent" => self.sweep(count, |i| self.dd_config(&self.confluent_nodes(i, None), QFamily::Complex, i))?,
            "dd-confluent-base" => {
                self.sweep(count, |i| self.dd_config(&self.confluent_nodes(i, Some(false)), QFamily::Complex, i))?
            }
            "dd-confluent-free" => {
                self.sweep(count, |i| self.dd_config(&self.confluent_nodes(i, Some(true)), QFamily::Complex, i))?
            }
            "loewner" => self.sweep(count, |i| {
                let x = self.distinct(n, i);
                Ok(matrix_outcome(loewner_matrix_with(f, &x, prec)?, MatrixKind::Loewner, x, None, None, tol))
            })?,
            "extended-loewner" => self.sweep(count, |i| {
                let x = self.distinct(n, i);
                let m = extended_loewner_matrix_with(f, &x, prec)?;
                Ok(matrix_outcome(m, MatrixKind::ExtendedLoewner, x, None, None, tol))
            })?,
            "kraus-base" => self.sweep(count, |i| {
                let x = self.distinct(n, i);
                let base = x[i % n];
                Ok(matrix_outcome(kraus_matrix_with(f, &x, base, prec)?, MatrixKind::Kraus, x, Some(base), None, tol))
            })?,
            "kraus-free" => self.sweep(count, |i| {
                let mut x = self.distinct(n + 1, i);
                let base = x.remove((i / 2) % (n + 1));
                Ok(matrix_outcome(kraus_matrix_with(f, &x, base, prec)?, MatrixKind::Kraus, x, Some(base), None, tol))
            })?,
            "derivative" | "dobsch" | "hankel" => {
                let (mut outs, note) = self.regularity()?;
                let grid = match (id, self.mode) {
                    ("derivative", _) => self.grid(|t| self.dd_config(&vec![t; arity], QFamily::Complex, t.to_bits() as usize))?,
                    ("dobsch", Mode::Monotone) => self.grid(|t| {
                        Ok(matrix_outcome(dobsch_matrix_with(f, t, n, prec)?, MatrixKind::Dobsch, vec![], None, Some(t), tol))
                    })?,
                    ("hankel", Mode::Convex) => self.grid(|t| {
                        let m = hankel_convex_matrix_with(f, t, n, prec)?;
                        Ok(matrix_outcome(m, MatrixKind::Hankel, vec![], None, Some(t), tol))
                    })?,
                    _ => return Err(invalid(format!("criterion `{id}` does not apply in {} mode", self.mode))),
                };
                outs.extend(grid);
                return Ok(Summary::from(outs, Some(note)));
            }
            _ => return Err(invalid(format!("unknown criterion `{id}`"))),
        };
        Ok(Summary::from(outs, None))
    }
}

fn golden<F>(mut a: f64, mut b: f64, iters: usize, eval: &F) -> Result<Vec<Outcome>>
where
    F: Fn(f64) -> Result<Outcome>,
{
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut out = Vec::with_capacity(iters + 2);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..iters {
        if fc.score < fd.score {
            b = d;
            d = c;
            out.push(fd);
            fd = fc;
            c = b - r * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            out.push(fc);
            fc = fd;
            d = a + r * (b - a);
            fd = eval(d)?;
        }
    }
    out.push(fc);
    out.push(fd);
    Ok(out)
}
