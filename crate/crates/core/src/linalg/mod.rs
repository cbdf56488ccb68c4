//! Small dense Hermitian linear algebra.

mod oracle;
mod pairs;

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::expr::FunctionModel;

pub use oracle::{monotonicity_oracle, OracleConfig, OracleVerdict, OracleWitness};
pub use pairs::{make_projection_pair, rank_one_chain, ProjectionPair};

/// Default PSD tolerance, relative to `max(1, ‖H‖)`.
pub const PSD_TOL: f64 = 1e-9;

const HERMITIAN_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Square complex matrix, column-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![c(0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c(1.0);
        }
        m
    }

    /// From rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("matrix must be square and nonempty"));
        }
        let mut m = Self::zeros(dim);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self[(j, i)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `self * diag(d) * self^*`.
    pub fn congruence_diag(&self, d: &[f64]) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for j in 0..n {
            for i in 0..n {
                let mut acc = c(0.0);
                for (k, dk) in d.iter().enumerate() {
                    acc += self[(i, k)] * dk * self[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[j * self.dim + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[j * self.dim + i]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for j in 0..n {
            for k in 0..n {
                let b = rhs[(k, j)];
                if b == c(0.0) {
                    continue;
                }
                for i in 0..n {
                    out.data[j * n + i] += self.data[k * n + i] * b;
                }
            }
        }
        out
    }
}

/// Hermitian matrix; the constructor checks the symmetry and then
/// symmetrizes exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct HermitianMatrix(Matrix);

impl TryFrom<Matrix> for HermitianMatrix {
    type Error = Error;
    fn try_from(m: Matrix) -> Result<Self> {
        HermitianMatrix::new(m)
    }
}

impl From<HermitianMatrix> for Matrix {
    fn from(h: HermitianMatrix) -> Matrix {
        h.0
    }
}

impl HermitianMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        let scale = m.max_abs().max(f64::MIN_POSITIVE);
        let n = m.dim;
        for i in 0..n {
            for j in i..n {
                let d = (m[(i, j)] - m[(j, i)].conj()).norm();
                if d > HERMITIAN_TOL * scale {
                    return Err(invalid(format!(
                        "matrix is not Hermitian: entries ({i},{j}) and ({j},{i}) differ by {d:e}"
                    )));
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// Replaces `m` by `(m + m^*)/2` without checking.
    pub fn symmetrized(m: Matrix) -> Self {
        let n = m.dim;
        let mut out = m.clone();
        for i in 0..n {
            out[(i, i)] = c(m[(i, i)].re);
            for j in i + 1..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        HermitianMatrix(out)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(|v| c(*v)).collect()).collect();
        Self::new(Matrix::from_rows(&rows)?)
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = c(*v);
        }
        HermitianMatrix(m)
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(Matrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(Matrix::identity(dim))
    }

    /// `v v^*`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        Self::symmetrized(m)
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix(self.0.scale(s))
    }

    pub fn frobenius(&self) -> f64 {
        self.0.frobenius()
    }

    /// `U H U^*` for a unitary (or any square) `U`.
    pub fn conjugate_by(&self, u: &Matrix) -> Self {
        Self::symmetrized(&(u * &self.0) * &u.adjoint())
    }

    /// Real part of every entry, row by row.
    pub fn real_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.get(i, j).re).collect())
            .collect()
    }

    /// `u^* H u`.
    pub fn quadratic_form(&self, u: &[Complex64]) -> f64 {
        let hu = self.0.mul_vec(u);
        u.iter().zip(&hu).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl fmt::Display for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let real = self.0.data.iter().all(|z| z.im == 0.0);
        write!(f, "[")?;
        for i in 0..self.dim() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.dim() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                let z = self.get(i, j);
                if real {
                    write!(f, "{}", z.re)?;
                } else {
                    write!(f, "{}", z)?;
                }
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Eigendecomposition `H = U diag(values) U^*`, values ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl Eigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }
}

/// Cyclic Jacobi. Each rotation first removes the phase of the pivot so the
/// 2×2 subproblem is real symmetric.
pub fn eigh(h: &HermitianMatrix) -> Eigen {
    try_eigh(h).expect("Jacobi iteration on a Hermitian matrix converges")
}

pub fn try_eigh(h: &HermitianMatrix) -> Result<Eigen> {
    let n = h.dim();
    let mut a = h.0.clone();
    let mut u = Matrix::identity(n);
    let norm = a.frobenius();
    let target = 1e-13 * norm;
    let off = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > target {
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::NonConvergence(format!("Jacobi exceeded {MAX_SWEEPS} sweeps")));
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let mag = b.norm();
                if mag == 0.0 || mag <= 1e-300 {
                    continue;
                }
                let phase = b / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.0
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // G = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let gpp = c(cs);
                let gpq = c(sn);
                let gqp = -phase.conj() * sn;
                let gqq = phase.conj() * cs;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * gpp + akq * gqp;
                    a[(k, q)] = akp * gpq + akq * gqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                    a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                a[(p, q)] = c(0.0);
                a[(q, p)] = c(0.0);
                a[(p, p)] = c(a[(p, p)].re);
                a[(q, q)] = c(a[(q, q)].re);
                for k in 0..n {
                    let ukp = u[(k, p)];
                    let ukq = u[(k, q)];
                    u[(k, p)] = ukp * gpp + ukq * gqp;
                    u[(k, q)] = ukp * gpq + ukq * gqq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = Matrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new)] = u[(k, old)];
        }
    }
    Ok(Eigen { values, vectors })
}

/// `f(H) = U diag(f(λ)) U^*`.
pub fn matrix_function(f: &FunctionModel, h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = eigh(h);
    apply_spectral(f, &e)
}

pub(crate) fn apply_spectral(f: &FunctionModel, e: &Eigen) -> Result<HermitianMatrix> {
    let dom = f.domain();
    let mut fv = Vec::with_capacity(e.values.len());
    for &l in &e.values {
        if !dom.contains(l) {
            return Err(Error::Domain {
                op: "spectrum outside domain",
                x: l,
            });
        }
        fv.push(f.value(&l)?);
    }
    Ok(HermitianMatrix::symmetrized(e.vectors.congruence_diag(&fv)))
}

/// Outcome of a PSD test, with the quantities behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdCheck {
    pub psd: bool,
    pub min_eigenvalue: f64,
    pub norm: f64,
    pub tolerance: f64,
}

impl PsdCheck {
    /// Threshold actually applied: `-tol * max(1, ‖H‖)`.
    pub fn threshold(&self) -> f64 {
        -self.tolerance * self.norm.max(1.0)
    }
}

pub fn psd_check(h: &HermitianMatrix, tol: f64) -> PsdCheck {
    let e = eigh(h);
    let norm = e.norm();
    let min = e.min();
    PsdCheck {
        psd: min >= -tol * norm.max(1.0),
        min_eigenvalue: min,
        norm,
        tolerance: tol,
    }
}

/// `λ_min(H) >= -tol * max(1, ‖H‖)`.
pub fn is_psd(h: &HermitianMatrix, tol: f64) -> bool {
    psd_check(h, tol).psd
}

/// Unitary `exp(i K)` for Hermitian `K`.
pub fn unitary_exp(k: &HermitianMatrix) -> Matrix {
    let e = eigh(k);
    let n = k.dim();
    let mut out = Matrix::zeros(n);
    for j in 0..n {
        for i in 0..n {
            let mut acc = c(0.0);
            for m in 0..n {
                acc += e.vectors[(i, m)] * Complex64::from_polar(1.0, e.values[m]) * e.vectors[(j, m)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    out
}
