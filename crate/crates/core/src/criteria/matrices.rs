//! Criterion matrices. Entries are divided differences of `f`, so
//! confluent entries come from symbolic derivatives.

use crate::divdiff::{divided_difference_in, NodeMultiset};
use crate::error::{invalid, Result};
use crate::expr::FunctionModel;
use crate::linalg::HermitianMatrix;
use crate::scalar::{Ext, Precision, PrecisionPolicy, Scalar};

// Matrix entries are compared against an absolute PSD tolerance, so under
// `Auto` an entry whose rounding bound exceeds this is recomputed extended.
const ENTRY_ERROR: f64 = 1e-12;

fn check_distinct(nodes: &[f64]) -> Result<()> {
    if nodes.is_empty() {
        return Err(invalid("need at least one node"));
    }
    let mut v = nodes.to_vec();
    v.sort_by(f64::total_cmp);
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("nodes must be pairwise distinct"));
    }
    Ok(())
}

fn dd(f: &FunctionModel, values: &[f64], precision: Precision) -> Result<f64> {
    let ms = NodeMultiset::new(values)?;
    let ext = || Ok(divided_difference_in::<Ext>(f, &ms)?.value.to_f64());
    match ms.precision(precision, &PrecisionPolicy::default()) {
        Precision::Extended => ext(),
        _ => {
            let d = divided_difference_in::<f64>(f, &ms)?;
            if precision == Precision::Auto && 64.0 * f64::EPSILON * d.scale > ENTRY_ERROR {
                ext()
            } else {
                Ok(d.value)
            }
        }
    }
}

fn symmetric(n: usize, mut entry: impl FnMut(usize, usize) -> Result<f64>) -> Result<HermitianMatrix> {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = entry(i, j)?;
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    HermitianMatrix::from_real_rows(&rows)
}

/// `([x_i, x_j]_f)`, diagonal `f'(x_i)`.
pub fn loewner_matrix(f: &FunctionModel, nodes: &[f64]) -> Result<HermitianMatrix> {
    loewner_matrix_with(f, nodes, Precision::Auto)
}

pub fn loewner_matrix_with(f: &FunctionModel, nodes: &[f64], precision: Precision) -> Result<HermitianMatrix> {
    check_distinct(nodes)?;
    symmetric(nodes.len(), |i, j| dd(f, &[nodes[i], nodes[j]], precision))
}

/// `([x_1..x_i, x_1..x_j]_f)`.
pub fn extended_loewner_matrix(f: &FunctionModel, nodes: &[f64]) -> Result<HermitianMatrix> {
    extended_loewner_matrix_with(f, nodes, Precision::Auto)
}

pub fn extended_loewner_matrix_with(f: &FunctionModel, nodes: &[f64], precision: Precision) -> Result<HermitianMatrix> {
    check_distinct(nodes)?;
    symmetric(nodes.len(), |i, j| {
        let mut v = nodes[..=i].to_vec();
        v.extend_from_slice(&nodes[..=j]);
        dd(f, &v, precision)
    })
}

/// `([x_i, x_j, base]_f)`.
pub fn kraus_matrix(f: &FunctionModel, nodes: &[f64], base: f64) -> Result<HermitianMatrix> {
    kraus_matrix_with(f, nodes, base, Precision::Auto)
}

pub fn kraus_matrix_with(f: &FunctionModel, nodes: &[f64], base: f64, precision: Precision) -> Result<HermitianMatrix> {
    check_distinct(nodes)?;
    symmetric(nodes.len(), |i, j| dd(f, &[nodes[i], nodes[j], base], precision))
}

fn taylor_hankel(f: &FunctionModel, t: f64, n: usize, shift: usize, precision: Precision) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(invalid("order must be positive"));
    }
    // f^(k)(t)/k! is the divided difference at k+1 copies of t
    let coeffs: Vec<f64> = (0..2 * n + shift)
        .map(|k| {
            if k < shift + 1 {
                return Ok(0.0);
            }
            dd(f, &vec![t; k + 1], precision)
        })
        .collect::<Result<_>>()?;
    symmetric(n, |i, j| Ok(coeffs[i + j + shift + 1]))
}

/// `(f^(i+j-1)(t) / (i+j-1)!)`, `1 <= i, j <= n`.
pub fn dobsch_matrix(f: &FunctionModel, t: f64, n: usize) -> Result<HermitianMatrix> {
    taylor_hankel(f, t, n, 0, Precision::Auto)
}

pub fn dobsch_matrix_with(f: &FunctionModel, t: f64, n: usize, precision: Precision) -> Result<HermitianMatrix> {
    taylor_hankel(f, t, n, 0, precision)
}

/// `(f^(i+j)(t) / (i+j)!)`, `1 <= i, j <= n`.
pub fn hankel_convex_matrix(f: &FunctionModel, t: f64, n: usize) -> Result<HermitianMatrix> {
    taylor_hankel(f, t, n, 1, Precision::Auto)
}

pub fn hankel_convex_matrix_with(f: &FunctionModel, t: f64, n: usize, precision: Precision) -> Result<HermitianMatrix> {
    taylor_hankel(f, t, n, 1, precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, is_psd};
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    fn m(src: &str) -> FunctionModel {
        FunctionModel::parse(src, None).unwrap()
    }

    fn assert_rows(h: &HermitianMatrix, want: &[&[f64]], tol: f64) {
        for (i, r) in want.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                assert!((h.get(i, j).re - v).abs() <= tol, "({i},{j}): {} vs {v}", h.get(i, j).re);
            }
        }
    }

    #[test]
    fn loewner_examples() {
        let l = loewner_matrix(&m("-1/x"), &[1.0, 2.0]).unwrap();
        assert_rows(&l, &[&[1.0, 0.5], &[0.5, 0.25]], 1e-15);
        assert!(is_psd(&l, 1e-12));
        assert!(eigh(&l).min().abs() < 1e-15);
        let l = loewner_matrix(&m("x"), &[0.3, 1.0, 2.5]).unwrap();
        assert_rows(&l, &[&[1.0; 3], &[1.0; 3], &[1.0; 3]], 1e-15);
        // one configuration never certifies: x^3 passes here
        let l = loewner_matrix(&m("x^3"), &[-1.0, 1.0]).unwrap();
        assert_rows(&l, &[&[3.0, 1.0], &[1.0, 3.0]], 1e-15);
        assert!(is_psd(&l, 1e-12));
        assert!(loewner_matrix(&m("x"), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn extended_loewner_examples() {
        let l = extended_loewner_matrix(&m("-1/x"), &[1.0, 2.0]).unwrap();
        assert_rows(&l, &[&[1.0, -0.5], &[-0.5, 0.25]], 1e-15);
        assert!(is_psd(&l, 1e-12));
        let l = extended_loewner_matrix(&m("x"), &[0.5, 1.0, 3.0]).unwrap();
        assert_rows(&l, &[&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]], 1e-15);
        let l = extended_loewner_matrix(&m("x^2"), &[0.0, 1.0]).unwrap();
        assert_rows(&l, &[&[0.0, 1.0], &[1.0, 0.0]], 1e-15);
        assert!(!is_psd(&l, 1e-9));
    }

    #[test]
    fn dobsch_examples() {
        for t in [0.2, 1.0, 3.0] {
            let d = dobsch_matrix(&m("x^2"), t, 2).unwrap();
            assert_rows(&d, &[&[2.0 * t, 1.0], &[1.0, 0.0]], 1e-14);
            let e = eigh(&d);
            assert!((e.values[0] * e.values[1] + 1.0).abs() < 1e-13);
        }
        let d = dobsch_matrix(&m("-1/x"), 1.0, 2).unwrap();
        assert_rows(&d, &[&[1.0, -1.0], &[-1.0, 1.0]], 1e-15);
        assert!(is_psd(&d, 1e-12));
        let d = dobsch_matrix(&m("x"), 0.7, 3).unwrap();
        assert_rows(&d, &[&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]], 1e-15);
    }

    #[test]
    fn kraus_examples() {
        let k = kraus_matrix(&m("x^2"), &[0.1, 0.5, 2.0], 1.3).unwrap();
        assert_rows(&k, &[&[1.0; 3], &[1.0; 3], &[1.0; 3]], 1e-14);
        let k = kraus_matrix(&m("x^3"), &[0.0, 1.0], 0.0).unwrap();
        assert_rows(&k, &[&[0.0, 1.0], &[1.0, 2.0]], 1e-15);
        let e = eigh(&k);
        assert!((e.values[0] * e.values[1] + 1.0).abs() < 1e-14);
        let k = kraus_matrix(&m("x"), &[0.0, 1.0], 0.5).unwrap();
        assert_rows(&k, &[&[0.0, 0.0], &[0.0, 0.0]], 1e-15);
    }

    #[test]
    fn hankel_examples() {
        let h = hankel_convex_matrix(&m("x^2"), 0.4, 2).unwrap();
        assert_rows(&h, &[&[1.0, 0.0], &[0.0, 0.0]], 1e-15);
        for t in [-1.0, 0.5, 2.0] {
            let h = hankel_convex_matrix(&m("x^4"), t, 2).unwrap();
            assert_rows(&h, &[&[6.0 * t * t, 4.0 * t], &[4.0 * t, 1.0]], 1e-13);
            let e = eigh(&h);
            assert!((e.values[0] * e.values[1] + 10.0 * t * t).abs() < 1e-12);
        }
    }

    // Entries of the exp Hankel matrix at 0 are 1/2, 1/6, 1/24; the exact
    // determinant is 1/48 - 1/36 = -1/144, so exp is not 2-convex.
    #[test]
    fn exp_hankel_determinant_is_negative() {
        let h = hankel_convex_matrix(&m("exp(x)"), 0.0, 2).unwrap();
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let (a, b, d) = (r(1, 2), r(1, 6), r(1, 24));
        assert_rows(&h, &[&[0.5, 1.0 / 6.0], &[1.0 / 6.0, 1.0 / 24.0]], 1e-15);
        let det = &a * &d - &b * &b;
        assert_eq!(det, r(-1, 144));
        assert!(det < BigRational::zero());
        assert!(!is_psd(&h, 1e-9));
        // the same oracle for the Dobsch matrix: 1/6 - 1/4 < 0
        let one = BigRational::one();
        let dob = &one * &r(1, 6) - r(1, 2) * r(1, 2);
        assert_eq!(dob, r(-1, 12));
        assert!(!is_psd(&dobsch_matrix(&m("exp(x)"), 0.0, 2).unwrap(), 1e-9));
    }
}
