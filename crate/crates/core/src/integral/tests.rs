use super::*;
use crate::error::Error;
use proptest::prelude::*;

fn model(src: &str) -> FunctionModel {
    FunctionModel::parse(src, None).unwrap()
}

fn distinct_nodes(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n).prop_filter_map("close nodes", |mut v| {
        v.sort_by(f64::total_cmp);
        v.windows(2).all(|w| w[1] - w[0] > 0.05).then_some(v)
    })
}

#[test]
fn basis_change_examples() {
    let c = basis_change_matrix(0.3, &[1.7]).unwrap();
    assert_eq!(c.entries, [[1.0]]);
    let (t, x1, x2) = (0.4, -1.0, 2.5);
    let c = basis_change_matrix(t, &[x1, x2]).unwrap();
    assert_eq!(c.entries, [[1.0, 1.0], [t - x2, t - x1]]);
    assert!(c.identity_error(&[-3.0, 0.0, 1.0]) < 1e-15);
    assert!(basis_change_matrix(0.0, &[1.0, 1.0]).is_err());
    assert!(basis_change_matrix(0.0, &[]).is_err());
}

#[test]
fn monotone_identity_examples() {
    let r = verify_monotone_identity(&model("x^3"), &[1.0, 2.0], DEFAULT_QUAD_ORDER).unwrap();
    assert!(r.max_rel_error <= 1e-12, "{}", r.max_rel_error);
    let r = verify_monotone_identity(&model("exp(x)"), &[0.0, 0.7, 1.3], 20).unwrap();
    assert!(r.max_rel_error <= 1e-8, "{}", r.max_rel_error);
    let r = verify_monotone_identity(&model("-1/x"), &[1.0, 2.0], DEFAULT_QUAD_ORDER).unwrap();
    assert!(r.max_rel_error <= 1e-8, "{}", r.max_rel_error);
    // [x_i, x_j]_{x^3} = x_i^2 + x_i x_j + x_j^2
    assert_eq!(r.nodes, [1.0, 2.0]);
    let cube = verify_monotone_identity(&model("x^3"), &[1.0, 2.0], 4).unwrap();
    assert!((cube.rhs[0][1] - 7.0).abs() < 1e-12);
    let single = verify_monotone_identity(&model("x^3"), &[2.0], 4).unwrap();
    assert_eq!(single.rhs, [[12.0]]);
}

#[test]
fn convex_identity_examples() {
    let r = verify_convex_identity(&model("x^4"), &[0.5, 1.5], 1.0, DEFAULT_QUAD_ORDER).unwrap();
    assert!(r.max_rel_error <= 1e-12, "{}", r.max_rel_error);
    let r = verify_convex_identity(&model("x^4"), &[-1.0, 0.5], 2.0, DEFAULT_QUAD_ORDER).unwrap();
    assert!(r.max_rel_error <= 1e-12, "{}", r.max_rel_error);
    let r = verify_convex_identity(&model("exp(x)"), &[0.0, 1.0], 0.4, DEFAULT_QUAD_ORDER).unwrap();
    assert!(r.max_rel_error <= 1e-8, "{}", r.max_rel_error);
    let sq = model("x^2");
    for nodes in [vec![0.3], vec![-1.0, 2.0], vec![0.0, 0.4, 1.1], vec![-2.0, -0.5, 0.2, 3.0]] {
        for x0 in [-3.0, 0.25, nodes[0], 5.0] {
            let r = verify_convex_identity(&sq, &nodes, x0, DEFAULT_QUAD_ORDER).unwrap();
            for row in &r.rhs {
                for v in row {
                    assert!((v - 1.0).abs() <= 1e-10, "{nodes:?} {x0} {v}");
                }
            }
        }
    }
}

#[test]
fn quadrature_converges() {
    let f = model("exp(x)");
    let errs: Vec<f64> = [1, 2, 4, 8, 16]
        .iter()
        .map(|&q| verify_monotone_identity(&f, &[0.0, 0.7, 1.3], q).unwrap().max_rel_error)
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] || w[1] < 1e-13, "{errs:?}");
    }
    assert!(errs[4] < 1e-12);
}

#[test]
fn doubled_weight_support() {
    let nodes = [-0.5, 0.2, 1.0, 1.4];
    let w = peano_weight(&NodeMultiset::doubled(&nodes).unwrap()).unwrap();
    assert_eq!(w.support(), (-0.5, 1.4));
    for i in 0..=400 {
        let t = -1.0 + 3.0 * i as f64 / 400.0;
        let v = w.eval(&t);
        if t < -0.5 || t > 1.4 {
            assert_eq!(v, 0.0);
        } else {
            assert!(v >= 0.0, "{t}");
        }
    }
    assert!(w.grid_min(32) >= 0.0);
}

#[test]
fn errors() {
    let f = model("exp(x)");
    assert!(verify_monotone_identity(&f, &[1.0, 1.0], 8).is_err());
    assert!(verify_monotone_identity(&f, &[0.0, 1.0], 0).is_err());
    assert!(verify_convex_identity(&f, &[0.0, 1.0], f64::NAN, 8).is_err());
    let short = model("exp(x)").limit_order(2);
    assert!(matches!(
        verify_monotone_identity(&short, &[0.0, 1.0], 8),
        Err(Error::DerivativeUnavailable { .. })
    ));
}

// monomial coefficients of ∏ (x - r), lowest first
fn from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (d, v) in c.iter().enumerate() {
            next[d + 1] += v;
            next[d] -= r * v;
        }
        c = next;
    }
    c
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

// P^{(k)}(t)
fn deriv_at(p: &[f64], k: usize, t: f64) -> f64 {
    p.iter()
        .enumerate()
        .skip(k)
        .map(|(d, c)| c * ((d - k + 1)..=d).map(|v| v as f64).product::<f64>() * t.powi((d - k) as i32))
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_change_identity(nodes in distinct_nodes(3), t in -3.0f64..3.0, xs in prop::collection::vec(-3.0f64..3.0, 4)) {
        let c = basis_change_matrix(t, &nodes).unwrap();
        prop_assert!(c.identity_error(&xs) <= 1e-11);
    }

    // (Cᵀ M C)_{ij} = (exp · p_i p_j)^{(2n-1)}(t) / (2n-1)!, by Leibniz
    #[test]
    fn inner_identity(nodes in distinct_nodes(3), t in -2.0f64..2.0) {
        let n = nodes.len();
        let m = 2 * n - 1;
        let f = model("exp(x)");
        let taylor = f.taylor(&t, 2 * n).unwrap();
        let h: Vec<Vec<f64>> = (0..n).map(|k| (0..n).map(|l| taylor[k + l + 1]).collect()).collect();
        let got = basis_change_matrix(t, &nodes).unwrap().congruence(&h);
        let mut binom = vec![1.0f64; m + 1];
        for k in 1..=m {
            binom[k] = binom[k - 1] * (m + 1 - k) as f64 / k as f64;
        }
        let fact: f64 = (1..=m).map(|v| v as f64).product();
        for i in 0..n {
            for j in 0..n {
                let others = |s: usize| -> Vec<f64> {
                    nodes.iter().enumerate().filter(|(k, _)| *k != s).map(|(_, x)| *x).collect()
                };
                let p = mul(&from_roots(&others(i)), &from_roots(&others(j)));
                let want = t.exp() * (0..=m).map(|k| binom[k] * deriv_at(&p, k, t)).sum::<f64>() / fact;
                prop_assert!((got[i][j] - want).abs() <= 1e-8 * (1.0 + want.abs()), "{} vs {}", got[i][j], want);
            }
        }
    }

    #[test]
    fn identities_hold_for_random_nodes(nodes in distinct_nodes(2), x0 in -2.5f64..2.5) {
        let f = model("exp(x)");
        prop_assert!(verify_monotone_identity(&f, &nodes, 20).unwrap().max_rel_error <= 1e-9);
        prop_assert!(verify_convex_identity(&f, &nodes, x0, 20).unwrap().max_rel_error <= 1e-9);
    }
}
