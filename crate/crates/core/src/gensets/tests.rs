use super::*;
use crate::expr::catalog;
use crate::linalg::tests::arb_hermitian;
use num_rational::BigRational;
use proptest::prelude::*;

fn ff(points: &[f64], values: &[f64]) -> FiniteFunction {
    FiniteFunction::new(points.to_vec(), values.to_vec()).unwrap()
}

fn model(src: &str) -> FunctionModel {
    FunctionModel::parse(src, None).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn finite_function_validation_and_text() {
    assert!(FiniteFunction::new(vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
    assert!(FiniteFunction::new(vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
    assert!(FiniteFunction::new(vec![0.0], vec![]).is_err());
    let f = FiniteFunction::parse_text("# F and f\n2 0.5\n\n0 -1   # first\n1, 0\n").unwrap();
    assert_eq!(f.points(), &[0.0, 1.0, 2.0]);
    assert_eq!(f.values(), &[-1.0, 0.0, 0.5]);
    assert_eq!(FiniteFunction::parse_text(&f.to_text()).unwrap(), f);
    assert!(FiniteFunction::parse_text("1 2 3").is_err());
    assert!(FiniteFunction::parse_text("1 x").is_err());
    let json = serde_json::to_string(&f).unwrap();
    assert_eq!(serde_json::from_str::<FiniteFunction>(&json).unwrap(), f);
    assert!(serde_json::from_str::<FiniteFunction>(r#"{"points":[1,0],"values":[0,0]}"#).is_err());
    assert_eq!(f.value_at(2.0), Some(0.5));
    assert_eq!(f.value_at(1.5), None);
    assert!(f.with_point(1.0, 3.0).is_err());
    assert_eq!(f.with_point(1.5, 3.0).unwrap().points(), &[0.0, 1.0, 1.5, 2.0]);
}

#[test]
fn pathological_small_set() {
    let f = ff(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 0.0, 0.0]);
    let config = GensetConfig {
        q_samples: 10_000,
        ..GensetConfig::default()
    };
    let r = genset_check(&f, 2, &config).unwrap();
    assert!(!r.cutoff);
    let k1 = r.order(1).unwrap();
    let k2 = r.order(2).unwrap();
    assert!(!k1.pass);
    assert!(k2.pass);
    assert!(k2.q_evaluations >= 10_000);
    assert_eq!(r.order_n_verdict, Verdict::Pass);
    assert_eq!(r.all_orders_verdict, Verdict::Fail);
    assert_eq!(r.verdict, Verdict::Fail);
    let w = r.witness().unwrap();
    assert_eq!(w.k, 1);
    assert!(w.value < 0.0);
    assert!(close(w.reevaluate(), w.value, 1e-12));
}

#[test]
fn genset_examples() {
    let f = FiniteFunction::restrict(&model("-1/x"), &[0.3, 1.1, 2.0, 5.5]).unwrap();
    assert_eq!(genset_check(&f, 2, &GensetConfig::default()).unwrap().verdict, Verdict::Pass);
    let pts = [-2.0, -0.5, 0.1, 0.7, 1.0, 3.0, 4.5];
    let id = FiniteFunction::restrict(&model("x"), &pts).unwrap();
    for n in 1..=pts.len() {
        let r = genset_check(&id, n, &GensetConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "n = {n}");
        assert!(r.consistent);
    }
    // x^2 on a set straddling 0 is not even increasing; on a positive set it
    // is 1-monotone but not 2-monotone
    let sq = FiniteFunction::restrict(&model("x^2"), &[0.2, 0.5, 1.0, 1.7, 2.5, 3.0]).unwrap();
    let r = genset_check(&sq, 2, &GensetConfig::default()).unwrap();
    assert!(r.cutoff);
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.order(1).unwrap().pass);
    assert!(genset_check(&sq, 0, &GensetConfig::default()).is_err());
}

#[test]
fn sampling_beyond_the_cap() {
    let pts: Vec<f64> = (1..=30).map(|i| i as f64 * 0.25).collect();
    let f = FiniteFunction::restrict(&model("log(x)"), &pts).unwrap();
    let config = GensetConfig {
        max_subsets: 2000,
        ..GensetConfig::default()
    };
    let r = genset_check(&f, 3, &config).unwrap();
    let k3 = r.order(3).unwrap();
    assert!(!k3.exhaustive);
    assert_eq!(k3.subsets, 2000);
    assert!(r.order(1).unwrap().exhaustive);
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r, genset_check(&f, 3, &config).unwrap());
}

#[test]
fn glue_examples() {
    let f = model("-1/x");
    let a = FiniteFunction::restrict(&f, &[0.5, 0.8, 1.0, 1.3]).unwrap();
    let b = FiniteFunction::restrict(&f, &[0.8, 1.0, 1.3, 2.2, 3.0]).unwrap();
    let r = glue_check(&a, &b, 2, &GensetConfig::default()).unwrap();
    assert!(r.hypothesis_met);
    assert_eq!(r.min_shared_between, Some(3));
    assert_eq!(r.union.verdict, Verdict::Pass);
    assert!(r.consistent);

    let b = FiniteFunction::restrict(&f, &[1.3, 1.6, 2.2, 3.0]).unwrap();
    let r = glue_check(&a, &b, 2, &GensetConfig::default()).unwrap();
    assert!(!r.hypothesis_met);
    assert_eq!(r.union.points, 7);
    assert_eq!(r.min_shared_between, Some(1));

    let a = ff(&[0.0, 1.0], &[0.0, 1.0]);
    let b = ff(&[1.0, 2.0], &[1.0, 5.0]);
    let r = glue_check(&a, &b, 1, &GensetConfig::default()).unwrap();
    assert!(r.hypothesis_met);
    assert_eq!(r.union.verdict, Verdict::Pass);

    let b = ff(&[1.0, 2.0], &[1.5, 5.0]);
    assert!(glue_check(&a, &b, 1, &GensetConfig::default()).is_err());
}

// partial fractions of (z - 3)(z - 4) / ((z - λ1)(z - λ2)) in exact arithmetic
fn rational_residues(zeros: &[i64], poles: &[i64]) -> Vec<BigRational> {
    poles
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let num: BigRational = zeros.iter().map(|&x| BigRational::from_integer((l - x).into())).product();
            let den: BigRational = poles
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, &m)| BigRational::from_integer((l - m).into()))
                .product();
            num / den
        })
        .collect()
}

fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap()
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

// [x_0, ..., x_k]_g over integer nodes, exactly
fn exact_dd(nodes: &[i64], vals: &[BigRational]) -> BigRational {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let w: BigRational = nodes
                .iter()
                .filter(|&&y| y != x)
                .map(|&y| BigRational::from_integer((x - y).into()))
                .product();
            &vals[i] / w
        })
        .sum()
}

#[test]
fn counterexample_n2() {
    let pts = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let b = build_counterexample(2, &pts, &[0.0, 7.0]).unwrap();
    let exact = rational_residues(&[3, 4], &[0, 7]);
    assert_eq!(exact, [q(-12, 7), q(12, 7)]);
    for (got, want) in b.residues.iter().zip(&exact) {
        assert!(close(*got, to_f64(want), 1e-15));
    }
    let one = BigRational::from_integer(1.into());
    let at_zero = |x: i64| one.clone() - q(12, 7) / BigRational::from_integer(x.into());
    let at_seven = |x: i64| q(12, 7) / BigRational::from_integer((7 - x).into());

    // r1 = -(12/7)/(z - 7) on the first four points and r2 = 1 - (12/7)/z on
    // the last four is not 2-monotone: with q vanishing at 7 the middle
    // window is negative since r2(5) < r1(5)
    let naive = [at_seven(1), at_seven(2), at_seven(3), at_seven(4), at_zero(5), at_zero(6)];
    assert_eq!(naive[..], [q(2, 7), q(12, 35), q(3, 7), q(4, 7), q(23, 35), q(5, 7)]);
    let nq = |x: i64| BigRational::from_integer(((x - 7) * (x - 7)).into());
    let window: Vec<BigRational> = (2..=5).map(|x| &naive[x as usize - 1] * nq(x)).collect();
    assert_eq!(exact_dd(&[2, 3, 4, 5], &window), q(-2, 15));
    let naive_f = ff(&pts, &naive.iter().map(to_f64).collect::<Vec<_>>());
    assert_eq!(genset_check(&naive_f, 2, &GensetConfig::default()).unwrap().verdict, Verdict::Fail);

    // one pole above the hull: the roles swap
    assert!(b.flipped);
    assert_eq!(b.r1.terms, [(0.0, 12.0 / 7.0)]);
    assert_eq!(b.r1.constant, 1.0);
    assert_eq!(b.r2.terms, [(7.0, 12.0 / 7.0)]);
    assert_eq!(b.r2.constant, 0.0);
    assert_eq!(b.gap, (3.0, 4.0));
    let want = [at_zero(1), at_zero(2), at_zero(3), at_zero(4), at_seven(5), at_seven(6)];
    assert_eq!(want[..], [q(-5, 7), q(1, 7), q(3, 7), q(4, 7), q(6, 7), q(12, 7)]);
    for (got, w) in b.f.values().iter().zip(&want) {
        assert!(close(*got, to_f64(w), 1e-15));
    }
    assert!(b.r1.is_pick_on(1.0, 6.0) && b.r2.is_pick_on(1.0, 6.0));

    let rep = extension_feasibility(&b, 3.5, 10_000, &GensetConfig::default()).unwrap();
    let x0 = q(7, 2);
    let (r1x, r2x) = (one.clone() - q(12, 7) / x0.clone(), q(12, 7) / (q(7, 1) - x0));
    assert_eq!((r1x.clone(), r2x.clone()), (q(25, 49), q(24, 49)));
    assert!(close(rep.r1_value, to_f64(&r1x), 1e-15) && close(rep.r2_value, to_f64(&r2x), 1e-15));
    for bind in &rep.bindings {
        let want = if bind.side == "r1" { rep.r1_value } else { rep.r2_value };
        assert!(close(bind.y, want, 1e-12), "{bind:?}");
    }
    assert!(rep.empty && rep.grid_empty);
}

#[test]
fn counterexample_invariants() {
    let cases: [(usize, Vec<f64>, Vec<f64>); 4] = [
        (2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![-1.0, 8.0]),
        (2, vec![0.0, 0.3, 1.1, 1.5, 2.9, 3.0], vec![-4.0, 5.0]),
        (3, (1..=8).map(f64::from).collect(), vec![-1.0, -0.5, 9.0, 10.0]),
        (3, vec![0.0, 0.5, 1.0, 2.0, 2.5, 3.5, 4.0, 6.0], vec![-3.0, -1.0, 7.0, 8.5]),
    ];
    for (n, pts, aux) in cases {
        let b = build_counterexample(n, &pts, &aux).unwrap();
        let (lo, hi) = (pts[0], pts[pts.len() - 1]);
        assert!(b.r1.is_pick_on(lo, hi) && b.r2.is_pick_on(lo, hi));
        assert_eq!((b.r1.degree(), b.r2.degree()), (n - 1, n - 1));
        assert_eq!(b.flipped, aux.iter().filter(|&&p| p > hi).count() % 2 == 1);
        for (i, &x) in pts.iter().enumerate() {
            let v = b.f.values()[i];
            if i < 2 * n {
                assert!(close(v, b.r1.eval(x), 1e-12));
            }
            if i >= 2 {
                assert!(close(v, b.r2.eval(x), 1e-12));
            }
        }
        assert_eq!(genset_check(&b.f, n, &GensetConfig::default()).unwrap().verdict, Verdict::Pass);
        let (a, c) = b.gap;
        for s in 1..=5 {
            let x0 = a + (c - a) * s as f64 / 6.0;
            let rep = extension_feasibility(&b, x0, 2000, &GensetConfig::default()).unwrap();
            assert!(rep.empty && rep.grid_empty, "n = {n}, x0 = {x0}");
            assert!((rep.r1_value - rep.r2_value).abs() > 1e-10);
        }
    }
}

#[test]
fn counterexample_errors() {
    let pts = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    assert!(build_counterexample(1, &pts[..4], &[]).is_err());
    assert!(build_counterexample(2, &pts[..5], &[0.0, 7.0]).is_err());
    assert!(build_counterexample(2, &pts, &[0.0, 3.5]).is_err());
    assert!(build_counterexample(2, &pts, &[0.0, 0.0]).is_err());
    let b = build_counterexample(2, &pts, &[0.0, 7.0]).unwrap();
    assert!(extension_feasibility(&b, 3.0, 100, &GensetConfig::default()).is_err());
    assert!(extension_feasibility(&b, 4.5, 100, &GensetConfig::default()).is_err());
}

#[test]
fn increasing_extension_control() {
    let f = ff(&[0.0, 1.0], &[0.25, 2.0]);
    let s = extension_scan(&f, 1, 0.5, 2001, None, &[], &GensetConfig::default()).unwrap();
    assert_eq!(s.feasible.len(), 1);
    let step = (s.range.1 - s.range.0) / 2000.0;
    let (lo, hi) = s.feasible[0];
    assert!(lo >= 0.25 - 1e-9 && lo - 0.25 <= step);
    assert!(hi <= 2.0 + 1e-9 && 2.0 - hi <= step);
}

#[test]
fn rigidity_examples() {
    let ms = [-1e3, -100.0, -10.0, 10.0, 100.0, 1e3];
    let mut pts = vec![0.0, 1.0, 2.0];
    pts.extend(ms);
    let cube = FiniteFunction::restrict(&model("x^3"), &pts).unwrap();
    let r = affine_rigidity_check(&cube, [0.0, 1.0, 2.0], &ms, PSD_TOL).unwrap();
    assert!(close(r.dd, 3.0, 1e-14));
    assert!(close(r.dd_xf, 7.0, 1e-13));
    assert!(!r.pass);
    assert_eq!(r.violated_from, Some(10.0));
    let big = r.steps.iter().find(|s| s.m == 1e3).unwrap();
    assert!(big.violated && big.bound < r.dd);
    assert!(!r.steps.iter().find(|s| s.m == -1e3).unwrap().violated);
    assert!(close(r.decay_exponent.unwrap(), -1.0, 1e-12));

    for src in ["x", "2*x + 5"] {
        let f = FiniteFunction::restrict(&model(src), &pts).unwrap();
        let r = affine_rigidity_check(&f, [0.0, 1.0, 2.0], &ms, PSD_TOL).unwrap();
        assert!(r.pass, "{src}");
        assert!(r.dd.abs() < 1e-14);
    }
    assert!(affine_rigidity_check(&cube, [0.0, 1.0, 2.0], &[10.0, 100.0], PSD_TOL).is_err());
    assert!(affine_rigidity_check(&cube, [0.0, 1.0, 2.5], &ms, PSD_TOL).is_err());
    assert!(affine_rigidity_check(&cube, [0.0, 1.0, 2.0], &[-10.0, 1.0, 10.0], PSD_TOL).is_err());
}

fn positive_points(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, k).prop_filter_map("too close", |mut v| {
        v.sort_by(f64::total_cmp);
        v.windows(2).all(|w| w[1] - w[0] > 0.01).then_some(v)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // restrictions of interval-certified functions pass on any finite set
    #[test]
    fn restrictions_inherit_the_interval_verdict(idx in 0..catalog().len(), u in positive_points(7), n in 1usize..4) {
        let e = &catalog()[idx];
        prop_assume!(e.truth.monotone.contains(n));
        let w = e.interval.finite_window();
        let pts: Vec<f64> = u.iter().map(|t| w.lo + (0.02 + 0.96 * t) * w.length()).collect();
        let f = FiniteFunction::restrict(&e.model, &pts).unwrap();
        let r = genset_check(&f, n, &GensetConfig::default()).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Pass, "{} n={}", &e.id, n);
        prop_assert!(r.consistent);
    }

    #[test]
    fn witnesses_reevaluate(vals in prop::collection::vec(-1.0f64..1.0, 6)) {
        let f = ff(&[0.0, 0.4, 1.0, 1.3, 2.0, 2.2], &vals);
        let r = genset_check(&f, 2, &GensetConfig::default()).unwrap();
        for o in &r.orders {
            let w = o.worst.as_ref().unwrap();
            prop_assert!((w.reevaluate() - w.value).abs() <= 1e-10 * w.scale.max(1.0));
        }
    }

    // numerator of the resolvent difference has the sign pattern that
    // drives the decomposition into divided-difference terms
    #[test]
    fn resolvent_numerator_signs(a in arb_hermitian(3), g in arb_hermitian(3), wr in prop::collection::vec(-1.0f64..1.0, 3)) {
        let gg = HermitianMatrix::symmetrized(g.matrix() * &g.matrix().adjoint());
        let b = &a + &gg;
        let w: Vec<Complex64> = wr.iter().map(|x| Complex64::new(*x, 0.5 * x)).collect();
        let (xs, q) = resolvent_numerator(&a, &b, &w).unwrap();
        let k = xs.len();
        prop_assert!(q.degree().is_none_or(|d| d < k));
        let span = (xs[k - 1] - xs[0]).max(1.0);
        let qs = q.max_abs_coeff().max(1.0) * (xs[k - 1].abs() + 2.0 * span).powi(k as i32);
        for s in 0..50 {
            let right = xs[k - 1] + span * s as f64 / 25.0;
            let left = xs[0] - span * s as f64 / 25.0;
            prop_assert!(q.eval(Complex64::new(right, 0.0)).re >= -1e-9 * qs);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!(sign * q.eval(Complex64::new(left, 0.0)).re >= -1e-9 * qs);
        }
        // identity at a point off the real axis
        let z = Complex64::new(0.3, 1.7);
        let lhs: Complex64 = {
            let res = |h: &HermitianMatrix| -> Complex64 {
                let e = eigh(h);
                (0..3).map(|j| {
                    let u = e.vectors.column(j);
                    let r: Complex64 = u.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                    r.norm_sqr() / (z - e.values[j])
                }).sum()
            };
            res(&b) - res(&a)
        };
        let den: Complex64 = xs.iter().map(|x| z - x).product();
        let rhs = q.eval(z) / den;
        prop_assert!((lhs - rhs).norm() <= 1e-8 * (1.0 + lhs.norm()));
    }
}
