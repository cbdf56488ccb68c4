//! Divided differences on node multisets, refinement coefficients, Peano
//! weights and k-tone checks.

mod peano;
mod refine;
mod sampler;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::expr::FunctionModel;
use crate::interval::Interval;
use crate::polynomial::{n_of_taylor, real_taylor, Poly};
use crate::scalar::{Ext, Precision, PrecisionPolicy, Scalar};

pub use peano::{peano_quadrature, peano_weight, peano_weight_in, PiecewisePoly};
pub use refine::refinement_coefficients;
pub use sampler::{NodeSampler, SampleKind};

/// Sorted distinct node values with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMultiset {
    nodes: Vec<(f64, usize)>,
}

impl NodeMultiset {
    /// Groups equal values; the input need not be sorted.
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("empty node multiset"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("nodes must be finite"));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let mut nodes: Vec<(f64, usize)> = Vec::new();
        for x in v {
            match nodes.last_mut() {
                Some((y, m)) if *y == x => *m += 1,
                _ => nodes.push((x, 1)),
            }
        }
        Ok(Self { nodes })
    }

    pub fn from_pairs(pairs: &[(f64, usize)]) -> Result<Self> {
        let mut flat = Vec::new();
        for &(x, m) in pairs {
            if m == 0 {
                return Err(invalid("multiplicities must be positive"));
            }
            flat.extend(std::iter::repeat_n(x, m));
        }
        Self::new(&flat)
    }

    /// Every value of `values` doubled: `(x_1, x_1, ..., x_n, x_n)`.
    pub fn doubled(values: &[f64]) -> Result<Self> {
        let flat: Vec<f64> = values.iter().flat_map(|&x| [x, x]).collect();
        Self::new(&flat)
    }

    pub fn pairs(&self) -> &[(f64, usize)] {
        &self.nodes
    }

    pub fn total(&self) -> usize {
        self.nodes.iter().map(|(_, m)| m).sum()
    }

    /// Order of the divided difference: total count minus one.
    pub fn order(&self) -> usize {
        self.total() - 1
    }

    pub fn max_multiplicity(&self) -> usize {
        self.nodes.iter().map(|(_, m)| *m).max().unwrap_or(0)
    }

    pub fn is_distinct(&self) -> bool {
        self.max_multiplicity() == 1
    }

    /// Values with repetition, ascending.
    pub fn flat(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .flat_map(|&(x, m)| std::iter::repeat_n(x, m))
            .collect()
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0].0
    }

    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].0
    }

    /// Closest gap between distinct values (infinite for a single value).
    pub fn min_separation(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Precision used for this multiset under `policy`.
    pub fn precision(&self, requested: Precision, policy: &PrecisionPolicy) -> Precision {
        policy.resolve(requested, self.order(), self.min_separation())
    }
}

/// Value and magnitude of a divided difference. `scale` runs the same
/// recursion on absolute values and bounds the rounding error by
/// `eps * scale` up to a modest factor.
#[derive(Debug, Clone)]
pub struct DdValue<S> {
    pub value: S,
    pub scale: S,
}

/// Newton–Hermite table. `groups[g] = (x_g, t_g)` lists distinct ascending
/// nodes with the Taylor coefficients `f^(j)(x_g)/j!`, one per unit of
/// multiplicity.
pub fn hermite_table<S: Scalar>(groups: &[(S, Vec<S>)]) -> DdValue<S> {
    let mags: Vec<Vec<S>> = groups.iter().map(|(_, t)| t.iter().map(|v| v.abs()).collect()).collect();
    hermite_table_with_magnitudes(groups, &mags)
}

/// [`hermite_table`] with explicit magnitude seeds, for Taylor data that
/// already went through cancellation (products with weights).
pub fn hermite_table_with_magnitudes<S: Scalar>(groups: &[(S, Vec<S>)], mags: &[Vec<S>]) -> DdValue<S> {
    let mut z: Vec<(usize, S)> = Vec::new();
    for (g, (x, t)) in groups.iter().enumerate() {
        for _ in 0..t.len() {
            z.push((g, x.clone()));
        }
    }
    let n = z.len();
    let mut c: Vec<S> = z.iter().map(|(g, _)| groups[*g].1[0].clone()).collect();
    let mut m: Vec<S> = z.iter().map(|(g, _)| mags[*g][0].clone()).collect();
    for k in 1..n {
        for i in (k..n).rev() {
            let (gi, ref xi) = z[i];
            let (gj, ref xj) = z[i - k];
            if gi == gj {
                c[i] = groups[gi].1[k].clone();
                m[i] = mags[gi][k].clone();
            } else {
                let h = xi.clone() - xj.clone();
                c[i] = (c[i].clone() - c[i - 1].clone()) / h.clone();
                m[i] = (m[i].clone() + m[i - 1].clone()) / h.abs();
            }
        }
    }
    DdValue {
        value: c[n - 1].clone(),
        scale: m[n - 1].clone(),
    }
}

/// `sum f(x_i) / prod_{j != i} (x_i - x_j)` for distinct nodes.
pub fn product_formula<S: Scalar>(xs: &[S], values: &[S]) -> S {
    let mut acc = S::zero();
    for (i, (xi, fi)) in xs.iter().zip(values).enumerate() {
        let mut den = S::one();
        for (j, xj) in xs.iter().enumerate() {
            if j != i {
                den = den * (xi.clone() - xj.clone());
            }
        }
        acc = acc + fi.clone() / den;
    }
    acc
}

/// First `m` coefficients of the product of two truncated Taylor series.
pub fn taylor_product<S: Scalar>(a: &[S], b: &[S], m: usize) -> Vec<S> {
    (0..m)
        .map(|k| {
            (0..=k).fold(S::zero(), |acc, i| {
                match (a.get(i), b.get(k - i)) {
                    (Some(x), Some(y)) => acc + x.clone() * y.clone(),
                    _ => acc,
                }
            })
        })
        .collect()
}

/// Taylor data of `f` at every node of a multiset, computed once and reused
/// for many weights `N(q)`.
#[derive(Debug, Clone)]
pub struct NodeData<S> {
    pub nodes: NodeMultiset,
    groups: Vec<(S, Vec<S>)>,
}

impl<S: Scalar> NodeData<S> {
    pub fn new(f: &FunctionModel, nodes: &NodeMultiset) -> Result<Self> {
        let groups = nodes
            .pairs()
            .iter()
            .map(|&(x, m)| {
                let xs = S::from_f64(x);
                let t = f.taylor(&xs, m)?;
                Ok((xs, t))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            nodes: nodes.clone(),
            groups,
        })
    }

    /// `[nodes]_f`.
    pub fn dd(&self) -> DdValue<S> {
        hermite_table(&self.groups)
    }

    /// `[nodes]_{f N(q)}`.
    pub fn dd_weighted(&self, q: &Poly) -> DdValue<S> {
        let abs_q = Poly::new(q.coeffs().iter().map(|z| Complex64::new(z.norm(), 0.0)).collect());
        let (groups, mags): (Vec<_>, Vec<_>) = self
            .groups
            .iter()
            .map(|(x, t)| {
                let m = t.len();
                let w = n_of_taylor(q, x, m);
                let wa = n_of_taylor(&abs_q, &x.abs(), m);
                let ta: Vec<S> = t.iter().map(|v| v.abs()).collect();
                ((x.clone(), taylor_product(t, &w, m)), taylor_product(&ta, &wa, m))
            })
            .unzip();
        hermite_table_with_magnitudes(&groups, &mags)
    }

    /// `[nodes]_{f g}` for a real polynomial `g` (ascending coefficients).
    pub fn dd_times_poly(&self, g: &[f64]) -> DdValue<S> {
        let abs_g: Vec<f64> = g.iter().map(|v| v.abs()).collect();
        let (groups, mags): (Vec<_>, Vec<_>) = self
            .groups
            .iter()
            .map(|(x, t)| {
                let m = t.len();
                let w = real_taylor(g, x, m);
                let wa = real_taylor(&abs_g, &x.abs(), m);
                let ta: Vec<S> = t.iter().map(|v| v.abs()).collect();
                ((x.clone(), taylor_product(t, &w, m)), taylor_product(&ta, &wa, m))
            })
            .unzip();
        hermite_table_with_magnitudes(&groups, &mags)
    }
}

/// `[nodes]_f` in the scalar type `S`.
pub fn divided_difference_in<S: Scalar>(f: &FunctionModel, nodes: &NodeMultiset) -> Result<DdValue<S>> {
    Ok(NodeData::<S>::new(f, nodes)?.dd())
}

/// `[nodes]_f` as a double; `Auto` precision switches to extended
/// arithmetic for high orders or close nodes.
pub fn divided_difference(f: &FunctionModel, nodes: &NodeMultiset, precision: Precision) -> Result<f64> {
    match nodes.precision(precision, &PrecisionPolicy::default()) {
        Precision::Extended => Ok(divided_difference_in::<Ext>(f, nodes)?.value.to_f64()),
        _ => Ok(divided_difference_in::<f64>(f, nodes)?.value),
    }
}

/// Result of a k-tone scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KtoneReport {
    pub k: usize,
    pub configs: usize,
    pub pass: bool,
    /// Most negative normalized value seen: `value / scale`.
    pub worst: f64,
    pub witness: Option<KtoneWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KtoneWitness {
    pub nodes: Vec<f64>,
    pub value: f64,
    pub scale: f64,
}

/// Samples order-`k` divided differences of `f` on `interval` and reports
/// any that fall below `-tol * scale`.
pub fn ktone_check(
    f: &FunctionModel,
    k: usize,
    interval: Interval,
    sampler: &NodeSampler,
    configs: usize,
    tol: f64,
    precision: Precision,
) -> Result<KtoneReport> {
    if k == 0 {
        return Err(invalid("k-tone check needs k >= 1"));
    }
    let policy = PrecisionPolicy::default();
    let mut worst: Option<(f64, KtoneWitness)> = None;
    for i in 0..configs {
        // every third tuple may repeat nodes
        let max_mult = if i % 3 == 2 { 2 } else { 1 };
        let nodes = sampler.multiset(interval, k + 1, i, max_mult);
        let ms = NodeMultiset::new(&nodes)?;
        let (value, scale) = match ms.precision(precision, &policy) {
            Precision::Extended => {
                let d = divided_difference_in::<Ext>(f, &ms)?;
                (d.value.to_f64(), d.scale.to_f64())
            }
            _ => {
                let d = divided_difference_in::<f64>(f, &ms)?;
                (d.value, d.scale)
            }
        };
        let normalized = if scale > 0.0 { value / scale } else { 0.0 };
        if worst.as_ref().is_none_or(|(w, _)| normalized < *w) {
            worst = Some((normalized, KtoneWitness { nodes, value, scale }));
        }
    }
    let (w, witness) = worst.map_or((0.0, None), |(w, wit)| (w, Some(wit)));
    let pass = w >= -tol;
    Ok(KtoneReport {
        k,
        configs,
        pass,
        worst: w,
        witness: if pass { None } else { witness },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::catalog;
    use proptest::prelude::*;

    fn model(src: &str) -> FunctionModel {
        FunctionModel::parse(src, None).unwrap()
    }

    fn dd(src: &str, nodes: &[f64]) -> f64 {
        divided_difference(&model(src), &NodeMultiset::new(nodes).unwrap(), Precision::Auto).unwrap()
    }

    #[test]
    fn examples() {
        assert!((dd("x^3", &[0.0, 1.0, 2.0]) - 3.0).abs() < 1e-15);
        assert!((dd("x^2", &[1.0, 1.0]) - 2.0).abs() < 1e-15);
        assert!((dd("1/x", &[1.0, 2.0, 4.0]) - 0.125).abs() < 1e-15);
        assert!((dd("-1/x", &[1.0, 1.0, 2.0, 2.0]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn multiset_shape() {
        let m = NodeMultiset::new(&[2.0, 1.0, 2.0, 0.5]).unwrap();
        assert_eq!(m.pairs(), &[(0.5, 1), (1.0, 1), (2.0, 2)]);
        assert_eq!(m.order(), 3);
        assert_eq!(m.min_separation(), 0.5);
        assert_eq!(NodeMultiset::doubled(&[1.0, 3.0]).unwrap().flat(), vec![1.0, 1.0, 3.0, 3.0]);
        assert!(NodeMultiset::new(&[]).is_err());
    }

    #[test]
    fn confluent_limit_decays_monotonically() {
        let f = model("exp(x)*log(x)");
        let exact = divided_difference_in::<Ext>(&f, &NodeMultiset::new(&[1.0, 1.0, 1.0, 2.0]).unwrap())
            .unwrap()
            .value;
        let mut last = f64::INFINITY;
        for h in [1e-1, 1e-2, 1e-3, 1e-4] {
            let near = NodeMultiset::new(&[1.0, 1.0 + h, 1.0 + 2.0 * h, 2.0]).unwrap();
            let v = divided_difference_in::<Ext>(&f, &near).unwrap().value;
            let err = (v - exact.clone()).abs().to_f64();
            assert!(err < last, "h = {h}: {err} !< {last}");
            last = err;
        }
    }

    #[test]
    fn ktone_examples() {
        let s = NodeSampler::new(7);
        let r = ktone_check(&model("x^2"), 2, Interval::real_line(), &s, 300, 1e-9, Precision::Auto).unwrap();
        assert!(r.pass);
        let r = ktone_check(&model("x^3"), 2, Interval::new(-1.0, 1.0).unwrap(), &s, 300, 1e-9, Precision::Auto)
            .unwrap();
        assert!(!r.pass);
        assert!(r.witness.unwrap().nodes.iter().any(|x| *x < 0.0));
        let r = ktone_check(&model("exp(x)"), 5, Interval::new(-2.0, 2.0).unwrap(), &s, 300, 1e-9, Precision::Auto)
            .unwrap();
        assert!(r.pass);
    }

    #[test]
    fn weighted_dd_matches_expanded_product() {
        use num_complex::Complex64;
        let f = model("exp(x)");
        let q = Poly::new(vec![Complex64::new(0.5, -1.0), Complex64::new(1.0, 0.3)]);
        let p = crate::polynomial::n_of(&q).real_coeffs();
        let ms = NodeMultiset::new(&[0.1, 0.4, 0.4, 0.9, 1.3]).unwrap();
        let data = NodeData::<f64>::new(&f, &ms).unwrap();
        let a = data.dd_weighted(&q).value;
        let b = data.dd_times_poly(&p).value;
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    fn arb_nodes(max: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.2f64..3.0, 2..=max)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn permutation_invariant(mut xs in arb_nodes(7), seed in any::<u64>()) {
            let f = model("exp(x)/x");
            let a = dd("exp(x)/x", &xs);
            // shuffle deterministically from the seed
            let n = xs.len();
            for i in 0..n {
                let j = (seed.rotate_left(i as u32 * 7) as usize) % n;
                xs.swap(i, j);
            }
            let b = divided_difference(&f, &NodeMultiset::new(&xs).unwrap(), Precision::Auto).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12));
        }

        #[test]
        fn recursion_matches_product_formula(
            start in -3.0f64..3.0,
            gaps in prop::collection::vec(0.1f64..1.0, 1..8),
            coeffs in prop::collection::vec(-2.0f64..2.0, 1..9),
        ) {
            let mut xs = vec![start];
            for g in gaps {
                xs.push(xs[xs.len() - 1] + g);
            }
            let g = crate::polynomial::real_taylor(&coeffs, &0.0, coeffs.len());
            let vals: Vec<f64> = xs.iter().map(|x| coeffs.iter().rev().fold(0.0, |a, c| a * x + c)).collect();
            let pf = product_formula(&xs, &vals);
            let groups: Vec<(f64, Vec<f64>)> = xs.iter().zip(&vals).map(|(x, v)| (*x, vec![*v])).collect();
            let table = hermite_table(&groups);
            let scale = g.iter().map(|c| c.abs()).fold(1.0, f64::max);
            prop_assert!((pf - table.value).abs() <= 1e-10 * scale * table.scale.max(1.0));
        }

        #[test]
        fn mean_value_bracketing(idx in 0usize..10, seed in 0usize..1000, n in 1usize..5) {
            let entries = catalog();
            let e = &entries[idx % entries.len()];
            let s = NodeSampler::new(seed as u64);
            let xs = s.multiset(e.interval, n + 1, seed, 2);
            let ms = NodeMultiset::new(&xs).unwrap();
            let v = divided_difference(&e.model, &ms, Precision::Extended).unwrap();
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let (lo, hi) = (ms.lo(), ms.hi());
            let mut mn = f64::INFINITY;
            let mut mx = f64::NEG_INFINITY;
            for i in 0..=400 {
                let t = lo + (hi - lo) * i as f64 / 400.0;
                let d: f64 = e.model.deriv(n, &t).unwrap() / fact;
                mn = mn.min(d);
                mx = mx.max(d);
            }
            let slack = 1e-9 * mn.abs().max(mx.abs()).max(1e-12);
            // the grid can miss the extremes by a little on wide spans
            let grid = (mx - mn) * 0.02 + slack;
            prop_assert!(v >= mn - grid && v <= mx + grid, "{} {:?}: {} not in [{}, {}]", e.id, xs, v, mn, mx);
        }
    }
}
