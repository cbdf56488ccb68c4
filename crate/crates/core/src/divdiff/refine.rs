use super::NodeMultiset;
use crate::error::{invalid, Result};

/// Coefficients `t_j >= 0` with `[x]_f = sum_j t_j [y_j, ..., y_{j+k}]_f`,
/// `k = x.order()`, for a distinct refinement `y` of the distinct `x`.
///
/// Nodes of `y` missing from `x` are inserted one at a time; inserting a
/// node inside a window splits it into a convex combination of the two
/// adjacent windows of the enlarged set.
pub fn refinement_coefficients(x: &NodeMultiset, y: &NodeMultiset) -> Result<Vec<f64>> {
    if !x.is_distinct() || !y.is_distinct() {
        return Err(invalid("refinement needs distinct nodes"));
    }
    let xs = x.flat();
    let ys = y.flat();
    if let Some(v) = xs.iter().find(|v| ys.binary_search_by(|p| p.total_cmp(v)).is_err()) {
        return Err(invalid(format!("node {v} of x is missing from the refinement")));
    }
    let k = x.order();
    let mut set = xs;
    let mut t = vec![1.0];
    for &v in &ys {
        let p = match set.binary_search_by(|q| q.total_cmp(&v)) {
            Ok(_) => continue,
            Err(p) => p,
        };
        set.insert(p, v);
        let mut next = vec![0.0; t.len() + 1];
        for (s, &c) in t.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if s + k < p {
                next[s] += c;
            } else if s >= p {
                next[s + 1] += c;
            } else {
                let first = set[s];
                let last = set[s + k + 1];
                let a = (v - first) / (last - first);
                next[s] += c * a;
                next[s + 1] += c * (1.0 - a);
            }
        }
        t = next;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divdiff::{divided_difference, NodeSampler};
    use crate::expr::catalog;
    use crate::interval::Interval;
    use crate::scalar::Precision;
    use proptest::prelude::*;

    fn ms(v: &[f64]) -> NodeMultiset {
        NodeMultiset::new(v).unwrap()
    }

    #[test]
    fn examples() {
        let y = ms(&[0.0, 1.0, 2.0]);
        assert_eq!(refinement_coefficients(&ms(&[0.0, 2.0]), &y).unwrap(), vec![0.5, 0.5]);
        assert_eq!(refinement_coefficients(&ms(&[0.0, 1.0]), &y).unwrap(), vec![1.0, 0.0]);
        assert_eq!(refinement_coefficients(&ms(&[1.0]), &y).unwrap(), vec![0.0, 1.0, 0.0]);
        assert!(refinement_coefficients(&ms(&[0.5]), &y).is_err());
        assert!(refinement_coefficients(&ms(&[0.0, 0.0]), &y).is_err());
    }

    // Picks a subsequence of `ys` of length k+1 from the low bits of `mask`.
    fn subsequence(ys: &[f64], k: usize, mut mask: u64) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..ys.len()).collect();
        let mut out = Vec::new();
        while out.len() <= k {
            let j = (mask % idx.len() as u64) as usize;
            mask = mask.rotate_right(7) ^ 0x9e37_79b9;
            out.push(ys[idx.remove(j)]);
        }
        out.sort_by(f64::total_cmp);
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sums_to_one_and_nonnegative(seed in any::<u64>(), n in 1usize..10, kk in 0usize..10, mask in any::<u64>()) {
            let k = kk % n;
            let ys = NodeSampler::new(seed).multiset(Interval::new(-1.0, 4.0).unwrap(), n + 1, seed as usize, 1);
            let xs = subsequence(&ys, k, mask);
            let t = refinement_coefficients(&ms(&xs), &ms(&ys)).unwrap();
            prop_assert_eq!(t.len(), n - k + 1);
            prop_assert!(t.iter().all(|v| *v >= -1e-12));
            // against f = x^k every window equals 1
            let sum: f64 = t.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        #[test]
        fn reconstructs_catalog_functions(seed in any::<u64>(), idx in 0usize..20, n in 2usize..7, mask in any::<u64>()) {
            let entries = catalog();
            let e = &entries[idx % entries.len()];
            let k = (mask as usize) % n;
            let ys = NodeSampler::new(seed).multiset(e.interval, n + 1, idx, 1);
            let xs = subsequence(&ys, k, mask);
            let t = refinement_coefficients(&ms(&xs), &ms(&ys)).unwrap();
            let lhs = divided_difference(&e.model, &ms(&xs), Precision::Extended).unwrap();
            let mut rhs = 0.0;
            let mut mag = 0.0;
            for (j, tj) in t.iter().enumerate() {
                let w = divided_difference(&e.model, &ms(&ys[j..=j + k]), Precision::Extended).unwrap();
                rhs += tj * w;
                mag += (tj * w).abs();
            }
            prop_assert!((lhs - rhs).abs() <= 1e-10 * mag.max(1e-300), "{}: {lhs} vs {rhs}", e.id);
        }
    }
}
