//! Gauss–Legendre quadrature, generic over the scalar backend.

use crate::scalar::Scalar;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<S> {
    pub nodes: Vec<S>,
    pub weights: Vec<S>,
}

impl<S: Scalar> GaussLegendre<S> {
    /// `n`-point rule. Initial guesses come from the usual cosine
    /// asymptotics; Newton on `P_n` then runs in `S`, so extended rules are
    /// accurate to the working precision.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "quadrature needs at least one point");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let eps = S::from_f64(1e-60);
        for i in 0..n {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = S::from_f64(guess);
            let mut dp = S::one();
            for _ in 0..100 {
                let (p, d) = legendre(n, &x);
                dp = d.clone();
                let step = p / d;
                x = x - step.clone();
                if step.abs() <= eps.clone() * (S::one() + x.abs()) {
                    break;
                }
            }
            // Newton stalls at the f64 floor for f64; a final derivative
            // refresh keeps the weight consistent with the returned node.
            let (_, d) = legendre(n, &x);
            if d.is_finite() {
                dp = d;
            }
            let w = S::from_f64(2.0) / ((S::one() - x.clone() * x.clone()) * dp.clone() * dp);
            nodes.push(x);
            weights.push(w);
        }
        nodes.reverse();
        weights.reverse();
        Self { nodes, weights }
    }

    /// `∫_a^b f`, one panel.
    pub fn integrate<F>(&self, a: &S, b: &S, mut f: F) -> S
    where
        F: FnMut(&S) -> S,
    {
        let half = (b.clone() - a.clone()) / S::from_f64(2.0);
        let mid = (b.clone() + a.clone()) / S::from_f64(2.0);
        let mut acc = S::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let t = mid.clone() + half.clone() * x.clone();
            acc = acc + w.clone() * f(&t);
        }
        acc * half
    }

    /// Composite rule with `panels` equal panels.
    pub fn composite<F>(&self, a: &S, b: &S, panels: usize, mut f: F) -> S
    where
        F: FnMut(&S) -> S,
    {
        let h = (b.clone() - a.clone()) / S::from_usize(panels);
        let mut acc = S::zero();
        for i in 0..panels {
            let lo = a.clone() + h.clone() * S::from_usize(i);
            let hi = if i + 1 == panels { b.clone() } else { lo.clone() + h.clone() };
            acc = acc + self.integrate(&lo, &hi, &mut f);
        }
        acc
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre<S: Scalar>(n: usize, x: &S) -> (S, S) {
    let mut p0 = S::one();
    let mut p1 = x.clone();
    for k in 2..=n {
        let kf = S::from_usize(k);
        let p2 = (S::from_usize(2 * k - 1) * x.clone() * p1.clone() - S::from_usize(k - 1) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = S::from_usize(n) * (x.clone() * p1.clone() - p0) / (x.clone() * x.clone() - S::one());
    (p1, d)
}
