//! Seeded node sampling. Every draw is a pure function of
//! `(seed, tag, index)`, so batches can be split across threads and replayed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::interval::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// Randomly rotated Halton points.
    Halton,
    /// Independent uniform points.
    Uniform,
    /// Near-coincident clusters, gaps between δ and 10δ inside a cluster.
    Clustered,
    /// A Halton backbone with one tight cluster spliced in.
    Mixed,
}

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107,
    109, 113, 127, 131,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while i > 0 {
        acc += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    acc
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic node sampler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSampler {
    seed: u64,
    tag: u64,
}

impl NodeSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed, tag: 0 }
    }

    /// Independent stream for a named purpose.
    pub fn with_tag(&self, tag: &str) -> Self {
        let h = tag.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        });
        Self {
            seed: self.seed,
            tag: self.tag ^ h,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for draw `i`.
    pub fn rng(&self, i: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(splitmix(self.seed ^ splitmix(self.tag ^ splitmix(i as u64))))
    }

    pub fn kind(i: usize) -> SampleKind {
        match i % 4 {
            0 => SampleKind::Halton,
            1 => SampleKind::Clustered,
            2 => SampleKind::Uniform,
            _ => SampleKind::Mixed,
        }
    }

    /// `count` distinct sorted points inside `interval` (a bounded window
    /// for unbounded ones), at least δ = length/1000 apart and δ away from
    /// the ends.
    pub fn distinct(&self, interval: Interval, count: usize, i: usize) -> Vec<f64> {
        let w = interval.finite_window();
        let delta = w.length() / 1000.0;
        let lo = w.lo + delta;
        let room = w.length() - 2.0 * delta;
        let mut rng = self.rng(i);
        let mut kind = Self::kind(i);
        if count < 2 || count as f64 * 10.0 * delta > room {
            kind = SampleKind::Halton;
        }
        let mut pts = match kind {
            SampleKind::Halton | SampleKind::Uniform => {
                let u = self.unit_points(kind, count, i, &mut rng);
                spread(&u, lo, room, delta)
            }
            SampleKind::Clustered | SampleKind::Mixed => {
                let p_small = if kind == SampleKind::Clustered { 0.6 } else { 0.25 };
                let gaps: Vec<(bool, f64)> = (1..count)
                    .map(|_| {
                        if rng.random_bool(p_small) {
                            (true, delta * rng.random_range(1.0..10.0))
                        } else {
                            (false, rng.random_range(0.05..1.0))
                        }
                    })
                    .collect();
                let small: f64 = gaps.iter().filter(|g| g.0).map(|g| g.1).sum();
                let large: f64 = gaps.iter().filter(|g| !g.0).map(|g| g.1).sum();
                // leftover room, split between the large gaps and the two ends
                let free = room - small;
                let ends = rng.random_range(0.0..1.0);
                let used = if large > 0.0 { free * rng.random_range(0.5..1.0) } else { 0.0 };
                let offset = (free - used) * ends;
                let mut x = lo + offset;
                let mut out = vec![x];
                for (is_small, g) in gaps {
                    x += if is_small { g } else { g / large * used };
                    out.push(x);
                }
                out
            }
        };
        let hi = lo + room;
        for p in pts.iter_mut() {
            *p = p.clamp(lo, hi);
        }
        pts
    }

    fn unit_points(&self, kind: SampleKind, count: usize, i: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut u: Vec<f64> = match kind {
            SampleKind::Halton => {
                let shift: f64 = rng.random();
                let base = PRIMES[(i / 4) % PRIMES.len()];
                let start = 1 + (i / 4 / PRIMES.len()) as u64 * count as u64;
                (0..count)
                    .map(|j| (radical_inverse(start + j as u64, base) + shift).fract())
                    .collect()
            }
            _ => (0..count).map(|_| rng.random::<f64>()).collect(),
        };
        u.sort_by(f64::total_cmp);
        u
    }

    /// `total` sorted values (with repetition) in `interval`: distinct
    /// points, each repeated up to `max_mult` times.
    pub fn multiset(&self, interval: Interval, total: usize, i: usize, max_mult: usize) -> Vec<f64> {
        let mut rng = self.rng(i);
        // skip ahead so multiplicities do not correlate with positions
        let _: u64 = rng.random();
        let mut mults = Vec::new();
        let mut left = total;
        while left > 0 {
            let m = if max_mult > 1 && rng.random_bool(0.35) {
                rng.random_range(2..=max_mult).min(left)
            } else {
                1
            };
            mults.push(m);
            left -= m;
        }
        let pts = self.distinct(interval, mults.len(), i);
        pts.iter()
            .zip(&mults)
            .flat_map(|(&x, &m)| std::iter::repeat_n(x, m))
            .collect()
    }
}

// Maps sorted unit points into `[lo, lo + room]` keeping gaps of at least δ.
fn spread(u: &[f64], lo: f64, room: f64, delta: f64) -> Vec<f64> {
    let n = u.len();
    let span = room - (n.saturating_sub(1)) as f64 * delta;
    u.iter()
        .enumerate()
        .map(|(j, v)| lo + v * span + j as f64 * delta)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn deterministic_per_index() {
        let s = NodeSampler::new(42);
        let iv = Interval::new(0.0, 1.0).unwrap();
        assert_eq!(s.distinct(iv, 6, 3), s.distinct(iv, 6, 3));
        assert_ne!(s.distinct(iv, 6, 3), s.distinct(iv, 6, 7));
        assert_ne!(s.distinct(iv, 6, 3), s.with_tag("other").distinct(iv, 6, 3));
    }

    #[test]
    fn unbounded_intervals_use_window() {
        let s = NodeSampler::new(1);
        for i in 0..20 {
            let p = s.distinct(Interval::positive(), 5, i);
            assert!(p.iter().all(|x| *x > 0.0 && *x < 10.0));
        }
    }

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert_eq!(radical_inverse(6, 2), 0.375);
    }

    proptest! {
        #[test]
        fn separated_and_inside(seed in any::<u64>(), i in 0usize..10_000, count in 1usize..40, lo in -5.0f64..5.0, len in 0.01f64..20.0) {
            let iv = Interval::new(lo, lo + len).unwrap();
            let p = NodeSampler::new(seed).distinct(iv, count, i);
            prop_assert_eq!(p.len(), count);
            let delta = len / 1000.0;
            prop_assert!(p.iter().all(|x| *x > iv.lo && *x < iv.hi));
            for w in p.windows(2) {
                prop_assert!(w[1] - w[0] >= delta * (1.0 - 1e-9), "{:?}", w);
            }
        }

        #[test]
        fn multiset_total(seed in any::<u64>(), i in 0usize..1000, total in 1usize..20, mm in 1usize..4) {
            let v = NodeSampler::new(seed).multiset(Interval::new(0.0, 1.0).unwrap(), total, i, mm);
            prop_assert_eq!(v.len(), total);
            prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
