//! Brute-force search for matrices violating monotonicity or convexity.
//!
//! Random trials run in parallel, one generator per trial index. When no
//! trial violates, the best few are refined by an adaptive random walk on
//! their parameters; thin failure sets are usually reached this way.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_spectral, eigh, make_projection_pair, psd_check, rank_one_chain, unitary_exp, HermitianMatrix,
    Matrix, PsdCheck, PSD_TOL};
use crate::divdiff::NodeSampler;
use crate::error::{invalid, Result};
use crate::expr::FunctionModel;
use crate::interval::Interval;
use crate::mode::Mode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// Random-walk steps per refined candidate.
    pub refine_steps: usize,
    /// Number of best trials that get refined.
    pub refine_starts: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 0,
            tol: PSD_TOL,
            refine_steps: 400,
            refine_starts: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleWitness {
    /// `projection_pair`, `chain_step` or `jensen`.
    pub kind: String,
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    /// Convex mode: weight of `A`.
    pub t: Option<f64>,
    pub check: PsdCheck,
}

impl OracleWitness {
    /// Matrix whose positivity is tested: `f(B) - f(A)`, or
    /// `t f(A) + (1-t) f(B) - f(tA + (1-t)B)`.
    pub fn tested_matrix(&self, f: &FunctionModel) -> Result<HermitianMatrix> {
        let fa = apply_spectral(f, &eigh(&self.a))?;
        let fb = apply_spectral(f, &eigh(&self.b))?;
        match self.t {
            None => Ok(&fb - &fa),
            Some(t) => {
                let cm = &self.a.scale(t) + &self.b.scale(1.0 - t);
                let fc = apply_spectral(f, &eigh(&cm))?;
                Ok(&(&fa.scale(t) + &fb.scale(1.0 - t)) - &fc)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub mode: Mode,
    pub n: usize,
    pub pass: bool,
    pub trials: usize,
    pub refine_steps: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Smallest normalized eigenvalue seen.
    pub worst_score: f64,
    pub witness: Option<OracleWitness>,
}

#[derive(Debug, Clone)]
enum Candidate {
    Pair { targets: Vec<f64> },
    Chain { a: Vec<f64>, inc: Vec<f64>, ka: HermitianMatrix, kp: HermitianMatrix },
    Jensen { a: Vec<f64>, b: Vec<f64>, k: HermitianMatrix, t: f64 },
}

#[derive(Debug, Clone)]
struct Eval {
    score: f64,
    witness: OracleWitness,
}

struct Search<'a> {
    f: &'a FunctionModel,
    n: usize,
    lo: f64,
    hi: f64,
    tol: f64,
}

fn random_hermitian(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = Complex64::new(re, im) * scale;
        }
    }
    HermitianMatrix::symmetrized(m)
}

fn spectral(values: &[f64], k: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::symmetrized(unitary_exp(k).congruence_diag(values))
}

impl Search<'_> {
    fn span(&self) -> f64 {
        self.hi - self.lo
    }

    fn inside(&self, xs: &[f64]) -> bool {
        xs.iter().all(|x| *x >= self.lo && *x <= self.hi)
    }

    fn sample(&self, mode: Mode, sampler: &NodeSampler, i: usize) -> Candidate {
        let mut rng = sampler.rng(i);
        let iv = Interval { lo: self.lo, hi: self.hi };
        let n = self.n;
        match mode {
            Mode::Monotone if i % 3 != 2 => Candidate::Pair {
                targets: sampler.distinct(iv, 2 * n, i),
            },
            Mode::Monotone => {
                let a: Vec<f64> = (0..n).map(|_| rng.random_range(self.lo..self.hi)).collect();
                let top = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let inc: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=(self.hi - top))).collect();
                let ka = random_hermitian(n, 2.0, &mut rng);
                let kp = random_hermitian(n, 2.0, &mut rng);
                Candidate::Chain { a, inc, ka, kp }
            }
            Mode::Convex => {
                let pts = sampler.distinct(iv, 2 * n, i);
                // interleave so both spectra spread over the sample
                let (mut a, mut b) = (Vec::new(), Vec::new());
                for (j, x) in pts.into_iter().enumerate() {
                    if (j + i) % 2 == 0 {
                        a.push(x)
                    } else {
                        b.push(x)
                    }
                }
                let scale = [0.05, 0.3, 1.0, 3.0][(i / 4) % 4];
                let k = random_hermitian(n, scale, &mut rng);
                let t = rng.random_range(0.05..0.95);
                Candidate::Jensen { a, b, k, t }
            }
        }
    }

    fn eval(&self, c: &Candidate) -> Result<Eval> {
        let f = self.f;
        match c {
            Candidate::Pair { targets } => {
                let p = make_projection_pair(targets)?;
                self.eval_pair(&p.a, &p.b, "projection_pair")
            }
            Candidate::Chain { a, inc, ka, kp } => {
                let am = spectral(a, ka);
                let bm = &am + &spectral(inc, kp);
                let mut best = self.eval_pair(&am, &bm, "chain_step")?;
                for w in rank_one_chain(&am, &bm)?.windows(2) {
                    let e = self.eval_pair(&w[0], &w[1], "chain_step")?;
                    if e.score < best.score {
                        best = e;
                    }
                }
                Ok(best)
            }
            Candidate::Jensen { a, b, k, t } => {
                let am = HermitianMatrix::diag(a);
                let bm = spectral(b, k);
                let ea = eigh(&am);
                let eb = eigh(&bm);
                let fa = apply_spectral(f, &ea)?;
                let fb = apply_spectral(f, &eb)?;
                let cm = &am.scale(*t) + &bm.scale(1.0 - t);
                let fc = apply_spectral(f, &eigh(&cm))?;
                let d = &(&fa.scale(*t) + &fb.scale(1.0 - t)) - &fc;
                let check = psd_check(&d, self.tol);
                let norm = t * fa.frobenius() + (1.0 - t) * fb.frobenius() + fc.frobenius();
                Ok(Eval {
                    score: check.min_eigenvalue / norm.max(f64::MIN_POSITIVE),
                    witness: OracleWitness {
                        kind: "jensen".into(),
                        a: am,
                        b: bm,
                        t: Some(*t),
                        check,
                    },
                })
            }
        }
    }

    fn eval_pair(&self, a: &HermitianMatrix, b: &HermitianMatrix, kind: &str) -> Result<Eval> {
        let fa = apply_spectral(self.f, &eigh(a))?;
        let fb = apply_spectral(self.f, &eigh(b))?;
        let d = &fb - &fa;
        let check = psd_check(&d, self.tol);
        // floor the normalization so rounding noise on nearly equal pairs
        // does not dominate the search
        let norm = d.frobenius().max(1e-10 * (fa.frobenius() + fb.frobenius()));
        Ok(Eval {
            score: check.min_eigenvalue / norm.max(f64::MIN_POSITIVE),
            witness: OracleWitness {
                kind: kind.into(),
                a: a.clone(),
                b: b.clone(),
                t: None,
                check,
            },
        })
    }

    fn mutate(&self, c: &Candidate, step: f64, rng: &mut ChaCha8Rng) -> Option<Candidate> {
        let span = self.span();
        let gauss = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };
        let jiggle = |xs: &[f64], rng: &mut ChaCha8Rng| -> Vec<f64> {
            let mut out = xs.to_vec();
            if rng.random_bool(0.5) {
                let j = rng.random_range(0..out.len());
                out[j] += gauss(rng) * step * span;
            } else {
                // zoom around a random member
                let centre = out[rng.random_range(0..out.len())];
                let s = (gauss(rng) * step).exp();
                for x in out.iter_mut() {
                    *x = centre + (*x - centre) * s;
                }
            }
            out
        };
        let out = match c {
            Candidate::Pair { targets } => {
                let mut t = jiggle(targets, rng);
                t.sort_by(f64::total_cmp);
                if t.windows(2).any(|w| w[1] - w[0] < 1e-7 * span) {
                    return None;
                }
                Candidate::Pair { targets: t }
            }
            Candidate::Chain { a, inc, ka, kp } => {
                let a2 = jiggle(a, rng);
                let mut inc2: Vec<f64> = inc.iter().map(|v| (v + gauss(rng) * step * span).abs()).collect();
                let top = a2.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let room = self.hi - top;
                for v in inc2.iter_mut() {
                    *v = v.min(room);
                }
                Candidate::Chain {
                    a: a2,
                    inc: inc2,
                    ka: ka + &random_hermitian(self.n, step, rng),
                    kp: kp + &random_hermitian(self.n, step, rng),
                }
            }
            Candidate::Jensen { a, b, k, t } => {
                let (a2, b2) = match rng.random_range(0..3) {
                    0 => (jiggle(a, rng), b.clone()),
                    1 => (a.clone(), jiggle(b, rng)),
                    _ => {
                        let mut both = a.clone();
                        both.extend_from_slice(b);
                        let z = jiggle(&both, rng);
                        (z[..a.len()].to_vec(), z[a.len()..].to_vec())
                    }
                };
                let t2 = (t + gauss(rng) * step).clamp(0.01, 0.99);
                Candidate::Jensen {
                    a: a2,
                    b: b2,
                    k: k + &random_hermitian(self.n, step, rng),
                    t: t2,
                }
            }
        };
        let ok = match &out {
            Candidate::Pair { targets } => self.inside(targets),
            Candidate::Chain { a, .. } => self.inside(a),
            Candidate::Jensen { a, b, .. } => self.inside(a) && self.inside(b),
        };
        ok.then_some(out)
    }

    fn refine(&self, start: (Candidate, Eval), steps: usize, mut rng: ChaCha8Rng) -> (Candidate, Eval) {
        let (mut cur, mut ev) = start;
        let mut step = 0.1;
        for _ in 0..steps {
            if !ev.witness.check.psd {
                break;
            }
            let Some(next) = self.mutate(&cur, step, &mut rng) else {
                step = (step * 0.8).max(1e-4);
                continue;
            };
            match self.eval(&next) {
                Ok(e) if e.score < ev.score => {
                    cur = next;
                    ev = e;
                    step = (step * 1.3).min(0.5);
                }
                _ => step = (step * 0.85).max(1e-4),
            }
        }
        (cur, ev)
    }
}

/// Searches for `A <= B` with `f(A) ≰ f(B)` (monotone) or for `A, B, t`
/// with `f(tA + (1-t)B) ≰ t f(A) + (1-t) f(B)` (convex), spectra drawn
/// from `interval` minus a 1% margin at each end.
pub fn monotonicity_oracle(
    f: &FunctionModel,
    n: usize,
    interval: Interval,
    mode: Mode,
    config: &OracleConfig,
) -> Result<OracleVerdict> {
    if config.trials == 0 {
        return Err(invalid("oracle needs at least one trial"));
    }
    if n == 0 {
        return Err(invalid("order must be positive"));
    }
    if !f.domain().contains_interval(&interval) {
        return Err(invalid(format!(
            "interval {interval} is not inside the domain {} of {}",
            f.domain(),
            f.name()
        )));
    }
    let win = interval.finite_window().shrink(0.01);
    let search = Search {
        f,
        n,
        lo: win.lo,
        hi: win.hi,
        tol: config.tol,
    };
    let sampler = NodeSampler::new(config.seed).with_tag(match mode {
        Mode::Monotone => "oracle-monotone",
        Mode::Convex => "oracle-convex",
    });
    let evals: Vec<(usize, Candidate, Eval)> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let c = search.sample(mode, &sampler, i);
            search.eval(&c).map(|e| (i, c, e))
        })
        .collect::<Result<_>>()?;

    let verdict = |witness: Option<OracleWitness>, worst: f64| OracleVerdict {
        mode,
        n,
        pass: witness.is_none(),
        trials: config.trials,
        refine_steps: config.refine_steps,
        seed: config.seed,
        tolerance: config.tol,
        worst_score: worst,
        witness,
    };

    let worst = evals.iter().map(|e| e.2.score).fold(f64::INFINITY, f64::min);
    if let Some((_, _, e)) = evals.iter().find(|e| !e.2.witness.check.psd) {
        return Ok(verdict(Some(e.witness.clone()), worst));
    }

    let mut ranked: Vec<&(usize, Candidate, Eval)> = evals.iter().collect();
    ranked.sort_by(|x, y| x.2.score.total_cmp(&y.2.score).then(x.0.cmp(&y.0)));
    let refine_sampler = sampler.with_tag("refine");
    let refined: Vec<(Candidate, Eval)> = ranked
        .iter()
        .take(config.refine_starts)
        .enumerate()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(k, (_, c, e))| search.refine((c.clone(), e.clone()), config.refine_steps, refine_sampler.rng(k)))
        .collect();
    let worst = refined.iter().map(|r| r.1.score).fold(worst, f64::min);
    let witness = refined
        .into_iter()
        .find(|r| !r.1.witness.check.psd)
        .map(|r| r.1.witness);
    Ok(verdict(witness, worst))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str, n: usize, iv: (f64, f64), mode: Mode, trials: usize) -> OracleVerdict {
        let f = FunctionModel::parse(src, Some(Interval::positive())).unwrap();
        let cfg = OracleConfig {
            trials,
            seed: 11,
            ..OracleConfig::default()
        };
        monotonicity_oracle(&f, n, Interval::new(iv.0, iv.1).unwrap(), mode, &cfg).unwrap()
    }

    #[test]
    fn examples() {
        let v = run("-1/x", 3, (0.5, 10.0), Mode::Monotone, 1000);
        assert!(v.pass, "{:?}", v.witness);
        let v = run("x^2", 2, (0.1, 10.0), Mode::Monotone, 1000);
        assert!(!v.pass);
        let w = v.witness.unwrap();
        let f = FunctionModel::parse("x^2", None).unwrap();
        // replaying the witness reproduces the reported eigenvalue
        let m = w.tested_matrix(&f).unwrap();
        assert!((eigh(&m).min() - w.check.min_eigenvalue).abs() < 1e-10);
        assert!(w.check.min_eigenvalue < 0.0);
        for n in [1, 2, 4] {
            assert!(run("x", n, (0.5, 2.0), Mode::Convex, 200).pass);
        }
    }

    #[test]
    fn convex_failures() {
        assert!(!run("sqrt(x)", 2, (0.5, 4.0), Mode::Convex, 200).pass);
        assert!(!run("exp(x)", 2, (0.5, 1.5), Mode::Convex, 1000).pass);
        assert!(run("x^2", 3, (0.5, 4.0), Mode::Convex, 500).pass);
        assert!(run("1/x", 2, (0.5, 4.0), Mode::Convex, 500).pass);
    }

    #[test]
    fn deterministic() {
        let a = run("x^3", 2, (0.1, 1.0), Mode::Monotone, 200);
        let b = run("x^3", 2, (0.1, 1.0), Mode::Monotone, 200);
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_domain() {
        let f = FunctionModel::parse("log(x)", Some(Interval::positive())).unwrap();
        let r = monotonicity_oracle(&f, 2, Interval::new(-1.0, 1.0).unwrap(), Mode::Monotone, &OracleConfig::default());
        assert!(r.is_err());
    }
}
