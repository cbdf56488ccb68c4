//! Criterion batteries for matrix monotonicity and convexity of a fixed
//! order on an interval.
//!
//! Every criterion is run as a sampled sweep; a pass means "no violation at
//! N configurations", never a proof. All criteria are equivalent in exact
//! arithmetic, so a disagreement between them is reported as a defect.

mod matrices;
mod sweep;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divdiff::{divided_difference, NodeMultiset, NodeSampler};
use crate::error::{invalid, Error, Result};
use crate::expr::FunctionModel;
use crate::interval::Interval;
use crate::linalg::{eigh, monotonicity_oracle, OracleConfig, OracleWitness, PSD_TOL};
use crate::mode::Mode;
use crate::polynomial::Poly;
use crate::scalar::{Precision, PrecisionPolicy};

pub use matrices::{
    dobsch_matrix, dobsch_matrix_with, extended_loewner_matrix, extended_loewner_matrix_with, hankel_convex_matrix,
    hankel_convex_matrix_with, kraus_matrix, kraus_matrix_with, loewner_matrix, loewner_matrix_with,
};
pub use sweep::{chebyshev_grid, dd_value, moment_matrix, optimal_q, QFamily};
pub(crate) use sweep::{basis_poly, rounding_guard};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The criterion could not be evaluated (e.g. derivatives unavailable).
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Loewner,
    ExtendedLoewner,
    Kraus,
    Dobsch,
    Hankel,
}

/// Configuration at which a criterion value was observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// `[nodes]_{f N(q)}`.
    Divided {
        nodes: Vec<f64>,
        q: Poly,
        value: f64,
        scale: f64,
    },
    /// Smallest eigenvalue of a criterion matrix.
    Matrix {
        matrix: MatrixKind,
        nodes: Vec<f64>,
        base: Option<f64>,
        t: Option<f64>,
        entries: Vec<Vec<f64>>,
        value: f64,
        norm: f64,
    },
    /// Order-`k` divided difference from the regularity scan.
    Ktone { nodes: Vec<f64>, value: f64, scale: f64 },
    Oracle(OracleWitness),
}

impl Witness {
    /// The reported value: a divided difference or a smallest eigenvalue.
    pub fn value(&self) -> f64 {
        match self {
            Witness::Divided { value, .. } | Witness::Matrix { value, .. } | Witness::Ktone { value, .. } => *value,
            Witness::Oracle(w) => w.check.min_eigenvalue,
        }
    }

    /// Recomputes the value from the stored configuration.
    pub fn reevaluate(&self, f: &FunctionModel, n: usize, precision: Precision) -> Result<f64> {
        match self {
            Witness::Divided { nodes, q, .. } => {
                let ms = NodeMultiset::new(nodes)?;
                Ok(dd_value(f, &ms, q, precision)?.0)
            }
            Witness::Ktone { nodes, .. } => divided_difference(f, &NodeMultiset::new(nodes)?, precision),
            Witness::Matrix {
                matrix, nodes, base, t, ..
            } => {
                let m = match matrix {
                    MatrixKind::Loewner => loewner_matrix_with(f, nodes, precision)?,
                    MatrixKind::ExtendedLoewner => extended_loewner_matrix_with(f, nodes, precision)?,
                    MatrixKind::Kraus => {
                        kraus_matrix_with(f, nodes, base.ok_or_else(|| invalid("Kraus witness without base"))?, precision)?
                    }
                    MatrixKind::Dobsch => {
                        dobsch_matrix_with(f, t.ok_or_else(|| invalid("Dobsch witness without t"))?, n, precision)?
                    }
                    MatrixKind::Hankel => {
                        hankel_convex_matrix_with(f, t.ok_or_else(|| invalid("Hankel witness without t"))?, n, precision)?
                    }
                };
                Ok(eigh(&m).min())
            }
            Witness::Oracle(w) => Ok(eigh(&w.tested_matrix(f)?).min()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionRecord {
    pub id: String,
    pub condition: String,
    pub configs: usize,
    pub verdict: Verdict,
    pub tolerance: f64,
    /// Most negative normalized value seen (value / scale).
    pub worst_score: f64,
    pub worst: Option<Witness>,
    /// Reason for a skip, or extra detail.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub clean: bool,
    pub passing: Vec<String>,
    pub failing: Vec<String>,
    /// Pairs of criteria with opposite verdicts.
    pub conflicts: Vec<(String, String)>,
}

impl Agreement {
    pub fn from_records(records: &[CriterionRecord]) -> Self {
        let passing: Vec<String> = records
            .iter()
            .filter(|r| r.verdict == Verdict::Pass)
            .map(|r| r.id.clone())
            .collect();
        let failing: Vec<String> = records
            .iter()
            .filter(|r| r.verdict == Verdict::Fail)
            .map(|r| r.id.clone())
            .collect();
        let mut conflicts = Vec::new();
        for p in &passing {
            for q in &failing {
                conflicts.push((p.clone(), q.clone()));
            }
        }
        Agreement {
            clean: conflicts.is_empty(),
            passing,
            failing,
            conflicts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub function: String,
    pub domain: Interval,
    pub interval: Interval,
    pub n: usize,
    pub mode: Mode,
    pub seed: u64,
    pub precision: Precision,
    pub records: Vec<CriterionRecord>,
    pub agreement: Agreement,
    /// Conjunction of the evaluated criteria.
    pub verdict: Verdict,
}

impl CriterionReport {
    pub fn record(&self, id: &str) -> Option<&CriterionRecord> {
        self.records.iter().find(|r| r.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    /// Sampled configurations per criterion.
    pub configs: usize,
    pub seed: u64,
    pub tol: f64,
    /// Points of the Chebyshev t-grid for derivative criteria.
    pub grid: usize,
    pub precision: Precision,
    pub policy: PrecisionPolicy,
    pub oracle_trials: usize,
    /// Restrict to these criterion ids; all when `None`.
    pub only: Option<Vec<String>>,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            configs: 1000,
            seed: 0,
            tol: PSD_TOL,
            grid: 257,
            precision: Precision::Auto,
            policy: PrecisionPolicy::default(),
            oracle_trials: 1000,
            only: None,
        }
    }
}

/// Criterion ids for a mode, with the condition each one checks.
pub fn criteria(mode: Mode) -> &'static [(&'static str, &'static str)] {
    match mode {
        Mode::Monotone => &[
            ("dd-real", "[x_0, ..., x_{2n-1}]_{f q^2} >= 0 for real q of degree < n"),
            ("dd-complex", "[x_0, ..., x_{2n-1}]_{f N(q)} >= 0 for complex q of degree < n"),
            ("dd-confluent", "[x_1, x_1, ..., x_n, x_n]_{f N(q)} >= 0"),
            ("loewner", "Loewner matrix ([x_i, x_j]_f) is PSD"),
            ("extended-loewner", "extended Loewner matrix ([x_1..x_i, x_1..x_j]_f) is PSD"),
            ("derivative", "f is (2n-1)-tone and (f N(q))^(2n-1) >= 0 on the t-grid"),
            ("dobsch", "f is (2n-1)-tone and the Dobsch matrix is PSD on the t-grid"),
            ("oracle", "f(A) <= f(B) for sampled A <= B"),
        ],
        Mode::Convex => &[
            ("dd-real", "[x_0, ..., x_{2n}]_{f q^2} >= 0 for real q of degree < n"),
            ("dd-complex", "[x_0, ..., x_{2n}]_{f N(q)} >= 0 for complex q of degree < n"),
            ("dd-confluent-base", "[x_1, x_1, ..., x_n, x_n, x_l]_{f N(q)} >= 0 with x_l a node"),
            ("dd-confluent-free", "[x_1, x_1, ..., x_n, x_n, x_0]_{f N(q)} >= 0 with x_0 free"),
            ("kraus-base", "Kraus matrix ([x_i, x_j, x_l]_f) is PSD with x_l a node"),
            ("kraus-free", "Kraus matrix ([x_i, x_j, x_0]_f) is PSD with x_0 free"),
            ("derivative", "f is 2n-tone and (f N(q))^(2n) >= 0 on the t-grid"),
            ("hankel", "f is 2n-tone and the Hankel matrix is PSD on the t-grid"),
            ("oracle", "f(tA + (1-t)B) <= t f(A) + (1-t) f(B) for sampled A, B, t"),
        ],
    }
}

fn check_inputs(f: &FunctionModel, n: usize, interval: Interval) -> Result<()> {
    if n == 0 {
        return Err(invalid("order n must be at least 1"));
    }
    if !f.domain().contains_interval(&interval) {
        return Err(invalid(format!(
            "interval {interval} is not inside the domain {} of {}",
            f.domain(),
            f.name()
        )));
    }
    Ok(())
}

fn condition(mode: Mode, id: &str) -> Result<&'static str> {
    criteria(mode)
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, c)| *c)
        .ok_or_else(|| invalid(format!("unknown {mode} criterion `{id}`")))
}

/// Runs one criterion.
pub fn run_criterion(
    f: &FunctionModel,
    n: usize,
    interval: Interval,
    mode: Mode,
    id: &str,
    config: &CertifyConfig,
) -> Result<CriterionRecord> {
    check_inputs(f, n, interval)?;
    let cond = condition(mode, id)?;
    let skipped = |e: Error| CriterionRecord {
        id: id.into(),
        condition: cond.into(),
        configs: 0,
        verdict: Verdict::Skipped,
        tolerance: config.tol,
        worst_score: 0.0,
        worst: None,
        note: Some(e.to_string()),
    };
    let run = sweep::Runner {
        f,
        n,
        interval,
        mode,
        config,
        sampler: NodeSampler::new(config.seed).with_tag(&format!("{mode}/{id}")),
    };
    let outcome = match id {
        "oracle" => {
            let cfg = OracleConfig {
                trials: config.oracle_trials,
                seed: config.seed,
                tol: config.tol,
                ..OracleConfig::default()
            };
            let v = monotonicity_oracle(f, n, interval, mode, &cfg)?;
            let note = format!("{} trials, {} refinement steps per start", v.trials, v.refine_steps);
            return Ok(CriterionRecord {
                id: id.into(),
                condition: cond.into(),
                configs: v.trials,
                verdict: if v.pass { Verdict::Pass } else { Verdict::Fail },
                tolerance: v.tolerance,
                worst_score: v.worst_score,
                worst: v.witness.map(Witness::Oracle),
                note: Some(note),
            });
        }
        _ => run.run(id),
    };
    match outcome {
        Ok(s) => Ok(CriterionRecord {
            id: id.into(),
            condition: cond.into(),
            configs: s.configs,
            verdict: if s.violated { Verdict::Fail } else { Verdict::Pass },
            tolerance: config.tol,
            worst_score: s.worst_score,
            worst: s.worst,
            note: s.note,
        }),
        Err(e @ Error::DerivativeUnavailable { .. }) => Ok(skipped(e)),
        Err(e) => Err(e),
    }
}

/// `[nodes]_{f N(q)}` sweep over distinct node tuples of the mode's arity.
pub fn dd_criterion(
    f: &FunctionModel,
    n: usize,
    interval: Interval,
    mode: Mode,
    q_source: QFamily,
    config: &CertifyConfig,
) -> Result<CriterionRecord> {
    run_criterion(
        f,
        n,
        interval,
        mode,
        match q_source {
            QFamily::Real => "dd-real",
            QFamily::Complex => "dd-complex",
        },
        config,
    )
}

/// Doubled-node sweep; in convex mode `free_base` selects a free extra node
/// instead of one of the doubled nodes.
pub fn confluent_dd_criterion(
    f: &FunctionModel,
    n: usize,
    interval: Interval,
    mode: Mode,
    free_base: bool,
    config: &CertifyConfig,
) -> Result<CriterionRecord> {
    let id = match (mode, free_base) {
        (Mode::Monotone, _) => "dd-confluent",
        (Mode::Convex, false) => "dd-confluent-base",
        (Mode::Convex, true) => "dd-confluent-free",
    };
    run_criterion(f, n, interval, mode, id, config)
}

/// Runs every applicable criterion and the oracle.
pub fn certify(
    f: &FunctionModel,
    n: usize,
    interval: Interval,
    mode: Mode,
    config: &CertifyConfig,
) -> Result<CriterionReport> {
    check_inputs(f, n, interval)?;
    if let Some(only) = &config.only {
        for id in only {
            condition(mode, id)?;
        }
    }
    let mut records = Vec::new();
    for (id, _) in criteria(mode) {
        if config.only.as_ref().is_some_and(|o| !o.iter().any(|x| x == id)) {
            continue;
        }
        records.push(run_criterion(f, n, interval, mode, id, config)?);
    }
    let agreement = Agreement::from_records(&records);
    let verdict = if records.iter().any(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if records.iter().any(|r| r.verdict == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Skipped
    };
    Ok(CriterionReport {
        function: f.name().to_string(),
        domain: f.domain(),
        interval,
        n,
        mode,
        seed: config.seed,
        precision: config.precision,
        records,
        agreement,
        verdict,
    })
}

/// `q = sum_i c_i prod_{j != i} (x - x_j)`: the polynomial that turns
/// `c^* L c` into a confluent divided difference.
pub fn pole_basis_q(nodes: &[f64], c: &[Complex64]) -> Poly {
    let mut q = Poly::zero();
    for (i, ci) in c.iter().enumerate() {
        let roots: Vec<Complex64> = nodes
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, x)| Complex64::new(*x, 0.0))
            .collect();
        q = &q + &Poly::from_roots(&roots).scale(*ci);
    }
    q
}
