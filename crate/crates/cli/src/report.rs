//! JSON / text reports and witness replay.

use std::fmt::Write as _;

use matmono::criteria::{CriterionReport, Verdict, Witness};
use matmono::gensets::{GensetReport, GensetWitness};
use matmono::{FunctionModel, Interval, Mode, Precision};
use serde::{Deserialize, Serialize};

/// Either kind of witness a report can carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportWitness {
    Criterion(Witness),
    Genset(GensetWitness),
}

impl ReportWitness {
    pub fn value(&self) -> f64 {
        match self {
            ReportWitness::Criterion(w) => w.value(),
            ReportWitness::Genset(w) => w.value,
        }
    }

    /// Size of the quantity the value was cancelled out of.
    fn magnitude(&self) -> f64 {
        match self {
            ReportWitness::Criterion(Witness::Divided { scale, .. } | Witness::Ktone { scale, .. }) => *scale,
            ReportWitness::Criterion(Witness::Matrix { norm, .. }) => *norm,
            ReportWitness::Criterion(Witness::Oracle(w)) => w.check.norm,
            ReportWitness::Genset(w) => w.scale,
        }
    }
}

/// Intervals as `"lo,hi"`: JSON has no infinities.
mod interval_text {
    use matmono::Interval;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(i: &Option<Interval>, s: S) -> Result<S::Ok, S::Error> {
        match i {
            Some(i) => s.serialize_str(&format!("{},{}", i.lo, i.hi)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Interval>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| t.parse().map_err(D::Error::custom))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionEntry {
    pub id: String,
    pub condition: String,
    pub configs: usize,
    pub verdict: Verdict,
    pub worst_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<ReportWitness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementEntry {
    pub consistent: bool,
    pub conflicts: Vec<(String, String)>,
}

/// Report of `certify`, `oracle` and `genset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub function: String,
    /// Catalog id the function came from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "interval_text")]
    pub domain: Option<Interval>,
    pub order: usize,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "interval_text")]
    pub interval: Option<Interval>,
    /// `(point, value)` pairs of a finite function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<(f64, f64)>>,
    pub seed: u64,
    pub tol: f64,
    pub precision: Precision,
    pub criteria: Vec<CriterionEntry>,
    pub agreement: AgreementEntry,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl Report {
    pub fn from_certify(r: &CriterionReport, catalog: Option<String>, tol: f64) -> Self {
        let criteria = r
            .records
            .iter()
            .map(|rec| CriterionEntry {
                id: rec.id.clone(),
                condition: rec.condition.clone(),
                configs: rec.configs,
                verdict: rec.verdict,
                worst_score: rec.worst_score,
                witness: (rec.verdict == Verdict::Fail)
                    .then(|| rec.worst.clone().map(ReportWitness::Criterion))
                    .flatten(),
                note: rec.note.clone(),
            })
            .collect();
        Report {
            function: r.function.clone(),
            catalog,
            domain: Some(r.domain),
            order: r.n,
            mode: r.mode,
            interval: Some(r.interval),
            points: None,
            seed: r.seed,
            tol,
            precision: r.precision,
            criteria,
            agreement: AgreementEntry {
                consistent: r.agreement.clean,
                conflicts: r.agreement.conflicts.clone(),
            },
            verdict: r.verdict,
            timestamp: None,
        }
    }

    pub fn from_genset(r: &GensetReport, function: String, pairs: Vec<(f64, f64)>, precision: Precision) -> Self {
        let criteria = r
            .orders
            .iter()
            .map(|o| CriterionEntry {
                id: format!("order-{}", o.k),
                condition: format!("[x_0, ..., x_{}]_{{f N(q)}} >= 0 on subsets, deg q < {}", 2 * o.k - 1, o.k),
                configs: o.subsets,
                verdict: if o.pass { Verdict::Pass } else { Verdict::Fail },
                worst_score: o.worst_score,
                witness: (!o.pass).then(|| o.worst.clone().map(ReportWitness::Genset)).flatten(),
                note: Some(format!(
                    "{} subsets ({}), {} q per subset",
                    o.subsets,
                    if o.exhaustive { "exhaustive" } else { "sampled" },
                    o.q_evaluations
                )),
            })
            .collect();
        let conflicts = if r.consistent {
            Vec::new()
        } else {
            vec![(format!("order-{}", r.n), "all-orders".to_string())]
        };
        Report {
            function,
            catalog: None,
            domain: None,
            order: r.n,
            mode: Mode::Monotone,
            interval: None,
            points: Some(pairs),
            seed: r.seed,
            tol: r.tol,
            precision,
            criteria,
            agreement: AgreementEntry {
                consistent: r.consistent,
                conflicts,
            },
            verdict: r.verdict,
            timestamp: None,
        }
    }

    /// Recomputes agreement and verdict from the criterion verdicts.
    pub fn recompute_agreement(&mut self) {
        let ids = |v: Verdict| -> Vec<String> {
            self.criteria
                .iter()
                .filter(|c| c.verdict == v)
                .map(|c| c.id.clone())
                .collect()
        };
        let (pass, fail) = (ids(Verdict::Pass), ids(Verdict::Fail));
        let conflicts: Vec<(String, String)> = pass
            .iter()
            .flat_map(|p| fail.iter().map(move |f| (p.clone(), f.clone())))
            .collect();
        self.agreement = AgreementEntry {
            consistent: conflicts.is_empty(),
            conflicts,
        };
        self.verdict = if !fail.is_empty() {
            Verdict::Fail
        } else if !pass.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Skipped
        };
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "function   {}", self.function);
        if let Some(id) = &self.catalog {
            let _ = writeln!(s, "catalog    {id}");
        }
        let _ = writeln!(s, "order      {}", self.order);
        let _ = writeln!(s, "mode       {}", self.mode);
        if let Some(i) = &self.interval {
            let _ = writeln!(s, "interval   {i}");
        }
        if let Some(p) = &self.points {
            let _ = writeln!(s, "points     {}", p.len());
        }
        let _ = writeln!(s, "seed       {}", self.seed);
        let _ = writeln!(s, "tol        {:e}", self.tol);
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<20} {:>8} {:>8} {:>12}  witness", "criterion", "configs", "verdict", "worst");
        for c in &self.criteria {
            let w = c
                .witness
                .as_ref()
                .map_or(String::new(), |w| format!("value {:.6e}", w.value()));
            let _ = writeln!(
                s,
                "{:<20} {:>8} {:>8} {:>12.4e}  {w}",
                c.id,
                c.configs,
                c.verdict.to_string(),
                c.worst_score
            );
        }
        let _ = writeln!(s);
        if self.agreement.consistent {
            let _ = writeln!(s, "agreement  consistent");
        } else {
            let pairs: Vec<String> = self.agreement.conflicts.iter().map(|(a, b)| format!("{a}/{b}")).collect();
            let _ = writeln!(s, "agreement  CONFLICT: {}", pairs.join(", "));
        }
        let _ = writeln!(s, "verdict    {}", self.verdict);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub criterion: String,
    pub stored: f64,
    pub recomputed: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub function: String,
    pub order: usize,
    pub mode: Mode,
    pub witnesses: Vec<ReplayEntry>,
    /// Every witness reproduced a violation.
    pub all_valid: bool,
}

impl ReplayReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("replay of {} (n = {}, {})\n", self.function, self.order, self.mode);
        for w in &self.witnesses {
            let _ = writeln!(
                s,
                "{:<20} stored {:>14.6e}  recomputed {:>14.6e}  {}",
                w.criterion,
                w.stored,
                w.recomputed,
                if w.valid { "valid" } else { "INVALID" }
            );
        }
        s
    }
}

/// A witness is valid when it recomputes to a negative value matching the
/// stored one.
pub fn witness_valid(w: &ReportWitness, recomputed: f64) -> bool {
    let stored = w.value();
    recomputed < 0.0 && (recomputed - stored).abs() <= 1e-8 * (stored.abs() + w.magnitude())
}

/// Re-evaluates a witness; `f` is needed for criterion witnesses only.
pub fn reevaluate(
    w: &ReportWitness,
    f: Option<&FunctionModel>,
    n: usize,
    precision: Precision,
) -> matmono::Result<f64> {
    match w {
        ReportWitness::Genset(g) => Ok(g.reevaluate()),
        ReportWitness::Criterion(c) => {
            let f = f.ok_or_else(|| matmono::Error::InvalidInput("report names no function to replay against".into()))?;
            c.reevaluate(f, n, precision)
        }
    }
}
