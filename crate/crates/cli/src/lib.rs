//! `matmono` command line: certification runs, oracle searches, finite-set
//! analysis, counterexample generation and integral-identity checks.
//!
//! Exit codes: 0 property holds / task succeeded, 1 property refuted (a
//! witness is emitted), 2 usage error, 3 numerical failure or conflicting
//! criteria.

use std::ffi::OsString;
use std::fs;
use std::hash::{BuildHasher, Hasher};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use matmono::criteria::{certify, CertifyConfig, Verdict};
use matmono::expr::{catalog, catalog_entry, composites, CatalogEntry, GroundTruth};
use matmono::gensets::{
    build_counterexample, extension_feasibility, genset_check, glue_check, CounterexampleBundle, FeasibilityReport,
    FiniteFunction, GensetConfig, GlueReport,
};
use matmono::integral::{verify_convex_identity, verify_monotone_identity, IdentityReport, DEFAULT_QUAD_ORDER};
use matmono::linalg::PSD_TOL;
use matmono::{Error, FunctionModel, Interval, Mode, Precision};
use serde::Serialize;

pub mod report;

use report::{reevaluate, witness_valid, ReplayEntry, ReplayReport, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable holding the default for `--jobs`.
pub const JOBS_ENV: &str = "MATMONO_JOBS";

#[derive(Debug, Parser)]
#[command(name = "matmono", version, about = "Certify matrix monotonicity and convexity of a fixed order")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = JOBS_ENV)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Leave the timestamp out of reports (byte-identical reruns).
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Monotone,
    Convex,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Monotone => Mode::Monotone,
            ModeArg::Convex => Mode::Convex,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every criterion (and the oracle) on an interval or a finite set.
    Certify(CertifyArgs),
    /// Brute-force matrix search only.
    Oracle(OracleArgs),
    /// Analyse a function given on finite set of points.
    Genset(GensetArgs),
    /// Build the finite-set function with no monotone extension.
    Counterexample(CounterexampleArgs),
    /// Check the integral representation of the Loewner / Kraus matrix.
    Identity(IdentityArgs),
    /// List the built-in functions and their known classes.
    Catalog(CatalogArgs),
}

#[derive(Debug, Args)]
struct FunctionArgs {
    /// Function of `x`, e.g. "-1/x" or "x^3 - exp(x)".
    #[arg(short = 'f', long = "function", allow_hyphen_values = true)]
    function: Option<String>,
    /// Built-in function id (see `matmono catalog`); `pow:<p>` for x^p.
    #[arg(long, conflicts_with = "function")]
    catalog: Option<String>,
    /// Domain `lo,hi` of a parsed function (default: the real line).
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Order n.
    #[arg(short = 'n', long = "order", default_value_t = 2)]
    order: usize,
    /// Interval `lo,hi` (default: the catalog interval, else the domain).
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Monotone)]
    mode: ModeArg,
    /// Random seed (default: fresh; always echoed in the report).
    #[arg(long)]
    seed: Option<u64>,
    /// Relative PSD / sign tolerance.
    #[arg(long, default_value_t = PSD_TOL)]
    tol: f64,
    /// standard, extended or auto.
    #[arg(long, default_value = "auto")]
    precision: String,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Two-column `point value` file; certifies the finite function instead
    /// of an interval (with -f, values are taken from the function).
    #[arg(long)]
    points: Option<PathBuf>,
    /// Sampled configurations per criterion.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Chebyshev grid size for derivative criteria.
    #[arg(long, default_value_t = 257)]
    grid: usize,
    /// Oracle trials.
    #[arg(long, default_value_t = 1000)]
    oracle_trials: usize,
    /// Comma-separated criterion ids (default: all).
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<String>>,
    /// Random `q` per subset for finite sets.
    #[arg(long, default_value_t = 16)]
    q_samples: usize,
    /// Re-evaluate the witnesses of a saved report instead of certifying.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Flip the verdict of one criterion (testing the conflict path).
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

#[derive(Debug, Args)]
struct GensetArgs {
    /// Two-column `point value` file.
    #[arg(long)]
    points: PathBuf,
    /// Second file: check the gluing hypothesis and certify the union.
    #[arg(long)]
    glue: Option<PathBuf>,
    #[arg(short = 'n', long = "order", default_value_t = 2)]
    order: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = PSD_TOL)]
    tol: f64,
    #[arg(long, default_value = "auto")]
    precision: String,
    #[arg(long, default_value_t = 16)]
    q_samples: usize,
    /// Exhaustive enumeration up to this many subsets per order.
    #[arg(long, default_value_t = 100_000)]
    max_subsets: usize,
}

#[derive(Debug, Args)]
struct CounterexampleArgs {
    #[arg(short = 'n', long = "order", default_value_t = 2)]
    order: usize,
    /// 2n+2 increasing points (default 1, 2, ..., 2n+2).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    points: Option<Vec<f64>>,
    /// 2n-2 poles outside the points (default: n-1 below, n-1 above).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    poles: Option<Vec<f64>>,
    /// Point of the middle gap to extend to (default: its midpoint).
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    /// Grid size of the feasibility scan.
    #[arg(long, default_value_t = 4000)]
    grid: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct IdentityArgs {
    #[command(flatten)]
    function: FunctionArgs,
    /// Distinct nodes x_1, ..., x_n.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    nodes: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Monotone)]
    mode: ModeArg,
    /// Base point of the Kraus matrix (convex mode; default: mid-hull).
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_QUAD_ORDER)]
    quad_order: usize,
    /// Largest acceptable entrywise relative error.
    #[arg(long, default_value_t = 1e-8)]
    max_error: f64,
}

#[derive(Debug, Args)]
struct CatalogArgs {
    /// Show one entry.
    id: Option<String>,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn exit_code(f: &Failure) -> i32 {
    match f {
        Failure::Usage(_) => EXIT_USAGE,
        Failure::Lib(Error::Syntax { .. } | Error::InvalidInput(_) | Error::Hypothesis(_) | Error::Domain { .. }) => {
            EXIT_USAGE
        }
        Failure::Lib(_) => EXIT_NUMERICAL,
        Failure::Io(_) => EXIT_USAGE,
    }
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(j) = cli.jobs {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let out = Output {
        format: cli.format,
        path: cli.output.clone(),
        timestamp: !cli.no_timestamp,
    };
    let sub = subcommand_name(&cli.command);
    let result = match cli.command {
        Command::Certify(a) => cmd_certify(a, &out),
        Command::Oracle(a) => cmd_oracle(a, &out),
        Command::Genset(a) => cmd_genset(a, &out),
        Command::Counterexample(a) => cmd_counterexample(a, &out),
        Command::Identity(a) => cmd_identity(a, &out),
        Command::Catalog(a) => cmd_catalog(a, &out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => {
                    eprintln!("error: {msg}\n");
                    let mut cmd = Cli::command();
                    cmd.build();
                    if let Some(s) = cmd.find_subcommand_mut(sub) {
                        eprintln!("{}", s.render_usage());
                    }
                }
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Io(msg) => eprintln!("error: {msg}"),
            }
            exit_code(&f)
        }
    }
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Certify(_) => "certify",
        Command::Oracle(_) => "oracle",
        Command::Genset(_) => "genset",
        Command::Counterexample(_) => "counterexample",
        Command::Identity(_) => "identity",
        Command::Catalog(_) => "catalog",
    }
}

struct Output {
    format: Format,
    path: Option<PathBuf>,
    timestamp: bool,
}

impl Output {
    fn timestamp(&self) -> Option<u64> {
        self.timestamp
            .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
    }

    /// Emits `json` or, in text mode, `text`.
    fn emit<T: Serialize>(&self, json: &T, text: impl FnOnce() -> String) -> CliResult<()> {
        let body = match self.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(json).map_err(|e| Failure::Io(e.to_string()))?;
                s.push('\n');
                s
            }
            Format::Text => text(),
        };
        match &self.path {
            Some(p) => fs::write(p, body).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(body.as_bytes())
                    .and_then(|_| stdout.flush())
                    .map_err(|e| Failure::Io(e.to_string()))
            }
        }
    }
}

/// JSON body plus an optional timestamp.
#[derive(Serialize)]
struct Stamped<T: Serialize> {
    #[serde(flatten)]
    body: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

fn fresh_seed() -> u64 {
    std::collections::hash_map::RandomState::new().build_hasher().finish()
}

fn parse_precision(s: &str) -> CliResult<Precision> {
    s.parse().map_err(Failure::Usage)
}

fn parse_interval(s: &str) -> CliResult<Interval> {
    s.parse().map_err(|e: Error| Failure::Usage(e.to_string()))
}

fn read_points(path: &Path) -> CliResult<FiniteFunction> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(FiniteFunction::parse_text(&text)?)
}

fn pairs(f: &FiniteFunction) -> Vec<(f64, f64)> {
    f.points().iter().copied().zip(f.values().iter().copied()).collect()
}

/// The function plus its catalog entry when one was named.
fn resolve_function(a: &FunctionArgs) -> CliResult<Option<(FunctionModel, Option<CatalogEntry>)>> {
    match (&a.function, &a.catalog) {
        (Some(text), _) => {
            let domain = a.domain.as_deref().map(parse_interval).transpose()?;
            Ok(Some((FunctionModel::parse(text, domain)?, None)))
        }
        (None, Some(id)) => {
            let e = catalog_entry(id)?;
            Ok(Some((e.model.clone(), Some(e))))
        }
        (None, None) => Ok(None),
    }
}

fn require_function(a: &FunctionArgs) -> CliResult<(FunctionModel, Option<CatalogEntry>)> {
    resolve_function(a)?.ok_or_else(|| Failure::Usage("a function is required (-f TEXT or --catalog ID)".into()))
}

fn run_interval(run: &RunArgs, f: &FunctionModel, entry: Option<&CatalogEntry>) -> CliResult<Interval> {
    match &run.interval {
        Some(s) => parse_interval(s),
        None => Ok(entry.map_or_else(|| f.domain().finite_window(), |e| e.interval)),
    }
}

fn verdict_code(r: &Report) -> i32 {
    if !r.agreement.consistent {
        EXIT_NUMERICAL
    } else {
        match r.verdict {
            Verdict::Pass => EXIT_OK,
            Verdict::Fail => EXIT_REFUTED,
            Verdict::Skipped => EXIT_NUMERICAL,
        }
    }
}

fn cmd_certify(a: CertifyArgs, out: &Output) -> CliResult<i32> {
    if let Some(path) = &a.replay {
        return replay(path, out);
    }
    let seed = a.run.seed.unwrap_or_else(fresh_seed);
    let precision = parse_precision(&a.run.precision)?;
    if let Some(path) = &a.points {
        let file = read_points(path)?;
        let (ff, name) = match resolve_function(&a.function)? {
            Some((f, _)) => (FiniteFunction::restrict(&f, file.points())?, f.name().to_string()),
            None => (file, path.display().to_string()),
        };
        if Mode::from(a.run.mode) != Mode::Monotone {
            return Err(Failure::Usage("finite sets are certified in monotone mode only".into()));
        }
        let config = GensetConfig {
            tol: a.run.tol,
            seed,
            q_samples: a.q_samples,
            precision,
            ..GensetConfig::default()
        };
        let rep = genset_check(&ff, a.run.order, &config)?;
        let mut report = Report::from_genset(&rep, name, pairs(&ff), precision);
        finish_certify(&mut report, a.inject_fault.as_deref(), out)
    } else {
        let (f, entry) = require_function(&a.function)?;
        let interval = run_interval(&a.run, &f, entry.as_ref())?;
        let config = CertifyConfig {
            configs: a.samples,
            seed,
            tol: a.run.tol,
            grid: a.grid,
            precision,
            oracle_trials: a.oracle_trials,
            only: a.criteria.clone(),
            ..CertifyConfig::default()
        };
        let rep = certify(&f, a.run.order, interval, a.run.mode.into(), &config)?;
        let mut report = Report::from_certify(&rep, entry.map(|e| e.id), a.run.tol);
        finish_certify(&mut report, a.inject_fault.as_deref(), out)
    }
}

fn finish_certify(report: &mut Report, fault: Option<&str>, out: &Output) -> CliResult<i32> {
    if let Some(id) = fault {
        let c = report
            .criteria
            .iter_mut()
            .find(|c| c.id == id)
            .ok_or_else(|| Failure::Usage(format!("no criterion `{id}` to fault")))?;
        c.verdict = match c.verdict {
            Verdict::Pass => Verdict::Fail,
            _ => Verdict::Pass,
        };
        c.note = Some("verdict flipped by fault injection".into());
        report.recompute_agreement();
    }
    report.timestamp = out.timestamp();
    out.emit(&*report, || report.to_text())?;
    Ok(verdict_code(report))
}

fn replay(path: &Path, out: &Output) -> CliResult<i32> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let report: Report =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: not a report: {e}", path.display())))?;
    let f = match (&report.catalog, &report.points) {
        (Some(id), _) => Some(catalog_entry(id)?.model),
        (None, Some(_)) => None,
        (None, None) => Some(FunctionModel::parse(&report.function, report.domain)?),
    };
    let mut witnesses = Vec::new();
    for c in &report.criteria {
        if let Some(w) = &c.witness {
            let recomputed = reevaluate(w, f.as_ref(), report.order, report.precision)?;
            witnesses.push(ReplayEntry {
                criterion: c.id.clone(),
                stored: w.value(),
                recomputed,
                valid: witness_valid(w, recomputed),
            });
        }
    }
    let rep = ReplayReport {
        function: report.function.clone(),
        order: report.order,
        mode: report.mode,
        all_valid: witnesses.iter().all(|w| w.valid),
        witnesses,
    };
    out.emit(
        &Stamped {
            body: &rep,
            timestamp: out.timestamp(),
        },
        || rep.to_text(),
    )?;
    Ok(if rep.witnesses.is_empty() {
        EXIT_OK
    } else if rep.all_valid {
        EXIT_REFUTED
    } else {
        EXIT_NUMERICAL
    })
}

fn cmd_oracle(a: OracleArgs, out: &Output) -> CliResult<i32> {
    let (f, entry) = require_function(&a.function)?;
    let interval = run_interval(&a.run, &f, entry.as_ref())?;
    let config = CertifyConfig {
        seed: a.run.seed.unwrap_or_else(fresh_seed),
        tol: a.run.tol,
        precision: parse_precision(&a.run.precision)?,
        oracle_trials: a.trials,
        only: Some(vec!["oracle".into()]),
        ..CertifyConfig::default()
    };
    let rep = certify(&f, a.run.order, interval, a.run.mode.into(), &config)?;
    let mut report = Report::from_certify(&rep, entry.map(|e| e.id), a.run.tol);
    finish_certify(&mut report, None, out)
}

#[derive(Serialize)]
struct GlueOutput<'a> {
    seed: u64,
    tol: f64,
    #[serde(flatten)]
    glue: &'a GlueReport,
}

fn cmd_genset(a: GensetArgs, out: &Output) -> CliResult<i32> {
    let precision = parse_precision(&a.precision)?;
    let config = GensetConfig {
        tol: a.tol,
        seed: a.seed.unwrap_or_else(fresh_seed),
        q_samples: a.q_samples,
        max_subsets: a.max_subsets,
        precision,
        ..GensetConfig::default()
    };
    let f1 = read_points(&a.points)?;
    match &a.glue {
        None => {
            let rep = genset_check(&f1, a.order, &config)?;
            let mut report = Report::from_genset(&rep, a.points.display().to_string(), pairs(&f1), precision);
            finish_certify(&mut report, None, out)
        }
        Some(p2) => {
            let f2 = read_points(p2)?;
            let g = glue_check(&f1, &f2, a.order, &config)?;
            let body = GlueOutput {
                seed: config.seed,
                tol: config.tol,
                glue: &g,
            };
            out.emit(
                &Stamped {
                    body,
                    timestamp: out.timestamp(),
                },
                || glue_text(&g),
            )?;
            Ok(if !g.consistent {
                EXIT_NUMERICAL
            } else if g.union.verdict == Verdict::Fail {
                EXIT_REFUTED
            } else {
                EXIT_OK
            })
        }
    }
}

fn glue_text(g: &GlueReport) -> String {
    format!(
        "hypothesis {} (fewest shared points between: {}, required {})\nleft       {}\nright      {}\nunion      {}\nconsistent {}\n",
        if g.hypothesis_met { "met" } else { "not met" },
        g.min_shared_between.map_or("-".to_string(), |m| m.to_string()),
        g.required,
        g.left.verdict,
        g.right.verdict,
        g.union.verdict,
        g.consistent
    )
}

#[derive(Serialize)]
struct CounterexampleOutput<'a> {
    n: usize,
    bundle: &'a CounterexampleBundle,
    /// The bundle's own check.
    genset_verdict: Verdict,
    feasibility: &'a FeasibilityReport,
    /// Certified and no extension to `x0` exists.
    confirmed: bool,
}

fn cmd_counterexample(a: CounterexampleArgs, out: &Output) -> CliResult<i32> {
    let n = a.order;
    if n < 2 {
        return Err(Failure::Usage("the counterexample needs n >= 2".into()));
    }
    let points = a.points.unwrap_or_else(|| (1..=2 * n + 2).map(|i| i as f64).collect());
    let poles = match a.poles {
        Some(p) => p,
        None => {
            let (lo, hi) = (points[0], points[points.len() - 1]);
            let below = (0..n - 1).map(|j| lo - 1.0 - j as f64 / 2.0);
            let above = (0..n - 1).map(|j| hi + 1.0 + j as f64);
            below.chain(above).collect()
        }
    };
    let bundle = build_counterexample(n, &points, &poles)?;
    let x0 = a.x0.unwrap_or((bundle.gap.0 + bundle.gap.1) / 2.0);
    let config = GensetConfig {
        seed: a.seed.unwrap_or_else(fresh_seed),
        ..GensetConfig::default()
    };
    let check = genset_check(&bundle.f, n, &config)?;
    let feas = extension_feasibility(&bundle, x0, a.grid, &config)?;
    let confirmed = check.verdict == Verdict::Pass && feas.empty;
    let body = CounterexampleOutput {
        n,
        bundle: &bundle,
        genset_verdict: check.verdict,
        feasibility: &feas,
        confirmed,
    };
    out.emit(
        &Stamped {
            body,
            timestamp: out.timestamp(),
        },
        || {
            let ys: Vec<String> = feas.bindings.iter().map(|b| format!("{}: {:.12}", b.side, b.y)).collect();
            format!(
                "n          {n}\npoints     {:?}\nvalues     {:?}\naux poles  {:?}\ngap        ({}, {})\ngenset     {}\nx0         {x0}\nr1(x0)     {:.12}\nr2(x0)     {:.12}\nbindings   {}\nempty      {} (grid: {})\n",
                bundle.f.points(),
                bundle.f.values(),
                bundle.aux_poles,
                bundle.gap.0,
                bundle.gap.1,
                check.verdict,
                feas.r1_value,
                feas.r2_value,
                ys.join(", "),
                feas.empty,
                feas.grid_empty
            )
        },
    )?;
    Ok(if confirmed { EXIT_OK } else { EXIT_REFUTED })
}

#[derive(Serialize)]
struct IdentityOutput<'a> {
    function: &'a str,
    mode: Mode,
    #[serde(flatten)]
    report: &'a IdentityReport,
    max_error: f64,
    holds: bool,
}

fn cmd_identity(a: IdentityArgs, out: &Output) -> CliResult<i32> {
    let (f, _) = require_function(&a.function)?;
    let mode: Mode = a.mode.into();
    let rep = match mode {
        Mode::Monotone => {
            if a.x0.is_some() {
                return Err(Failure::Usage("--x0 applies to --mode convex only".into()));
            }
            verify_monotone_identity(&f, &a.nodes, a.quad_order)?
        }
        Mode::Convex => {
            let (lo, hi) = a
                .nodes
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
            verify_convex_identity(&f, &a.nodes, a.x0.unwrap_or((lo + hi) / 2.0), a.quad_order)?
        }
    };
    let holds = rep.max_rel_error <= a.max_error;
    let body = IdentityOutput {
        function: f.name(),
        mode,
        report: &rep,
        max_error: a.max_error,
        holds,
    };
    out.emit(
        &Stamped {
            body,
            timestamp: out.timestamp(),
        },
        || {
            let mut s = format!(
                "function   {}\nmode       {mode}\nnodes      {:?}\n",
                f.name(),
                rep.nodes
            );
            if let Some(x0) = rep.x0 {
                s += &format!("x0         {x0}\n");
            }
            s += &format!(
                "quad order {}\nmax error  {:.3e} (limit {:.1e})\nholds      {holds}\n",
                rep.quad_order, rep.max_rel_error, a.max_error
            );
            s
        },
    )?;
    Ok(if holds { EXIT_OK } else { EXIT_REFUTED })
}

#[derive(Serialize)]
struct CatalogRow {
    id: String,
    function: String,
    domain: String,
    interval: String,
    truth: GroundTruth,
}

fn cmd_catalog(a: CatalogArgs, out: &Output) -> CliResult<i32> {
    let entries: Vec<CatalogEntry> = match &a.id {
        Some(id) => vec![catalog_entry(id)?],
        None => catalog().into_iter().chain(composites()).collect(),
    };
    let rows: Vec<CatalogRow> = entries
        .iter()
        .map(|e| CatalogRow {
            id: e.id.clone(),
            function: e.model.name().to_string(),
            domain: e.model.domain().to_string(),
            interval: e.interval.to_string(),
            truth: e.truth.clone(),
        })
        .collect();
    out.emit(&rows, || {
        let mut s = format!("{:<16} {:<36} {:<14} {:<10} {:<10}\n", "id", "function", "interval", "monotone", "convex");
        for r in &rows {
            s += &format!(
                "{:<16} {:<36} {:<14} {:<10} {:<10}\n",
                r.id,
                r.function,
                r.interval,
                orders(&r.truth.monotone),
                orders(&r.truth.convex)
            );
        }
        s
    })?;
    Ok(EXIT_OK)
}

fn orders(o: &matmono::expr::OrderSet) -> String {
    use matmono::expr::OrderSet::*;
    match o {
        Empty => "none".into(),
        UpTo(k) => format!("n <= {k}"),
        All => "all n".into(),
    }
}

#[cfg(test)]
mod tests;
