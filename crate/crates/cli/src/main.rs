// SPDX-License-Identifier: Apache-2.0
//! `posit-lab`: seeded accuracy experiments, traces, cycle counts and the
//! posit range table. Every CSV gets a `key=value` sidecar (`name.meta`).

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use posit_lab::cycles::{cycle_model, table1_report, CycleApp, CycleParams, CycleSystem};
use posit_lab::datagen::{GenKind, GenSpec, OpKind};
use posit_lab::harness::{
    forward_ensemble, pbd_ensemble, run_app_accuracy, run_exponent_trace, run_ops_accuracy,
    AppKind, RunOptions, DEFAULT_BUCKETS,
};
use posit_lab::kernels::PbdGuard;
use posit_lab::report;
use posit_lab::selftest::run_selftest;
use posit_lab::{Error, LseOrder, Precision, SystemId};

#[derive(Parser, Debug)]
#[command(
    name = "posit-lab",
    version,
    about = "Posit, log-space and binary64 accuracy experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed for every generator.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Comma-separated systems: binary64, log, oracle, posit{N}e{ES}.
    #[arg(long, global = true, default_value = SystemId::DEFAULT_SET, value_delimiter = ',', value_parser = parse_system)]
    systems: Vec<SystemId>,
    /// Oracle significand bits.
    #[arg(long, global = true, default_value_t = 256, value_parser = parse_prec)]
    prec: u32,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-operation relative error bucketed by result exponent.
    OpsAccuracy(OpsArgs),
    /// Final-result relative error over a generated ensemble.
    AppAccuracy(AppArgs),
    /// Base-2 exponent of the forward variables over time.
    Trace(TraceArgs),
    /// Analytic accelerator cycle counts.
    Cycles(CycleArgs),
    /// Range and precision of posit(64,ES) against binary64.
    Table1,
    /// Exhaustive small-posit and oracle consistency checks.
    Selftest,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Order {
    Sequential,
    Tree,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Guard {
    Inclusive,
    Literal,
}

#[derive(Args, Debug)]
struct Tuning {
    /// Summation order for log-space n-ary sums.
    #[arg(long, value_enum, default_value_t = Order::Sequential)]
    lse_order: Order,
    /// Errors at or above this are left out of percentiles.
    #[arg(long, default_value_t = 1.0)]
    exclusion_threshold: f64,
}

#[derive(Args, Debug)]
struct OpsArgs {
    #[arg(long, default_value_t = 10_000)]
    adds: usize,
    #[arg(long, default_value_t = 5_500)]
    muls: usize,
    /// Result exponents are drawn from [exp-lo, exp-hi).
    #[arg(long, default_value_t = -10_000, allow_hyphen_values = true)]
    exp_lo: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    exp_hi: i64,
    /// Comma-separated, strictly increasing bucket edges.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    buckets: Option<Vec<i64>>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct AppArgs {
    #[arg(long, value_parser = parse_app)]
    app: AppKind,
    /// Ensemble size [default: 32 forward, 64 pbd].
    #[arg(long)]
    count: Option<usize>,
    /// log2 window for oracle results [default: -40000..-2000 forward, -20000..-200 pbd].
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<f64>,
    /// Largest trial count for pbd instances.
    #[arg(long, default_value_t = 1500)]
    max_n: usize,
    /// Largest K for pbd instances.
    #[arg(long, default_value_t = 800)]
    max_k: usize,
    #[arg(long, value_enum, default_value_t = Guard::Inclusive)]
    guard: Guard,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(long, default_value_t = 4)]
    h: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 10_000)]
    t: usize,
    /// Symmetric Dirichlet concentration.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    item: u64,
}

#[derive(Args, Debug)]
struct CycleArgs {
    #[arg(long, value_parser = parse_cycle_app)]
    app: CycleApp,
    /// Pipeline latency: H for forward, K for column.
    #[arg(long, visible_alias = "k")]
    h: u64,
    /// Outer loop bound: T for forward, N for column.
    #[arg(long, visible_alias = "n")]
    t: u64,
    /// log or posit [default: both].
    #[arg(long = "system", value_parser = parse_cycle_system)]
    system: Option<CycleSystem>,
}

fn parse_system(s: &str) -> Result<SystemId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_prec(s: &str) -> Result<u32, String> {
    let bits: u32 = s.parse().map_err(|e| format!("{e}"))?;
    Precision::new(bits)
        .map(|p| p.bits())
        .map_err(|e| e.to_string())
}

fn parse_app(s: &str) -> Result<AppKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_cycle_app(s: &str) -> Result<CycleApp, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_cycle_system(s: &str) -> Result<CycleSystem, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidPrecision(_)
            | Error::InvalidPositConfig { .. }
            | Error::InvalidSpec(_)
            | Error::UnknownSystem(_)
            | Error::Parse(_)
            | Error::InvalidCycleParams(_)
            | Error::InvalidBuckets(_) => Failure::Usage(e.to_string()),
            e => Failure::Internal(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Resolved configuration echoed into every sidecar.
struct Meta {
    pairs: Vec<(String, String)>,
}

impl Meta {
    fn new(cmd: &str, c: &Common) -> Self {
        let systems: Vec<String> = c.systems.iter().map(ToString::to_string).collect();
        let mut m = Meta { pairs: Vec::new() };
        m.push("tool", concat!("posit-lab ", env!("CARGO_PKG_VERSION")));
        m.push("subcommand", cmd);
        m.push("seed", c.seed);
        m.push("systems", systems.join(","));
        m.push("prec", c.prec);
        m
    }

    fn push(&mut self, k: &str, v: impl ToString) {
        self.pairs.push((k.to_string(), v.to_string()));
    }

    fn tuning(&mut self, t: &Tuning) {
        self.push("lse_order", format!("{:?}", t.lse_order).to_lowercase());
        self.push("exclusion_threshold", t.exclusion_threshold);
    }
}

/// Writes `dir/name` through `body`, then `dir/<stem>.meta`.
fn emit(
    dir: &Path,
    name: &str,
    meta: &Meta,
    body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Outcome {
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    body(&mut w)?;
    w.flush()?;
    let mut pairs = meta.pairs.clone();
    pairs.push(("file".into(), name.into()));
    let mut m = BufWriter::new(File::create(path.with_extension("meta"))?);
    report::write_metadata(&mut m, &pairs)?;
    m.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_options(c: &Common, t: &Tuning, guard: PbdGuard) -> Result<RunOptions, Failure> {
    Ok(RunOptions {
        prec: Precision::new(c.prec)?,
        exclusion_threshold: t.exclusion_threshold,
        guard,
        lse_order: match t.lse_order {
            Order::Sequential => LseOrder::Sequential,
            Order::Tree => LseOrder::Tree,
        },
    })
}

fn ops_accuracy(c: &Common, a: &OpsArgs) -> Outcome {
    let opts = run_options(c, &a.tuning, PbdGuard::Inclusive)?;
    let edges = a
        .buckets
        .clone()
        .unwrap_or_else(|| DEFAULT_BUCKETS.to_vec());
    let specs: Vec<GenSpec> = [(OpKind::Add, a.adds), (OpKind::Mul, a.muls)]
        .into_iter()
        .filter(|&(_, n)| n > 0)
        .map(|(op, n)| GenSpec::operands(c.seed, op, n, a.exp_lo, a.exp_hi))
        .collect();
    let rep = run_ops_accuracy(&c.systems, &specs, &edges, &opts)?;
    let mut meta = Meta::new("ops-accuracy", c);
    meta.push("adds", a.adds);
    meta.push("muls", a.muls);
    meta.push("exp_lo", a.exp_lo);
    meta.push("exp_hi", a.exp_hi);
    meta.push(
        "buckets",
        edges
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    meta.tuning(&a.tuning);
    emit(&c.out, "records.csv", &meta, |w| {
        report::write_records(w, &rep.records)
    })?;
    emit(&c.out, "summary.csv", &meta, |w| {
        report::write_summary(w, &rep.summaries)
    })
}

fn app_accuracy(c: &Common, a: &AppArgs) -> Outcome {
    let guard = match a.guard {
        Guard::Inclusive => PbdGuard::Inclusive,
        Guard::Literal => PbdGuard::Literal,
    };
    let opts = run_options(c, &a.tuning, guard)?;
    let (count, lo, hi) = match a.app {
        AppKind::Forward => (
            a.count.unwrap_or(32),
            a.lo.unwrap_or(-40_000.0),
            a.hi.unwrap_or(-2_000.0),
        ),
        AppKind::Pbd => (
            a.count.unwrap_or(64),
            a.lo.unwrap_or(-20_000.0),
            a.hi.unwrap_or(-200.0),
        ),
    };
    if count == 0 || lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(Failure::Usage(format!(
            "need count > 0 and lo < hi, got {count}, [{lo}, {hi}]"
        )));
    }
    let ensemble = match a.app {
        AppKind::Forward => forward_ensemble(c.seed, count, lo, hi)?,
        AppKind::Pbd => pbd_ensemble(c.seed, count, lo, hi, a.max_n, a.max_k)?,
    };
    let rep = run_app_accuracy(a.app, &c.systems, &ensemble, &opts)?;
    let mut meta = Meta::new("app-accuracy", c);
    meta.push("app", a.app);
    meta.push("count", count);
    meta.push("lo", lo);
    meta.push("hi", hi);
    if a.app == AppKind::Pbd {
        meta.push("max_n", a.max_n);
        meta.push("max_k", a.max_k);
        meta.push("guard", format!("{:?}", a.guard).to_lowercase());
    }
    meta.tuning(&a.tuning);
    // the exact instances, so a single trial can be re-run in isolation
    for (i, spec) in ensemble.iter().enumerate() {
        let shape = match &spec.kind {
            GenKind::Hmm { h, m, t, alpha } => {
                format!("hmm item={} h={h} m={m} t={t} alpha={alpha}", spec.item)
            }
            GenKind::Pbd { n, k, law } => format!("pbd item={} n={n} k={k} law={law}", spec.item),
            GenKind::Operands { .. } => unreachable!("ensembles hold kernel instances"),
        };
        meta.push(&format!("instance.{i}"), shape);
    }
    emit(&c.out, "records.csv", &meta, |w| {
        report::write_records(w, &rep.records)
    })?;
    emit(&c.out, "cdf.csv", &meta, |w| report::write_cdf(w, &rep.cdf))
}

fn trace(c: &Common, a: &TraceArgs) -> Outcome {
    let spec = GenSpec {
        master_seed: c.seed,
        item: a.item,
        kind: GenKind::Hmm {
            h: a.h,
            m: a.m,
            t: a.t,
            alpha: a.alpha,
        },
    };
    let tr = run_exponent_trace(&spec, Precision::new(c.prec)?)?;
    let mut meta = Meta::new("trace", c);
    for (k, v) in [("h", a.h), ("m", a.m), ("t", a.t)] {
        meta.push(k, v);
    }
    meta.push("alpha", a.alpha);
    meta.push("item", a.item);
    meta.push("reference", tr.reference);
    emit(&c.out, "trace.csv", &meta, |w| report::write_trace(w, &tr))
}

fn cycles(c: &Common, a: &CycleArgs) -> Outcome {
    let systems = match a.system {
        Some(s) => vec![s],
        None => vec![CycleSystem::Log, CycleSystem::Posit],
    };
    let rows = systems
        .into_iter()
        .map(|system| {
            let p = CycleParams {
                app: a.app,
                outer_bound: a.t,
                pipeline_latency: a.h,
                system,
            };
            cycle_model(&p).map(|r| (p, r))
        })
        .collect::<posit_lab::Result<Vec<_>>>()?;
    for (p, r) in &rows {
        println!(
            "{} {}: pe_latency {} total_cycles {}",
            p.app, p.system, r.pe_latency, r.total_cycles
        );
    }
    let mut meta = Meta::new("cycles", c);
    meta.push("app", a.app);
    meta.push("pipeline_latency", a.h);
    meta.push("outer_bound", a.t);
    meta.push(
        "system",
        a.system.map_or("log,posit".to_string(), |s| s.to_string()),
    );
    emit(&c.out, "cycles.csv", &meta, |w| {
        report::write_cycles(w, &rows)
    })
}

fn table1(c: &Common) -> Outcome {
    let meta = Meta::new("table1", c);
    emit(&c.out, "table1.csv", &meta, |w| {
        report::write_table1(w, &table1_report())
    })
}

fn selftest(c: &Common) -> Outcome {
    let opts = RunOptions {
        prec: Precision::new(c.prec)?,
        ..RunOptions::default()
    };
    let checks = run_selftest(&opts);
    let mut failed = Vec::new();
    for ch in &checks {
        if ch.passed {
            println!("PASS  {}", ch.name);
        } else {
            println!("FAIL  {}: {}", ch.name, ch.detail);
            failed.push(ch.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Internal(format!(
            "selftest failed: {}",
            failed.join(", ")
        )))
    }
}

fn run(cli: Cli) -> Outcome {
    let c = &cli.common;
    if let Some(n) = c.workers {
        if n == 0 {
            return Err(Failure::Usage("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    if !matches!(cli.cmd, Command::Selftest) {
        fs::create_dir_all(&c.out)?;
    }
    match &cli.cmd {
        Command::OpsAccuracy(a) => ops_accuracy(c, a),
        Command::AppAccuracy(a) => app_accuracy(c, a),
        Command::Trace(a) => trace(c, a),
        Command::Cycles(a) => cycles(c, a),
        Command::Table1 => table1(c),
        Command::Selftest => selftest(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
