// SPDX-License-Identifier: Apache-2.0
//! Accuracy experiments: per-operation sweeps bucketed by result exponent,
//! application ensembles with error CDFs, and exponent traces.

use std::fmt;
use std::str::FromStr;

use crate::datagen::{gen_hmm, gen_pbd, operand_pair, GenKind, GenSpec, OpKind, ProbLaw};
use crate::error::{Error, Result};
use crate::kernels::{exponent_trace, forward, pbd_pvalue, PbdGuard};
use crate::logspace::LseOrder;
use crate::oracle::{relative_error, BigReal, Precision, RelativeError};
use crate::system::{LogSpace, NumericSystem, Oracle, SystemId, SystemVisitor};

pub const DEFAULT_BUCKETS: [i64; 10] = [
    -10_000, -6_000, -4_000, -2_000, -1_022, -512, -256, -128, -64, 0,
];
pub const BINARY64_MIN_EXPONENT: i64 = -1_074;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub prec: Precision,
    /// Errors at or above this are left out of percentiles.
    pub exclusion_threshold: f64,
    pub guard: PbdGuard,
    pub lse_order: LseOrder,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            prec: Precision::default(),
            exclusion_threshold: 1.0,
            guard: PbdGuard::Inclusive,
            lse_order: LseOrder::Sequential,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AppKind {
    Forward,
    Pbd,
}

impl fmt::Display for AppKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AppKind::Forward => "forward",
            AppKind::Pbd => "pbd",
        })
    }
}

impl FromStr for AppKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(AppKind::Forward),
            "pbd" => Ok(AppKind::Pbd),
            _ => Err(Error::InvalidSpec(format!("unknown app '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyRecord {
    pub system: String,
    pub op_or_app: String,
    pub trial_index: usize,
    /// None when the true value is exactly zero.
    pub true_exponent: Option<i64>,
    /// `f64::INFINITY` marks a nonzero result against a zero truth.
    pub relative_error: f64,
    pub underflowed: bool,
}

impl AccuracyRecord {
    fn new(
        system: &SystemId,
        what: String,
        trial_index: usize,
        truth: &BigReal,
        got: &BigReal,
        prec: Precision,
    ) -> Self {
        let err = relative_error(truth, got, prec);
        AccuracyRecord {
            system: system.to_string(),
            op_or_app: what,
            trial_index,
            true_exponent: truth.exponent_of().ok(),
            relative_error: match err {
                RelativeError::Infinite => f64::INFINITY,
                e => e.to_f64(),
            },
            underflowed: got.is_zero() && !truth.is_zero(),
        }
    }

    pub fn excluded(&self, threshold: f64) -> bool {
        self.relative_error.partial_cmp(&threshold) != Some(std::cmp::Ordering::Less)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BucketSummary {
    pub system: String,
    pub op_or_app: String,
    pub bucket_lo: i64,
    pub bucket_hi: i64,
    /// p5, p25, p50, p75, p95 over non-excluded records; None when there are none.
    pub percentiles: Option<[f64; 5]>,
    pub count: usize,
    pub underflow_count: usize,
    pub excluded_count: usize,
}

impl BucketSummary {
    pub fn median(&self) -> Option<f64> {
        self.percentiles.map(|p| p[2])
    }
}

/// Nearest-rank percentile of sorted data: the value at rank ceil(q/100·n).
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = ((q / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

pub fn validate_buckets(edges: &[i64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::InvalidBuckets("need at least two edges".into()));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidBuckets(format!(
            "edges must strictly increase: {edges:?}"
        )));
    }
    Ok(())
}

/// Per-bucket summaries of one (system, op) group. Buckets are `[lo, hi)`.
pub fn summarize(
    records: &[&AccuracyRecord],
    edges: &[i64],
    threshold: f64,
) -> Result<Vec<BucketSummary>> {
    validate_buckets(edges)?;
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(edges.len() - 1);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let inside: Vec<&&AccuracyRecord> = records
            .iter()
            .filter(|r| r.true_exponent.is_some_and(|e| lo <= e && e < hi))
            .collect();
        let mut valid: Vec<f64> = inside
            .iter()
            .filter(|r| !r.excluded(threshold))
            .map(|r| r.relative_error)
            .collect();
        valid.sort_by(f64::total_cmp);
        let percentiles = (!valid.is_empty())
            .then(|| [5.0, 25.0, 50.0, 75.0, 95.0].map(|q| nearest_rank(&valid, q)));
        out.push(BucketSummary {
            system: first.system.clone(),
            op_or_app: first.op_or_app.clone(),
            bucket_lo: lo,
            bucket_hi: hi,
            percentiles,
            count: inside.len(),
            underflow_count: inside.iter().filter(|r| r.underflowed).count(),
            excluded_count: inside.len() - valid.len(),
        });
    }
    Ok(out)
}

/// Summaries for every (system, op_or_app) group, in first-appearance order.
pub fn summarize_all(
    records: &[AccuracyRecord],
    edges: &[i64],
    threshold: f64,
) -> Result<Vec<BucketSummary>> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in records {
        let k = (r.system.as_str(), r.op_or_app.as_str());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut out = Vec::new();
    for (sys, what) in keys {
        let group: Vec<&AccuracyRecord> = records
            .iter()
            .filter(|r| r.system == sys && r.op_or_app == what)
            .collect();
        out.extend(summarize(&group, edges, threshold)?);
    }
    Ok(out)
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

struct OpVisitor<'a> {
    op: OpKind,
    a: &'a BigReal,
    b: &'a BigReal,
}

impl SystemVisitor for OpVisitor<'_> {
    type Out = Result<BigReal>;

    fn visit<S: NumericSystem>(self, sys: &S) -> Result<BigReal> {
        let (x, y) = (sys.encode(self.a)?, sys.encode(self.b)?);
        let r = match self.op {
            OpKind::Add => sys.add(&x, &y),
            OpKind::Mul => sys.mul(&x, &y),
        };
        sys.decode(&r)
    }
}

/// One operation: convert both operands into the system, operate, convert back.
pub fn op_in_system(
    id: &SystemId,
    op: OpKind,
    a: &BigReal,
    b: &BigReal,
    opts: &RunOptions,
) -> Result<BigReal> {
    id.visit(opts.prec, opts.lse_order, OpVisitor { op, a, b })
}

pub fn op_truth(op: OpKind, a: &BigReal, b: &BigReal, prec: Precision) -> BigReal {
    match op {
        OpKind::Add => a.add(b, prec),
        OpKind::Mul => a.mul(b, prec),
    }
}

/// Records for trial `index` of an operand spec, one per system.
pub fn ops_trial(
    systems: &[SystemId],
    spec: &GenSpec,
    index: usize,
    opts: &RunOptions,
) -> Result<Vec<AccuracyRecord>> {
    let GenKind::Operands { op, .. } = spec.kind else {
        return Err(Error::InvalidSpec("expected an operands spec".into()));
    };
    let (a, b) = operand_pair(spec, index)?;
    let truth = op_truth(op, &a, &b, opts.prec);
    systems
        .iter()
        .map(|id| {
            let got = op_in_system(id, op, &a, &b, opts)?;
            Ok(AccuracyRecord::new(
                id,
                op.to_string(),
                index,
                &truth,
                &got,
                opts.prec,
            ))
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OpsReport {
    pub records: Vec<AccuracyRecord>,
    pub summaries: Vec<BucketSummary>,
}

/// Per-operation accuracy over each operand spec, sorted by
/// (system order, spec order, trial index).
pub fn run_ops_accuracy(
    systems: &[SystemId],
    specs: &[GenSpec],
    edges: &[i64],
    opts: &RunOptions,
) -> Result<OpsReport> {
    validate_buckets(edges)?;
    if systems.is_empty() {
        return Err(Error::InvalidSpec("no systems".into()));
    }
    let mut per_system: Vec<Vec<AccuracyRecord>> = vec![Vec::new(); systems.len()];
    for spec in specs {
        let GenKind::Operands { count, .. } = spec.kind else {
            return Err(Error::InvalidSpec("expected an operands spec".into()));
        };
        let idx: Vec<usize> = (0..count).collect();
        let trials = par_map(&idx, |&i| ops_trial(systems, spec, i, opts));
        for t in trials {
            for (s, rec) in t?.into_iter().enumerate() {
                per_system[s].push(rec);
            }
        }
    }
    let records: Vec<AccuracyRecord> = per_system.into_iter().flatten().collect();
    let summaries = summarize_all(&records, edges, opts.exclusion_threshold)?;
    Ok(OpsReport { records, summaries })
}

struct AppVisitor<'a> {
    app: AppKind,
    spec: &'a GenSpec,
    guard: PbdGuard,
}

impl SystemVisitor for AppVisitor<'_> {
    type Out = Result<BigReal>;

    fn visit<S: NumericSystem>(self, sys: &S) -> Result<BigReal> {
        let v = match self.app {
            AppKind::Forward => forward(&gen_hmm(self.spec)?, sys)?,
            AppKind::Pbd => pbd_pvalue(&gen_pbd(self.spec)?, sys, self.guard)?,
        };
        sys.decode(&v)
    }
}

/// Kernel result for one generated instance, decoded to a real.
pub fn app_in_system(
    id: &SystemId,
    app: AppKind,
    spec: &GenSpec,
    opts: &RunOptions,
) -> Result<BigReal> {
    id.visit(
        opts.prec,
        opts.lse_order,
        AppVisitor {
            app,
            spec,
            guard: opts.guard,
        },
    )
}

pub fn app_truth(app: AppKind, spec: &GenSpec, opts: &RunOptions) -> Result<BigReal> {
    app_in_system(&SystemId::Oracle, app, spec, opts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CdfRow {
    pub system: String,
    pub app: String,
    pub relative_error: f64,
    pub cumulative_fraction: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AppReport {
    pub records: Vec<AccuracyRecord>,
    pub cdf: Vec<CdfRow>,
    /// Oracle results, by ensemble position.
    pub truths: Vec<BigReal>,
}

impl AppReport {
    /// Fraction of `system`'s records with error strictly below `threshold`.
    pub fn fraction_below(&self, system: &SystemId, threshold: f64) -> f64 {
        let name = system.to_string();
        let errs: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.system == name)
            .map(|r| r.relative_error)
            .collect();
        if errs.is_empty() {
            return 0.0;
        }
        errs.iter().filter(|&&e| e < threshold).count() as f64 / errs.len() as f64
    }

    pub fn errors(&self, system: &SystemId) -> Vec<f64> {
        let name = system.to_string();
        self.records
            .iter()
            .filter(|r| r.system == name)
            .map(|r| r.relative_error)
            .collect()
    }
}

/// Sorted errors with cumulative fraction i/n per system.
pub fn cdf_rows(records: &[AccuracyRecord]) -> Vec<CdfRow> {
    let mut systems: Vec<(&str, &str)> = Vec::new();
    for r in records {
        let k = (r.system.as_str(), r.op_or_app.as_str());
        if !systems.contains(&k) {
            systems.push(k);
        }
    }
    let mut out = Vec::new();
    for (sys, app) in systems {
        let mut errs: Vec<f64> = records
            .iter()
            .filter(|r| r.system == sys && r.op_or_app == app)
            .map(|r| r.relative_error)
            .collect();
        errs.sort_by(f64::total_cmp);
        let n = errs.len() as f64;
        out.extend(errs.into_iter().enumerate().map(|(i, e)| CdfRow {
            system: sys.to_string(),
            app: app.to_string(),
            relative_error: e,
            cumulative_fraction: (i + 1) as f64 / n,
        }));
    }
    out
}

/// Runs every ensemble member through every system. Underflowed results
/// carry relative error 1 and the underflow flag.
pub fn run_app_accuracy(
    app: AppKind,
    systems: &[SystemId],
    ensemble: &[GenSpec],
    opts: &RunOptions,
) -> Result<AppReport> {
    if ensemble.is_empty() {
        return Err(Error::Empty);
    }
    if systems.is_empty() {
        return Err(Error::InvalidSpec("no systems".into()));
    }
    let idx: Vec<usize> = (0..ensemble.len()).collect();
    let rows = par_map(&idx, |&i| -> Result<(BigReal, Vec<AccuracyRecord>)> {
        let spec = &ensemble[i];
        let truth = app_truth(app, spec, opts)?;
        let recs = systems
            .iter()
            .map(|id| {
                let got = if *id == SystemId::Oracle {
                    truth.clone()
                } else {
                    app_in_system(id, app, spec, opts)?
                };
                Ok(AccuracyRecord::new(
                    id,
                    app.to_string(),
                    i,
                    &truth,
                    &got,
                    opts.prec,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((truth, recs))
    });
    let mut truths = Vec::with_capacity(ensemble.len());
    let mut per_system: Vec<Vec<AccuracyRecord>> = vec![Vec::new(); systems.len()];
    for row in rows {
        let (t, recs) = row?;
        truths.push(t);
        for (s, r) in recs.into_iter().enumerate() {
            per_system[s].push(r);
        }
    }
    let records: Vec<AccuracyRecord> = per_system.into_iter().flatten().collect();
    let cdf = cdf_rows(&records);
    Ok(AppReport {
        records,
        cdf,
        truths,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub points: Vec<(usize, i64)>,
    /// Exponent of the smallest positive binary64 value, for plotting.
    pub reference: i64,
}

pub fn run_exponent_trace(spec: &GenSpec, prec: Precision) -> Result<Trace> {
    let model = gen_hmm(spec)?;
    Ok(Trace {
        points: exponent_trace(&model, prec)?,
        reference: BINARY64_MIN_EXPONENT,
    })
}

fn ln2_log2(lx: f64) -> f64 {
    lx / std::f64::consts::LN_2
}

/// Cheap log2 estimate of an instance's result via the log-space kernel.
pub fn estimate_log2(app: AppKind, spec: &GenSpec) -> Result<f64> {
    let sys = LogSpace::new(Precision::new(Precision::MIN_BITS)?);
    let l = match app {
        AppKind::Forward => forward(&gen_hmm(spec)?, &sys)?,
        AppKind::Pbd => pbd_pvalue(&gen_pbd(spec)?, &sys, PbdGuard::Inclusive)?,
    };
    Ok(ln2_log2(l.lx()))
}

/// splitmix64, for deterministic per-item choices in ensemble builders.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn unit(seed: u64, item: u64, salt: u64) -> f64 {
    (mix(seed ^ mix(item ^ mix(salt))) >> 11) as f64 / (1u64 << 53) as f64
}

/// `count` Dirichlet models (H=4, M=4) whose likelihood log2 falls inside
/// `[lo, hi]`, aiming at targets spread uniformly over that range. Items
/// missing the window are skipped, so the chosen item indices are sparse.
pub fn forward_ensemble(master_seed: u64, count: usize, lo: f64, hi: f64) -> Result<Vec<GenSpec>> {
    let (h, m) = (4, 4);
    let margin = 0.02 * (hi - lo);
    let mut out = Vec::with_capacity(count);
    let mut item = 0u64;
    while out.len() < count {
        if item > 20 * count as u64 + 100 {
            return Err(Error::InvalidSpec(format!(
                "could not fill forward ensemble in [{lo}, {hi}]"
            )));
        }
        let target = lo + margin + unit(master_seed, item, 1) * (hi - lo - 2.0 * margin);
        let pilot_t = 256;
        let slope = estimate_log2(
            AppKind::Forward,
            &GenSpec::hmm(master_seed, item, h, m, pilot_t),
        )? / pilot_t as f64;
        let t = ((target / slope).round() as usize).max(1);
        let spec = GenSpec::hmm(master_seed, item, h, m, t);
        let est = estimate_log2(AppKind::Forward, &spec)?;
        if (lo..=hi).contains(&est) {
            out.push(spec);
        }
        item += 1;
    }
    Ok(out)
}

/// Largest K in `[1, n]` whose estimated p-value is still at least `target`
/// (log2), by bisection on the monotone tail.
fn solve_k(
    master_seed: u64,
    item: u64,
    n: usize,
    law: ProbLaw,
    target: f64,
    k_max: usize,
) -> Result<usize> {
    let est = |k| estimate_log2(AppKind::Pbd, &GenSpec::pbd(master_seed, item, n, k, law));
    let (mut lo, mut hi) = (1usize, k_max.min(n));
    if est(hi)? >= target {
        return Ok(hi);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if est(mid)? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `count` PBD instances with log2 p-value inside `[lo, hi]`. N and the law
/// vary per item; K (at most `max_k`) is solved for a target drawn uniformly
/// in the window.
pub fn pbd_ensemble(
    master_seed: u64,
    count: usize,
    lo: f64,
    hi: f64,
    max_n: usize,
    max_k: usize,
) -> Result<Vec<GenSpec>> {
    let margin = 0.02 * (hi - lo);
    let mut out = Vec::with_capacity(count);
    let mut item = 0u64;
    while out.len() < count {
        if item > 20 * count as u64 + 100 {
            return Err(Error::InvalidSpec(format!(
                "could not fill pbd ensemble in [{lo}, {hi}]"
            )));
        }
        let target = lo + margin + unit(master_seed, item, 2) * (hi - lo - 2.0 * margin);
        let n = (max_n / 4) + (unit(master_seed, item, 3) * (max_n - max_n / 4) as f64) as usize;
        let top = 10f64.powf(-3.0 - 6.0 * unit(master_seed, item, 4));
        let law = ProbLaw::LogUniform {
            lo: top * 1e-3,
            hi: top,
        };
        let k = solve_k(master_seed, item, n, law, target, max_k)?;
        let spec = GenSpec::pbd(master_seed, item, n, k, law);
        let est = estimate_log2(AppKind::Pbd, &spec)?;
        if (lo..=hi).contains(&est) {
            out.push(spec);
        }
        item += 1;
    }
    Ok(out)
}

/// PBD instances with constant success probability whose p-value sits in
/// `[lo, hi]` (log2); used to probe a format's range limit.
pub fn range_limit_instances(
    master_seed: u64,
    probs: &[f64],
    extra_trials: usize,
    lo: f64,
    hi: f64,
) -> Result<Vec<GenSpec>> {
    let mut out = Vec::new();
    for (i, &p) in probs.iter().enumerate() {
        let law = ProbLaw::Constant(p);
        let target = (lo + hi) / 2.0;
        // p-value ≈ C(K+x, K) p^K; a first guess from p^K alone
        let guess = (target / p.log2()).ceil() as usize;
        let mut k = guess.max(1);
        let est = |k: usize| {
            estimate_log2(
                AppKind::Pbd,
                &GenSpec::pbd(master_seed, i as u64, k + extra_trials, k, law),
            )
        };
        while est(k)? > target {
            k += 8;
        }
        while k > 1 && est(k - 1)? <= target {
            k -= 1;
        }
        let spec = GenSpec::pbd(master_seed, i as u64, k + extra_trials, k, law);
        let e = estimate_log2(AppKind::Pbd, &spec)?;
        if !(lo..=hi).contains(&e) {
            return Err(Error::InvalidSpec(format!(
                "p={p}: estimate 2^{e} outside [{lo}, {hi}]"
            )));
        }
        out.push(spec);
    }
    Ok(out)
}

/// Whether the oracle result at two precisions agrees to relative 2^-200.
pub fn cross_precision_agrees(a: &BigReal, b: &BigReal) -> bool {
    match relative_error(a, b, Precision::default()) {
        RelativeError::Finite(e) => e.is_zero() || e.exponent_of().is_ok_and(|x| x < -200),
        RelativeError::Infinite => false,
    }
}

/// Forward likelihood at `prec` via the oracle and via oracle logs.
pub fn forward_log_consistency(spec: &GenSpec, prec: Precision) -> Result<(BigReal, BigReal)> {
    let model = gen_hmm(spec)?;
    let lin = forward(&model, &Oracle(prec))?;
    let sys = crate::system::OracleLog(prec);
    let lg = sys.decode(&forward(&model, &sys)?)?;
    Ok((lin, lg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(sys: &str, e: i64, err: f64, uf: bool) -> AccuracyRecord {
        AccuracyRecord {
            system: sys.into(),
            op_or_app: "mul".into(),
            trial_index: 0,
            true_exponent: Some(e),
            relative_error: err,
            underflowed: uf,
        }
    }

    #[test]
    fn nearest_rank_percentiles() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 5.0), 1.0);
        assert_eq!(nearest_rank(&v, 25.0), 5.0);
        assert_eq!(nearest_rank(&v, 50.0), 10.0);
        assert_eq!(nearest_rank(&v, 95.0), 19.0);
        assert_eq!(nearest_rank(&v, 100.0), 20.0);
        assert_eq!(nearest_rank(&[3.0], 5.0), 3.0);
    }

    #[test]
    fn buckets_partition_and_exclude() {
        let rs = [
            rec("b", -5, 0.1, false),
            rec("b", -5, 0.3, false),
            rec("b", -10, 1.0, true),
            rec("b", -10, f64::INFINITY, false),
            rec("b", -64, 0.2, false),
            rec("b", 3, 0.2, false),
        ];
        let refs: Vec<&AccuracyRecord> = rs.iter().collect();
        let s = summarize(&refs, &[-64, -8, 0], 1.0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].count, 3);
        assert_eq!(s[0].underflow_count, 1);
        assert_eq!(s[0].excluded_count, 2);
        assert_eq!(s[0].median(), Some(0.2));
        assert_eq!(s[1].count, 2);
        assert_eq!(s[1].percentiles, Some([0.1, 0.1, 0.1, 0.3, 0.3]));
        assert!(summarize(&refs, &[0, 0], 1.0).is_err());
        assert!(summarize(&refs, &[1], 1.0).is_err());
    }

    #[test]
    fn zero_operand_is_exact() {
        let x = BigReal::from_f64(0.375).unwrap();
        let opts = RunOptions::default();
        for id in SystemId::default_set() {
            let got = op_in_system(&id, OpKind::Add, &x, &BigReal::zero(), &opts).unwrap();
            if id != SystemId::Log {
                assert_eq!(got, x, "{id}");
            }
        }
    }

    #[test]
    fn oracle_records_are_fixed_points() {
        let spec = GenSpec::operands(1, OpKind::Mul, 20, -3000, 0);
        let r = run_ops_accuracy(
            &[SystemId::Oracle],
            &[spec],
            &DEFAULT_BUCKETS,
            &RunOptions::default(),
        )
        .unwrap();
        assert!(r.records.iter().all(|r| r.relative_error == 0.0));
        assert_eq!(r.summaries.iter().map(|s| s.count).sum::<usize>(), 20);
    }

    #[test]
    fn trial_rerun_in_isolation_matches() {
        let spec = GenSpec::operands(9, OpKind::Add, 30, -500, 0);
        let systems = SystemId::default_set();
        let opts = RunOptions::default();
        let all = run_ops_accuracy(
            &systems,
            std::slice::from_ref(&spec),
            &DEFAULT_BUCKETS,
            &opts,
        )
        .unwrap();
        let one = ops_trial(&systems, &spec, 17, &opts).unwrap();
        for r in one {
            assert!(all.records.contains(&r));
        }
    }

    #[test]
    fn cdf_is_monotone() {
        let rs = vec![
            rec("a", -1, 0.5, false),
            rec("a", -1, 0.1, false),
            rec("b", -1, 0.0, false),
        ];
        let c = cdf_rows(&rs);
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].relative_error, 0.1);
        assert_eq!(c[1].cumulative_fraction, 1.0);
        assert_eq!(c[2].system, "b");
    }

    #[test]
    fn halving_trace() {
        let t = run_exponent_trace(&GenSpec::hmm(1, 0, 1, 2, 1), Precision::default()).unwrap();
        assert_eq!(t.points.len(), 1);
        assert_eq!(t.reference, -1074);
    }

    #[test]
    fn app_underflow_flags() {
        let spec = GenSpec::pbd(3, 0, 400, 200, ProbLaw::Constant(1e-3));
        let systems = [SystemId::Binary64, SystemId::Log];
        let r = run_app_accuracy(AppKind::Pbd, &systems, &[spec], &RunOptions::default()).unwrap();
        assert!(r.truths[0].exponent_of().unwrap() < -1074);
        let b = &r.records[0];
        assert!(b.underflowed && b.relative_error == 1.0);
        assert!(r.records[1].relative_error < 1e-9);
    }
}
