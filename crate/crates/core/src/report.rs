// SPDX-License-Identifier: Apache-2.0
//! CSV writers for experiment outputs, plus the key=value run metadata file.

use std::io::{self, Write};

use crate::cycles::{CycleParams, CycleReport, Table1Row};
use crate::harness::{AccuracyRecord, BucketSummary, CdfRow, Trace};

pub const RECORDS_HEADER: &str =
    "system,op_or_app,trial_index,true_exponent,relative_error,underflowed";
pub const SUMMARY_HEADER: &str =
    "system,op_or_app,bucket_lo,bucket_hi,p5,p25,p50,p75,p95,count,underflow_count,excluded_count";
pub const CDF_HEADER: &str = "system,app,relative_error,cumulative_fraction";
pub const TRACE_HEADER: &str = "t,exponent";
pub const CYCLES_HEADER: &str = "app,system,outer_bound,pipeline_latency,pe_latency,total_cycles";
pub const TABLE1_HEADER: &str = "format,useed_log2,minpos_log2,max_fraction_bits";

/// Shortest round-tripping form; `inf` and `nan` spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:e}")
    }
}

pub fn write_records(w: &mut impl Write, records: &[AccuracyRecord]) -> io::Result<()> {
    writeln!(w, "{RECORDS_HEADER}")?;
    for r in records {
        let e = r.true_exponent.map(|e| e.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.system,
            r.op_or_app,
            r.trial_index,
            e,
            fmt_f64(r.relative_error),
            u8::from(r.underflowed)
        )?;
    }
    Ok(())
}

pub fn write_summary(w: &mut impl Write, rows: &[BucketSummary]) -> io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for s in rows {
        let p = s
            .percentiles
            .unwrap_or([f64::NAN; 5])
            .map(fmt_f64)
            .join(",");
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            s.system,
            s.op_or_app,
            s.bucket_lo,
            s.bucket_hi,
            p,
            s.count,
            s.underflow_count,
            s.excluded_count
        )?;
    }
    Ok(())
}

pub fn write_cdf(w: &mut impl Write, rows: &[CdfRow]) -> io::Result<()> {
    writeln!(w, "{CDF_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.system,
            r.app,
            fmt_f64(r.relative_error),
            fmt_f64(r.cumulative_fraction)
        )?;
    }
    Ok(())
}

pub fn write_trace(w: &mut impl Write, trace: &Trace) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for (t, e) in &trace.points {
        writeln!(w, "{t},{e}")?;
    }
    Ok(())
}

pub fn write_cycles(w: &mut impl Write, rows: &[(CycleParams, CycleReport)]) -> io::Result<()> {
    writeln!(w, "{CYCLES_HEADER}")?;
    for (p, r) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            p.app, p.system, p.outer_bound, p.pipeline_latency, r.pe_latency, r.total_cycles
        )?;
    }
    Ok(())
}

pub fn write_table1(w: &mut impl Write, rows: &[Table1Row]) -> io::Result<()> {
    writeln!(w, "{TABLE1_HEADER}")?;
    for r in rows {
        let useed = r.useed_log2.map(|u| u.to_string()).unwrap_or_default();
        // the format column holds a comma, so it is quoted
        writeln!(
            w,
            "\"{}\",{},{},{}",
            r.format, useed, r.minpos_log2, r.max_fraction_bits
        )?;
    }
    Ok(())
}

/// One `key=value` per line, in the given order.
pub fn write_metadata(w: &mut impl Write, pairs: &[(String, String)]) -> io::Result<()> {
    for (k, v) in pairs {
        writeln!(w, "{k}={v}")?;
    }
    Ok(())
}

/// Inverse of [`write_metadata`]; blank lines and `#` comments are skipped.
pub fn parse_metadata(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}
