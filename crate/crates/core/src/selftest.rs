// SPDX-License-Identifier: Apache-2.0
//! Quick internal consistency checks: exhaustive small posits, oracle
//! agreement across precisions, and the analytic tables.

use crate::cycles::{cycle_model, table1_report, CycleApp, CycleParams, CycleSystem};
use crate::datagen::{GenSpec, OpKind, ProbLaw};
use crate::harness::{app_truth, cross_precision_agrees, op_truth, AppKind, RunOptions};
use crate::oracle::{BigReal, Precision};
use crate::posit::{
    posit_add, posit_mul, posit_to_real, real_to_posit, reference, PositConfig, PositValue,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, r: Result<(), String>) -> Check {
    match r {
        Ok(()) => Check {
            name,
            passed: true,
            detail: String::new(),
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

/// Every non-NaR pattern decodes, re-encodes to itself, and values rise with
/// the two's-complement order of the pattern.
pub fn exhaustive_roundtrip(c: PositConfig) -> Result<(), String> {
    let half = 1i64 << (c.n_bits() - 1);
    let mut prev: Option<BigReal> = None;
    for s in (-half + 1)..half {
        let p = PositValue::from_bits(s as u64, c);
        let v = posit_to_real(p).map_err(|e| format!("{p:?}: {e}"))?;
        if real_to_posit(&v, c) != p {
            return Err(format!("{c}: {p:?} does not round-trip"));
        }
        if prev.as_ref().is_some_and(|q| *q >= v) {
            return Err(format!("{c}: not monotone at {p:?}"));
        }
        prev = Some(v);
    }
    Ok(())
}

/// All operand pairs: the fast paths equal exact-then-round.
pub fn exhaustive_arith(c: PositConfig) -> Result<(), String> {
    let n = 1u64 << c.n_bits();
    for a in 0..n {
        for b in 0..n {
            let (pa, pb) = (PositValue::from_bits(a, c), PositValue::from_bits(b, c));
            let err = |e: crate::Error| e.to_string();
            if posit_add(pa, pb).map_err(err)? != reference::add(pa, pb).map_err(err)? {
                return Err(format!("{pa:?} + {pb:?}"));
            }
            if posit_mul(pa, pb).map_err(err)? != reference::mul(pa, pb).map_err(err)? {
                return Err(format!("{pa:?} * {pb:?}"));
            }
        }
    }
    Ok(())
}

fn worked_example() -> Result<(), String> {
    let c = PositConfig::new(8, 2).map_err(|e| e.to_string())?;
    let v = posit_to_real(PositValue::from_bits(0b0000_1101, c)).map_err(|e| e.to_string())?;
    let want = BigReal::from_f64(1.5).unwrap().mul_pow2(-10);
    if v == want {
        Ok(())
    } else {
        Err(format!("decoded {v}"))
    }
}

/// Oracle results at `base` and `base + 64` bits agree to 2^-200.
pub fn cross_precision(ops: usize, opts: &RunOptions) -> Result<(), String> {
    let hi = RunOptions {
        prec: Precision::new(opts.prec.bits() + 64).map_err(|e| e.to_string())?,
        ..*opts
    };
    for op in [OpKind::Add, OpKind::Mul] {
        let spec = GenSpec::operands(1, op, ops, -10_000, 0);
        for (a, b) in crate::datagen::sample_operands(&spec).map_err(|e| e.to_string())? {
            if !cross_precision_agrees(
                &op_truth(op, &a, &b, opts.prec),
                &op_truth(op, &a, &b, hi.prec),
            ) {
                return Err(format!("{op} disagrees"));
            }
        }
    }
    let apps = [
        (AppKind::Forward, GenSpec::hmm(1, 0, 4, 4, 300)),
        (
            AppKind::Pbd,
            GenSpec::pbd(1, 0, 300, 40, ProbLaw::default()),
        ),
    ];
    for (app, spec) in apps {
        let a = app_truth(app, &spec, opts).map_err(|e| e.to_string())?;
        let b = app_truth(app, &spec, &hi).map_err(|e| e.to_string())?;
        if !cross_precision_agrees(&a, &b) {
            return Err(format!("{app} disagrees: {a} vs {b}"));
        }
    }
    Ok(())
}

fn tables() -> Result<(), String> {
    let mins: Vec<i64> = table1_report().iter().map(|r| r.minpos_log2).collect();
    if mins
        != [
            -3_968,
            -31_744,
            -253_952,
            -2_031_616,
            -16_252_928,
            -130_023_424,
            -1_074,
        ]
    {
        return Err(format!("table rows {mins:?}"));
    }
    let p = |system| CycleParams {
        app: CycleApp::Forward,
        outer_bound: 500_000,
        pipeline_latency: 64,
        system,
    };
    let l = cycle_model(&p(CycleSystem::Log)).map_err(|e| e.to_string())?;
    let q = cycle_model(&p(CycleSystem::Posit)).map_err(|e| e.to_string())?;
    if (l.total_cycles, q.total_cycles) != (90_000_000, 68_000_000) {
        return Err(format!("cycles {} / {}", l.total_cycles, q.total_cycles));
    }
    Ok(())
}

pub fn run_selftest(opts: &RunOptions) -> Vec<Check> {
    let c8 = PositConfig::new(8, 2).expect("valid");
    let c16 = PositConfig::new(16, 2).expect("valid");
    vec![
        check("posit(8,2) worked example", worked_example()),
        check("posit(8,2) exhaustive roundtrip", exhaustive_roundtrip(c8)),
        check(
            "posit(16,2) exhaustive roundtrip",
            exhaustive_roundtrip(c16),
        ),
        check("posit(8,2) exhaustive add/mul", exhaustive_arith(c8)),
        check("oracle cross-precision", cross_precision(200, opts)),
        check("table and cycle model", tables()),
    ]
}
