// SPDX-License-Identifier: Apache-2.0
//! Analytic accelerator cycle counts and the posit range/precision table.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::posit::PositConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CycleApp {
    /// HMM forward-algorithm unit; pipeline latency is H.
    Forward,
    /// PBD column unit; pipeline latency is K.
    Column,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CycleSystem {
    Log,
    Posit,
}

impl fmt::Display for CycleApp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleApp::Forward => "forward",
            CycleApp::Column => "column",
        })
    }
}

impl FromStr for CycleApp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(CycleApp::Forward),
            "column" => Ok(CycleApp::Column),
            _ => Err(Error::InvalidCycleParams(format!("unknown app '{s}'"))),
        }
    }
}

impl fmt::Display for CycleSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleSystem::Log => "log",
            CycleSystem::Posit => "posit",
        })
    }
}

impl FromStr for CycleSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(CycleSystem::Log),
            "posit" => Ok(CycleSystem::Posit),
            _ => Err(Error::InvalidCycleParams(format!("unknown system '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleParams {
    pub app: CycleApp,
    /// T for forward, N for column.
    pub outer_bound: u64,
    /// H for forward, K for column.
    pub pipeline_latency: u64,
    pub system: CycleSystem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleReport {
    pub pe_latency: u64,
    pub total_cycles: u64,
}

/// PE latency and outer_bound × (pipeline latency + PE latency).
pub fn cycle_model(p: &CycleParams) -> Result<CycleReport> {
    if p.outer_bound == 0 || p.pipeline_latency == 0 {
        return Err(Error::InvalidCycleParams("bounds must be positive".into()));
    }
    let pe = match p.app {
        CycleApp::Forward => {
            let h = p.pipeline_latency;
            if !h.is_power_of_two() {
                return Err(Error::InvalidCycleParams(format!(
                    "H = {h} is not a power of two"
                )));
            }
            let lg = u64::from(h.trailing_zeros());
            match p.system {
                CycleSystem::Log => 62 + 9 * lg,
                CycleSystem::Posit => 24 + 8 * lg,
            }
        }
        CycleApp::Column => match p.system {
            CycleSystem::Log => 73,
            CycleSystem::Posit => 30,
        },
    };
    let total = p
        .outer_bound
        .checked_mul(p.pipeline_latency + pe)
        .ok_or_else(|| Error::InvalidCycleParams("cycle count overflows".into()))?;
    Ok(CycleReport {
        pe_latency: pe,
        total_cycles: total,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table1Row {
    pub format: String,
    /// None for binary64.
    pub useed_log2: Option<i64>,
    pub minpos_log2: i64,
    pub max_fraction_bits: u32,
}

pub const TABLE1_ES: [u32; 6] = [6, 9, 12, 15, 18, 21];

/// posit(64, ES) rows for the standard ES sweep, then binary64.
pub fn table1_report() -> Vec<Table1Row> {
    let mut rows: Vec<Table1Row> = TABLE1_ES
        .iter()
        .map(|&es| {
            let c = PositConfig::new(64, es).expect("valid config");
            Table1Row {
                format: c.to_string(),
                useed_log2: Some(c.useed_log2()),
                minpos_log2: c.minpos_log2(),
                max_fraction_bits: c.max_fraction_bits(),
            }
        })
        .collect();
    rows.push(Table1Row {
        format: "binary64".into(),
        useed_log2: None,
        minpos_log2: -1074,
        max_fraction_bits: 52,
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(app: CycleApp, outer: u64, lat: u64, system: CycleSystem) -> CycleReport {
        cycle_model(&CycleParams {
            app,
            outer_bound: outer,
            pipeline_latency: lat,
            system,
        })
        .unwrap()
    }

    #[test]
    fn forward_unit() {
        let log = run(CycleApp::Forward, 500_000, 64, CycleSystem::Log);
        let pos = run(CycleApp::Forward, 500_000, 64, CycleSystem::Posit);
        assert_eq!((log.pe_latency, log.total_cycles), (116, 90_000_000));
        assert_eq!((pos.pe_latency, pos.total_cycles), (72, 68_000_000));
        assert!(cycle_model(&CycleParams {
            app: CycleApp::Forward,
            outer_bound: 10,
            pipeline_latency: 48,
            system: CycleSystem::Log
        })
        .is_err());
    }

    #[test]
    fn column_unit() {
        let log = run(CycleApp::Column, 309_189, 13, CycleSystem::Log);
        let pos = run(CycleApp::Column, 309_189, 13, CycleSystem::Posit);
        assert_eq!(log.pe_latency, 73);
        assert_eq!(pos.pe_latency, 30);
        assert_eq!(log.total_cycles, 309_189 * 86);
        assert_eq!(log.total_cycles, 2 * pos.total_cycles);
    }

    #[test]
    fn table1() {
        let t = table1_report();
        assert_eq!(t.len(), 7);
        let mins: Vec<i64> = t.iter().map(|r| r.minpos_log2).collect();
        assert_eq!(
            mins,
            [
                -3_968,
                -31_744,
                -253_952,
                -2_031_616,
                -16_252_928,
                -130_023_424,
                -1_074
            ]
        );
        let fr: Vec<u32> = t.iter().map(|r| r.max_fraction_bits).collect();
        assert_eq!(fr, [55, 52, 49, 46, 43, 40, 52]);
        assert_eq!(t[1].format, "posit(64,9)");
        assert_eq!(t[1].useed_log2, Some(512));
    }
}
