// SPDX-License-Identifier: Apache-2.0
//! Natural-log representation of non-negative reals over binary64.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::oracle::{BigReal, Precision};

/// `ln` of a non-negative magnitude. Exact zero is a flag, never `-inf`.
#[derive(Clone, Copy, PartialEq)]
pub struct LogNum {
    lx: f64,
    is_zero: bool,
}

impl LogNum {
    pub const ZERO: LogNum = LogNum {
        lx: 0.0,
        is_zero: true,
    };
    pub const ONE: LogNum = LogNum {
        lx: 0.0,
        is_zero: false,
    };

    /// `-inf` maps to the zero flag; NaN is rejected.
    pub fn from_ln(lx: f64) -> Result<Self> {
        if lx.is_nan() {
            return Err(Error::NonFinite(lx));
        }
        if lx == f64::NEG_INFINITY {
            return Ok(Self::ZERO);
        }
        Ok(LogNum { lx, is_zero: false })
    }

    pub fn is_zero(self) -> bool {
        self.is_zero
    }

    /// The stored log, or `-inf` for zero.
    pub fn lx(self) -> f64 {
        if self.is_zero {
            f64::NEG_INFINITY
        } else {
            self.lx
        }
    }

    /// ln(x) computed in the oracle, then rounded once to binary64.
    pub fn from_real(x: &BigReal, prec: Precision) -> Result<Self> {
        if x.is_zero() {
            return Ok(Self::ZERO);
        }
        let l = x.ln(prec)?.to_f64();
        Ok(LogNum {
            lx: l,
            is_zero: false,
        })
    }

    /// exp(lx) in the oracle.
    pub fn to_real(self, prec: Precision) -> Result<BigReal> {
        if self.is_zero {
            return Ok(BigReal::zero());
        }
        BigReal::from_f64(self.lx)?.exp(prec)
    }
}

impl fmt::Display for LogNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.lx)
        }
    }
}

impl fmt::Debug for LogNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogNum({self})")
    }
}

impl PartialOrd for LogNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.is_zero, other.is_zero) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            _ => self.lx.partial_cmp(&other.lx),
        }
    }
}

/// Product: logs add.
pub fn log_mul(a: LogNum, b: LogNum) -> LogNum {
    if a.is_zero || b.is_zero {
        return LogNum::ZERO;
    }
    LogNum {
        lx: a.lx + b.lx,
        is_zero: false,
    }
}

/// `ln(exp(lx) + exp(ly))` evaluated literally. Underflows to zero below
/// about -745.13 and overflows above about 709.78.
pub fn naive_log_add(a: LogNum, b: LogNum) -> LogNum {
    let s = a.lx().exp() + b.lx().exp();
    if s == 0.0 {
        LogNum::ZERO
    } else {
        LogNum {
            lx: s.ln(),
            is_zero: false,
        }
    }
}

/// Max-shifted log-add. The larger term contributes exp(0) = 1, so the sum
/// is `m + ln(1 + exp(small - m))`; `ln_1p` keeps that accurate when the
/// smaller term is far below the larger.
pub fn lse2(a: LogNum, b: LogNum) -> LogNum {
    if a.is_zero {
        return b;
    }
    if b.is_zero {
        return a;
    }
    // first operand wins ties
    let (m, o) = if a.lx >= b.lx {
        (a.lx, b.lx)
    } else {
        (b.lx, a.lx)
    };
    if m == f64::INFINITY {
        return LogNum {
            lx: m,
            is_zero: false,
        };
    }
    LogNum {
        lx: m + (o - m).exp().ln_1p(),
        is_zero: false,
    }
}

/// Accumulation order for [`lse_n`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LseOrder {
    /// Left to right in input order.
    #[default]
    Sequential,
    /// Pairwise reduction, like a hardware adder tree.
    Tree,
}

/// `m + ln(sum exp(lx_i - m))` with `m` the first largest term.
pub fn lse_n(terms: &[LogNum], order: LseOrder) -> Result<LogNum> {
    if terms.is_empty() {
        return Err(Error::Empty);
    }
    let mut m: Option<f64> = None;
    for t in terms.iter().filter(|t| !t.is_zero) {
        if m.is_none_or(|m| t.lx > m) {
            m = Some(t.lx);
        }
    }
    let Some(m) = m else {
        return Ok(LogNum::ZERO);
    };
    if m == f64::INFINITY {
        return Ok(LogNum {
            lx: m,
            is_zero: false,
        });
    }
    let shifted = |t: &LogNum| if t.is_zero { 0.0 } else { (t.lx - m).exp() };
    let sum = match order {
        LseOrder::Sequential => terms.iter().map(shifted).fold(0.0, |acc, v| acc + v),
        LseOrder::Tree => tree_sum(&terms.iter().map(shifted).collect::<Vec<_>>()),
    };
    Ok(LogNum {
        lx: m + sum.ln(),
        is_zero: false,
    })
}

fn tree_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => {
            let half = n.next_power_of_two() / 2;
            tree_sum(&v[..half]) + tree_sum(&v[half..])
        }
    }
}
