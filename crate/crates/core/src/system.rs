// SPDX-License-Identifier: Apache-2.0
//! Number systems the kernels run in, all exchanging values through `BigReal`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::logspace::{log_mul, lse2, lse_n, LogNum, LseOrder};
use crate::oracle::{BigReal, Precision};
use crate::posit::{posit_add, posit_mul, posit_to_real, real_to_posit, PositConfig, PositValue};

/// Arithmetic a kernel needs. For log-space, add is LSE and mul is a sum of
/// logs; encode/decode go through the oracle.
pub trait NumericSystem {
    type Value: Clone;

    fn zero(&self) -> Self::Value;
    fn one(&self) -> Self::Value;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn encode(&self, x: &BigReal) -> Result<Self::Value>;
    fn decode(&self, v: &Self::Value) -> Result<BigReal>;
    fn is_zero(&self, v: &Self::Value) -> bool;

    /// Left-to-right accumulation from zero.
    fn sum(&self, terms: &[Self::Value]) -> Self::Value {
        terms.iter().fold(self.zero(), |acc, t| self.add(&acc, t))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Binary64;

impl NumericSystem for Binary64 {
    type Value = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn encode(&self, x: &BigReal) -> Result<f64> {
        Ok(x.to_f64())
    }
    fn decode(&self, v: &f64) -> Result<BigReal> {
        BigReal::from_f64(*v)
    }
    fn is_zero(&self, v: &f64) -> bool {
        *v == 0.0
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PositSystem(pub PositConfig);

impl NumericSystem for PositSystem {
    type Value = PositValue;

    fn zero(&self) -> PositValue {
        PositValue::zero(self.0)
    }
    fn one(&self) -> PositValue {
        PositValue::one(self.0)
    }
    fn add(&self, a: &PositValue, b: &PositValue) -> PositValue {
        posit_add(*a, *b).expect("operands share one config")
    }
    fn mul(&self, a: &PositValue, b: &PositValue) -> PositValue {
        posit_mul(*a, *b).expect("operands share one config")
    }
    fn encode(&self, x: &BigReal) -> Result<PositValue> {
        Ok(real_to_posit(x, self.0))
    }
    fn decode(&self, v: &PositValue) -> Result<BigReal> {
        posit_to_real(*v)
    }
    fn is_zero(&self, v: &PositValue) -> bool {
        v.is_zero()
    }
}

/// binary64 logs; `prec` is the oracle precision used for conversions.
#[derive(Clone, Copy, Debug)]
pub struct LogSpace {
    pub prec: Precision,
    pub order: LseOrder,
}

impl LogSpace {
    pub fn new(prec: Precision) -> Self {
        LogSpace {
            prec,
            order: LseOrder::Sequential,
        }
    }
}

impl NumericSystem for LogSpace {
    type Value = LogNum;

    fn zero(&self) -> LogNum {
        LogNum::ZERO
    }
    fn one(&self) -> LogNum {
        LogNum::ONE
    }
    fn add(&self, a: &LogNum, b: &LogNum) -> LogNum {
        lse2(*a, *b)
    }
    fn mul(&self, a: &LogNum, b: &LogNum) -> LogNum {
        log_mul(*a, *b)
    }
    fn sum(&self, terms: &[LogNum]) -> LogNum {
        lse_n(terms, self.order).unwrap_or(LogNum::ZERO)
    }
    fn encode(&self, x: &BigReal) -> Result<LogNum> {
        LogNum::from_real(x, self.prec)
    }
    fn decode(&self, v: &LogNum) -> Result<BigReal> {
        v.to_real(self.prec)
    }
    fn is_zero(&self, v: &LogNum) -> bool {
        v.is_zero()
    }
}

/// Ground truth: every operation rounds once at `prec` bits.
#[derive(Clone, Copy, Debug)]
pub struct Oracle(pub Precision);

impl NumericSystem for Oracle {
    type Value = BigReal;

    fn zero(&self) -> BigReal {
        BigReal::zero()
    }
    fn one(&self) -> BigReal {
        BigReal::one()
    }
    fn add(&self, a: &BigReal, b: &BigReal) -> BigReal {
        a.add(b, self.0)
    }
    fn mul(&self, a: &BigReal, b: &BigReal) -> BigReal {
        a.mul(b, self.0)
    }
    fn encode(&self, x: &BigReal) -> Result<BigReal> {
        Ok(x.round(self.0))
    }
    fn decode(&self, v: &BigReal) -> Result<BigReal> {
        Ok(v.clone())
    }
    fn is_zero(&self, v: &BigReal) -> bool {
        v.is_zero()
    }
}

/// Logs held as oracle values; `None` is log of zero.
#[derive(Clone, Copy, Debug)]
pub struct OracleLog(pub Precision);

impl OracleLog {
    fn lse(&self, terms: &[Option<BigReal>]) -> Option<BigReal> {
        let p = self.0;
        let m = terms.iter().flatten().max()?.clone();
        let mut s = BigReal::zero();
        for t in terms.iter().flatten() {
            let e = if *t == m {
                BigReal::one()
            } else {
                t.sub(&m, p)
                    .exp(p)
                    .expect("shifted argument is non-positive")
            };
            s = s.add(&e, p);
        }
        Some(m.add(&s.ln(p).expect("sum is at least one"), p))
    }
}

impl NumericSystem for OracleLog {
    type Value = Option<BigReal>;

    fn zero(&self) -> Option<BigReal> {
        None
    }
    fn one(&self) -> Option<BigReal> {
        Some(BigReal::zero())
    }
    fn add(&self, a: &Option<BigReal>, b: &Option<BigReal>) -> Option<BigReal> {
        self.lse(&[a.clone(), b.clone()])
    }
    fn mul(&self, a: &Option<BigReal>, b: &Option<BigReal>) -> Option<BigReal> {
        Some(a.as_ref()?.add(b.as_ref()?, self.0))
    }
    fn sum(&self, terms: &[Option<BigReal>]) -> Option<BigReal> {
        self.lse(terms)
    }
    fn encode(&self, x: &BigReal) -> Result<Option<BigReal>> {
        if x.is_zero() {
            return Ok(None);
        }
        x.ln(self.0).map(Some)
    }
    fn decode(&self, v: &Option<BigReal>) -> Result<BigReal> {
        match v {
            None => Ok(BigReal::zero()),
            Some(l) => l.exp(self.0),
        }
    }
    fn is_zero(&self, v: &Option<BigReal>) -> bool {
        v.is_none()
    }
}

/// A system named on the command line or in CSV output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemId {
    Binary64,
    Log,
    Oracle,
    Posit(PositConfig),
}

impl SystemId {
    pub const DEFAULT_SET: &'static str = "binary64,log,posit64e9,posit64e12,posit64e18";

    pub fn posit(n_bits: u32, es: u32) -> Result<Self> {
        Ok(SystemId::Posit(PositConfig::new(n_bits, es)?))
    }

    /// Comma-separated list; rejects unknown names and empty entries.
    pub fn parse_list(s: &str) -> Result<Vec<SystemId>> {
        s.split(',').map(|t| t.trim().parse()).collect()
    }

    pub fn default_set() -> Vec<SystemId> {
        Self::parse_list(Self::DEFAULT_SET).expect("default list parses")
    }
}

/// A computation generic over the system, run through [`SystemId::visit`].
pub trait SystemVisitor {
    type Out;
    fn visit<S: NumericSystem>(self, sys: &S) -> Self::Out;
}

impl SystemId {
    /// Instantiate the system with oracle precision `prec` (used by the
    /// oracle itself and by log-space conversions) and run `v` in it.
    pub fn visit<V: SystemVisitor>(&self, prec: Precision, order: LseOrder, v: V) -> V::Out {
        match *self {
            SystemId::Binary64 => v.visit(&Binary64),
            SystemId::Log => v.visit(&LogSpace { prec, order }),
            SystemId::Oracle => v.visit(&Oracle(prec)),
            SystemId::Posit(c) => v.visit(&PositSystem(c)),
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemId::Binary64 => f.write_str("binary64"),
            SystemId::Log => f.write_str("log"),
            SystemId::Oracle => f.write_str("oracle"),
            SystemId::Posit(c) => write!(f, "posit{}e{}", c.n_bits(), c.es()),
        }
    }
}

impl FromStr for SystemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary64" => return Ok(SystemId::Binary64),
            "log" => return Ok(SystemId::Log),
            "oracle" => return Ok(SystemId::Oracle),
            _ => {}
        }
        let bad = || Error::UnknownSystem(s.to_string());
        let rest = s.strip_prefix("posit").ok_or_else(bad)?;
        let (n, es) = rest.split_once('e').ok_or_else(bad)?;
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        if !digits(n) || !digits(es) {
            return Err(bad());
        }
        let n = n.parse().map_err(|_| bad())?;
        let es = es.parse().map_err(|_| bad())?;
        SystemId::posit(n, es).map_err(|_| bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip<S: NumericSystem>(s: &S) {
        assert_eq!(s.decode(&s.zero()).unwrap(), BigReal::zero());
        assert_eq!(s.decode(&s.one()).unwrap(), BigReal::one());
        let close = |v: &S::Value, want: f64| {
            let got = s.decode(v).unwrap().to_f64();
            assert!(
                (got - want).abs() <= 4.0 * f64::EPSILON * want,
                "{got} vs {want}"
            );
        };
        close(
            &s.encode(&BigReal::from_f64(0.375).unwrap()).unwrap(),
            0.375,
        );
        let two = s.add(&s.one(), &s.one());
        close(&s.mul(&two, &two), 4.0);
        close(&s.sum(&[s.one(), two.clone(), s.zero()]), 3.0);
    }

    #[test]
    fn every_system_round_trips_simple_values() {
        let p = Precision::default();
        roundtrip(&Binary64);
        roundtrip(&PositSystem(PositConfig::new(64, 12).unwrap()));
        roundtrip(&LogSpace::new(p));
        roundtrip(&Oracle(p));
        roundtrip(&OracleLog(p));
    }

    #[test]
    fn system_names() {
        for s in [
            "binary64",
            "log",
            "oracle",
            "posit64e9",
            "posit8e2",
            "posit32e0",
        ] {
            assert_eq!(s.parse::<SystemId>().unwrap().to_string(), s);
        }
        for s in [
            "posit",
            "posit64",
            "posit64e",
            "posit99e1",
            "posite2",
            "Log",
            "posit64e+9",
            "f64",
        ] {
            assert!(
                matches!(s.parse::<SystemId>(), Err(Error::UnknownSystem(_))),
                "{s}"
            );
        }
        assert_eq!(SystemId::default_set().len(), 5);
        assert!(SystemId::parse_list("binary64,,log").is_err());
    }
}
