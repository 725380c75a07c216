// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precision must be at least 64 bits, got {0}")]
    InvalidPrecision(u32),
    #[error("value {0} is not finite")]
    NonFinite(f64),
    #[error("zero has no binary exponent")]
    ZeroHasNoExponent,
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of a non-positive value")]
    LogOfNonPositive,
    #[error("exponential argument out of range")]
    ExpOutOfRange,
    #[error("invalid posit configuration posit({n_bits},{es})")]
    InvalidPositConfig { n_bits: u32, es: u32 },
    #[error("posit configurations differ")]
    ConfigMismatch,
    #[error("pattern is NaR")]
    NotAReal,
    #[error("pattern is zero or NaR")]
    SpecialPattern,
    #[error("value outside [minpos, maxpos]")]
    OutOfRange,
    #[error("empty input")]
    Empty,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("unknown number system {0:?}")]
    UnknownSystem(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid cycle parameters: {0}")]
    InvalidCycleParams(String),
    #[error("invalid bucket edges: {0}")]
    InvalidBuckets(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
