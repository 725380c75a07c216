// SPDX-License-Identifier: Apache-2.0
//! Bit-exact posits, log-space arithmetic and an arbitrary-precision oracle,
//! with the kernels and experiment drivers that compare them.

pub mod cycles;
pub mod datagen;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod logspace;
pub mod oracle;
pub mod posit;
pub mod report;
pub mod selftest;
pub mod system;

pub use error::{Error, Result};
pub use logspace::{LogNum, LseOrder};
pub use oracle::{BigReal, Precision, RelativeError, Rounding};
pub use system::{NumericSystem, SystemId};
