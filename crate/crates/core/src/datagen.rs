// SPDX-License-Identifier: Apache-2.0
//! Seeded synthetic inputs. Every item draws from its own ChaCha stream keyed
//! by (master seed, item index), so generation order never matters.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::kernels::{HmmModel, PbdInstance};
use crate::oracle::{BigReal, Precision};
use crate::system::{NumericSystem, Oracle};

/// Significand width of sampled operands.
pub const OPERAND_BITS: u32 = 256;

const TAG_HMM: u64 = 0x686d_6d00;
const TAG_PBD: u64 = 0x7062_6400;
const TAG_OPS: u64 = 0x6f70_7300;

fn item_rng(master_seed: u64, tag: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ tag);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbLaw {
    LogUniform {
        lo: f64,
        hi: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Every probability equal; may be 0 or 1.
    Constant(f64),
}

impl Default for ProbLaw {
    fn default() -> Self {
        ProbLaw::LogUniform { lo: 1e-8, hi: 1e-3 }
    }
}

impl ProbLaw {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ProbLaw::LogUniform { lo, hi } => lo > 0.0 && lo <= hi && hi <= 1.0,
            ProbLaw::Uniform { lo, hi } => lo > 0.0 && lo <= hi && hi <= 1.0,
            ProbLaw::Constant(p) => (0.0..=1.0).contains(&p),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("bad probability law {self}")))
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            ProbLaw::LogUniform { lo, hi } => {
                let u: f64 = rng.random();
                (lo.ln() + u * (hi.ln() - lo.ln())).exp().clamp(lo, hi)
            }
            ProbLaw::Uniform { lo, hi } => {
                let u: f64 = rng.random();
                (lo + u * (hi - lo)).clamp(lo, hi)
            }
            ProbLaw::Constant(p) => p,
        }
    }
}

impl fmt::Display for ProbLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbLaw::LogUniform { lo, hi } => write!(f, "loguniform:{lo:e}:{hi:e}"),
            ProbLaw::Uniform { lo, hi } => write!(f, "uniform:{lo:e}:{hi:e}"),
            ProbLaw::Constant(p) => write!(f, "constant:{p:e}"),
        }
    }
}

impl FromStr for ProbLaw {
    type Err = Error;

    /// `loguniform:LO:HI`, `uniform:LO:HI` or `constant:P`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("bad probability law '{s}'"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        let law = match parts.as_slice() {
            ["loguniform", lo, hi] => ProbLaw::LogUniform {
                lo: num(lo)?,
                hi: num(hi)?,
            },
            ["uniform", lo, hi] => ProbLaw::Uniform {
                lo: num(lo)?,
                hi: num(hi)?,
            },
            ["constant", p] => ProbLaw::Constant(num(p)?),
            _ => return Err(bad()),
        };
        law.validate()?;
        Ok(law)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Add,
    Mul,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpKind::Add => "add",
            OpKind::Mul => "mul",
        })
    }
}

impl FromStr for OpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "add" => Ok(OpKind::Add),
            "mul" => Ok(OpKind::Mul),
            _ => Err(Error::InvalidSpec(format!("unknown op '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GenKind {
    Hmm {
        h: usize,
        m: usize,
        t: usize,
        alpha: f64,
    },
    Pbd {
        n: usize,
        k: usize,
        law: ProbLaw,
    },
    /// Result exponents drawn from `[exp_lo, exp_hi)`.
    Operands {
        op: OpKind,
        count: usize,
        exp_lo: i64,
        exp_hi: i64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub master_seed: u64,
    /// Position within an ensemble; selects the random stream.
    pub item: u64,
    pub kind: GenKind,
}

impl GenSpec {
    pub fn hmm(master_seed: u64, item: u64, h: usize, m: usize, t: usize) -> Self {
        GenSpec {
            master_seed,
            item,
            kind: GenKind::Hmm {
                h,
                m,
                t,
                alpha: 1.0,
            },
        }
    }

    pub fn pbd(master_seed: u64, item: u64, n: usize, k: usize, law: ProbLaw) -> Self {
        GenSpec {
            master_seed,
            item,
            kind: GenKind::Pbd { n, k, law },
        }
    }

    pub fn operands(master_seed: u64, op: OpKind, count: usize, exp_lo: i64, exp_hi: i64) -> Self {
        GenSpec {
            master_seed,
            item: 0,
            kind: GenKind::Operands {
                op,
                count,
                exp_lo,
                exp_hi,
            },
        }
    }

    /// Flat `key=value` description, one per line.
    pub fn describe(&self) -> String {
        let head = format!("seed={}\nitem={}\n", self.master_seed, self.item);
        let tail = match &self.kind {
            GenKind::Hmm { h, m, t, alpha } => {
                format!("kind=hmm\nh={h}\nm={m}\nt={t}\nalpha={alpha}\n")
            }
            GenKind::Pbd { n, k, law } => format!("kind=pbd\nn={n}\nk={k}\nlaw={law}\n"),
            GenKind::Operands {
                op,
                count,
                exp_lo,
                exp_hi,
            } => {
                format!("kind=operands\nop={op}\ncount={count}\nexp_lo={exp_lo}\nexp_hi={exp_hi}\n")
            }
        };
        head + &tail
    }
}

fn dirichlet_row(rng: &mut ChaCha8Rng, gamma: &Gamma<f64>, dim: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
        let s: f64 = g.iter().sum();
        if g.iter().all(|&x| x > 0.0) && s.is_finite() {
            return g.iter().map(|x| x / s).collect();
        }
    }
}

/// Rows of A and B from a symmetric Dirichlet, observations uniform, prior
/// uniform.
pub fn gen_hmm(spec: &GenSpec) -> Result<HmmModel> {
    let GenKind::Hmm { h, m, t, alpha } = spec.kind else {
        return Err(Error::InvalidSpec("expected an hmm spec".into()));
    };
    if h < 1 || m < 2 || t < 1 {
        return Err(Error::InvalidSpec(format!(
            "need H >= 1, M >= 2, T >= 1; got {h} {m} {t}"
        )));
    }
    let gamma =
        Gamma::new(alpha, 1.0).map_err(|e| Error::InvalidSpec(format!("alpha {alpha}: {e}")))?;
    let mut rng = item_rng(spec.master_seed, TAG_HMM, spec.item);
    let a = (0..h).map(|_| dirichlet_row(&mut rng, &gamma, h)).collect();
    let b = (0..h).map(|_| dirichlet_row(&mut rng, &gamma, m)).collect();
    let obs = (0..t).map(|_| rng.random_range(0..m)).collect();
    HmmModel::new(a, b, obs)
}

pub fn gen_pbd(spec: &GenSpec) -> Result<PbdInstance> {
    let GenKind::Pbd { n, k, law } = spec.kind else {
        return Err(Error::InvalidSpec("expected a pbd spec".into()));
    };
    if k < 1 || k > n {
        return Err(Error::InvalidSpec(format!(
            "need 1 <= K <= N, got K={k} N={n}"
        )));
    }
    law.validate()?;
    let mut rng = item_rng(spec.master_seed, TAG_PBD, spec.item);
    let probs = (0..n).map(|_| law.sample(&mut rng)).collect();
    PbdInstance::new(k, probs)
}

/// Uniform value in `[0, 1)` with `OPERAND_BITS` random bits.
fn unit_fraction(rng: &mut ChaCha8Rng) -> BigReal {
    let mut bytes = [0u8; OPERAND_BITS as usize / 8];
    rng.fill(&mut bytes[..]);
    BigReal::from_parts(
        false,
        BigUint::from_bytes_le(&bytes),
        -(OPERAND_BITS as i64),
    )
}

fn pair(rng: &mut ChaCha8Rng, op: OpKind, exp_lo: i64, exp_hi: i64) -> (BigReal, BigReal) {
    let p = Precision::new(OPERAND_BITS).expect("valid width");
    let er = rng.random_range(exp_lo..exp_hi);
    // keep the significand off the binade edges so rounding a or b cannot
    // move the exact result into a neighbouring exponent
    let edge = BigReal::pow2(-20);
    let span = BigReal::one().sub_exact(&edge.mul_pow2(1));
    let sig = BigReal::one()
        .add_exact(&edge)
        .add(&unit_fraction(rng).mul(&span, p), p);
    let r = sig.mul_pow2(er);
    match op {
        OpKind::Mul => loop {
            // a in [r, 1), then b = r / a lands in (r, 1]
            let ea = rng.random_range(er..0);
            let a = BigReal::one().add(&unit_fraction(rng), p).mul_pow2(ea);
            if a < r {
                continue;
            }
            let b = r.div(&a, p).expect("a is nonzero");
            return (a, b);
        },
        OpKind::Add => {
            let floor = BigReal::pow2(er - 1);
            let lo = std::cmp::max(floor.clone(), r.sub_exact(&BigReal::one()));
            let hi = std::cmp::min(r.sub_exact(&floor), BigReal::one());
            let a = lo.add(&hi.sub_exact(&lo).mul(&unit_fraction(rng), p), p);
            let b = r.sub(&a, p);
            (a, b)
        }
    }
}

/// The `index`-th operand pair of an operand spec, without generating the
/// ones before it.
pub fn operand_pair(spec: &GenSpec, index: usize) -> Result<(BigReal, BigReal)> {
    let GenKind::Operands {
        op,
        count,
        exp_lo,
        exp_hi,
    } = spec.kind
    else {
        return Err(Error::InvalidSpec("expected an operands spec".into()));
    };
    if exp_lo >= exp_hi || exp_hi > 0 {
        return Err(Error::InvalidSpec(format!(
            "empty or positive exponent range [{exp_lo}, {exp_hi})"
        )));
    }
    if index >= count {
        return Err(Error::OutOfRange);
    }
    let stream = (spec.item << 32) | index as u64;
    let mut rng = item_rng(spec.master_seed, TAG_OPS, stream);
    Ok(pair(&mut rng, op, exp_lo, exp_hi))
}

/// Operand pairs whose exact result has exponent uniform over the range and
/// whose operands all lie in (0, 1].
pub fn sample_operands(spec: &GenSpec) -> Result<Vec<(BigReal, BigReal)>> {
    let GenKind::Operands { count, .. } = spec.kind else {
        return Err(Error::InvalidSpec("expected an operands spec".into()));
    };
    if count == 0 {
        return Err(Error::InvalidSpec("count must be at least 1".into()));
    }
    (0..count).map(|i| operand_pair(spec, i)).collect()
}

/// Oracle wrapper that records every add and mul it performs.
struct Recorder {
    inner: Oracle,
    log: RefCell<Vec<(OpKind, BigReal, BigReal)>>,
    limit: usize,
}

impl Recorder {
    fn push(&self, op: OpKind, a: &BigReal, b: &BigReal) {
        let mut log = self.log.borrow_mut();
        if log.len() < self.limit && !a.is_zero() && !b.is_zero() {
            log.push((op, a.clone(), b.clone()));
        }
    }
}

impl NumericSystem for Recorder {
    type Value = BigReal;

    fn zero(&self) -> BigReal {
        self.inner.zero()
    }
    fn one(&self) -> BigReal {
        self.inner.one()
    }
    fn add(&self, a: &BigReal, b: &BigReal) -> BigReal {
        self.push(OpKind::Add, a, b);
        self.inner.add(a, b)
    }
    fn mul(&self, a: &BigReal, b: &BigReal) -> BigReal {
        self.push(OpKind::Mul, a, b);
        self.inner.mul(a, b)
    }
    fn encode(&self, x: &BigReal) -> Result<BigReal> {
        self.inner.encode(x)
    }
    fn decode(&self, v: &BigReal) -> Result<BigReal> {
        self.inner.decode(v)
    }
    fn is_zero(&self, v: &BigReal) -> bool {
        v.is_zero()
    }
}

/// Operand pairs seen by an oracle forward run, in execution order, up to
/// `limit`. Additions with a zero operand are skipped.
pub fn harvest_operands(
    model: &HmmModel,
    prec: Precision,
    limit: usize,
) -> Result<Vec<(OpKind, BigReal, BigReal)>> {
    let rec = Recorder {
        inner: Oracle(prec),
        log: RefCell::new(Vec::new()),
        limit,
    };
    crate::kernels::forward(model, &rec)?;
    Ok(rec.log.into_inner())
}
