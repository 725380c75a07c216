// SPDX-License-Identifier: Apache-2.0

//! Arbitrary-precision binary floating point used as ground truth.
//!
//! A [`BigReal`] is an exact dyadic rational `±mant × 2^exp` with an odd
//! (or zero) integer significand and a 64-bit exponent. Values are exact
//! until an operation is asked to round; every rounding operation takes an
//! explicit significand width, so a computation context is just a
//! [`Precision`] threaded through the calls.
//!
//! `ln` and `exp` are evaluated in fixed point with 64 guard bits and then
//! rounded once, which keeps them within one ulp of the true value.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Significand width, in bits, of an oracle computation context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(256);
    pub const MIN_BITS: u32 = 64;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::InvalidPrecision(bits));
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    NearestEven,
    /// Round to odd: truncate, then force the last kept bit to one if
    /// anything was discarded. A later nearest-even rounding to at least two
    /// fewer bits is then free of double-rounding errors.
    Odd,
    TowardZero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BigReal {
    neg: bool,
    mant: BigUint,
    exp: i64,
}

/// Relative error `|x - y| / |x|`, or the marker for a nonzero result
/// against a zero truth.
#[derive(Clone, Debug, PartialEq)]
pub enum RelativeError {
    Finite(BigReal),
    Infinite,
}

impl RelativeError {
    pub fn to_f64(&self) -> f64 {
        match self {
            RelativeError::Finite(v) => v.to_f64(),
            RelativeError::Infinite => f64::INFINITY,
        }
    }
}

impl BigReal {
    fn canonical(neg: bool, mant: BigUint, exp: i64) -> Self {
        if mant.is_zero() {
            return BigReal::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        let (mant, exp) = if tz > 0 {
            (mant >> tz, exp + tz as i64)
        } else {
            (mant, exp)
        };
        BigReal { neg, mant, exp }
    }

    /// `(-1)^neg × mant × 2^exp`.
    pub fn from_parts(neg: bool, mant: BigUint, exp: i64) -> Self {
        Self::canonical(neg, mant, exp)
    }

    pub fn zero() -> Self {
        BigReal {
            neg: false,
            mant: BigUint::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Self::pow2(0)
    }

    pub fn pow2(exp: i64) -> Self {
        BigReal {
            neg: false,
            mant: BigUint::one(),
            exp,
        }
    }

    pub fn from_u64(v: u64) -> Self {
        Self::canonical(false, BigUint::from(v), 0)
    }

    pub fn from_i64(v: i64) -> Self {
        Self::canonical(v < 0, BigUint::from(v.unsigned_abs()), 0)
    }

    pub fn from_bigint(v: &BigInt, exp: i64) -> Self {
        Self::canonical(v.sign() == Sign::Minus, v.magnitude().clone(), exp)
    }

    /// Exact conversion; fails for NaN and infinities.
    pub fn from_f64(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite(v));
        }
        let bits = v.to_bits();
        let neg = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Ok(Self::canonical(neg, BigUint::from(mant), exp))
    }

    /// `num / den` rounded to nearest at `prec`.
    pub fn from_ratio(num: u64, den: u64, prec: Precision) -> Result<Self> {
        BigReal::from_u64(num).div(&BigReal::from_u64(den), prec)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn abs(&self) -> Self {
        BigReal {
            neg: false,
            ..self.clone()
        }
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        BigReal {
            neg: !self.neg,
            ..self.clone()
        }
    }

    /// Odd integer significand (zero for zero).
    pub fn mantissa(&self) -> &BigUint {
        &self.mant
    }

    /// Exponent of the least significant set bit.
    pub fn lsb_exponent(&self) -> i64 {
        self.exp
    }

    /// Number of bits between the leading and trailing set bits, inclusive.
    pub fn significant_bits(&self) -> u64 {
        self.mant.bits()
    }

    fn msb(&self) -> i64 {
        debug_assert!(!self.is_zero());
        self.exp + self.mant.bits() as i64 - 1
    }

    /// The unique `E` with `1 <= |a| / 2^E < 2`.
    pub fn exponent_of(&self) -> Result<i64> {
        if self.is_zero() {
            return Err(Error::ZeroHasNoExponent);
        }
        Ok(self.msb())
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        BigReal {
            exp: self.exp + k,
            ..self.clone()
        }
    }

    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        match self.msb().cmp(&other.msb()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // Same leading bit position: align at the smaller lsb.
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        a.cmp(&b)
    }

    // ---- exact arithmetic ------------------------------------------------

    pub fn add_exact(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        if self.neg == other.neg {
            return Self::canonical(self.neg, a + b, e);
        }
        match a.cmp(&b) {
            Ordering::Equal => BigReal::zero(),
            Ordering::Greater => Self::canonical(self.neg, a - b, e),
            Ordering::Less => Self::canonical(other.neg, b - a, e),
        }
    }

    pub fn sub_exact(&self, other: &Self) -> Self {
        self.add_exact(&other.neg())
    }

    pub fn mul_exact(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return BigReal::zero();
        }
        BigReal {
            neg: self.neg != other.neg,
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    // ---- rounding --------------------------------------------------------

    /// Round to `bits` significand bits. Returns the result and whether it
    /// differs from `self`.
    pub fn round_bits(&self, bits: u64, mode: Rounding) -> (Self, bool) {
        round_parts(self.neg, &self.mant, self.exp, bits, mode)
    }

    pub fn round(&self, prec: Precision) -> Self {
        self.round_bits(prec.bits() as u64, Rounding::NearestEven).0
    }

    /// `self + other` correctly rounded to `bits` significand bits.
    ///
    /// An operand lying entirely below the rounding window is replaced by a
    /// single same-signed bit just under the other operand's last bit, which
    /// leaves every rounding decision unchanged and bounds the work by the
    /// operand widths instead of their exponent gap.
    pub fn add_bits(&self, other: &Self, bits: u64, mode: Rounding) -> (Self, bool) {
        if self.is_zero() {
            return other.round_bits(bits, mode);
        }
        if other.is_zero() {
            return self.round_bits(bits, mode);
        }
        let (big, small) = if self.msb() >= other.msb() {
            (self, other)
        } else {
            (other, self)
        };
        let floor = (big.msb() - bits as i64 - 3).min(big.exp - 1);
        if small.msb() <= floor {
            let proxy = BigReal {
                neg: small.neg,
                mant: BigUint::one(),
                exp: floor,
            };
            big.add_exact(&proxy).round_bits(bits, mode)
        } else {
            big.add_exact(small).round_bits(bits, mode)
        }
    }

    pub fn add(&self, other: &Self, prec: Precision) -> Self {
        self.add_bits(other, prec.bits() as u64, Rounding::NearestEven)
            .0
    }

    pub fn sub(&self, other: &Self, prec: Precision) -> Self {
        self.add(&other.neg(), prec)
    }

    pub fn mul(&self, other: &Self, prec: Precision) -> Self {
        self.mul_exact(other).round(prec)
    }

    pub fn div_bits(&self, other: &Self, bits: u64, mode: Rounding) -> Result<(Self, bool)> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok((BigReal::zero(), false));
        }
        let want = bits as i64 + 3 + other.mant.bits() as i64 - self.mant.bits() as i64;
        let shift = want.max(0) as u64;
        let num = &self.mant << shift;
        let (q, r) = num.div_rem(&other.mant);
        let mut exp = self.exp - shift as i64 - other.exp;
        let q = if r.is_zero() {
            q
        } else {
            // Sticky bit below the quotient keeps every rounding mode exact.
            exp -= 1;
            (q << 1u32) | BigUint::one()
        };
        Ok(round_parts(self.neg != other.neg, &q, exp, bits, mode))
    }

    pub fn div(&self, other: &Self, prec: Precision) -> Result<Self> {
        Ok(self
            .div_bits(other, prec.bits() as u64, Rounding::NearestEven)?
            .0)
    }

    pub fn arith(&self, op: ArithOp, other: &Self, prec: Precision) -> Result<Self> {
        Ok(match op {
            ArithOp::Add => self.add(other, prec),
            ArithOp::Sub => self.sub(other, prec),
            ArithOp::Mul => self.mul(other, prec),
            ArithOp::Div => self.div(other, prec)?,
        })
    }

    /// `self^n` by square-and-multiply, rounding after every product.
    pub fn powi(&self, mut n: u64, prec: Precision) -> Self {
        let mut acc = BigReal::one();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, prec);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base, prec);
            }
        }
        acc
    }

    // ---- conversions -----------------------------------------------------

    /// Round to the nearest binary64 (ties to even), with gradual underflow
    /// and overflow to infinity.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let sign = if self.neg { -1.0 } else { 1.0 };
        let top = self.msb();
        if top > 1023 {
            return sign * f64::INFINITY;
        }
        let lsb = if top >= -1022 { top - 52 } else { -1074 };
        if top < lsb - 1 {
            return sign * 0.0;
        }
        let n = round_to_integer_multiple(&self.mant, self.exp, lsb);
        let n = n.to_u64().expect("at most 54 bits");
        let bits = if lsb == -1074 && n <= 1u64 << 52 {
            // Subnormal, or exactly the smallest normal.
            n
        } else {
            let (mut n, mut lsb) = (n, lsb);
            if n == 1u64 << 53 {
                n >>= 1;
                lsb += 1;
            }
            let biased = lsb + 52 + 1023;
            if biased >= 2047 {
                return sign * f64::INFINITY;
            }
            ((biased as u64) << 52) | (n - (1u64 << 52))
        };
        sign * f64::from_bits(bits)
    }

    // ---- transcendental functions ----------------------------------------

    /// Natural logarithm, within one ulp at `prec`.
    pub fn ln(&self, prec: Precision) -> Result<Self> {
        if self.is_zero() || self.neg {
            return Err(Error::LogOfNonPositive);
        }
        let mut e = self.msb();
        // m = self / 2^e in [1, 2) as a fixed-point integer; move to
        // [sqrt(1/2), sqrt(2)) so the atanh argument stays below 0.1716.
        let top64 = top_bits_u64(&self.mant);
        if top64 > SQRT2_Q63 {
            e += 1;
        }
        let mut work = prec.bits() as u64 + GUARD_BITS;
        if e == 0 {
            // ln(m) ~ m - 1: keep enough bits below the cancellation.
            let d = self.sub_exact(&BigReal::one());
            if d.is_zero() {
                return Ok(BigReal::zero());
            }
            work += (-d.msb()).max(0) as u64;
        }
        let unit = BigInt::one() << work;
        let m_fix = self.fixed(work as i64 - e);
        let z = ((&m_fix - &unit) << work) / (&m_fix + &unit);
        let ln_m = atanh_fixed(&z, work) << 1u32;
        let total = if e == 0 {
            ln_m
        } else {
            let eb = 64 - e.unsigned_abs().leading_zeros() as u64 + 2;
            let l2 = BigInt::from(ln2_fixed(work + eb));
            ((l2 * BigInt::from(e)) >> eb) + ln_m
        };
        Ok(BigReal::from_bigint(&total, -(work as i64)).round(prec))
    }

    /// `e^self`, within one ulp at `prec`.
    pub fn exp(&self, prec: Precision) -> Result<Self> {
        if self.is_zero() {
            return Ok(BigReal::one());
        }
        if self.msb() > 60 {
            return Err(Error::ExpOutOfRange);
        }
        let k = (self.to_f64() / std::f64::consts::LN_2).round() as i64;
        let eb = 64 - k.unsigned_abs().leading_zeros() as u64 + 2;
        let work = prec.bits() as u64 + GUARD_BITS;
        // Halve the reduced argument `halvings` times, square back after.
        let halvings = ((work as f64).sqrt() / 2.0) as u64;
        let wf = work + halvings;
        let x_fix = self.fixed((wf + eb) as i64);
        let l2 = BigInt::from(ln2_fixed(wf + eb));
        let r = (x_fix - l2 * BigInt::from(k)) >> (eb + halvings);
        let unit = BigInt::one() << wf;
        let mut sum = unit.clone();
        let mut term = unit;
        let mut n = 1u64;
        loop {
            term = (&term * &r) >> wf;
            term /= n;
            if term.is_zero() {
                break;
            }
            sum += &term;
            n += 1;
        }
        for _ in 0..halvings {
            sum = (&sum * &sum) >> wf;
        }
        Ok(BigReal::from_bigint(&sum, k - wf as i64).round(prec))
    }

    /// `floor(self × 2^frac_bits)` as a signed integer.
    fn fixed(&self, frac_bits: i64) -> BigInt {
        let shift = self.exp + frac_bits;
        let mag = if shift >= 0 {
            &self.mant << shift as u64
        } else {
            &self.mant >> (-shift) as u64
        };
        let v = BigInt::from_biguint(Sign::Plus, mag);
        if self.neg {
            -v
        } else {
            v
        }
    }
}

impl Ord for BigReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.neg, other.neg) {
            (false, true) => {
                if self.is_zero() && other.is_zero() {
                    Ordering::Equal
                } else {
                    Ordering::Greater
                }
            }
            (true, false) => Ordering::Less,
            (false, false) => self.cmp_abs(other),
            (true, true) => other.cmp_abs(self),
        }
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `|x - y| / |x|` at `prec`. A zero truth gives zero error for a zero
/// result and [`RelativeError::Infinite`] otherwise.
pub fn relative_error(x_true: &BigReal, y: &BigReal, prec: Precision) -> RelativeError {
    if x_true.is_zero() {
        return if y.is_zero() {
            RelativeError::Finite(BigReal::zero())
        } else {
            RelativeError::Infinite
        };
    }
    let bits = prec.bits() as u64;
    let diff = x_true.add_bits(&y.neg(), bits, Rounding::NearestEven).0;
    let err = diff
        .abs()
        .div(&x_true.abs(), prec)
        .expect("nonzero divisor");
    RelativeError::Finite(err)
}

pub fn big_arith(op: ArithOp, a: &BigReal, b: &BigReal, prec: Precision) -> Result<BigReal> {
    a.arith(op, b, prec)
}

pub fn big_ln(a: &BigReal, prec: Precision) -> Result<BigReal> {
    a.ln(prec)
}

pub fn big_exp(a: &BigReal, prec: Precision) -> Result<BigReal> {
    a.exp(prec)
}

pub fn exponent_of(a: &BigReal) -> Result<i64> {
    a.exponent_of()
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `±m × 2^E` with `m ∈ [1, 2)` printed to 20 significant digits.
impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "+0 × 2^0");
        }
        let top = self.msb();
        let scaled = &self.mant * BigUint::from(10u64).pow(19);
        // m × 10^19 = mant × 10^19 × 2^(exp - top)
        let digits = round_to_integer_multiple(&scaled, self.exp - top, 0).to_string();
        let (int, frac) = digits.split_at(1);
        write!(
            f,
            "{}{}.{} × 2^{}",
            if self.neg { '-' } else { '+' },
            int,
            frac,
            top
        )
    }
}

const GUARD_BITS: u64 = 64;
const SQRT2_Q63: u64 = 0xB504_F333_F9DE_6484;

fn top_bits_u64(m: &BigUint) -> u64 {
    let len = m.bits();
    if len >= 64 {
        (m >> (len - 64)).to_u64().unwrap()
    } else {
        m.to_u64().unwrap() << (64 - len)
    }
}

fn round_parts(neg: bool, mant: &BigUint, exp: i64, bits: u64, mode: Rounding) -> (BigReal, bool) {
    let len = mant.bits();
    if len <= bits {
        return (BigReal::canonical(neg, mant.clone(), exp), false);
    }
    let drop = len - bits;
    let tz = mant.trailing_zeros().unwrap_or(0);
    let mut kept = mant >> drop;
    if tz >= drop {
        return (BigReal::canonical(neg, kept, exp + drop as i64), false);
    }
    match mode {
        Rounding::NearestEven => {
            let half = mant.bit(drop - 1);
            let below_half = tz < drop - 1;
            if half && (below_half || kept.bit(0)) {
                kept += 1u32;
            }
        }
        Rounding::Odd => kept.set_bit(0, true),
        Rounding::TowardZero => {}
    }
    (BigReal::canonical(neg, kept, exp + drop as i64), true)
}

/// Round `mant × 2^exp` to the nearest multiple of `2^lsb` (ties to even),
/// returning the multiplier.
fn round_to_integer_multiple(mant: &BigUint, exp: i64, lsb: i64) -> BigUint {
    let shift = exp - lsb;
    if shift >= 0 {
        return mant << shift as u64;
    }
    let drop = (-shift) as u64;
    if drop > mant.bits() + 1 {
        return BigUint::zero();
    }
    let mut kept = mant >> drop;
    let half = mant.bit(drop - 1);
    let below_half = mant.trailing_zeros().unwrap_or(0) < drop - 1;
    if half && (below_half || kept.bit(0)) {
        kept += 1u32;
    }
    kept
}

/// `Σ z^(2j+1) / (2j+1)` in fixed point with `bits` fractional bits.
fn atanh_fixed(z: &BigInt, bits: u64) -> BigInt {
    if z.is_zero() {
        return BigInt::zero();
    }
    let z2 = (z * z) >> bits;
    let mut sum = z.clone();
    let mut power = z.clone();
    let mut j = 1u64;
    loop {
        power = (&power * &z2) >> bits;
        let term = &power / (2 * j + 1);
        if term.is_zero() {
            break;
        }
        sum += term;
        j += 1;
    }
    sum
}

thread_local! {
    static LN2_CACHE: RefCell<(u64, BigUint)> = RefCell::new((0, BigUint::zero()));
}

/// `ln 2 × 2^bits`, truncated (error below 2^-bits + a few units).
fn ln2_fixed(bits: u64) -> BigUint {
    LN2_CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        if cache.0 < bits {
            let work = bits.max(2 * cache.0) + 32;
            let third = BigInt::from_biguint(Sign::Plus, BigUint::one() << work) / 3u32;
            let v = atanh_fixed(&third, work) << 1u32;
            *cache = (work, v.magnitude().clone());
        }
        &cache.1 >> (cache.0 - bits)
    })
}
