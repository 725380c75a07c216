// SPDX-License-Identifier: Apache-2.0

//! Posit(N, ES) numbers with runtime-configurable width and exponent size.
//!
//! A pattern is stored right-aligned in a `u64`. Negative values are the
//! two's complement of the positive pattern, so real-value order matches
//! signed integer order of the patterns (NaR aside).
//!
//! Rounding is to the nearest value on the posit lattice with ties going to
//! the even pattern, saturating at minpos/maxpos; nonzero values never round
//! to zero or NaR. Where the exponent field is complete the nearest value is
//! found by the usual guard/sticky rule on the bit string, which the
//! arithmetic fast path does in 128-bit integers. Where the regime crowds
//! out part of the exponent the neighbours are more than a factor of two
//! apart, and the midpoint is computed exactly with [`BigReal`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::oracle::{BigReal, Rounding};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PositConfig {
    n_bits: u32,
    es: u32,
}

impl PositConfig {
    pub fn new(n_bits: u32, es: u32) -> Result<Self> {
        if !(4..=64).contains(&n_bits) || es > 24 || n_bits < es + 3 {
            return Err(Error::InvalidPositConfig { n_bits, es });
        }
        Ok(PositConfig { n_bits, es })
    }

    pub fn n_bits(self) -> u32 {
        self.n_bits
    }

    pub fn es(self) -> u32 {
        self.es
    }

    /// log2(useed) = 2^ES.
    pub fn useed_log2(self) -> i64 {
        1i64 << self.es
    }

    pub fn minpos_log2(self) -> i64 {
        -(self.n_bits as i64 - 2) * self.useed_log2()
    }

    pub fn maxpos_log2(self) -> i64 {
        (self.n_bits as i64 - 2) * self.useed_log2()
    }

    pub fn max_fraction_bits(self) -> u32 {
        self.n_bits - 3 - self.es
    }

    fn mask(self) -> u64 {
        if self.n_bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.n_bits) - 1
        }
    }

    fn nar_pattern(self) -> u64 {
        1u64 << (self.n_bits - 1)
    }

    fn maxpos_pattern(self) -> u64 {
        self.nar_pattern() - 1
    }

    fn negate_pattern(self, bits: u64) -> u64 {
        bits.wrapping_neg() & self.mask()
    }
}

impl fmt::Display for PositConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "posit({},{})", self.n_bits, self.es)
    }
}

impl FromStr for PositConfig {
    type Err = Error;

    /// Accepts `posit(N,ES)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected posit(N,ES), got {s:?}"));
        let inner = s
            .trim()
            .strip_prefix("posit(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (n, es) = inner.split_once(',').ok_or_else(bad)?;
        let n = n.trim().parse().map_err(|_| bad())?;
        let es = es.trim().parse().map_err(|_| bad())?;
        PositConfig::new(n, es)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PositValue {
    bits: u64,
    config: PositConfig,
}

impl PositValue {
    /// Upper bits beyond `n_bits` are discarded.
    pub fn from_bits(bits: u64, config: PositConfig) -> Self {
        PositValue {
            bits: bits & config.mask(),
            config,
        }
    }

    pub fn zero(config: PositConfig) -> Self {
        Self::from_bits(0, config)
    }

    pub fn nar(config: PositConfig) -> Self {
        Self::from_bits(config.nar_pattern(), config)
    }

    pub fn one(config: PositConfig) -> Self {
        Self::from_bits(1u64 << (config.n_bits - 2), config)
    }

    pub fn minpos(config: PositConfig) -> Self {
        Self::from_bits(1, config)
    }

    pub fn maxpos(config: PositConfig) -> Self {
        Self::from_bits(config.maxpos_pattern(), config)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn config(self) -> PositConfig {
        self.config
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn is_nar(self) -> bool {
        self.bits == self.config.nar_pattern()
    }

    /// The pattern as a two's-complement integer; orders like the values.
    pub fn signed_bits(self) -> i64 {
        let shift = 64 - self.config.n_bits;
        ((self.bits << shift) as i64) >> shift
    }

    pub fn negate(self) -> Self {
        Self::from_bits(self.config.negate_pattern(self.bits), self.config)
    }

    /// Lowercase hex, zero-padded to the pattern width.
    pub fn to_hex(self) -> String {
        let width = self.config.n_bits.div_ceil(4) as usize;
        format!("{:0width$x}", self.bits)
    }

    pub fn from_hex(hex: &str, config: PositConfig) -> Result<Self> {
        let bits = u64::from_str_radix(hex.trim(), 16)
            .map_err(|e| Error::Parse(format!("bad hex pattern {hex:?}: {e}")))?;
        if bits & !config.mask() != 0 {
            return Err(Error::Parse(format!("pattern {hex} wider than {config}")));
        }
        Ok(Self::from_bits(bits, config))
    }
}

impl fmt::Debug for PositValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.config, self.to_hex())
    }
}

/// Decoded fields of a nonzero, non-NaR pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PositFields {
    pub sign: bool,
    /// Regime value.
    pub k: i64,
    /// Exponent field value, with unstored low bits taken as zero.
    pub e: u64,
    pub fraction_bit_count: u32,
    pub fraction: u64,
}

impl PositFields {
    /// Binary exponent of the leading significand bit: `k·2^ES + e`.
    pub fn scale(&self, es: u32) -> i64 {
        self.k * (1i64 << es) + self.e as i64
    }

    pub fn value(&self, es: u32) -> BigReal {
        let mant = (1u64 << self.fraction_bit_count) | self.fraction;
        BigReal::from_parts(
            self.sign,
            BigUint::from(mant),
            self.scale(es) - self.fraction_bit_count as i64,
        )
    }
}

/// Field widths a value's encoding uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldWidths {
    pub regime_bits: u32,
    pub exponent_bits: u32,
    pub fraction_bits: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigProperties {
    pub useed: BigReal,
    pub minpos: BigReal,
    pub maxpos: BigReal,
    pub max_fraction_bits: u32,
}

pub fn config_properties(c: PositConfig) -> ConfigProperties {
    ConfigProperties {
        useed: BigReal::pow2(c.useed_log2()),
        minpos: BigReal::pow2(c.minpos_log2()),
        maxpos: BigReal::pow2(c.maxpos_log2()),
        max_fraction_bits: c.max_fraction_bits(),
    }
}

fn regime_len(k: i64) -> u32 {
    if k >= 0 {
        k as u32 + 2
    } else {
        (-k) as u32 + 1
    }
}

/// Field widths of the encoding of `x` (before rounding).
pub fn field_widths_for(x: &BigReal, c: PositConfig) -> Result<FieldWidths> {
    if x.is_zero() {
        return Err(Error::OutOfRange);
    }
    let scale = x.exponent_of()?;
    let ax = x.abs();
    if scale < c.minpos_log2() || ax > BigReal::pow2(c.maxpos_log2()) {
        return Err(Error::OutOfRange);
    }
    let k = scale.div_euclid(c.useed_log2());
    let regime_bits = regime_len(k).min(c.n_bits - 1);
    let rest = c.n_bits - 1 - regime_bits;
    let exponent_bits = rest.min(c.es);
    Ok(FieldWidths {
        regime_bits,
        exponent_bits,
        fraction_bits: rest - exponent_bits,
    })
}

pub fn decode_fields(p: PositValue) -> Result<PositFields> {
    if p.is_zero() || p.is_nar() {
        return Err(Error::SpecialPattern);
    }
    let c = p.config;
    let n = c.n_bits;
    let sign = (p.bits >> (n - 1)) & 1 == 1;
    let mag = if sign {
        c.negate_pattern(p.bits)
    } else {
        p.bits
    };
    // Left-align the n-1 bits after the sign.
    let body = mag << (64 - (n - 1));
    let r = body >> 63;
    let run = if r == 1 {
        body.leading_ones()
    } else {
        body.leading_zeros()
    }
    .min(n - 1);
    let k = if r == 1 {
        run as i64 - 1
    } else {
        -(run as i64)
    };
    let used = (run + 1).min(n - 1);
    let rest = n - 1 - used;
    let tail = if rest == 0 {
        0
    } else {
        mag & ((1u64 << rest) - 1)
    };
    let stored_e = rest.min(c.es);
    let fraction_bit_count = rest - stored_e;
    let e = (tail >> fraction_bit_count) << (c.es - stored_e);
    let fraction = if fraction_bit_count == 0 {
        0
    } else {
        tail & ((1u64 << fraction_bit_count) - 1)
    };
    Ok(PositFields {
        sign,
        k,
        e,
        fraction_bit_count,
        fraction,
    })
}

/// Exact value of a non-NaR pattern.
pub fn posit_to_real(p: PositValue) -> Result<BigReal> {
    if p.is_nar() {
        return Err(Error::NotAReal);
    }
    if p.is_zero() {
        return Ok(BigReal::zero());
    }
    Ok(decode_fields(p)?.value(p.config.es))
}

/// Correctly rounded encoding of a finite exact value.
pub fn real_to_posit(x: &BigReal, c: PositConfig) -> PositValue {
    if x.is_zero() {
        return PositValue::zero(c);
    }
    let (neg, scale, sig, sticky) = top_bits(x);
    let bits = match round_fast(neg, scale, sig, sticky, c) {
        Some(bits) => bits,
        None => reference::round_checked(x, false, 0, c).expect("exact input"),
    };
    PositValue::from_bits(bits, c)
}

pub fn posit_add(a: PositValue, b: PositValue) -> Result<PositValue> {
    let c = same_config(a, b)?;
    if a.is_nar() || b.is_nar() {
        return Ok(PositValue::nar(c));
    }
    if b.is_zero() {
        return Ok(a);
    }
    if a.is_zero() {
        return Ok(b);
    }
    let (ua, ub) = (unpack(a), unpack(b));
    if let Some(bits) = fast_add(ua, ub, c) {
        return Ok(PositValue::from_bits(bits, c));
    }
    reference::add(a, b)
}

pub fn posit_mul(a: PositValue, b: PositValue) -> Result<PositValue> {
    let c = same_config(a, b)?;
    if a.is_nar() || b.is_nar() {
        return Ok(PositValue::nar(c));
    }
    if a.is_zero() || b.is_zero() {
        return Ok(PositValue::zero(c));
    }
    let (ua, ub) = (unpack(a), unpack(b));
    let prod = ua.sig as u128 * ub.sig as u128;
    // Both significands have their leading one at bit 63.
    let (sig, scale) = if prod >> 127 == 1 {
        (prod, ua.scale + ub.scale + 1)
    } else {
        (prod << 1, ua.scale + ub.scale)
    };
    let neg = ua.neg != ub.neg;
    if let Some(bits) = round_fast(neg, scale, sig, false, c) {
        return Ok(PositValue::from_bits(bits, c));
    }
    reference::mul(a, b)
}

fn same_config(a: PositValue, b: PositValue) -> Result<PositConfig> {
    if a.config != b.config {
        return Err(Error::ConfigMismatch);
    }
    Ok(a.config)
}

#[derive(Clone, Copy, Debug)]
struct Unpacked {
    neg: bool,
    scale: i64,
    /// Significand with its leading one at bit 63.
    sig: u64,
}

fn unpack(p: PositValue) -> Unpacked {
    let f = decode_fields(p).expect("caller excludes zero and NaR");
    let sig = ((1u64 << f.fraction_bit_count) | f.fraction) << (63 - f.fraction_bit_count);
    Unpacked {
        neg: f.sign,
        scale: f.scale(p.config.es),
        sig,
    }
}

/// Sign, leading-bit exponent, top 128 significand bits (leading one at bit
/// 127) and whether any lower bit is set.
fn top_bits(x: &BigReal) -> (bool, i64, u128, bool) {
    let m = x.mantissa();
    let len = m.bits();
    let scale = x.lsb_exponent() + len as i64 - 1;
    let (sig, sticky) = if len <= 128 {
        (m.to_u128().unwrap() << (128 - len), false)
    } else {
        // Canonical mantissas are odd, so dropped bits are never all zero.
        ((m >> (len - 128)).to_u128().unwrap(), true)
    };
    (x.is_negative(), scale, sig, sticky)
}

/// Nearest-even rounding of `±sig × 2^(scale-127)` (+ sticky) when the
/// lower lattice neighbour has a complete exponent field. Returns `None`
/// when the regime truncates the exponent and the midpoint must be found
/// exactly.
fn round_fast(neg: bool, scale: i64, sig: u128, sticky: bool, c: PositConfig) -> Option<u64> {
    debug_assert!(sig >> 127 == 1);
    let n = c.n_bits;
    let mag = if scale >= c.maxpos_log2() {
        c.maxpos_pattern()
    } else if scale < c.minpos_log2() {
        1
    } else {
        let k = scale.div_euclid(c.useed_log2());
        let e = scale.rem_euclid(c.useed_log2()) as u64;
        let rl = regime_len(k);
        let avail = n - 1 - rl;
        if avail < c.es {
            return None;
        }
        let regime = if k >= 0 {
            // k+1 ones then a zero.
            ((1u64 << (k + 1)) - 1) << 1
        } else {
            1
        };
        let fb = avail - c.es;
        let frac = sig << 1;
        let (kept, guard, rest) = if fb == 0 {
            (0u64, frac >> 127 == 1, frac << 1 != 0)
        } else {
            let kept = (frac >> (128 - fb)) as u64;
            let guard = (frac >> (127 - fb)) & 1 == 1;
            let rest = frac << (fb + 1) != 0;
            (kept, guard, rest)
        };
        let mut bits = (regime << avail) | (e << fb) | kept;
        if guard && (rest || sticky || bits & 1 == 1) {
            bits += 1;
        }
        bits
    };
    Some(if neg { c.negate_pattern(mag) } else { mag })
}

fn fast_add(a: Unpacked, b: Unpacked, c: PositConfig) -> Option<u64> {
    let (big, small) = if (a.scale, a.sig) >= (b.scale, b.sig) {
        (a, b)
    } else {
        (b, a)
    };
    // Leading one at bit 125 leaves room for a carry.
    let x = (big.sig as u128) << 62;
    let y_full = (small.sig as u128) << 62;
    let d = (big.scale - small.scale) as u64;
    let (y, sticky) = if d >= 126 {
        (0u128, true)
    } else {
        let y = y_full >> d;
        (y, (y << d) != y_full)
    };
    let sum = if big.neg == small.neg {
        x + y
    } else if sticky {
        // x - (y + ε) = (x - y - 1) + (1 - ε)
        x - y - 1
    } else {
        x - y
    };
    if sum == 0 {
        return Some(0);
    }
    let lz = sum.leading_zeros();
    let scale = big.scale + (2 - lz as i64);
    round_fast(big.neg, scale, sum << lz, sticky, c)
}

/// Exact-then-round arithmetic on [`BigReal`], used directly where the fast
/// path defers and as an independent check of it.
pub mod reference {
    use super::*;

    /// Significand width of the round-to-odd intermediate sum.
    const ODD_BITS: u64 = 192;

    pub fn add(a: PositValue, b: PositValue) -> Result<PositValue> {
        let c = same_config(a, b)?;
        if a.is_nar() || b.is_nar() {
            return Ok(PositValue::nar(c));
        }
        let va = posit_to_real(a)?;
        let vb = posit_to_real(b)?;
        let (sum, inexact) = va.add_bits(&vb, ODD_BITS, Rounding::Odd);
        if sum.is_zero() {
            return Ok(PositValue::zero(c));
        }
        let bits = match round_checked(&sum, inexact, ODD_BITS, c) {
            Some(bits) => bits,
            // The midpoint needs more bits than the odd-rounded sum keeps.
            None => round_checked(&va.add_exact(&vb), false, 0, c).expect("exact input"),
        };
        Ok(PositValue::from_bits(bits, c))
    }

    pub fn mul(a: PositValue, b: PositValue) -> Result<PositValue> {
        let c = same_config(a, b)?;
        if a.is_nar() || b.is_nar() {
            return Ok(PositValue::nar(c));
        }
        let prod = posit_to_real(a)?.mul_exact(&posit_to_real(b)?);
        Ok(real_to_posit_exact(&prod, c))
    }

    /// Encoding computed entirely from exact lattice midpoints.
    pub fn real_to_posit_exact(x: &BigReal, c: PositConfig) -> PositValue {
        if x.is_zero() {
            return PositValue::zero(c);
        }
        PositValue::from_bits(round_checked(x, false, 0, c).expect("exact input"), c)
    }

    fn decode_magnitude(pattern: u64, c: PositConfig) -> BigReal {
        posit_to_real(PositValue::from_bits(pattern, c)).expect("positive pattern")
    }

    /// Nearest lattice value to `x`. If `inexact`, `x` stands for a value
    /// odd-rounded to `odd_bits`; that is only safe when the midpoint fits in
    /// fewer bits, otherwise `None`.
    pub(super) fn round_checked(
        x: &BigReal,
        inexact: bool,
        odd_bits: u64,
        c: PositConfig,
    ) -> Option<u64> {
        debug_assert!(!x.is_zero());
        let n = c.n_bits;
        let ax = x.abs();
        let scale = ax.exponent_of().expect("nonzero");
        let mag = if scale >= c.maxpos_log2() {
            c.maxpos_pattern()
        } else if scale < c.minpos_log2() {
            1
        } else {
            let k = scale.div_euclid(c.useed_log2());
            let e = scale.rem_euclid(c.useed_log2()) as u64;
            let rl = regime_len(k);
            let avail = n - 1 - rl;
            let regime = if k >= 0 {
                ((1u64 << (k + 1)) - 1) << 1
            } else {
                1
            };
            let mut lo = regime << avail;
            if avail >= c.es {
                let fb = avail - c.es;
                lo |= e << fb;
                if fb > 0 {
                    let m = ax.mantissa();
                    let len = m.bits();
                    // Fraction bits below the leading one, truncated to fb.
                    let frac = if len > fb as u64 {
                        (m >> (len - 1 - fb as u64)).to_u64().unwrap()
                    } else {
                        m.to_u64().unwrap() << (fb as u64 - (len - 1))
                    };
                    lo |= frac & ((1u64 << fb) - 1);
                }
            } else {
                lo |= e >> (c.es - avail);
            }
            let v_lo = decode_magnitude(lo, c);
            match ax.cmp(&v_lo) {
                std::cmp::Ordering::Equal => lo,
                std::cmp::Ordering::Less => unreachable!("truncation overshoots"),
                std::cmp::Ordering::Greater => {
                    let hi = lo + 1;
                    let mid = v_lo.add_exact(&decode_magnitude(hi, c)).mul_pow2(-1);
                    if inexact && mid.significant_bits() + 1 >= odd_bits {
                        return None;
                    }
                    match ax.cmp(&mid) {
                        std::cmp::Ordering::Less => lo,
                        std::cmp::Ordering::Greater => hi,
                        std::cmp::Ordering::Equal => {
                            if lo & 1 == 0 {
                                lo
                            } else {
                                hi
                            }
                        }
                    }
                }
            }
        };
        Some(if x.is_negative() {
            c.negate_pattern(mag)
        } else {
            mag
        })
    }
}

#[cfg(test)]
#[allow(clippy::unusual_byte_groupings)] // literals grouped by posit field
mod tests {
    use super::*;

    fn p82() -> PositConfig {
        PositConfig::new(8, 2).unwrap()
    }

    fn pv(bits: u64) -> PositValue {
        PositValue::from_bits(bits, p82())
    }

    #[test]
    fn config_validation() {
        assert!(PositConfig::new(3, 0).is_err());
        assert!(PositConfig::new(65, 2).is_err());
        assert!(PositConfig::new(8, 6).is_err());
        assert!(PositConfig::new(64, 25).is_err());
        assert!(PositConfig::new(8, 5).is_ok());
        assert_eq!("posit(64,12)".parse::<PositConfig>().unwrap().es(), 12);
        assert!("posit64e12".parse::<PositConfig>().is_err());
    }

    #[test]
    fn worked_example_decodes() {
        let p = pv(0b0_0001_10_1);
        let f = decode_fields(p).unwrap();
        assert_eq!(
            f,
            PositFields {
                sign: false,
                k: -3,
                e: 2,
                fraction_bit_count: 1,
                fraction: 1
            }
        );
        let v = posit_to_real(p).unwrap();
        assert_eq!(v, BigReal::from_f64(1.5 * 2f64.powi(-10)).unwrap());
        assert_eq!(p.to_hex(), "0d");
        assert_eq!(PositValue::from_hex("0d", p82()).unwrap(), p);
    }

    #[test]
    fn one_and_minpos_decode() {
        let one = decode_fields(pv(0b0_10_00_000)).unwrap();
        assert_eq!((one.k, one.e, one.fraction), (0, 0, 0));
        assert_eq!(posit_to_real(pv(0b0100_0000)).unwrap(), BigReal::one());
        let minpos = decode_fields(pv(1)).unwrap();
        assert_eq!((minpos.k, minpos.e, minpos.fraction_bit_count), (-6, 0, 0));
        assert_eq!(posit_to_real(pv(1)).unwrap(), BigReal::pow2(-24));
    }

    #[test]
    fn special_patterns() {
        assert!(decode_fields(pv(0)).is_err());
        assert!(decode_fields(pv(0x80)).is_err());
        assert_eq!(posit_to_real(pv(0)).unwrap(), BigReal::zero());
        assert_eq!(posit_to_real(pv(0x80)), Err(Error::NotAReal));
    }

    #[test]
    fn truncated_exponent_uses_high_bits() {
        // 0_000001_1: regime k=-5 leaves one bit, which is the high bit of e.
        let f = decode_fields(pv(0b0000_0011)).unwrap();
        assert_eq!((f.k, f.e, f.fraction_bit_count), (-5, 2, 0));
        assert_eq!(posit_to_real(pv(3)).unwrap(), BigReal::pow2(-18));
    }

    #[test]
    fn encode_examples() {
        let c = p82();
        let x = BigReal::from_f64(1.5 * 2f64.powi(-10)).unwrap();
        assert_eq!(real_to_posit(&x, c).bits(), 0b0_0001_10_1);
        assert_eq!(real_to_posit(&BigReal::pow2(-48), c), PositValue::minpos(c));
        assert_eq!(real_to_posit(&BigReal::zero(), c).bits(), 0);
        assert_eq!(real_to_posit(&BigReal::pow2(100), c), PositValue::maxpos(c));
        assert_eq!(
            real_to_posit(&BigReal::pow2(-100).neg(), c),
            PositValue::minpos(c).negate()
        );
    }

    #[test]
    fn arithmetic_examples() {
        let c = p82();
        let one = PositValue::one(c);
        let two = posit_add(one, one).unwrap();
        assert_eq!(two.bits(), 0b0_10_01_000);
        let four = posit_mul(two, two).unwrap();
        let f = decode_fields(four).unwrap();
        assert_eq!((f.k, f.e), (0, 2));
        let mp = PositValue::minpos(c);
        assert_eq!(posit_mul(mp, mp).unwrap(), mp);
        let nar = PositValue::nar(c);
        assert!(posit_add(nar, one).unwrap().is_nar());
        assert!(posit_mul(one, nar).unwrap().is_nar());
        let other = PositValue::one(PositConfig::new(16, 1).unwrap());
        assert_eq!(posit_add(one, other), Err(Error::ConfigMismatch));
    }

    #[test]
    fn config_properties_table_rows() {
        let c = PositConfig::new(64, 9).unwrap();
        let p = config_properties(c);
        assert_eq!(p.useed, BigReal::pow2(512));
        assert_eq!(p.minpos, BigReal::pow2(-31_744));
        assert_eq!(p.max_fraction_bits, 52);
        let c = PositConfig::new(64, 18).unwrap();
        let p = config_properties(c);
        assert_eq!(p.useed, BigReal::pow2(262_144));
        assert_eq!(p.minpos, BigReal::pow2(-16_252_928));
        assert_eq!(p.max_fraction_bits, 43);
        let c = PositConfig::new(64, 12).unwrap();
        assert_eq!(config_properties(c).minpos, BigReal::pow2(-253_952));
        assert_eq!(c.max_fraction_bits(), 49);
    }

    #[test]
    fn field_widths_examples() {
        let x = BigReal::pow2(-2048);
        let w = field_widths_for(&x, PositConfig::new(64, 6).unwrap()).unwrap();
        assert_eq!((w.regime_bits, w.fraction_bits), (33, 24));
        let w = field_widths_for(&x, PositConfig::new(64, 9).unwrap()).unwrap();
        assert_eq!((w.regime_bits, w.fraction_bits), (5, 49));
        for (n, es) in [(8, 2), (16, 1), (64, 12), (32, 0)] {
            let c = PositConfig::new(n, es).unwrap();
            let w = field_widths_for(&BigReal::one(), c).unwrap();
            assert_eq!(w.regime_bits, 2);
            assert_eq!(w.fraction_bits, c.max_fraction_bits());
        }
        let c = p82();
        assert!(field_widths_for(&BigReal::pow2(-30), c).is_err());
        assert!(field_widths_for(&BigReal::zero(), c).is_err());
    }

    #[test]
    fn ties_go_to_even_pattern() {
        let c = p82();
        // 1.0 (0x40) and the next posit 1.125 (0x41): the midpoint rounds to 0x40.
        let mid = BigReal::from_f64(1.0625).unwrap();
        assert_eq!(real_to_posit(&mid, c).bits(), 0x40);
        // 1.125 (0x41) and 1.25 (0x42): midpoint 1.1875 goes up to 0x42.
        let mid = BigReal::from_f64(1.1875).unwrap();
        assert_eq!(real_to_posit(&mid, c).bits(), 0x42);
    }

    #[test]
    fn coarse_zone_rounds_to_nearest_value() {
        // posit(8,2) patterns 0x02 = 2^-20 and 0x03 = 2^-18 neighbour
        // 2.4 × 2^-20, which is nearer the lower one.
        let c = p82();
        let x = BigReal::from_f64(2.4 * 2f64.powi(-20)).unwrap();
        assert_eq!(real_to_posit(&x, c).bits(), 0x02);
        let x = BigReal::from_f64(2.6 * 2f64.powi(-20)).unwrap();
        assert_eq!(real_to_posit(&x, c).bits(), 0x03);
        // Exact midpoint 2.5 × 2^-20 ties to the even pattern.
        let x = BigReal::from_f64(2.5 * 2f64.powi(-20)).unwrap();
        assert_eq!(real_to_posit(&x, c).bits(), 0x02);
    }
}
