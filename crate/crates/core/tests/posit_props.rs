// SPDX-License-Identifier: Apache-2.0

use num_bigint::BigUint;
use posit_lab::posit::{
    decode_fields, posit_add, posit_mul, posit_to_real, real_to_posit, reference, PositConfig,
    PositValue,
};
use posit_lab::BigReal;
use proptest::prelude::*;

fn cfg(n: u32, es: u32) -> PositConfig {
    PositConfig::new(n, es).unwrap()
}

/// Every non-NaR pattern with its value, sorted by value.
fn lattice(c: PositConfig) -> Vec<(BigReal, u64)> {
    let mut v: Vec<_> = (0..1u64 << c.n_bits())
        .map(|b| PositValue::from_bits(b, c))
        .filter(|p| !p.is_nar())
        .map(|p| (posit_to_real(p).unwrap(), p.bits()))
        .collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

/// Brute-force nearest lattice value with the saturation rules: scan every
/// pattern, never return zero for nonzero input.
fn brute_round(x: &BigReal, lat: &[(BigReal, u64)]) -> u64 {
    if x.is_zero() {
        return 0;
    }
    let mut best: Option<(BigReal, u64)> = None;
    for (v, bits) in lat {
        if v.is_zero() {
            continue;
        }
        let d = x.sub_exact(v).abs();
        best = match best {
            None => Some((d, *bits)),
            Some((bd, bb)) => match d.cmp(&bd) {
                std::cmp::Ordering::Less => Some((d, *bits)),
                std::cmp::Ordering::Equal if bits & 1 == 0 => Some((d, *bits)),
                _ => Some((bd, bb)),
            },
        };
    }
    best.unwrap().1
}

#[test]
fn exhaustive_roundtrip_and_monotonicity() {
    for c in [cfg(8, 2), cfg(16, 2), cfg(8, 0), cfg(10, 3), cfg(12, 1)] {
        let mut prev: Option<BigReal> = None;
        let n = c.n_bits();
        let nar = 1i64 << (n - 1);
        // Ascending two's-complement order, skipping NaR (the most negative).
        for s in (-nar + 1)..nar {
            let p = PositValue::from_bits(s as u64, c);
            assert_eq!(p.signed_bits(), s);
            let v = posit_to_real(p).unwrap();
            assert_eq!(real_to_posit(&v, c), p, "{c} {p:?}");
            assert_eq!(reference::real_to_posit_exact(&v, c), p);
            if let Some(prev) = prev {
                assert!(prev < v, "{c}: not monotone at {p:?}");
            }
            prev = Some(v);
        }
    }
}

#[test]
fn posit8_add_mul_match_brute_force() {
    let c = cfg(8, 2);
    let lat = lattice(c);
    for a in 0..256u64 {
        for b in 0..256u64 {
            let pa = PositValue::from_bits(a, c);
            let pb = PositValue::from_bits(b, c);
            if pa.is_nar() || pb.is_nar() {
                assert!(posit_add(pa, pb).unwrap().is_nar());
                assert!(posit_mul(pa, pb).unwrap().is_nar());
                continue;
            }
            let va = posit_to_real(pa).unwrap();
            let vb = posit_to_real(pb).unwrap();
            let sum = posit_add(pa, pb).unwrap();
            let want = sign_fix(&va.add_exact(&vb), brute_round(&va.add_exact(&vb), &lat), c);
            assert_eq!(sum.bits(), want, "{pa:?} + {pb:?}");
            let prod = posit_mul(pa, pb).unwrap();
            let exact = va.mul_exact(&vb);
            assert_eq!(
                prod.bits(),
                sign_fix(&exact, brute_round(&exact, &lat), c),
                "{pa:?} * {pb:?}"
            );
            assert_eq!(reference::add(pa, pb).unwrap(), sum);
            assert_eq!(reference::mul(pa, pb).unwrap(), prod);
        }
    }
}

/// Sub-minpos inputs land on ±minpos by proximity since zero is skipped;
/// just make sure the sign survived.
fn sign_fix(x: &BigReal, bits: u64, c: PositConfig) -> u64 {
    let p = PositValue::from_bits(bits, c);
    if !x.is_zero() {
        assert_eq!(x.is_negative(), p.signed_bits() < 0);
    }
    bits
}

#[test]
fn identities_hold_exhaustively() {
    for c in [cfg(8, 2), cfg(16, 2)] {
        let zero = PositValue::zero(c);
        let one = PositValue::one(c);
        for b in 0..1u64 << c.n_bits() {
            let p = PositValue::from_bits(b, c);
            assert_eq!(posit_add(p, zero).unwrap(), p);
            if !p.is_nar() {
                assert_eq!(posit_mul(p, one).unwrap(), p);
            }
        }
    }
}

fn any_config() -> impl Strategy<Value = PositConfig> {
    prop_oneof![
        Just(cfg(16, 1)),
        Just(cfg(32, 2)),
        Just(cfg(32, 6)),
        Just(cfg(64, 9)),
        Just(cfg(64, 12)),
        Just(cfg(64, 18)),
        Just(cfg(64, 21)),
        Just(cfg(20, 14)),
    ]
}

fn pattern_pair() -> impl Strategy<Value = (PositValue, PositValue)> {
    (any_config(), any::<u64>(), any::<u64>(), 0u32..64, 0u32..64).prop_map(|(c, a, b, sa, sb)| {
        // Shifting biases toward long regimes, where the slow path runs.
        let a = PositValue::from_bits(a >> sa, c);
        let b = PositValue::from_bits(b >> sb, c);
        (a, b)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4000))]

    #[test]
    fn fast_path_matches_exact_then_round((a, b) in pattern_pair(), neg_a: bool, neg_b: bool) {
        let a = if neg_a { a.negate() } else { a };
        let b = if neg_b { b.negate() } else { b };
        prop_assert_eq!(posit_add(a, b).unwrap(), reference::add(a, b).unwrap());
        prop_assert_eq!(posit_mul(a, b).unwrap(), reference::mul(a, b).unwrap());
    }

    #[test]
    fn add_and_mul_commute((a, b) in pattern_pair()) {
        prop_assert_eq!(posit_add(a, b).unwrap(), posit_add(b, a).unwrap());
        prop_assert_eq!(posit_mul(a, b).unwrap(), posit_mul(b, a).unwrap());
    }

    #[test]
    fn decode_reencode_roundtrips(c in any_config(), bits: u64) {
        let p = PositValue::from_bits(bits, c);
        prop_assume!(!p.is_nar());
        let v = posit_to_real(p).unwrap();
        prop_assert_eq!(real_to_posit(&v, c), p);
        if !p.is_zero() {
            let f = decode_fields(p).unwrap();
            prop_assert!(f.fraction_bit_count <= c.n_bits() - 3);
        }
    }

    #[test]
    fn agrees_with_binary64_when_everything_is_exact(
        es in prop_oneof![Just(9u32), Just(12), Just(18)],
        a in -(1i64 << 40)..(1i64 << 40),
        b in -(1i64 << 40)..(1i64 << 40),
        sa in -60i32..60,
        sb in -60i32..60,
    ) {
        let c = cfg(64, es);
        let x = a as f64 * 2f64.powi(sa);
        let y = b as f64 * 2f64.powi(sb);
        let px = real_to_posit(&BigReal::from_f64(x).unwrap(), c);
        let py = real_to_posit(&BigReal::from_f64(y).unwrap(), c);
        for (exact, f64_result, posit_result) in [
            (BigReal::from_f64(x).unwrap().add_exact(&BigReal::from_f64(y).unwrap()), x + y, posit_add(px, py).unwrap()),
            (BigReal::from_f64(x).unwrap().mul_exact(&BigReal::from_f64(y).unwrap()), x * y, posit_mul(px, py).unwrap()),
        ] {
            let fits_f64 = BigReal::from_f64(f64_result).unwrap() == exact;
            let fits_posit = real_to_posit(&exact, c) == reference::real_to_posit_exact(&exact, c)
                && posit_to_real(real_to_posit(&exact, c)).unwrap() == exact;
            if fits_f64 && fits_posit {
                prop_assert_eq!(posit_to_real(posit_result).unwrap(), BigReal::from_f64(f64_result).unwrap());
            }
        }
    }
}

/// Random value with a `sig_bits`-bit significand and the given exponent.
fn random_real(sig: u128, sig_bits: u32, exp: i64, neg: bool) -> BigReal {
    let sig = sig | (1u128 << (sig_bits - 1));
    let mant = BigUint::from(sig & ((1u128 << sig_bits) - 1) | (1u128 << (sig_bits - 1)));
    let x = BigReal::from_parts(false, mant, exp - sig_bits as i64 + 1);
    if neg {
        x.neg()
    } else {
        x
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3000))]

    #[test]
    fn nearest_among_lattice_neighbours(
        c in prop_oneof![Just(cfg(64, 9)), Just(cfg(64, 12)), Just(cfg(64, 18)), Just(cfg(16, 2))],
        sig: u128,
        frac in 0.0f64..1.0,
        neg: bool,
    ) {
        let lo = c.minpos_log2() - 4;
        let hi = c.maxpos_log2() + 4;
        let exp = lo + ((hi - lo) as f64 * frac) as i64;
        let x = random_real(sig, 100, exp, neg);
        let p = real_to_posit(&x, c);
        prop_assert!(!p.is_zero() && !p.is_nar());
        let d = x.sub_exact(&posit_to_real(p).unwrap()).abs();
        for step in [-1i64, 1] {
            let q = PositValue::from_bits((p.signed_bits() + step) as u64, c);
            if q.is_nar() || q.is_zero() {
                continue;
            }
            let dq = x.sub_exact(&posit_to_real(q).unwrap()).abs();
            prop_assert!(d <= dq, "{:?} farther than neighbour {:?}", p, q);
        }
    }
}
