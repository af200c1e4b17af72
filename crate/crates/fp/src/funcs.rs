//! Exponential and square root at p bits.
//!
//! Both follow fixed integer-arithmetic recipes (no host floats), so the
//! circuit constructions can replay them wire for wire:
//!
//! exp: range-reduce x = k*ln2 + s with |s| <= ln2/2 via one multiply by
//! log2(e) and a floor, evaluate the degree-(p+2) Taylor polynomial of
//! exp(s) by Horner with floor-truncated steps, scale by 2^k, round once.
//!
//! sqrt: normalize to a in [1/2, 2), Newton-iterate the inverse square root
//! ceil(log2 p) + 2 times from a 24-entry table seed, multiply back by a,
//! round once.
//!
//! The working precision is w = 2p + 12 fractional bits. The extra guard
//! bits over the bare minimum keep the pre-rounding error around 2^-(p+12),
//! far inside the 2^-2p slack that separates the relative-error target
//! 2^-p from the final rounding step.

use crate::error::{FpError, FpResult};
use crate::num::{floor_shift, round_p_full, FpNum, Precision, Rounded};
use num_bigint::BigInt;
use num_traits::{One, Signed};

/// floor(ln2 * 2^256), most significant bit first.
const LN2_HEX_256: &str = "b17217f7d1cf79abc9e3b39803f2f6af40f343267298b62d8a0d175b8baafa2b";
/// floor(log2(e) * 2^256).
const LOG2E_HEX_256: &str = "171547652b82fe1777d0ffda0d23a7d11d6aef551bad2b4b1164a2cd9a342648f";

fn const_bits(hex: &str, frac_bits: u32) -> BigInt {
    let v: BigInt = num_bigint::BigUint::parse_bytes(hex.as_bytes(), 16)
        .unwrap()
        .into();
    assert!(frac_bits <= 256);
    v >> (256 - frac_bits) as usize
}

/// Working precision (fractional bits) used by exp and sqrt internals.
pub fn working_bits(p: Precision) -> u32 {
    2 * p.get() + 12
}

/// Range-reduction precision for exp; wider than the series so the k*ln2
/// subtraction does not eat into the error budget.
pub fn reduction_bits(p: Precision) -> u32 {
    working_bits(p) + p.get() + 4
}

/// Taylor series degree for exp, p + 2.
pub fn exp_series_degree(p: Precision) -> u32 {
    p.get() + 2
}

/// Newton iteration count for sqrt, ceil(log2 p) + 2.
pub fn sqrt_iterations(p: Precision) -> u32 {
    let lg = 32 - (p.get() - 1).leading_zeros();
    lg + 2
}

/// Reciprocal-factorial Horner coefficients floor(2^w / i!), i = 0..=deg.
pub fn exp_coefficients(p: Precision) -> Vec<BigInt> {
    let w = working_bits(p);
    let deg = exp_series_degree(p);
    let mut fact = BigInt::one();
    let mut out = Vec::with_capacity(deg as usize + 1);
    for i in 0..=deg {
        if i > 0 {
            fact *= BigInt::from(i);
        }
        out.push((BigInt::one() << w as usize) / &fact);
    }
    out
}

/// ln2 at `bits` fractional bits (truncated).
pub fn ln2_fixed(bits: u32) -> BigInt {
    const_bits(LN2_HEX_256, bits)
}

/// log2(e) at `bits` fractional bits (truncated).
pub fn log2e_fixed(bits: u32) -> BigInt {
    const_bits(LOG2E_HEX_256, bits)
}

/// Inverse-square-root seed table: entry for idx in [8, 32) approximates
/// 1/sqrt((idx + 0.5)/16) at w fractional bits, good to about 2% before
/// the first Newton step. Defined as isqrt(2^(2w+5) / (2 idx + 1)) so both
/// the reference and the circuit bake identical constants.
pub fn rsqrt_seed_table(p: Precision) -> Vec<BigInt> {
    let w = working_bits(p) as usize;
    (8u64..32)
        .map(|idx| {
            let num: BigInt = BigInt::one() << (2 * w + 5);
            let q = num / BigInt::from(2 * idx + 1);
            BigInt::from(q.to_biguint().unwrap().sqrt())
        })
        .collect()
}

/// Structured trace of the exp fixed-point pipeline; the circuit builder
/// consumes the same quantities symbolically.
pub struct ExpPlan {
    pub w: u32,
    pub w2: u32,
    pub coeffs: Vec<BigInt>,
    pub ln2_w: BigInt,
    pub log2e_w2: BigInt,
}

impl ExpPlan {
    pub fn new(p: Precision) -> Self {
        ExpPlan {
            w: working_bits(p),
            w2: reduction_bits(p),
            coeffs: exp_coefficients(p),
            ln2_w: ln2_fixed(working_bits(p)),
            log2e_w2: log2e_fixed(reduction_bits(p)),
        }
    }
}

/// exp(x) within relative error 2^-p of the true value, saturating/flushing
/// with flags when the result leaves the representable range.
pub fn fp_exp_full(x: &FpNum) -> Rounded {
    let p = x.precision();
    let plan = ExpPlan::new(p);
    let (w, w2) = (plan.w as i64, plan.w2 as i64);

    // |x| >= 2^(p+1) guarantees exp(x) is out of range in either direction;
    // normalized significands make that exactly the e >= 2 test.
    if !x.is_zero() && x.exponent() >= 2 {
        return if x.is_negative() {
            Rounded {
                num: FpNum::zero(p),
                saturated: false,
                flushed: true,
            }
        } else {
            Rounded {
                num: FpNum::max_magnitude(false, p),
                saturated: true,
                flushed: false,
            }
        };
    }

    // y = x * log2(e) at w2 fractional bits (floor).
    let y0 = BigInt::from(x.significand()) * &plan.log2e_w2;
    let y = floor_shift(&y0, x.exponent());
    // Split y + 1/2 into integer k and fraction, so s = (y - k) * ln2 has
    // |s| <= ln2/2 (plus truncation slack).
    let z = y + (BigInt::one() << (w2 - 1) as usize);
    let k = floor_shift(&z, -w2);
    let f = &z - (&k << w2 as usize) - (BigInt::one() << (w2 - 1) as usize);
    let s_negative = f.is_negative();
    let s_mag_w2 = f.abs();
    // Truncate the fraction to w bits, then scale by ln2.
    let s1 = floor_shift(&s_mag_w2, w - w2);
    let t_mag = floor_shift(&(&s1 * &plan.ln2_w), -w);
    let t = if s_negative { -t_mag } else { t_mag };

    // Horner with floor-truncated products.
    let mut h = plan.coeffs[plan.coeffs.len() - 1].clone();
    for c in plan.coeffs.iter().rev().skip(1) {
        h = c + floor_shift(&(&h * &t), -w);
    }
    debug_assert!(h.is_positive(), "series value must stay positive");

    let k_i64 = i64::try_from(&k).expect("reduced exponent fits i64");
    round_p_full(&h, k_i64 - w, p)
}

pub fn fp_exp(x: &FpNum) -> Rounded {
    fp_exp_full(x)
}

/// sqrt(x) within relative error 2^-p; negative input is a domain error.
pub fn fp_sqrt_full(x: &FpNum) -> FpResult<Rounded> {
    if x.is_negative() {
        return Err(FpError::DomainError("sqrt of a negative value"));
    }
    Ok(fp_sqrt_total(x))
}

/// Total variant used inside composite layers: negative input returns zero.
/// The circuit mirrors this and raises a domain flag wire instead.
pub fn fp_sqrt_total(x: &FpNum) -> Rounded {
    let p = x.precision();
    if x.is_zero() || x.is_negative() {
        return Rounded::exact(FpNum::zero(p));
    }
    let w = working_bits(p) as i64;
    let pb = p.get() as i64;

    // value = a * 2^(2*q2) with a in [1/2, 2); A = a * 2^w.
    let e_top = x.exponent() + pb;
    let (q2, shift) = if e_top.rem_euclid(2) == 0 {
        (e_top / 2, w - pb)
    } else {
        ((e_top - 1) / 2, w - pb + 1)
    };
    let a_fix = BigInt::from(x.significand()) << shift as usize;

    let seeds = rsqrt_seed_table(p);
    let idx = i64::try_from(floor_shift(&a_fix, -(w - 4))).unwrap();
    debug_assert!((8..32).contains(&idx));
    let mut y = seeds[(idx - 8) as usize].clone();

    // The circuit construction slices every intermediate to w + 2 bits;
    // these bounds certify the slices lossless.
    let cap = BigInt::one() << (w + 2) as usize;
    let three = BigInt::from(3) << w as usize;
    for _ in 0..sqrt_iterations(p) {
        let t1 = floor_shift(&(&y * &y), -w);
        let t2 = floor_shift(&(&a_fix * &t1), -w);
        debug_assert!(t1 < cap && t2 < three, "Newton step stays in range");
        y = floor_shift(&(&y * (&three - &t2)), -(w + 1));
        debug_assert!(y < cap, "iterate stays below 2^(w+2)");
    }
    let r = floor_shift(&(&a_fix * &y), -w);
    round_p_full(&r, q2 - w, p)
}

pub fn fp_sqrt(x: &FpNum) -> FpResult<Rounded> {
    fp_sqrt_full(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Precision;
    use num_traits::Zero;

    fn p(v: u32) -> Precision {
        Precision::new(v).unwrap()
    }

    #[test]
    fn ln2_constant_matches_series() {
        // Independent check of the baked constant: ln2 = sum 2^-k / k.
        let bits = 96u32;
        let guard = 40u32;
        let scale = BigInt::one() << (bits + guard) as usize;
        let mut acc = BigInt::zero();
        for k in 1u64..(bits + guard) as u64 {
            acc += (&scale >> k as usize) / BigInt::from(k);
        }
        let approx = acc >> guard as usize;
        let baked = ln2_fixed(bits);
        let diff = (&approx - &baked).abs();
        assert!(diff < BigInt::from(4), "diff = {diff}");
    }

    #[test]
    fn log2e_times_ln2_is_one() {
        let bits = 200u32;
        let prod = (ln2_fixed(bits) * log2e_fixed(bits)) >> bits as usize;
        let one = BigInt::one() << bits as usize;
        let diff = (&prod - &one).abs();
        assert!(diff < BigInt::from(4));
    }

    #[test]
    fn exp_of_zero_is_exactly_one() {
        for pp in [3u32, 4, 6, 8] {
            let r = fp_exp(&FpNum::zero(p(pp)));
            assert!(r.in_range());
            assert_eq!(r.num, FpNum::one(p(pp)));
        }
    }

    #[test]
    fn exp_clamps_out_of_range_inputs() {
        let pr = p(4);
        let big = FpNum::new(8, 5, pr).unwrap();
        let r = fp_exp(&big);
        assert!(r.saturated);
        let r = fp_exp(&big.neg());
        assert!(r.flushed);
        assert!(r.num.is_zero());
    }

    #[test]
    fn sqrt_exact_cases() {
        let pr = p(3);
        assert_eq!(
            fp_sqrt(&FpNum::zero(pr)).unwrap().num,
            FpNum::zero(pr)
        );
        let four = FpNum::new(4, 0, pr).unwrap();
        let two = fp_sqrt(&four).unwrap().num;
        assert_eq!((two.significand(), two.exponent()), (4, -1));
        let neg = FpNum::new(-4, 0, pr).unwrap();
        assert!(fp_sqrt(&neg).is_err());
    }

    #[test]
    fn exp_of_one_is_close_to_e() {
        let pr = p(8);
        let one = FpNum::one(pr);
        let r = fp_exp(&one);
        assert!(r.in_range());
        let got = r.num.to_f64();
        let rel = (got - std::f64::consts::E).abs() / std::f64::consts::E;
        assert!(rel <= (-(8f64)).exp2(), "rel = {rel}");
    }

    #[test]
    fn exp_of_ln2_is_close_to_two() {
        for pp in [6u32, 8, 10] {
            let pr = p(pp);
            let ln2 = crate::ops::fp_from_ratio(693147, 1000000, pr);
            let r = fp_exp(&ln2);
            assert!(r.in_range());
            let rel = (r.num.to_f64() - 2.0).abs() / 2.0;
            // ln2 itself is rounded to p bits, which already perturbs
            // exp by about 2^-p; allow both contributions.
            assert!(rel <= 2.5 * (-(pp as f64)).exp2(), "p={pp} rel={rel}");
        }
    }

    #[test]
    fn sqrt_of_two_is_close() {
        let pr = p(8);
        let two = FpNum::new(128, -6, pr).unwrap();
        let r = fp_sqrt(&two).unwrap();
        let rel = (r.num.to_f64() - std::f64::consts::SQRT_2).abs() / std::f64::consts::SQRT_2;
        assert!(rel <= (-(8f64)).exp2(), "rel = {rel}");
    }
}
