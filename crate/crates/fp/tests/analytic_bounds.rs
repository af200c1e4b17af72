//! Relative-error bounds for exp and sqrt: 2^-p against external oracles
//! on 10^4 samples per precision in {6, 8, 10}, flagged out-of-range
//! results excluded.
//!
//! sqrt is checked exactly: |r - sqrt(v)| <= eps*sqrt(v) is equivalent to
//! (2^p - 1)^2 v <= 4^p r^2 <= (2^p + 1)^2 v, all integers. exp is checked
//! in log space with f64, whose ~1e-13 slack is ten orders of magnitude
//! below the 2^-10 tolerance.

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tcvar_fp::sample::{sample_fpnum, sample_nonzero};
use tcvar_fp::{fp_exp, fp_sqrt, FpNum, Precision};

const TRIALS: usize = 10_000;

fn ln_value(x: &FpNum) -> f64 {
    assert!(x.significand() > 0);
    (x.significand() as f64).ln() + x.exponent() as f64 * std::f64::consts::LN_2
}

#[test]
fn exp_relative_error_within_2_pow_minus_p() {
    for pb in [6u32, 8, 10] {
        let p = Precision::new(pb).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x45585031 + pb as u64);
        let mut kept = 0usize;
        for _ in 0..TRIALS {
            let x = sample_fpnum(&mut rng, p);
            let r = fp_exp(&x);
            if !r.in_range() {
                continue; // saturated or flushed: excluded by contract
            }
            kept += 1;
            // exp is always positive, so an in-range result is positive.
            assert!(r.num.significand() > 0, "exp must be positive at {x}");
            // x's value in f64: in-range results imply |value| < 2^(p+1).
            let xv = x.significand() as f64 * (x.exponent() as f64).exp2();
            let lr = ln_value(&r.num);
            let eps = (-(pb as f64)).exp2();
            let lo = (1.0 - eps).ln();
            let hi = (1.0 + eps).ln();
            let delta = lr - xv;
            assert!(
                delta >= lo && delta <= hi,
                "p={pb}: exp({x}) -> {} off by e^{delta}",
                r.num
            );
        }
        // The clamp zone is a thin slice of the exponent range; most
        // samples must actually exercise the series path.
        assert!(kept > TRIALS / 100, "p={pb}: only {kept} in-range samples");
    }
}

#[test]
fn sqrt_relative_error_within_2_pow_minus_p_exact() {
    for pb in [6u32, 8, 10] {
        let p = Precision::new(pb).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x53515254 + pb as u64);
        for _ in 0..TRIALS {
            let mut x = sample_nonzero(&mut rng, p);
            if x.is_negative() {
                x = x.neg();
            }
            let r = fp_sqrt(&x).unwrap();
            assert!(r.in_range(), "sqrt cannot leave the range at {x}");
            let rm = BigInt::from(r.num.significand());
            let r2 = &rm * &rm; // r^2 = rm^2 * 2^(2*re)
            let re2 = 2 * r.num.exponent();
            // Common scale for r^2 and v.
            let t = 2 * (1i64 << pb) + 8;
            let r2s = &r2 << (re2 + t) as usize;
            let vs = BigInt::from(x.significand()) << (x.exponent() + t) as usize;
            let lo_coeff = BigInt::from(((1i64 << pb) - 1).pow(2));
            let hi_coeff = BigInt::from(((1i64 << pb) + 1).pow(2));
            let four_p = BigInt::from(1) << (2 * pb) as usize;
            assert!(
                &lo_coeff * &vs <= &four_p * &r2s && &four_p * &r2s <= &hi_coeff * &vs,
                "p={pb}: sqrt({x}) -> {} outside the exact 2^-p band",
                r.num
            );
        }
    }
}

#[test]
fn exp_examples_from_the_contract() {
    // exp(0) = 1 exactly; exp(1) at p = 8 within 2^-8 of e.
    let p8 = Precision::new(8).unwrap();
    assert_eq!(fp_exp(&FpNum::zero(p8)).num, FpNum::one(p8));
    let r = fp_exp(&FpNum::one(p8));
    let rel = (r.num.to_f64() - std::f64::consts::E).abs() / std::f64::consts::E;
    assert!(rel <= (-8f64).exp2());
}
