//! Scalar operations on p-bit floats.
//!
//! Every operation computes an exact intermediate with big integers and
//! rounds once, so results are independent of evaluation order wherever the
//! contract says so (iterated addition and multiplication in particular).

use crate::error::{FpError, FpResult};
use crate::num::{round_p_full, FpNum, Precision, Rounded};
use num_bigint::BigInt;
use num_traits::Zero;
use std::cmp::Ordering;

fn check_same_p(a: &FpNum, b: &FpNum) -> Precision {
    assert_eq!(
        a.precision(),
        b.precision(),
        "operands must share one precision"
    );
    a.precision()
}

/// Exact sum, then one rounding.
pub fn fp_add_full(a: &FpNum, b: &FpNum) -> Rounded {
    let p = check_same_p(a, b);
    if a.is_zero() {
        return Rounded::exact(*b);
    }
    if b.is_zero() {
        return Rounded::exact(*a);
    }
    let e0 = a.exponent().min(b.exponent());
    let ma = BigInt::from(a.significand()) << (a.exponent() - e0) as usize;
    let mb = BigInt::from(b.significand()) << (b.exponent() - e0) as usize;
    round_p_full(&(ma + mb), e0, p)
}

pub fn fp_add(a: &FpNum, b: &FpNum) -> FpNum {
    fp_add_full(a, b).num
}

pub fn fp_sub(a: &FpNum, b: &FpNum) -> FpNum {
    fp_add(a, &b.neg())
}

/// Exact product, then one rounding.
pub fn fp_mul_full(a: &FpNum, b: &FpNum) -> Rounded {
    let p = check_same_p(a, b);
    if a.is_zero() || b.is_zero() {
        return Rounded::exact(FpNum::zero(p));
    }
    let m = BigInt::from(a.significand()) * BigInt::from(b.significand());
    round_p_full(&m, a.exponent() + b.exponent(), p)
}

pub fn fp_mul(a: &FpNum, b: &FpNum) -> FpNum {
    fp_mul_full(a, b).num
}

/// Quotient truncated to 2p + 2 fractional significand bits with a sticky
/// low bit, then one rounding. The sticky bit makes the result equal to
/// rounding the exact quotient to nearest/even on every input.
pub fn fp_div_full(a: &FpNum, b: &FpNum) -> FpResult<Rounded> {
    let p = check_same_p(a, b);
    if b.is_zero() {
        return Err(FpError::DivisionByZero);
    }
    if a.is_zero() {
        return Ok(Rounded::exact(FpNum::zero(p)));
    }
    let k = (2 * p.get() + 2) as usize;
    let negative = a.is_negative() != b.is_negative();
    let na = BigInt::from(a.significand().unsigned_abs()) << k;
    let nb = BigInt::from(b.significand().unsigned_abs());
    let (mut q, r) = num_integer::Integer::div_rem(&na, &nb);
    if !r.is_zero() {
        q |= BigInt::from(1);
    }
    if negative {
        q = -q;
    }
    Ok(round_p_full(
        &q,
        a.exponent() - b.exponent() - k as i64,
        p,
    ))
}

pub fn fp_div(a: &FpNum, b: &FpNum) -> FpResult<FpNum> {
    Ok(fp_div_full(a, b)?.num)
}

/// Total division used inside composite layers: a zero divisor yields the
/// largest-magnitude float (sign of the dividend) and is flagged. The
/// circuit construction has the same fallback, so both sides stay bit-exact
/// even on the degenerate path.
pub fn fp_div_total(a: &FpNum, b: &FpNum) -> Rounded {
    match fp_div_full(a, b) {
        Ok(r) => r,
        Err(_) => Rounded {
            num: FpNum::max_magnitude(a.is_negative(), a.precision()),
            saturated: true,
            flushed: false,
        },
    }
}

/// Exact comparison of represented values; never rounds.
pub fn fp_compare(a: &FpNum, b: &FpNum) -> Ordering {
    check_same_p(a, b);
    let sa = a.significand().signum();
    let sb = b.significand().signum();
    if sa != sb {
        return sa.cmp(&sb);
    }
    if sa == 0 {
        return Ordering::Equal;
    }
    // Same nonzero sign. Normalized significands make (e, |m|) the
    // magnitude order: |x| in [2^(p-1+e), 2^(p+e)).
    let mag = match a.exponent().cmp(&b.exponent()) {
        Ordering::Equal => a.significand().unsigned_abs().cmp(&b.significand().unsigned_abs()),
        o => o,
    };
    if sa > 0 {
        mag
    } else {
        mag.reverse()
    }
}

/// Floor of the represented value. Values with e >= 0 are already integers;
/// otherwise the integer part always fits p bits, so no information is lost.
pub fn fp_floor(a: &FpNum) -> FpNum {
    let p = a.precision();
    if a.is_zero() || a.exponent() >= 0 {
        return *a;
    }
    let sh = (-a.exponent()) as u64;
    let mag = a.significand().unsigned_abs();
    let (t, frac_nonzero) = if sh >= 64 {
        (0u64, mag != 0)
    } else {
        let t = mag >> sh;
        (t, (t << sh) != mag)
    };
    let int_part: i64 = if a.is_negative() {
        -((t + u64::from(frac_nonzero)) as i64)
    } else {
        t as i64
    };
    round_p_full(&BigInt::from(int_part), 0, p).num
}

/// Exact sum of the whole list, then a single rounding. Permutation
/// invariant by construction.
pub fn fp_iter_add_full(xs: &[FpNum]) -> FpResult<Rounded> {
    let first = xs.first().ok_or(FpError::EmptyInput)?;
    let p = first.precision();
    let mut e0 = i64::MAX;
    for x in xs {
        assert_eq!(x.precision(), p, "operands must share one precision");
        if !x.is_zero() {
            e0 = e0.min(x.exponent());
        }
    }
    if e0 == i64::MAX {
        return Ok(Rounded::exact(FpNum::zero(p)));
    }
    let mut acc = BigInt::zero();
    for x in xs {
        if !x.is_zero() {
            acc += BigInt::from(x.significand()) << (x.exponent() - e0) as usize;
        }
    }
    Ok(round_p_full(&acc, e0, p))
}

pub fn fp_iter_add(xs: &[FpNum]) -> FpResult<FpNum> {
    Ok(fp_iter_add_full(xs)?.num)
}

/// Exact product of the whole list, then a single rounding.
pub fn fp_iter_mul_full(xs: &[FpNum]) -> FpResult<Rounded> {
    let first = xs.first().ok_or(FpError::EmptyInput)?;
    let p = first.precision();
    let mut m = BigInt::from(1);
    let mut e = 0i64;
    for x in xs {
        assert_eq!(x.precision(), p, "operands must share one precision");
        if x.is_zero() {
            return Ok(Rounded::exact(FpNum::zero(p)));
        }
        m *= BigInt::from(x.significand());
        e += x.exponent();
    }
    Ok(round_p_full(&m, e, p))
}

pub fn fp_iter_mul(xs: &[FpNum]) -> FpResult<FpNum> {
    Ok(fp_iter_mul_full(xs)?.num)
}

/// Nearest p-bit float to the exact rational num/den (den > 0), ties to
/// even. Used to fix resampling offsets and kernel weights; exact via
/// integer cross-multiplication.
pub fn fp_from_ratio(num: i64, den: i64, p: Precision) -> FpNum {
    assert!(den > 0, "denominator must be positive");
    if num == 0 {
        return FpNum::zero(p);
    }
    // Scale the numerator so the truncated quotient keeps 2p + 2 fractional
    // bits plus a sticky bit; same scheme as fp_div, exact for the same
    // reason.
    let k = (2 * p.get() + 2) as usize + 2;
    let negative = num < 0;
    let na = BigInt::from(num.unsigned_abs()) << k;
    let nb = BigInt::from(den);
    let (mut q, r) = num_integer::Integer::div_rem(&na, &nb);
    if !r.is_zero() {
        q |= BigInt::from(1);
    }
    if negative {
        q = -q;
    }
    round_p_full(&q, -(k as i64), p).num
}
