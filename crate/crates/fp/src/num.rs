//! The p-bit floating-point number type and the rounding primitive.
//!
//! A value is an integer pair (m, e) denoting m * 2^e, with
//! m in (-2^p, -2^(p-1)] u {0} u [2^(p-1), 2^p) and e in [-2^p, 2^p).
//! Zero is canonical: m = 0 forces e = 0, so every value has exactly one
//! representation and equality is structural.

use crate::error::{FpError, FpResult};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Largest precision the crate accepts. Exhaustive tests and the circuit
/// side stay far below this.
pub const MAX_PRECISION: u32 = 32;

/// Significand bit width, checked on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub fn new(p: u32) -> FpResult<Self> {
        if (2..=MAX_PRECISION).contains(&p) {
            Ok(Precision(p))
        } else {
            Err(FpError::BadPrecision(p, MAX_PRECISION))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// Lowest representable exponent, -2^p.
    #[inline]
    pub fn min_exp(self) -> i64 {
        -(1i64 << self.0)
    }

    /// Highest representable exponent, 2^p - 1.
    #[inline]
    pub fn max_exp(self) -> i64 {
        (1i64 << self.0) - 1
    }

    /// Width of the canonical bit encoding, 2p + 3.
    #[inline]
    pub fn encoding_width(self) -> usize {
        2 * self.0 as usize + 3
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A p-bit float. Construction goes through [`FpNum::new`] or [`round_p`],
/// so every live value satisfies the invariants above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpNum {
    m: i64,
    e: i64,
    p: Precision,
}

impl FpNum {
    /// Wraps an (m, e) pair, checking the normalization invariants.
    pub fn new(m: i64, e: i64, p: Precision) -> FpResult<Self> {
        let ok_m = m == 0 || {
            let a = m.unsigned_abs();
            a >= (1u64 << (p.get() - 1)) && a < (1u64 << p.get())
        };
        let ok_e = if m == 0 {
            e == 0
        } else {
            e >= p.min_exp() && e <= p.max_exp()
        };
        if ok_m && ok_e {
            Ok(FpNum { m, e, p })
        } else {
            Err(FpError::DomainError("significand or exponent out of range"))
        }
    }

    #[inline]
    pub fn zero(p: Precision) -> Self {
        FpNum { m: 0, e: 0, p }
    }

    /// Exactly 1 = 2^(p-1) * 2^(1-p).
    pub fn one(p: Precision) -> Self {
        FpNum {
            m: 1i64 << (p.get() - 1),
            e: 1 - p.get() as i64,
            p,
        }
    }

    /// Largest-magnitude representable value with the given sign.
    pub fn max_magnitude(negative: bool, p: Precision) -> Self {
        let m = (1i64 << p.get()) - 1;
        FpNum {
            m: if negative { -m } else { m },
            e: p.max_exp(),
            p,
        }
    }

    /// Exact conversion of a small integer; errors if |v| needs more than
    /// p significand bits... it does not: the value is rounded like any
    /// other exact input.
    pub fn from_int(v: i64, p: Precision) -> Self {
        round_p(&BigInt::from(v), 0, p)
    }

    #[inline]
    pub fn significand(&self) -> i64 {
        self.m
    }

    #[inline]
    pub fn exponent(&self) -> i64 {
        self.e
    }

    #[inline]
    pub fn precision(&self) -> Precision {
        self.p
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.m == 0
    }

    #[inline]
    pub fn is_negative(&self) -> bool {
        self.m < 0
    }

    /// Exact value as a big integer scaled by 2^scale, i.e. returns
    /// m * 2^(e + scale); errors if e + scale < 0 would truncate.
    pub fn scaled_value(&self, scale: i64) -> Option<BigInt> {
        let sh = self.e + scale;
        if sh < 0 {
            return None;
        }
        Some(BigInt::from(self.m) << sh as usize)
    }

    /// Negation is exact (the significand range is sign-symmetric).
    pub fn neg(&self) -> FpNum {
        FpNum {
            m: -self.m,
            e: self.e,
            p: self.p,
        }
    }

    /// f64 approximation, for display and coarse diagnostics only.
    pub fn to_f64(&self) -> f64 {
        self.m as f64 * (self.e as f64).exp2()
    }
}

impl std::fmt::Display for FpNum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.m, self.e)
    }
}

/// A rounding result together with its range-exhaustion flags.
///
/// `saturated`: the exact value's magnitude exceeded the representable
/// range and the result was clamped to the largest-magnitude float.
/// `flushed`: a nonzero exact value rounded below the smallest binade
/// and was flushed to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rounded {
    pub num: FpNum,
    pub saturated: bool,
    pub flushed: bool,
}

impl Rounded {
    pub fn exact(num: FpNum) -> Self {
        Rounded {
            num,
            saturated: false,
            flushed: false,
        }
    }

    pub fn in_range(&self) -> bool {
        !self.saturated && !self.flushed
    }
}

/// Rounds the exact value m * 2^e to the nearest p-bit float, ties to the
/// even significand. Overflow saturates to the largest magnitude, underflow
/// below the e = -2^p binade flushes to zero; both are flagged.
pub fn round_p_full(m: &BigInt, e: i64, p: Precision) -> Rounded {
    if m.is_zero() {
        return Rounded::exact(FpNum::zero(p));
    }
    let negative = m.is_negative();
    let mag = m.abs();
    let bits = mag.bits() as i64; // 2^(bits-1) <= mag < 2^bits
    let pb = p.get() as i64;
    let shift = bits - pb;

    let (mut sig, mut e2) = if shift <= 0 {
        (mag << (-shift) as usize, e + shift)
    } else {
        let sh = shift as usize;
        let q: BigInt = &mag >> sh;
        let r: BigInt = &mag - (&q << sh);
        let half: BigInt = BigInt::from(1) << (sh - 1);
        let mut q = q;
        if r > half || (r == half && q.is_odd()) {
            q += 1;
        }
        (q, e + shift)
    };
    // Rounding may have carried into one extra bit.
    if sig.bits() as i64 > pb {
        sig >>= 1usize;
        e2 += 1;
    }

    if e2 > p.max_exp() {
        return Rounded {
            num: FpNum::max_magnitude(negative, p),
            saturated: true,
            flushed: false,
        };
    }
    if e2 < p.min_exp() {
        return Rounded {
            num: FpNum::zero(p),
            saturated: false,
            flushed: true,
        };
    }
    let sig_i: i64 = i64::try_from(&sig).expect("p-bit significand fits i64");
    Rounded::exact(FpNum {
        m: if negative { -sig_i } else { sig_i },
        e: e2,
        p,
    })
}

/// [`round_p_full`] without the flags.
pub fn round_p(m: &BigInt, e: i64, p: Precision) -> FpNum {
    round_p_full(m, e, p).num
}

/// Floor-semantics shift: v * 2^sh, truncating toward negative infinity
/// when sh < 0. Matches an arithmetic right shift of two's-complement words.
pub fn floor_shift(v: &BigInt, sh: i64) -> BigInt {
    if sh >= 0 {
        v << sh as usize
    } else {
        let d = BigInt::from(1) << (-sh) as usize;
        v.div_floor(&d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u32) -> Precision {
        Precision::new(v).unwrap()
    }

    #[test]
    fn zero_is_canonical() {
        let r = round_p_full(&BigInt::from(0), 5, p(3));
        assert_eq!(r.num, FpNum::zero(p(3)));
        assert!(r.in_range());
    }

    #[test]
    fn round_half_even_picks_even_neighbor() {
        // 9 lies halfway between 8 = 4*2^1 and 10 = 5*2^1 at p = 3.
        let r = round_p(&BigInt::from(9), 0, p(3));
        assert_eq!((r.significand(), r.exponent()), (4, 1));
    }

    #[test]
    fn already_normalized_is_identity() {
        let r = round_p(&BigInt::from(4), -2, p(3));
        assert_eq!((r.significand(), r.exponent()), (4, -2));
    }

    #[test]
    fn saturation_and_flush_are_flagged() {
        let pr = p(3);
        let big = round_p_full(&BigInt::from(5), pr.max_exp() + 4, pr);
        assert!(big.saturated);
        assert_eq!(big.num, FpNum::max_magnitude(false, pr));
        let tiny = round_p_full(&BigInt::from(5), pr.min_exp() - 40, pr);
        assert!(tiny.flushed);
        assert!(tiny.num.is_zero());
    }

    #[test]
    fn floor_shift_rounds_toward_neg_infinity() {
        assert_eq!(floor_shift(&BigInt::from(-5), -1), BigInt::from(-3));
        assert_eq!(floor_shift(&BigInt::from(5), -1), BigInt::from(2));
        assert_eq!(floor_shift(&BigInt::from(-1), -30), BigInt::from(-1));
        assert_eq!(floor_shift(&BigInt::from(3), 2), BigInt::from(12));
    }
}
