//! Deterministic sampling of p-bit floats for randomized verification.
//!
//! Sampling maps raw ChaCha output to the field ranges directly, so a given
//! seed produces the same stream on every platform.

use crate::num::{FpNum, Precision};
use rand::RngCore;

/// Uniform over all valid nonzero floats plus an explicit zero share.
pub fn sample_fpnum<R: RngCore>(rng: &mut R, p: Precision) -> FpNum {
    // 1/64 of draws are exact zero so degenerate paths stay exercised.
    if rng.next_u32() % 64 == 0 {
        return FpNum::zero(p);
    }
    sample_nonzero(rng, p)
}

/// Uniform over the valid nonzero floats.
pub fn sample_nonzero<R: RngCore>(rng: &mut R, p: Precision) -> FpNum {
    let pb = p.get();
    let half = 1u64 << (pb - 1);
    let mag = half + rng.next_u64() % half;
    let neg = rng.next_u32() & 1 == 1;
    let span = 1u64 << (pb + 1); // exponents in [-2^p, 2^p)
    let e = p.min_exp() + (rng.next_u64() % span) as i64;
    let m = if neg { -(mag as i64) } else { mag as i64 };
    FpNum::new(m, e, p).expect("sampled fields are in range")
}

/// Uniform nonzero value with the exponent clamped to a window around
/// `center`; keeps composite-pipeline inputs inside well-conditioned ranges.
pub fn sample_in_window<R: RngCore>(
    rng: &mut R,
    p: Precision,
    center: i64,
    radius: u32,
) -> FpNum {
    let pb = p.get();
    let half = 1u64 << (pb - 1);
    let mag = half + rng.next_u64() % half;
    let neg = rng.next_u32() & 1 == 1;
    let span = 2 * radius as i64 + 1;
    let mut e = center - radius as i64 + (rng.next_u64() % span as u64) as i64;
    e = e.clamp(p.min_exp(), p.max_exp());
    let m = if neg { -(mag as i64) } else { mag as i64 };
    FpNum::new(m, e, p).expect("sampled fields are in range")
}

/// Every valid float at precision p, zero first, then ascending (sign, e, m)
/// field order. 129 values at p = 3.
pub fn enumerate_all(p: Precision) -> Vec<FpNum> {
    let pb = p.get();
    let mut out = vec![FpNum::zero(p)];
    for &sign in &[1i64, -1] {
        for e in p.min_exp()..=p.max_exp() {
            for mag in (1i64 << (pb - 1))..(1i64 << pb) {
                out.push(FpNum::new(sign * mag, e, p).unwrap());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn enumeration_count_matches_the_field_ranges() {
        let p3 = Precision::new(3).unwrap();
        // 2 signs * 16 exponents * 4 significands + zero = 129.
        assert_eq!(enumerate_all(p3).len(), 129);
    }

    #[test]
    fn sampling_is_seed_stable() {
        let p4 = Precision::new(4).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(sample_fpnum(&mut a, p4), sample_fpnum(&mut b, p4));
        }
    }
}
