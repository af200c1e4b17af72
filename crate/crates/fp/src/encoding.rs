//! Canonical bit layout of a p-bit float, shared verbatim with the circuit
//! side and the netlist interchange files.
//!
//! Width 2p + 3, most significant logical field first:
//!
//! ```text
//! index 0          : sign of m (1 = negative)
//! index 1 ..= p    : |m|, MSB first
//! index p + 1      : zero flag
//! index p+2..=2p+2 : e, two's complement over p + 1 bits, MSB first
//! ```
//!
//! The encoding is canonical: the zero flag set forces every other bit to
//! zero, and a clear zero flag forces the top |m| bit to one (normalized
//! significand). Exactly one bit pattern per value.

use crate::error::{FpError, FpResult};
use crate::num::{FpNum, Precision};

/// A validated, canonical bit string of width 2p + 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpEncoding {
    bits: Vec<bool>,
    p: Precision,
}

impl FpEncoding {
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn precision(&self) -> Precision {
        self.p
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }
}

/// Field offsets within the encoding, used by the gadget builders so the
/// wire order never drifts from this module.
pub mod layout {
    /// Index of the significand sign bit.
    pub const SIGN: usize = 0;
    /// First index of the |m| field (p bits, MSB first).
    pub const MAG: usize = 1;
    /// Index of the zero flag for precision p.
    pub fn zero_flag(p: u32) -> usize {
        1 + p as usize
    }
    /// First index of the exponent field (p + 1 bits, MSB first).
    pub fn exp(p: u32) -> usize {
        2 + p as usize
    }
    pub fn width(p: u32) -> usize {
        2 * p as usize + 3
    }
}

/// Canonical encoding of a float.
pub fn encode(x: &FpNum) -> FpEncoding {
    let p = x.precision();
    let pb = p.get();
    let mut bits = vec![false; layout::width(pb)];
    if x.is_zero() {
        bits[layout::zero_flag(pb)] = true;
        return FpEncoding { bits, p };
    }
    bits[layout::SIGN] = x.is_negative();
    let mag = x.significand().unsigned_abs();
    for i in 0..pb {
        bits[layout::MAG + i as usize] = (mag >> (pb - 1 - i)) & 1 == 1;
    }
    let e2c = (x.exponent() as u64) & ((1u64 << (pb + 1)) - 1);
    for i in 0..=pb {
        bits[layout::exp(pb) + i as usize] = (e2c >> (pb - i)) & 1 == 1;
    }
    FpEncoding { bits, p }
}

/// Decodes and validates a bit string; rejects every non-canonical pattern.
pub fn decode(bits: &[bool], p: Precision) -> FpResult<FpNum> {
    let pb = p.get();
    if bits.len() != layout::width(pb) {
        return Err(FpError::MalformedEncoding(format!(
            "expected {} bits, got {}",
            layout::width(pb),
            bits.len()
        )));
    }
    let zero = bits[layout::zero_flag(pb)];
    if zero {
        if bits.iter().enumerate().any(|(i, &b)| b && i != layout::zero_flag(pb)) {
            return Err(FpError::MalformedEncoding(
                "zero flag set with nonzero payload bits".into(),
            ));
        }
        return Ok(FpNum::zero(p));
    }
    let mut mag = 0u64;
    for i in 0..pb {
        mag = (mag << 1) | u64::from(bits[layout::MAG + i as usize]);
    }
    if mag < (1u64 << (pb - 1)) {
        return Err(FpError::MalformedEncoding(
            "nonzero value with denormal significand".into(),
        ));
    }
    let mut e = 0i64;
    for i in 0..=pb {
        e = (e << 1) | i64::from(bits[layout::exp(pb) + i as usize]);
    }
    // Sign-extend the (p+1)-bit two's-complement field.
    if e >= (1i64 << pb) {
        e -= 1i64 << (pb + 1);
    }
    let m = if bits[layout::SIGN] { -(mag as i64) } else { mag as i64 };
    FpNum::new(m, e, p)
        .map_err(|_| FpError::MalformedEncoding("decoded fields violate range invariants".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u32) -> Precision {
        Precision::new(v).unwrap()
    }

    #[test]
    fn zero_encodes_to_lone_flag() {
        let enc = encode(&FpNum::zero(p(3)));
        let expect: Vec<bool> = (0..9).map(|i| i == layout::zero_flag(3)).collect();
        assert_eq!(enc.bits(), &expect[..]);
    }

    #[test]
    fn round_trip_negative_value() {
        let x = FpNum::new(-5, 3, p(3)).unwrap();
        assert_eq!(decode(encode(&x).bits(), p(3)).unwrap(), x);
    }

    #[test]
    fn zero_flag_with_payload_is_rejected() {
        let x = FpNum::new(5, 0, p(3)).unwrap();
        let mut bits = encode(&x).bits().to_vec();
        bits[layout::zero_flag(3)] = true;
        assert!(matches!(
            decode(&bits, p(3)),
            Err(FpError::MalformedEncoding(_))
        ));
    }

    #[test]
    fn denormal_significand_is_rejected() {
        let x = FpNum::new(5, 0, p(3)).unwrap();
        let mut bits = encode(&x).bits().to_vec();
        bits[layout::MAG] = false; // clear the top magnitude bit
        assert!(matches!(
            decode(&bits, p(3)),
            Err(FpError::MalformedEncoding(_))
        ));
    }

    #[test]
    fn exponent_sign_round_trips() {
        for e in [-8i64, -1, 0, 7] {
            let x = FpNum::new(6, e, p(3)).unwrap();
            assert_eq!(decode(encode(&x).bits(), p(3)).unwrap(), x);
        }
    }
}
