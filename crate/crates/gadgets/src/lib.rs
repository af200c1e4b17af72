//! Gate-level constructions for the p-bit float operations.
//!
//! Every gadget consumes and produces [`FpWires`] bundles laid out exactly
//! like `tcvar_fp::encode`, and evaluates bit-identically to the matching
//! `tcvar-fp` operation on every input (the unit and integration tests pin
//! this exhaustively at p = 3 and by sampling above). Depth of every
//! construction is a function of the precision and policy only, never of
//! the operand count.

mod builder;
mod fpops;
mod funcs;
mod intops;
mod iter;
mod matmul;
mod measure;
mod round;

pub use builder::{DepthPolicy, GadgetBuilder};
pub use fpops::{g_add, g_compare, g_div, g_floor, g_mul, g_neg, g_sub, CompareWires};
pub use funcs::{g_exp, g_sqrt};
pub use iter::{g_iter_add, g_iter_mul};
pub use matmul::g_matmul;
pub use measure::{measure_constants, DepthConstants};
pub use round::{round_mag, ExpBase, RoundedWires};

pub mod wires {
    //! Integer wire-vector blocks, exported for the compiler's input/output
    //! plumbing (LSB-first vectors).
    pub use crate::intops::{
        add, add_mod, compare_unsigned, cond_negate_tc, const_vec, const_vec_tc,
        count_round_packed, count_round_uniform, decode_signed_onehot, ge_const_signed,
        ge_const_unsigned, leading_one_onehot, mul_by_const, mul_unsigned, negate_tc, or_all,
        prefix_or_lsb, sext, sext_zero, sub,
    };
}

use tcvar_fp::{layout, FpNum, Precision};
use tcvar_netlist::{GateId, NetlistError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("operand precisions differ: {0} vs {1}")]
    PrecisionMismatch(Precision, Precision),
    #[error("iterated construction over an empty list")]
    EmptyInput,
    #[error("strict policy forbids iterated multiplication over {0} operands")]
    StrictPolicyViolation(usize),
    #[error("matrix shapes do not compose: {0}")]
    ShapeMismatch(String),
    #[error("precision {0} exceeds the circuit-side cap {1}")]
    PrecisionTooLarge(u32, u32),
    #[error(transparent)]
    Net(#[from] NetlistError),
}

pub type GadgetResult<T> = Result<T, GadgetError>;

/// Exponent decode tables and alignment windows grow as 2^p; this cap keeps
/// compiled circuits at desk scale.
pub const MAX_CIRCUIT_PRECISION: u32 = 10;

/// Wires of one float in canonical encoding order.
///
/// `mag` and `exp` are most-significant-first, matching
/// `tcvar_fp::layout`; `exp` is two's complement over p + 1 bits.
#[derive(Debug, Clone)]
pub struct FpWires {
    pub sign: GateId,
    pub mag: Vec<GateId>,
    pub zero: GateId,
    pub exp: Vec<GateId>,
    pub p: Precision,
}

impl FpWires {
    /// Flattens to encoding order (width 2p + 3).
    pub fn to_flat(&self) -> Vec<GateId> {
        let mut out = Vec::with_capacity(layout::width(self.p.get()));
        out.push(self.sign);
        out.extend_from_slice(&self.mag);
        out.push(self.zero);
        out.extend_from_slice(&self.exp);
        out
    }

    pub fn from_flat(bits: &[GateId], p: Precision) -> Self {
        let pb = p.get() as usize;
        assert_eq!(bits.len(), layout::width(p.get()));
        FpWires {
            sign: bits[layout::SIGN],
            mag: bits[layout::MAG..layout::MAG + pb].to_vec(),
            zero: bits[layout::zero_flag(p.get())],
            exp: bits[layout::exp(p.get())..].to_vec(),
            p,
        }
    }

    /// Magnitude bits least-significant-first (the integer-block order).
    pub fn mag_lsb(&self) -> Vec<GateId> {
        let mut v = self.mag.clone();
        v.reverse();
        v
    }

    /// Exponent bits least-significant-first.
    pub fn exp_lsb(&self) -> Vec<GateId> {
        let mut v = self.exp.clone();
        v.reverse();
        v
    }
}

/// Encodes a bound assignment: turns float values into the input bits a
/// circuit built from `input_bundle` expects, in order.
pub fn assignment_bits(values: &[FpNum]) -> Vec<bool> {
    values
        .iter()
        .flat_map(|v| tcvar_fp::encode(v).bits().to_vec())
        .collect()
}
