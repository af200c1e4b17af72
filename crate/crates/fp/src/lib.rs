//! Exact reference semantics for p-bit floating point: value m * 2^e with a
//! p-bit normalized significand and an exponent in [-2^p, 2^p).
//!
//! All operations compute exact big-integer intermediates and round once
//! (ties to even), so they double as the oracle for the gate-level
//! constructions in `tcvar-gadgets`. Everything here is a pure function on
//! immutable values.

mod encoding;
mod error;
mod funcs;
mod num;
mod ops;
pub mod sample;

pub use encoding::{decode, encode, layout, FpEncoding};
pub use error::{FpError, FpResult};
pub use funcs::{
    exp_coefficients, exp_series_degree, fp_exp, fp_exp_full, fp_sqrt, fp_sqrt_full,
    fp_sqrt_total, ln2_fixed, log2e_fixed, reduction_bits, rsqrt_seed_table, sqrt_iterations,
    working_bits, ExpPlan,
};
pub use num::{floor_shift, round_p, round_p_full, FpNum, Precision, Rounded, MAX_PRECISION};
pub use ops::{
    fp_add, fp_add_full, fp_compare, fp_div, fp_div_full, fp_div_total, fp_floor, fp_from_ratio,
    fp_iter_add, fp_iter_add_full, fp_iter_mul, fp_iter_mul_full, fp_mul, fp_mul_full, fp_sub,
};
