//! Empirical depth constants: compile each gadget on a fresh circuit and
//! read off its depth and size. Deterministic for a fixed (p, policy);
//! iterated-add depth is the same integer for every operand count by
//! construction, so measuring at n = 8 is representative.

use crate::builder::{DepthPolicy, GadgetBuilder};
use crate::fpops::{g_add, g_div, g_mul};
use crate::funcs::{g_exp, g_sqrt};
use crate::iter::{g_iter_add, g_iter_mul};
use crate::{FpWires, GadgetResult};
use tcvar_fp::Precision;
use tcvar_netlist::Circuit;

/// Measured per-gadget depths (gate levels) and sizes (gate counts, after
/// structural hashing, thresholds lowered to the MAJORITY basis).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthConstants {
    pub p: u32,
    pub policy: DepthPolicy,
    /// max over {add, mul, div}: the binary-operation constant.
    pub d_std: u32,
    pub d_add: u32,
    pub d_mul: u32,
    pub d_div: u32,
    /// iterated addition (n = 8; n-independent by construction).
    pub d_iter_add: u32,
    /// iterated multiplication (n = 8 under tree, n = 2 under strict,
    /// where longer lists are rejected). Unused by the compiled pipeline.
    pub d_iter_mul: u32,
    pub d_exp: u32,
    pub d_sqrt: u32,
    pub s_add: u64,
    pub s_mul: u64,
    pub s_div: u64,
    pub s_iter_add: u64,
    pub s_iter_mul: u64,
    pub s_exp: u64,
    pub s_sqrt: u64,
}

fn measure_one(
    p: Precision,
    policy: DepthPolicy,
    n_inputs: usize,
    f: impl Fn(&mut GadgetBuilder, &[FpWires]) -> GadgetResult<Vec<FpWires>>,
) -> GadgetResult<(u32, u64)> {
    let mut c = Circuit::new();
    let outs = {
        let mut b = GadgetBuilder::new(&mut c, p, policy)?;
        let ins: Vec<FpWires> = (0..n_inputs).map(|_| b.input_bundle()).collect();
        f(&mut b, &ins)?
    };
    let flat: Vec<_> = outs.iter().flat_map(|o| o.to_flat()).collect();
    c.set_outputs(flat);
    let lowered = tcvar_netlist::lower_thresholds(&c)?;
    Ok((lowered.depth(), lowered.size() as u64))
}

pub fn measure_constants(p: Precision, policy: DepthPolicy) -> GadgetResult<DepthConstants> {
    let (d_add, s_add) =
        measure_one(p, policy, 2, |b, xs| Ok(vec![g_add(b, &xs[0], &xs[1])?]))?;
    let (d_mul, s_mul) =
        measure_one(p, policy, 2, |b, xs| Ok(vec![g_mul(b, &xs[0], &xs[1])?]))?;
    let (d_div, s_div) =
        measure_one(p, policy, 2, |b, xs| Ok(vec![g_div(b, &xs[0], &xs[1])?.0]))?;
    let (d_iter_add, s_iter_add) =
        measure_one(p, policy, 8, |b, xs| Ok(vec![g_iter_add(b, xs)?]))?;
    let iter_mul_n = match policy {
        DepthPolicy::Tree => 8,
        DepthPolicy::Strict => 2,
    };
    let (d_iter_mul, s_iter_mul) =
        measure_one(p, policy, iter_mul_n, |b, xs| Ok(vec![g_iter_mul(b, xs)?]))?;
    let (d_exp, s_exp) = measure_one(p, policy, 1, |b, xs| Ok(vec![g_exp(b, &xs[0])?]))?;
    let (d_sqrt, s_sqrt) =
        measure_one(p, policy, 1, |b, xs| Ok(vec![g_sqrt(b, &xs[0])?.0]))?;
    Ok(DepthConstants {
        p: p.get(),
        policy,
        d_std: d_add.max(d_mul).max(d_div),
        d_add,
        d_mul,
        d_div,
        d_iter_add,
        d_iter_mul,
        d_exp,
        d_sqrt,
        s_add,
        s_mul,
        s_div,
        s_iter_add,
        s_iter_mul,
        s_exp,
        s_sqrt,
    })
}
