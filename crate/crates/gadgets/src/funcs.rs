//! Exponential and square-root gadgets.
//!
//! Both replay the fixed-point recipes from `tcvar_fp::funcs` step by step
//! (same constants, same truncation points, same widths), so their outputs
//! equal the reference bit for bit rather than merely approximately.

use crate::builder::GadgetBuilder;
use crate::intops;
use crate::round::{round_mag, ExpBase};
use crate::{FpWires, GadgetResult};
use num_bigint::BigInt;
use tcvar_fp::{rsqrt_seed_table, sqrt_iterations, ExpPlan};
use tcvar_netlist::GateId;

pub fn g_exp(b: &mut GadgetBuilder, x: &FpWires) -> GadgetResult<FpWires> {
    b.check_p(x)?;
    let plan = ExpPlan::new(b.p);
    let (w, w2) = (plan.w as usize, plan.w2 as usize);
    let emin = b.p.min_exp();

    // e >= 2 guarantees |x| >= 2^(p+1): exp is out of range either way.
    let e_lsb = x.exp_lsb();
    let e_ge2 = intops::ge_const_signed(b, &e_lsb, 2);

    // y0 = |m| * log2(e) at w2 fractional bits.
    let y0 = intops::mul_by_const(b, &x.mag_lsb(), &plan.log2e_w2);
    let y0_prefix = intops::prefix_or_lsb(b, &y0);
    let y0_nz = *y0_prefix.last().unwrap();

    // X = floor(y0 * 2^e) for e in [emin, 1]; far below, everything drops.
    let wx = y0.len() + 2;
    let a_lo = -(y0.len() as i64); // shifts at or below this drop all bits
    let decode_lo = (a_lo + 1).max(emin);
    let onehot = intops::decode_signed_onehot(b, &e_lsb, decode_lo, 1, None);
    let too_low = {
        let ge = intops::ge_const_signed(b, &e_lsb, decode_lo);
        b.not(ge)
    };
    let zero = b.zero_gate();
    let mut x_mag = vec![zero; wx];
    for (pos, slot) in x_mag.iter_mut().enumerate() {
        let mut terms = Vec::new();
        for (ix, &oh) in onehot.iter().enumerate() {
            let a = decode_lo + ix as i64;
            let src = pos as i64 - a;
            if (0..y0.len() as i64).contains(&src) {
                terms.push(b.and(&[oh, y0[src as usize]]));
            }
        }
        if !terms.is_empty() {
            *slot = b.or(&terms);
        }
    }
    // Dropped fraction below the fixed point (negative shifts).
    let mut drop_terms = Vec::new();
    for (ix, &oh) in onehot.iter().enumerate() {
        let a = decode_lo + ix as i64;
        if a < 0 {
            drop_terms.push(b.and(&[oh, y0_prefix[(-a - 1) as usize]]));
        }
    }
    drop_terms.push(b.and(&[too_low, y0_nz]));
    let dropped = b.or(&drop_terms);

    // Signed X with floor semantics: negative values with a dropped
    // fraction floor away from zero.
    let adj = b.and(&[x.sign, dropped]);
    let zv = vec![zero; x_mag.len()];
    let x_eff = intops::add_mod(b, &x_mag, &zv, Some(adj), wx + 1);
    let x_tc = intops::cond_negate_tc(b, &x_eff, x.sign);

    // Z = X + 1/2; k = floor(Z); s spans the centered fraction.
    let half = BigInt::from(1) << (w2 - 1);
    let half_v = intops::const_vec(b, &half, w2.max(wx + 1));
    let wxt = wx + 3;
    let x_ext = intops::sext(b, &x_tc, wxt);
    let z = intops::add_mod(b, &x_ext, &half_v, None, wxt);
    let k_tc = z[w2..].to_vec(); // width wxt - w2
    let mut f_tc = z[..w2].to_vec();
    f_tc[w2 - 1] = b.not(z[w2 - 1]);
    let s_sign = f_tc[w2 - 1];
    let s_mag_w2 = intops::cond_negate_tc(b, &f_tc, s_sign);
    let s1 = s_mag_w2[(w2 - w)..].to_vec(); // top w bits
    let t_full = intops::mul_by_const(b, &s1, &plan.ln2_w);
    let t_mag = t_full[w..].to_vec();

    // Horner with floor-truncated steps; H stays positive and below
    // 2^(w+1) (asserted on the reference side).
    let hw = w + 3;
    let mut h = intops::const_vec(b, plan.coeffs.last().unwrap(), hw);
    for c in plan.coeffs.iter().rev().skip(1) {
        let prod = intops::mul_unsigned(b, &h, &t_mag);
        let hi = prod[w..].to_vec();
        let drop_nz = b.or(&prod[..w]);
        let neg_adj = b.and(&[s_sign, drop_nz]);
        let z2 = vec![zero; hi.len()];
        let inc = intops::add_mod(b, &hi, &z2, Some(neg_adj), hw);
        // c + inc or c - inc depending on the sign of s.
        let flipped: Vec<GateId> = inc.iter().map(|&g| b.xor2(g, s_sign)).collect();
        let cv = intops::const_vec(b, c, hw);
        h = intops::add_mod(b, &cv, &flipped, Some(s_sign), hw);
    }

    // Result = H * 2^(k - w), always positive.
    let kw = k_tc.len() + 2;
    let k_ext = intops::sext(b, &k_tc, kw);
    let woff = intops::const_vec_tc(b, -(w as i64), kw);
    let base = intops::add_mod(b, &k_ext, &woff, None, kw);
    let computed = round_mag(b, &h, zero, ExpBase::Wires(&base)).fp;

    // Out-of-range clamp: +big saturates, -big flushes to zero.
    let zero_b = b.zero_bundle();
    let sat_b = {
        let m = tcvar_fp::FpNum::max_magnitude(false, b.p);
        b.constant_bundle(&m)
    };
    let clamped = b.mux_bundle(x.sign, &zero_b, &sat_b);
    Ok(b.mux_bundle(e_ge2, &clamped, &computed))
}

/// Square root; the second wire fires on negative input (domain error), in
/// which case the value output is zero, mirroring the total reference.
pub fn g_sqrt(b: &mut GadgetBuilder, x: &FpWires) -> GadgetResult<(FpWires, GateId)> {
    b.check_p(x)?;
    let pb = b.p.get() as usize;
    let w = tcvar_fp::working_bits(b.p) as usize;

    // E = e + p; value = a * 2^(2*floor(E/2)) with a in [1/2, 2).
    let ew = pb + 3;
    let e_ext = intops::sext(b, &x.exp_lsb(), ew);
    let pconst = intops::const_vec_tc(b, pb as i64, ew);
    let e_top = intops::add_mod(b, &e_ext, &pconst, None, ew);
    let parity = e_top[0];
    let q2 = e_top[1..].to_vec(); // floor(E/2), width ew-1

    let zero = b.zero_gate();
    let aw = w + 2;
    let mut a_even = vec![zero; aw];
    a_even[(w - pb)..w].copy_from_slice(&x.mag_lsb());
    let mut a_odd = vec![zero; aw];
    a_odd[(w - pb + 1)..=w].copy_from_slice(&x.mag_lsb());
    let a_fix = b.mux_vec(parity, &a_odd, &a_even);

    // Seed from the top bits, then Newton on the inverse square root.
    let idx_bits = a_fix[(w - 4)..].to_vec(); // 6 bits, value in [8, 31]
    let seeds = rsqrt_seed_table(b.p);
    let onehot = intops::decode_signed_onehot(b, &idx_bits, 8, 31, None);
    let yw = w + 2;
    let mut y = Vec::with_capacity(yw);
    for bit in 0..yw {
        let set: Vec<GateId> = onehot
            .iter()
            .zip(&seeds)
            .filter(|(_, s)| s.bit(bit as u64))
            .map(|(&oh, _)| oh)
            .collect();
        y.push(intops::or_all(b, &set));
    }

    // Intermediate values provably fit w + 2 bits (the reference side
    // asserts the same bounds), so truncating after each slice is lossless.
    let three = BigInt::from(3) << w;
    for _ in 0..sqrt_iterations(b.p) {
        let y2 = intops::mul_unsigned(b, &y, &y);
        let mut t1 = y2[w..].to_vec();
        t1.truncate(yw);
        let at = intops::mul_unsigned(b, &a_fix, &t1);
        let mut t2 = at[w..].to_vec();
        t2.truncate(yw);
        let t2e = intops::sext_zero(b, &t2, yw + 1);
        let nt2: Vec<GateId> = t2e.iter().map(|&g| b.not(g)).collect();
        let threev = intops::const_vec(b, &three, yw + 1);
        let one = b.one_gate();
        let mut u = intops::add_mod(b, &threev, &nt2, Some(one), yw + 1);
        u.truncate(yw);
        let yu = intops::mul_unsigned(b, &y, &u);
        y = yu[(w + 1)..].to_vec();
        y.truncate(yw);
        while y.len() < yw {
            y.push(zero);
        }
    }
    let ay = intops::mul_unsigned(b, &a_fix, &y);
    let r = ay[w..].to_vec();

    let kw = q2.len() + 2;
    let q2e = intops::sext(b, &q2, kw);
    let woff = intops::const_vec_tc(b, -(w as i64), kw);
    let base = intops::add_mod(b, &q2e, &woff, None, kw);
    let computed = round_mag(b, &r, zero, ExpBase::Wires(&base)).fp;

    let nz = b.not(x.zero);
    let domain = b.and(&[x.sign, nz]);
    let force_zero = b.or(&[x.zero, domain]);
    let zero_b = b.zero_bundle();
    let out = b.mux_bundle(force_zero, &zero_b, &computed);
    Ok((out, domain))
}
