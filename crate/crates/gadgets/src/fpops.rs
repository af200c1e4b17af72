//! Binary float gadgets: add, mul, div, compare, floor, negate.
//!
//! Each construction reproduces the exact algorithm of the matching
//! `tcvar-fp` operation. Addition uses a 2p+7-bit alignment window: any
//! operand more than p+6 binades below the other collapses to a sticky
//! unit at the window floor, which provably rounds identically to the
//! exact sum (the far operand can neither reach the guard position nor
//! create a tie).

use crate::builder::GadgetBuilder;
use crate::intops;
use crate::round::{round_mag, ExpBase};
use crate::{FpWires, GadgetResult};
use tcvar_netlist::GateId;

/// One-hot comparison outcome wires.
pub struct CompareWires {
    pub lt: GateId,
    pub eq: GateId,
    pub gt: GateId,
}

pub fn g_neg(b: &mut GadgetBuilder, x: &FpWires) -> GadgetResult<FpWires> {
    b.check_p(x)?;
    let nz = b.not(x.zero);
    let ns = b.not(x.sign);
    let sign = b.and(&[nz, ns]);
    Ok(FpWires {
        sign,
        mag: x.mag.clone(),
        zero: x.zero,
        exp: x.exp.clone(),
        p: x.p,
    })
}

pub fn g_add(b: &mut GadgetBuilder, x: &FpWires, y: &FpWires) -> GadgetResult<FpWires> {
    b.check_p(x)?;
    b.check_p(y)?;
    let pb = b.p.get() as usize;
    let v = 2 * pb + 7; // window width
    let clamp = pb as i64 + 7; // alignment clamp in binades
    let ew = pb + 3; // working exponent width

    // Zero operands compare as below-everything so they always land on the
    // "small" side and vanish from the window.
    let demoted = intops::const_vec_tc(b, b.p.min_exp() - 1, ew);
    let ex = intops::sext(b, &x.exp_lsb(), ew);
    let ey = intops::sext(b, &y.exp_lsb(), ew);
    let ex_eff = b.mux_vec(x.zero, &demoted, &ex);
    let ey_eff = b.mux_vec(y.zero, &demoted, &ey);

    // Signed comparison via flipped sign bits; ties keep x on the big side.
    let mut fx = ex_eff.clone();
    let mut fy = ey_eff.clone();
    let top = ew - 1;
    fx[top] = b.not(ex_eff[top]);
    fy[top] = b.not(ey_eff[top]);
    let (lt, _, _) = intops::compare_unsigned(b, &fx, &fy);
    let x_is_big = b.not(lt);

    let pick = |b: &mut GadgetBuilder, s: GateId, ax: &[GateId], ay: &[GateId]| -> Vec<GateId> {
        b.mux_vec(s, ax, ay)
    };
    let big_mag = pick(b, x_is_big, &x.mag_lsb(), &y.mag_lsb());
    let small_mag = pick(b, x_is_big, &y.mag_lsb(), &x.mag_lsb());
    let big_sign = b.mux(x_is_big, x.sign, y.sign);
    let small_sign = b.mux(x_is_big, y.sign, x.sign);
    let small_zero = b.mux(x_is_big, y.zero, x.zero);
    let big_exp = pick(b, x_is_big, &ex, &ey);
    let big_eff = pick(b, x_is_big, &ex_eff, &ey_eff);
    let small_eff = pick(b, x_is_big, &ey_eff, &ex_eff);

    // d = e_big - e_small >= 0, clamped at p+7.
    let bige = intops::sext(b, &big_eff, ew + 1);
    let smalle = intops::sext(b, &small_eff, ew + 1);
    let nsmall: Vec<GateId> = smalle.iter().map(|&g| b.not(g)).collect();
    let one = b.one_gate();
    let d = intops::add_mod(b, &bige, &nsmall, Some(one), ew + 1);
    let d_far = intops::ge_const_unsigned(b, &d, clamp as u64);
    let near = b.not(d_far);
    let shift_onehot = intops::decode_signed_onehot(b, &d, 0, clamp - 1, Some(near));

    // Window: big significand fixed at the top, small selected by shift,
    // or a sticky unit at position 0 when too far below.
    let zero = b.zero_gate();
    let mut big_vec = vec![zero; v];
    big_vec[(pb + 7)..(2 * pb + 7)].copy_from_slice(&big_mag);
    let mut small_vec = vec![zero; v];
    for (pos, slot) in small_vec.iter_mut().enumerate().skip(1) {
        let mut terms = Vec::new();
        for (a, &oh) in shift_onehot.iter().enumerate() {
            let j = pos as i64 - (pb as i64 + 7) + a as i64;
            if (0..pb as i64).contains(&j) {
                terms.push(b.and(&[oh, small_mag[j as usize]]));
            }
        }
        if !terms.is_empty() {
            *slot = b.or(&terms);
        }
    }
    let nsz = b.not(small_zero);
    small_vec[0] = b.and(&[d_far, nsz]);

    let same_sign = {
        let x2 = b.xor2(big_sign, small_sign);
        b.not(x2)
    };
    let total = intops::add(b, &big_vec, &small_vec, None); // v+1 bits
    let (d1, ge) = intops::sub(b, &big_vec, &small_vec);
    let (d2, _) = intops::sub(b, &small_vec, &big_vec);
    let mut diff = b.mux_vec(ge, &d1, &d2);
    diff.push(zero);
    let diff_sign = b.mux(ge, big_sign, small_sign);

    let mag = b.mux_vec(same_sign, &total, &diff);
    let sign = b.mux(same_sign, big_sign, diff_sign);

    // Window bit 0 weighs 2^(e_big - p - 7).
    let big_ext = intops::sext(b, &big_exp, ew + 1);
    let off = intops::const_vec_tc(b, -(pb as i64 + 7), ew + 1);
    let base = intops::add_mod(b, &big_ext, &off, None, ew + 1);
    Ok(round_mag(b, &mag, sign, ExpBase::Wires(&base)).fp)
}

pub fn g_sub(b: &mut GadgetBuilder, x: &FpWires, y: &FpWires) -> GadgetResult<FpWires> {
    let ny = g_neg(b, y)?;
    g_add(b, x, &ny)
}

pub fn g_mul(b: &mut GadgetBuilder, x: &FpWires, y: &FpWires) -> GadgetResult<FpWires> {
    b.check_p(x)?;
    b.check_p(y)?;
    let pb = b.p.get() as usize;
    let sign = b.xor2(x.sign, y.sign);
    let prod = intops::mul_unsigned(b, &x.mag_lsb(), &y.mag_lsb());
    let ex = intops::sext(b, &x.exp_lsb(), pb + 2);
    let ey = intops::sext(b, &y.exp_lsb(), pb + 2);
    let esum = intops::add_mod(b, &ex, &ey, None, pb + 2);
    Ok(round_mag(b, &prod, sign, ExpBase::Wires(&esum)).fp)
}

/// Division. The second result wire fires on a zero divisor, in which case
/// the value output is the largest magnitude with the dividend's sign
/// (mirroring the total-division fallback in the reference).
pub fn g_div(
    b: &mut GadgetBuilder,
    x: &FpWires,
    y: &FpWires,
) -> GadgetResult<(FpWires, GateId)> {
    b.check_p(x)?;
    b.check_p(y)?;
    let pb = b.p.get() as usize;
    let k = 2 * pb + 2;
    let w = 3 * pb + 3;
    let sign = b.xor2(x.sign, y.sign);

    let zero = b.zero_gate();
    let mut rem = vec![zero; w];
    rem[k..k + pb].copy_from_slice(&x.mag_lsb());
    let ymag = y.mag_lsb();
    let mut q = vec![zero; k + 1];
    for j in (0..=k).rev() {
        let mut dvec = vec![zero; w];
        dvec[j..j + pb].copy_from_slice(&ymag);
        let (diff, ge) = intops::sub(b, &rem, &dvec);
        q[j] = ge;
        rem = b.mux_vec(ge, &diff, &rem);
    }
    let sticky = b.or(&rem);
    q[0] = b.or(&[q[0], sticky]);

    let ex = intops::sext(b, &x.exp_lsb(), pb + 4);
    let ey = intops::sext(b, &y.exp_lsb(), pb + 4);
    let ney: Vec<GateId> = ey.iter().map(|&g| b.not(g)).collect();
    let one = b.one_gate();
    let ediff = intops::add_mod(b, &ex, &ney, Some(one), pb + 4);
    let koff = intops::const_vec_tc(b, -(k as i64), pb + 4);
    let base = intops::add_mod(b, &ediff, &koff, None, pb + 4);

    let normal = round_mag(b, &q, sign, ExpBase::Wires(&base)).fp;
    // Zero divisor: clamp to max magnitude with the dividend's sign.
    let ones = vec![b.one_gate(); pb];
    let emax = b.p.max_exp();
    let emax_bits: Vec<GateId> = (0..=pb).rev().map(|i| b.bit((emax >> i) & 1 == 1)).collect();
    let clamped = FpWires {
        sign: x.sign,
        mag: ones,
        zero: zero,
        exp: emax_bits,
        p: b.p,
    };
    let out = b.mux_bundle(y.zero, &clamped, &normal);
    Ok((out, y.zero))
}

pub fn g_compare(b: &mut GadgetBuilder, x: &FpWires, y: &FpWires) -> GadgetResult<CompareWires> {
    b.check_p(x)?;
    b.check_p(y)?;
    // Magnitude order for same-sign nonzero values: (e, |m|) lexicographic,
    // with the exponent sign bit flipped for unsigned comparison.
    let mut kx = x.exp_lsb();
    let mut ky = y.exp_lsb();
    let tx = kx.len() - 1;
    kx[tx] = b.not(x.exp[0]);
    ky[tx] = b.not(y.exp[0]);
    let mut keyx = x.mag_lsb();
    keyx.extend(kx);
    let mut keyy = y.mag_lsb();
    keyy.extend(ky);
    let (mlt, _, mgt) = intops::compare_unsigned(b, &keyx, &keyy);

    let nzx = b.not(x.zero);
    let nzy = b.not(y.zero);
    let nsx = b.not(x.sign);
    let nsy = b.not(y.sign);
    let xpos = b.and(&[nzx, nsx]);
    let xneg = b.and(&[nzx, x.sign]);
    let ypos = b.and(&[nzy, nsy]);
    let yneg = b.and(&[nzy, y.sign]);

    let y_le0 = b.or(&[y.zero, yneg]);
    let x_le0 = b.or(&[x.zero, xneg]);
    let gt = {
        let t1 = b.and(&[xpos, y_le0]);
        let t2 = b.and(&[x.zero, yneg]);
        let t3 = b.and(&[xpos, ypos, mgt]);
        let t4 = b.and(&[xneg, yneg, mlt]);
        b.or(&[t1, t2, t3, t4])
    };
    let lt = {
        let t1 = b.and(&[ypos, x_le0]);
        let t2 = b.and(&[y.zero, xneg]);
        let t3 = b.and(&[xpos, ypos, mlt]);
        let t4 = b.and(&[xneg, yneg, mgt]);
        b.or(&[t1, t2, t3, t4])
    };
    let ngt = b.not(gt);
    let nlt = b.not(lt);
    let eq = b.and(&[ngt, nlt]);
    Ok(CompareWires { lt, eq, gt })
}

pub fn g_floor(b: &mut GadgetBuilder, x: &FpWires) -> GadgetResult<FpWires> {
    b.check_p(x)?;
    let pb = b.p.get() as usize;
    // e >= 0 (or zero input): the value is already an integer.
    let e_nonneg = b.not(x.exp[0]);
    let pass = b.or(&[e_nonneg, x.zero]);

    let sh = intops::negate_tc(b, &x.exp_lsb()); // -e in [1, 2^p], p+1 bits
    let all_dropped = intops::ge_const_unsigned(b, &sh, pb as u64);
    let some = b.not(all_dropped);
    let onehot = intops::decode_signed_onehot(b, &sh, 1, pb as i64 - 1, Some(some));
    let mag = x.mag_lsb();
    let prefix = intops::prefix_or_lsb(b, &mag);

    let mut t_bits = Vec::with_capacity(pb);
    for j in 0..pb {
        let mut terms = Vec::new();
        for (ix, &oh) in onehot.iter().enumerate() {
            let a = ix + 1;
            if j + a < pb {
                terms.push(b.and(&[oh, mag[j + a]]));
            }
        }
        t_bits.push(intops::or_all(b, &terms));
    }
    let mut frac_terms = Vec::new();
    for (ix, &oh) in onehot.iter().enumerate() {
        frac_terms.push(b.and(&[oh, prefix[ix]]));
    }
    let nz = b.not(x.zero);
    frac_terms.push(b.and(&[all_dropped, nz]));
    let frac = b.or(&frac_terms);

    // Negative values floor away from zero: magnitude T + 1 when any
    // fractional bit dropped.
    let inc = b.and(&[x.sign, frac]);
    let zeros = vec![b.zero_gate(); pb];
    let t2 = intops::add(b, &t_bits, &zeros, Some(inc)); // p+1 bits
    let floored = round_mag(b, &t2, x.sign, ExpBase::Const(0)).fp;
    Ok(b.mux_bundle(pass, x, &floored))
}
