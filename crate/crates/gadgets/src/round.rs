//! The normalize-and-round stage shared by every arithmetic gadget.
//!
//! Takes a sign wire plus an unsigned magnitude vector whose bit i weighs
//! 2^(base + i), finds the leading one, selects the p-bit significand with
//! guard and sticky, rounds to nearest/even, and assembles a canonical
//! encoding with saturate/flush range handling. Mirrors
//! `tcvar_fp::round_p_full` bit for bit.

use crate::builder::GadgetBuilder;
use crate::intops;
use crate::FpWires;
use tcvar_netlist::GateId;

pub enum ExpBase<'a> {
    /// Exponent of magnitude bit 0 is a compile-time constant.
    Const(i64),
    /// Exponent of magnitude bit 0 is a two's-complement wire field.
    Wires(&'a [GateId]),
}

pub struct RoundedWires {
    pub fp: FpWires,
    pub saturated: GateId,
    pub flushed: GateId,
}

pub fn round_mag(
    b: &mut GadgetBuilder,
    mag: &[GateId],
    sign: GateId,
    base: ExpBase,
) -> RoundedWires {
    let pb = b.p.get() as usize;
    let v = mag.len();
    let emin = b.p.min_exp();
    let emax = b.p.max_exp();

    let (onehot, nonzero) = intops::leading_one_onehot(b, mag);
    let is_zero = b.not(nonzero);
    let prefix = intops::prefix_or_lsb(b, mag);

    // Significand bits (LSB first): sig[j] = mag[t - (p-1) + j] at the
    // leading position t.
    let mut sig = Vec::with_capacity(pb);
    for j in 0..pb {
        let mut terms = Vec::new();
        for t in 0..v {
            let src = t as i64 - (pb as i64 - 1) + j as i64;
            if (0..v as i64).contains(&src) {
                terms.push(b.and(&[onehot[t], mag[src as usize]]));
            }
        }
        sig.push(intops::or_all(b, &terms));
    }
    // Guard and sticky below the significand.
    let mut guard_terms = Vec::new();
    let mut sticky_terms = Vec::new();
    for t in pb..v {
        guard_terms.push(b.and(&[onehot[t], mag[t - pb]]));
        if t > pb {
            sticky_terms.push(b.and(&[onehot[t], prefix[t - pb - 1]]));
        }
    }
    let guard = intops::or_all(b, &guard_terms);
    let sticky = intops::or_all(b, &sticky_terms);

    // Ties to even: round up iff guard and (sticky or odd significand).
    let tie_break = b.or(&[sticky, sig[0]]);
    let round_up = b.and(&[guard, tie_break]);
    let zero_vec = vec![b.zero_gate(); pb];
    let mut sig2 = intops::add(b, &sig, &zero_vec, Some(round_up));
    let carry = sig2.pop().unwrap();
    // A carry turns 2^p into 2^(p-1) with the exponent bumped.
    let one = b.one_gate();
    let zero = b.zero_gate();
    let sig_f: Vec<GateId> = (0..pb)
        .map(|j| {
            let renorm = if j == pb - 1 { one } else { zero };
            b.mux(carry, renorm, sig2[j])
        })
        .collect();

    // Exponent of the result: base + t - (p - 1) + carry.
    let (exp_lsb, sat, flush) = match base {
        ExpBase::Const(c) => {
            let e_at = |t: usize| c + t as i64 - (pb as i64 - 1);
            let mut over = Vec::new();
            let mut at_max = Vec::new();
            let mut under = Vec::new();
            let mut at_min_m1 = Vec::new();
            for (t, &oh) in onehot.iter().enumerate() {
                let e = e_at(t);
                if e > emax {
                    over.push(oh);
                }
                if e == emax {
                    at_max.push(oh);
                }
                if e < emin - 1 {
                    under.push(oh);
                }
                if e == emin - 1 {
                    at_min_m1.push(oh);
                }
            }
            let over = intops::or_all(b, &over);
            let at_max = intops::or_all(b, &at_max);
            let under = intops::or_all(b, &under);
            let at_min_m1 = intops::or_all(b, &at_min_m1);
            let sat_c = b.and(&[carry, at_max]);
            let sat = b.or(&[over, sat_c]);
            let ncarry = b.not(carry);
            let fl_c = b.and(&[ncarry, at_min_m1]);
            let flush = b.or(&[under, fl_c]);
            // Exponent bits selected per position, carry-adjusted.
            let mut bits = Vec::with_capacity(pb + 1);
            let ncarry2 = b.not(carry);
            for bit in 0..=pb {
                let set0: Vec<GateId> = onehot
                    .iter()
                    .enumerate()
                    .filter(|(t, _)| (e_at(*t) >> bit) & 1 == 1)
                    .map(|(_, &oh)| oh)
                    .collect();
                let set1: Vec<GateId> = onehot
                    .iter()
                    .enumerate()
                    .filter(|(t, _)| ((e_at(*t) + 1) >> bit) & 1 == 1)
                    .map(|(_, &oh)| oh)
                    .collect();
                let s0 = intops::or_all(b, &set0);
                let s1 = intops::or_all(b, &set1);
                let a0 = b.and(&[ncarry2, s0]);
                let a1 = b.and(&[carry, s1]);
                bits.push(b.or(&[a0, a1]));
            }
            (bits, sat, flush)
        }
        ExpBase::Wires(base_w) => {
            // Width comfortably holding base + position offset.
            let off_bits = (usize::BITS - v.leading_zeros()) as usize + 2;
            let wext = (base_w.len() + 2).max(off_bits + 2).max(pb + 3);
            // One-hot selected offset constant t - (p - 1).
            let mut off = Vec::with_capacity(wext);
            for bit in 0..wext {
                let set: Vec<GateId> = onehot
                    .iter()
                    .enumerate()
                    .filter(|(t, _)| {
                        let val = *t as i64 - (pb as i64 - 1);
                        (val >> bit.min(63)) & 1 == 1
                    })
                    .map(|(_, &oh)| oh)
                    .collect();
                off.push(intops::or_all(b, &set));
            }
            let base_ext = intops::sext(b, base_w, wext);
            let e_final = intops::add_mod(b, &base_ext, &off, Some(carry), wext);
            let sat = intops::ge_const_signed(b, &e_final, emax + 1);
            let ge_min = intops::ge_const_signed(b, &e_final, emin);
            let flush = b.not(ge_min);
            (e_final[..=pb].to_vec(), sat, flush)
        }
    };

    // Saturation clamps to the largest magnitude; flush (or an exactly zero
    // magnitude) yields canonical zero.
    let nz_flush = b.and(&[flush, nonzero]);
    let zflag = b.or(&[is_zero, nz_flush]);
    let nzflag = b.not(zflag);
    let sat_eff = b.and(&[sat, nzflag]);
    let nsat = b.not(sat_eff);

    let out_sign = b.and(&[sign, nzflag]);
    let mut out_mag_lsb = Vec::with_capacity(pb);
    for (j, &s) in sig_f.iter().enumerate() {
        // Max magnitude is all ones.
        let _ = j;
        let val = b.or(&[sat_eff, s]);
        out_mag_lsb.push(b.and(&[val, nzflag]));
    }
    let emax_bits: Vec<bool> = (0..=pb).map(|i| (emax >> i) & 1 == 1).collect();
    let mut out_exp_lsb = Vec::with_capacity(pb + 1);
    for (i, &e) in exp_lsb.iter().take(pb + 1).enumerate() {
        let sat_bit = if emax_bits[i] { sat_eff } else { zero };
        let norm = b.and(&[e, nsat]);
        let v = b.or(&[sat_bit, norm]);
        out_exp_lsb.push(b.and(&[v, nzflag]));
    }

    let mut mag_msb = out_mag_lsb;
    mag_msb.reverse();
    let mut exp_msb = out_exp_lsb;
    exp_msb.reverse();
    RoundedWires {
        fp: FpWires {
            sign: out_sign,
            mag: mag_msb,
            zero: zflag,
            exp: exp_msb,
            p: b.p,
        },
        saturated: sat_eff,
        flushed: nz_flush,
    }
}
