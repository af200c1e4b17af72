//! Iterated addition and multiplication over wire bundles.
//!
//! Iterated addition is the n-independent-depth workhorse: every addend's
//! significand is scattered into a full-range alignment window (one column
//! per representable binade plus significand width), positive and negative
//! columns are reduced by exactly four depth-uniform counting rounds, and
//! the two resulting numbers meet in one subtraction and one rounding.
//! The full window makes the sum exact on every input, cancellation
//! included, so the result equals the reference single-rounding semantics
//! unconditionally.

use crate::builder::{DepthPolicy, GadgetBuilder};
use crate::fpops::g_mul;
use crate::intops;
use crate::round::{round_mag, ExpBase};
use crate::{FpWires, GadgetError, GadgetResult};
use tcvar_netlist::GateId;

/// Fixed counting-round count; reduces any column height up to 8191 to at
/// most two rows, so depth never varies with the operand count.
const ITER_ROUNDS: usize = 4;
const MAX_ADDENDS: usize = 4096;

pub fn g_iter_add(b: &mut GadgetBuilder, xs: &[FpWires]) -> GadgetResult<FpWires> {
    if xs.is_empty() {
        return Err(GadgetError::EmptyInput);
    }
    assert!(xs.len() <= MAX_ADDENDS, "desk-scale addend cap");
    for x in xs {
        b.check_p(x)?;
    }
    let pb = b.p.get() as usize;
    let emin = b.p.min_exp();
    let emax = b.p.max_exp();
    // One column per power of two from emin to emax + p - 1.
    let w = (emax + pb as i64 - 1 - emin + 1) as usize;

    let mut pos_cols: Vec<Vec<GateId>> = vec![Vec::new(); w];
    let mut neg_cols: Vec<Vec<GateId>> = vec![Vec::new(); w];
    for x in xs {
        let nz = b.not(x.zero);
        let onehot =
            intops::decode_signed_onehot(b, &x.exp_lsb(), emin, emax, Some(nz));
        let mag = x.mag_lsb();
        let nsign = b.not(x.sign);
        for pos in 0..w {
            let mut terms = Vec::with_capacity(pb);
            for (j, &m) in mag.iter().enumerate() {
                let e_ix = pos as i64 - j as i64;
                if (0..(emax - emin + 1)).contains(&e_ix) {
                    terms.push(b.and(&[onehot[e_ix as usize], m]));
                }
            }
            if terms.is_empty() {
                continue;
            }
            let bit = b.or(&terms);
            pos_cols[pos].push(b.and(&[bit, nsign]));
            neg_cols[pos].push(b.and(&[bit, x.sign]));
        }
    }

    // An always-zero wire that never constant-folds: appended to the
    // columns beyond the natural count spread, it pins the carry network
    // and the rounding stage to one fixed width for every operand count,
    // so depth cannot creep with n. Size-only safety margin.
    let opaque_zero = xs
        .iter()
        .flat_map(|x| x.to_flat())
        .find(|&g| {
            !matches!(
                b.circ.kind(g),
                tcvar_netlist::GateKind::Const0 | tcvar_netlist::GateKind::Const1
            )
        })
        .map(|g| {
            let ng = b.not(g);
            b.circ
                .add_gate(tcvar_netlist::GateKind::And, &[g.min(ng), g.max(ng)])
                .unwrap()
        });

    let mut pos = pos_cols;
    let mut neg = neg_cols;
    for _ in 0..ITER_ROUNDS {
        pos = intops::count_round_uniform(b, &pos);
        neg = intops::count_round_uniform(b, &neg);
    }
    assert!(
        pos.iter().chain(&neg).all(|c| c.len() <= 2),
        "four rounds reduce every column to two rows for n <= 8191"
    );
    // Fixed post-reduction width: window plus headroom for counts of up to
    // MAX_ADDENDS operands.
    let target = w + 16;
    if let Some(z0) = opaque_zero {
        for cols in [&mut pos, &mut neg] {
            cols.resize(target, Vec::new());
            for col in cols.iter_mut() {
                if col.is_empty() {
                    col.push(z0);
                }
            }
        }
    }
    let zero = b.zero_gate();
    let to_rows = |b: &mut GadgetBuilder, cols: &[Vec<tcvar_netlist::GateId>]| {
        let va: Vec<_> = cols.iter().map(|c| c.first().copied().unwrap_or(zero)).collect();
        let vb: Vec<_> = cols.iter().map(|c| c.get(1).copied().unwrap_or(zero)).collect();
        (va, vb)
    };
    let (pa, pb2) = to_rows(b, &pos);
    let p_sum = intops::add(b, &pa, &pb2, None);
    let (na, nb) = to_rows(b, &neg);
    let n_sum = intops::add(b, &na, &nb, None);
    let width = p_sum.len().max(n_sum.len());
    let pv = intops::sext_zero(b, &p_sum, width);
    let nv = intops::sext_zero(b, &n_sum, width);
    let (d1, ge) = intops::sub(b, &pv, &nv);
    let (d2, _) = intops::sub(b, &nv, &pv);
    let mag = b.mux_vec(ge, &d1, &d2);
    let sign = b.not(ge);
    Ok(round_mag(b, &mag, sign, ExpBase::Const(emin)).fp)
}

/// Iterated multiplication. Lists of length 1 and 2 work under both
/// policies; longer lists need the Tree policy, which builds a balanced
/// tree of exact widening integer products and rounds once at the root, so
/// the result still equals the single-rounding reference semantics.
pub fn g_iter_mul(b: &mut GadgetBuilder, xs: &[FpWires]) -> GadgetResult<FpWires> {
    match xs.len() {
        0 => return Err(GadgetError::EmptyInput),
        1 => {
            b.check_p(&xs[0])?;
            return Ok(xs[0].clone());
        }
        2 => return g_mul(b, &xs[0], &xs[1]),
        n if b.policy == DepthPolicy::Strict => {
            return Err(GadgetError::StrictPolicyViolation(n))
        }
        _ => {}
    }
    for x in xs {
        b.check_p(x)?;
    }
    let pb = b.p.get() as usize;
    let ew = pb + 2 + usize::BITS as usize - xs.len().leading_zeros() as usize;

    struct Node {
        mag: Vec<GateId>,
        exp: Vec<GateId>,
        sign: GateId,
    }
    let mut layer: Vec<Node> = xs
        .iter()
        .map(|x| Node {
            mag: x.mag_lsb(),
            exp: intops::sext(b, &x.exp_lsb(), ew),
            sign: x.sign,
        })
        .collect();
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        let mut it = layer.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                None => next.push(a),
                Some(c) => {
                    let mag = intops::mul_unsigned(b, &a.mag, &c.mag);
                    let exp = intops::add_mod(b, &a.exp, &c.exp, None, ew);
                    let sign = b.xor2(a.sign, c.sign);
                    next.push(Node { mag, exp, sign });
                }
            }
        }
        layer = next;
    }
    let root = layer.pop().unwrap();
    Ok(round_mag(b, &root.mag, root.sign, ExpBase::Wires(&root.exp)).fp)
}
