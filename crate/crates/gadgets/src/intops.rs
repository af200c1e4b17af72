//! Unsigned/two's-complement integer blocks over wire vectors.
//!
//! All vectors here are least-significant-bit first. Carry chains come in
//! two flavors picked by the policy: Strict uses flat generate/propagate
//! OR-AND lookahead in constant depth, recursing on 8-bit blocks so wide
//! words stay constant-depth per block level; Tree uses a Sklansky prefix
//! network. Column-counting reductions use THRESHOLD banks; the
//! depth-uniform variant spends one extra trivial OR per count bit so its
//! level structure is identical for every operand count.

use crate::builder::{DepthPolicy, GadgetBuilder};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use tcvar_netlist::{GateId, GateKind};

pub fn const_vec(b: &mut GadgetBuilder, v: &BigInt, width: usize) -> Vec<GateId> {
    assert!(!v.is_negative(), "const_vec takes nonnegative values");
    (0..width).map(|i| b.bit(v.bit(i as u64))).collect()
}

/// Two's-complement constant over a fixed width.
pub fn const_vec_tc(b: &mut GadgetBuilder, v: i64, width: usize) -> Vec<GateId> {
    (0..width)
        .map(|i| b.bit((v >> i.min(63)) & 1 == 1))
        .collect()
}

pub fn or_all(b: &mut GadgetBuilder, xs: &[GateId]) -> GateId {
    if xs.is_empty() {
        return b.zero_gate();
    }
    b.or(xs)
}

/// Three-input parity in four flat levels via a threshold bank.
fn xor3(b: &mut GadgetBuilder, x: GateId, y: GateId, z: GateId) -> GateId {
    let bank = b.threshold_bank(&[x, y, z], 3);
    let n2 = b.not(bank[1]);
    let e1 = b.and(&[bank[0], n2]);
    b.or(&[e1, bank[2]])
}

fn zext(b: &mut GadgetBuilder, v: &[GateId], width: usize) -> Vec<GateId> {
    let mut out = v.to_vec();
    while out.len() < width {
        out.push(b.zero_gate());
    }
    out
}

/// Zero-extends to a width (public form of the internal helper).
pub fn sext_zero(b: &mut GadgetBuilder, v: &[GateId], width: usize) -> Vec<GateId> {
    zext(b, v, width)
}

/// Sign-extends a two's-complement vector.
pub fn sext(_b: &mut GadgetBuilder, v: &[GateId], width: usize) -> Vec<GateId> {
    assert!(!v.is_empty());
    let mut out = v.to_vec();
    let top = *v.last().unwrap();
    while out.len() < width {
        out.push(top);
    }
    out
}

const BLOCK: usize = 8;

/// Carries c_0..c_w for a + b + cin, flat within 8-bit blocks and recursing
/// over block generate/propagate above that.
fn carry_chain(
    b: &mut GadgetBuilder,
    gs: &[GateId],
    ps: &[GateId],
    cin: GateId,
) -> Vec<GateId> {
    let w = gs.len();
    if w <= BLOCK {
        return carry_chain_flat(b, gs, ps, cin);
    }
    let nblocks = w.div_ceil(BLOCK);
    let mut block_g = Vec::with_capacity(nblocks);
    let mut block_p = Vec::with_capacity(nblocks);
    let zero = b.zero_gate();
    let mut local: Vec<Vec<GateId>> = Vec::with_capacity(nblocks);
    for blk in 0..nblocks {
        let lo = blk * BLOCK;
        let hi = (lo + BLOCK).min(w);
        let cs = carry_chain_flat(b, &gs[lo..hi], &ps[lo..hi], zero);
        block_g.push(*cs.last().unwrap());
        block_p.push(b.and(&ps[lo..hi]));
        local.push(cs);
    }
    let blk_carries = carry_chain(b, &block_g, &block_p, cin);
    // Final per-bit carries: local (seed 0) or the block carry rippling
    // through the local propagate prefix.
    let mut out = Vec::with_capacity(w + 1);
    for blk in 0..nblocks {
        let lo = blk * BLOCK;
        let hi = (lo + BLOCK).min(w);
        let cin_blk = blk_carries[blk];
        for i in lo..hi {
            let c = if i == lo {
                cin_blk
            } else {
                let pfx = b.and(&ps[lo..i]);
                let via = b.and(&[cin_blk, pfx]);
                b.or(&[local[blk][i - lo], via])
            };
            out.push(c);
        }
    }
    out.push(*blk_carries.last().unwrap());
    // blk_carries' last entry already includes the top block's generate
    // via the recursion over (block_g, block_p).
    out
}

fn carry_chain_flat(
    b: &mut GadgetBuilder,
    gs: &[GateId],
    ps: &[GateId],
    cin: GateId,
) -> Vec<GateId> {
    let w = gs.len();
    let mut out = Vec::with_capacity(w + 1);
    out.push(cin);
    for i in 1..=w {
        // carry into position i: some j < i generates and propagates
        // through, or cin propagates the whole way.
        let mut terms = Vec::with_capacity(i + 1);
        for j in 0..i {
            if j + 1 == i {
                terms.push(gs[j]);
            } else {
                let mut t = vec![gs[j]];
                t.extend_from_slice(&ps[j + 1..i]);
                terms.push(b.and(&t));
            }
        }
        let mut t = vec![cin];
        t.extend_from_slice(&ps[0..i]);
        terms.push(b.and(&t));
        out.push(b.or(&terms));
    }
    out
}

/// Sklansky prefix carries (Tree policy).
fn carry_chain_prefix(
    b: &mut GadgetBuilder,
    gs: &[GateId],
    ps: &[GateId],
    cin: GateId,
) -> Vec<GateId> {
    // Virtual position -1 generates cin and never propagates.
    let mut g: Vec<GateId> = std::iter::once(cin).chain(gs.iter().copied()).collect();
    let mut p: Vec<GateId> = std::iter::once(b.zero_gate())
        .chain(ps.iter().copied())
        .collect();
    let n = g.len();
    let mut dist = 1usize;
    while dist < n {
        let snapshot_g = g.clone();
        let snapshot_p = p.clone();
        for i in 0..n {
            if (i / dist) % 2 == 1 {
                let j = (i / dist) * dist - 1;
                let t = b.and(&[snapshot_p[i], snapshot_g[j]]);
                g[i] = b.or(&[snapshot_g[i], t]);
                p[i] = b.and(&[snapshot_p[i], snapshot_p[j]]);
            }
        }
        dist *= 2;
    }
    g
}

fn carries(b: &mut GadgetBuilder, gs: &[GateId], ps: &[GateId], cin: GateId) -> Vec<GateId> {
    match b.policy {
        DepthPolicy::Strict => carry_chain(b, gs, ps, cin),
        DepthPolicy::Tree => carry_chain_prefix(b, gs, ps, cin),
    }
}

/// a + b + cin, full width max(|a|,|b|) + 1.
pub fn add(
    b: &mut GadgetBuilder,
    a: &[GateId],
    bv: &[GateId],
    cin: Option<GateId>,
) -> Vec<GateId> {
    let w = a.len().max(bv.len());
    let a = zext(b, a, w);
    let bvv = zext(b, bv, w);
    let cin = cin.unwrap_or_else(|| b.zero_gate());
    let gs: Vec<GateId> = (0..w).map(|i| b.and(&[a[i], bvv[i]])).collect();
    let ps: Vec<GateId> = (0..w).map(|i| b.or(&[a[i], bvv[i]])).collect();
    let cs = carries(b, &gs, &ps, cin);
    let mut out: Vec<GateId> = (0..w).map(|i| xor3(b, a[i], bvv[i], cs[i])).collect();
    out.push(cs[w]);
    out
}

/// a + b + cin truncated to `width` bits (two's-complement arithmetic).
pub fn add_mod(
    b: &mut GadgetBuilder,
    a: &[GateId],
    bv: &[GateId],
    cin: Option<GateId>,
    width: usize,
) -> Vec<GateId> {
    let a = zext(b, a, width);
    let bvv = zext(b, bv, width);
    let mut s = add(b, &a, &bvv, cin);
    s.truncate(width);
    s
}

/// a - b for unsigned vectors of one width: returns (difference mod 2^w,
/// ge = [a >= b]).
pub fn sub(b: &mut GadgetBuilder, a: &[GateId], bv: &[GateId]) -> (Vec<GateId>, GateId) {
    let w = a.len().max(bv.len());
    let a = zext(b, a, w);
    let bvv = zext(b, bv, w);
    let nb: Vec<GateId> = bvv.iter().map(|&x| b.not(x)).collect();
    let one = b.one_gate();
    let mut s = add(b, &a, &nb, Some(one));
    let ge = s.pop().unwrap();
    (s, ge)
}

/// Two's-complement negation at fixed width.
pub fn negate_tc(b: &mut GadgetBuilder, a: &[GateId]) -> Vec<GateId> {
    let na: Vec<GateId> = a.iter().map(|&x| b.not(x)).collect();
    let one = b.one_gate();
    let zero = vec![b.zero_gate(); a.len()];
    add_mod(b, &zero, &na, Some(one), a.len())
}

/// s ? -a : a at fixed width (two's complement).
pub fn cond_negate_tc(b: &mut GadgetBuilder, a: &[GateId], s: GateId) -> Vec<GateId> {
    let flipped: Vec<GateId> = a.iter().map(|&x| b.xor2(x, s)).collect();
    let zero = vec![b.zero_gate(); a.len()];
    add_mod(b, &flipped, &zero, Some(s), a.len())
}

/// Pads a wire with raw single-input OR gates up to a target level.
/// Constant-folding is bypassed on purpose: the pads exist to pin levels.
pub fn pad_to_level(b: &mut GadgetBuilder, mut g: GateId, target: u32) -> GateId {
    while b.circ.level_of(g) < target {
        g = b.circ.add_gate(GateKind::Or, &[g]).unwrap();
    }
    g
}

/// Counting round over columns of bits, depth-uniform variant: all column
/// bits are first padded to one common level, and every output bit leaves
/// exactly four levels above it (bank -> NOT -> AND -> OR, with identity
/// pads on the shallow exits). The level structure is therefore identical
/// for every operand count, which is what makes iterated-addition depth a
/// constant across n.
pub fn count_round_uniform(b: &mut GadgetBuilder, cols: &[Vec<GateId>]) -> Vec<Vec<GateId>> {
    let base = cols
        .iter()
        .flatten()
        .map(|g| b.circ.level_of(*g))
        .max()
        .unwrap_or(0);
    let padded: Vec<Vec<GateId>> = cols
        .iter()
        .map(|col| col.iter().map(|&g| pad_to_level(b, g, base)).collect())
        .collect();
    let mut out = count_round(b, &padded, true);
    for col in out.iter_mut() {
        for g in col.iter_mut() {
            *g = pad_to_level(b, *g, base + 4);
        }
    }
    out
}

/// Counting round, packed variant: single-term ORs fold away. Used inside
/// multipliers, whose widths depend only on the precision.
pub fn count_round_packed(b: &mut GadgetBuilder, cols: &[Vec<GateId>]) -> Vec<Vec<GateId>> {
    count_round(b, cols, false)
}

fn count_round(b: &mut GadgetBuilder, cols: &[Vec<GateId>], uniform: bool) -> Vec<Vec<GateId>> {
    let max_h = cols.iter().map(|c| c.len()).max().unwrap_or(0);
    let count_bits = usize::BITS as usize - max_h.leading_zeros() as usize; // ceil(log2(h+1))
    let mut out: Vec<Vec<GateId>> = vec![Vec::new(); cols.len() + count_bits.max(1)];
    for (c, col) in cols.iter().enumerate() {
        match col.len() {
            0 => {}
            1 => out[c].push(col[0]),
            h => {
                let h = h as u32;
                let bank = b.threshold_bank(col, h);
                let nots: Vec<GateId> = bank.iter().map(|&t| b.not(t)).collect();
                // EXACTLY_k = T>=k and not T>=k+1 (T>=h+1 is always false).
                let mut exactly = Vec::with_capacity(h as usize);
                for k in 1..=h as usize {
                    if k == h as usize {
                        exactly.push(bank[k - 1]);
                    } else {
                        exactly.push(b.and(&[bank[k - 1], nots[k]]));
                    }
                }
                let bits = usize::BITS as usize - (h as usize).leading_zeros() as usize;
                for bit in 0..bits {
                    let terms: Vec<GateId> = (1..=h as usize)
                        .filter(|k| k >> bit & 1 == 1)
                        .map(|k| exactly[k - 1])
                        .collect();
                    let v = if uniform {
                        // Raw OR keeps one gate level even for one term.
                        b.circ.add_gate(GateKind::Or, &terms).unwrap()
                    } else {
                        b.or(&terms)
                    };
                    out[c + bit].push(v);
                }
            }
        }
    }
    while out.last().is_some_and(|c| c.is_empty()) {
        out.pop();
    }
    out
}

/// Reduces columns to two addend vectors with `rounds` counting rounds
/// (must statically suffice), then returns the final carry-propagate sum.
pub fn columns_to_sum(
    b: &mut GadgetBuilder,
    mut cols: Vec<Vec<GateId>>,
    rounds: usize,
    uniform: bool,
) -> Vec<GateId> {
    for _ in 0..rounds {
        cols = count_round(b, &cols, uniform);
    }
    assert!(
        cols.iter().all(|c| c.len() <= 2),
        "counting rounds did not converge"
    );
    let zero = b.zero_gate();
    let va: Vec<GateId> = cols
        .iter()
        .map(|c| c.first().copied().unwrap_or(zero))
        .collect();
    let vb: Vec<GateId> = cols
        .iter()
        .map(|c| c.get(1).copied().unwrap_or(zero))
        .collect();
    add(b, &va, &vb, None)
}

/// Static count of packed rounds needed to reduce height h to <= 2.
pub fn rounds_for_height(mut h: usize) -> usize {
    let mut r = 0;
    while h > 2 {
        h = usize::BITS as usize - h.leading_zeros() as usize;
        r += 1;
    }
    r
}

/// Unsigned product, width |a| + |b|.
pub fn mul_unsigned(b: &mut GadgetBuilder, a: &[GateId], bv: &[GateId]) -> Vec<GateId> {
    let (la, lb) = (a.len(), bv.len());
    let mut cols: Vec<Vec<GateId>> = vec![Vec::new(); la + lb];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in bv.iter().enumerate() {
            let pp = b.and(&[ai, bj]);
            cols[i + j].push(pp);
        }
    }
    let rounds = rounds_for_height(la.min(lb));
    let mut s = columns_to_sum(b, cols, rounds, false);
    s.truncate(la + lb);
    s
}

/// Product by a nonnegative constant: partial-product rows are aliases of
/// `a` at the constant's set bits, so only the counting costs gates.
pub fn mul_by_const(b: &mut GadgetBuilder, a: &[GateId], c: &BigInt) -> Vec<GateId> {
    if c.is_zero() {
        return vec![b.zero_gate()];
    }
    let cbits = c.bits() as usize;
    let width = a.len() + cbits;
    let mut cols: Vec<Vec<GateId>> = vec![Vec::new(); width];
    let mut height = 0usize;
    for j in 0..cbits {
        if c.bit(j as u64) {
            height += 1;
            for (i, &ai) in a.iter().enumerate() {
                cols[i + j].push(ai);
            }
        }
    }
    let rounds = rounds_for_height(height.min(a.len() + 1));
    let mut s = columns_to_sum(b, cols, rounds, false);
    s.truncate(width);
    s
}

/// Flat unsigned comparison: (lt, eq, gt).
pub fn compare_unsigned(
    b: &mut GadgetBuilder,
    a: &[GateId],
    bv: &[GateId],
) -> (GateId, GateId, GateId) {
    let w = a.len().max(bv.len());
    let a = zext(b, a, w);
    let bvv = zext(b, bv, w);
    let eqs: Vec<GateId> = (0..w)
        .map(|i| {
            let x = b.xor2(a[i], bvv[i]);
            b.not(x)
        })
        .collect();
    let mut gt_terms = Vec::with_capacity(w);
    let mut lt_terms = Vec::with_capacity(w);
    for i in (0..w).rev() {
        let mut t = vec![a[i]];
        let nb = b.not(bvv[i]);
        t.push(nb);
        t.extend_from_slice(&eqs[i + 1..]);
        gt_terms.push(b.and(&t));
        let na = b.not(a[i]);
        let mut t = vec![na, bvv[i]];
        t.extend_from_slice(&eqs[i + 1..]);
        lt_terms.push(b.and(&t));
    }
    let gt = b.or(&gt_terms);
    let lt = b.or(&lt_terms);
    let eq = b.and(&eqs);
    (lt, eq, gt)
}

/// a >= c for an unsigned wire vector and a constant.
pub fn ge_const_unsigned(b: &mut GadgetBuilder, a: &[GateId], c: u64) -> GateId {
    let w = a.len();
    if c == 0 {
        return b.one_gate();
    }
    if c >= (1u64 << w.min(63)) && w < 64 {
        return b.zero_gate();
    }
    let cbit = |i: usize| c >> i & 1 == 1;
    // a > c at the first differing position from the top, or a == c.
    let mut terms = Vec::new();
    for i in (0..w).rev() {
        if cbit(i) {
            continue;
        }
        let mut t = vec![a[i]];
        for j in i + 1..w {
            t.push(if cbit(j) { a[j] } else { b.not(a[j]) });
        }
        terms.push(b.and(&t));
    }
    let eq_term: Vec<GateId> = (0..w)
        .map(|j| if cbit(j) { a[j] } else { b.not(a[j]) })
        .collect();
    terms.push(b.and(&eq_term));
    b.or(&terms)
}

/// Signed (two's complement) a >= c for constant c.
pub fn ge_const_signed(b: &mut GadgetBuilder, a: &[GateId], c: i64) -> GateId {
    // Flip the sign bit of both sides: order-preserving map to unsigned.
    let w = a.len();
    let mut flipped = a.to_vec();
    flipped[w - 1] = b.not(a[w - 1]);
    let cu = (c + (1i64 << (w - 1))) as u64;
    ge_const_unsigned(b, &flipped, cu)
}

/// prefix_or[i] = OR(a[0..=i]), one flat OR per position.
pub fn prefix_or_lsb(b: &mut GadgetBuilder, a: &[GateId]) -> Vec<GateId> {
    (0..a.len()).map(|i| b.or(&a[..=i])).collect()
}

/// One-hot marker of the most significant set bit, plus a nonzero flag.
pub fn leading_one_onehot(b: &mut GadgetBuilder, a: &[GateId]) -> (Vec<GateId>, GateId) {
    let w = a.len();
    let mut onehot = Vec::with_capacity(w);
    for i in 0..w {
        if i == w - 1 {
            onehot.push(a[i]);
        } else {
            let above = b.or(&a[i + 1..]);
            let nabove = b.not(above);
            onehot.push(b.and(&[a[i], nabove]));
        }
    }
    let nonzero = b.or(a);
    (onehot, nonzero)
}

/// Decodes a two's-complement wire field into one-hot lines for every value
/// in lo..=hi, each optionally gated by `enable`.
pub fn decode_signed_onehot(
    b: &mut GadgetBuilder,
    field: &[GateId],
    lo: i64,
    hi: i64,
    enable: Option<GateId>,
) -> Vec<GateId> {
    let w = field.len();
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    for v in lo..=hi {
        let mut t = Vec::with_capacity(w + 1);
        for (i, &bit) in field.iter().enumerate() {
            let want = (v >> i.min(63)) & 1 == 1;
            t.push(if want { bit } else { b.not(bit) });
        }
        if let Some(e) = enable {
            t.push(e);
        }
        out.push(b.and(&t));
    }
    out
}
