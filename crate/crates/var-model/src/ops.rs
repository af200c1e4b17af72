//! The model operations, generic over the evaluation backend.
//!
//! Evaluation order is part of each operation's contract (the compiler
//! replays the identical sequence), so loops run in fixed row-major order
//! and every summation is one backend `iter_add` (exact sum, single
//! rounding).

use crate::backend::FpBackend;
use crate::error::{ModelError, ModelResult};
use crate::types::{Codebook, ConvKernel, FeatureMap};
use std::cmp::Ordering;
use tcvar_fp::{fp_compare, fp_from_ratio, fp_iter_add, fp_mul, fp_sub, FpNum, Precision};

/// Catmull-Rom cubic kernel (a = -1/2) evaluated in exact p-bit
/// arithmetic. Piecewise: (a+2)|t|^3 - (a+3)|t|^2 + 1 inside |t| <= 1,
/// a(|t|^3 - 5|t|^2 + 8|t| - 4) for 1 < |t| < 2, zero beyond. Weights are
/// always compile-time constants (resampling offsets are known shapes), so
/// this runs on plain numbers, never on wires.
pub fn bicubic_weight(t: &FpNum) -> FpNum {
    let p = t.precision();
    let abs = if t.is_negative() { t.neg() } else { *t };
    let one = FpNum::one(p);
    let two = fp_from_ratio(2, 1, p);
    if fp_compare(&abs, &two) != Ordering::Less {
        return FpNum::zero(p);
    }
    let u2 = fp_mul(&abs, &abs);
    let u3 = fp_mul(&u2, &abs);
    let a_plus2 = fp_from_ratio(3, 2, p); // a + 2 = 3/2
    let a_plus3 = fp_from_ratio(5, 2, p); // a + 3 = 5/2
    if fp_compare(&abs, &one) != Ordering::Greater {
        // (a+2)|t|^3 - (a+3)|t|^2 + 1
        let t1 = fp_mul(&a_plus2, &u3);
        let t2 = fp_mul(&a_plus3, &u2);
        fp_iter_add(&[t1, t2.neg(), one]).expect("nonempty")
    } else {
        // a(|t|^3 - 5|t|^2 + 8|t| - 4), a = -1/2
        let five = fp_from_ratio(5, 1, p);
        let eight = fp_from_ratio(8, 1, p);
        let four = fp_from_ratio(4, 1, p);
        let t2 = fp_mul(&five, &u2);
        let t3 = fp_mul(&eight, &abs);
        let inner = fp_iter_add(&[u3, t2.neg(), t3, four.neg()]).expect("nonempty");
        let a = fp_from_ratio(-1, 2, p);
        fp_mul(&a, &inner)
    }
}

/// Source coordinate split for output index i of h -> h': exact rational
/// u = i*h/h' as (base, fractional offset rounded to p bits).
fn coord_split(i: usize, h: usize, h2: usize, p: Precision) -> (usize, FpNum) {
    let num = i * h;
    let base = num / h2;
    let rem = (num % h2) as i64;
    (base, fp_from_ratio(rem, h2 as i64, p))
}

/// The sixteen tap weights for one fractional offset pair, in fixed
/// (s, t) loop order.
fn tap_weights(fu: &FpNum, fv: &FpNum) -> Vec<(i64, i64, FpNum, FpNum)> {
    let p = fu.precision();
    let mut out = Vec::with_capacity(16);
    for s in -1i64..=2 {
        let sf = fp_from_ratio(s, 1, p);
        let ws = bicubic_weight(&fp_sub(&sf, fu));
        for t in -1i64..=2 {
            let tf = fp_from_ratio(t, 1, p);
            let wt = bicubic_weight(&fp_sub(&tf, fv));
            out.push((s, t, ws, wt));
        }
    }
    out
}

/// Bicubic up-interpolation to (h2, w2); border taps clamp to the edge.
/// Each output entry is sum over s,t of (W(s - fu) * X) * W(t - fv), the
/// two products in that order, accumulated by one iterated addition.
pub fn up_interpolate<B: FpBackend>(
    b: &mut B,
    x: &FeatureMap<B::V>,
    h2: usize,
    w2: usize,
) -> ModelResult<FeatureMap<B::V>> {
    if h2 < x.h || w2 < x.w {
        return Err(ModelError::ShrinkNotSupported(x.h, x.w, h2, w2));
    }
    let p = b.precision();
    let mut data = Vec::with_capacity(h2 * w2 * x.c);
    for i in 0..h2 {
        let (bi, fu) = coord_split(i, x.h, h2, p);
        for j in 0..w2 {
            let (bj, fv) = coord_split(j, x.w, w2, p);
            let taps = tap_weights(&fu, &fv);
            for l in 0..x.c {
                let mut terms = Vec::with_capacity(16);
                for (s, t, ws, wt) in &taps {
                    let si = (bi as i64 + s).clamp(0, x.h as i64 - 1) as usize;
                    let tj = (bj as i64 + t).clamp(0, x.w as i64 - 1) as usize;
                    let wsc = b.constant(*ws);
                    let wtc = b.constant(*wt);
                    let prod = b.mul(&wsc, x.at(si, tj, l))?;
                    terms.push(b.mul(&prod, &wtc)?);
                }
                data.push(b.iter_add(&terms)?);
            }
        }
    }
    FeatureMap::new(h2, w2, x.c, data)
}

/// x (rows of length d) times a constant matrix (d x d2):
/// out[i][j] = iter_add over k of x[i][k] * w[k][j].
pub fn matmul_const_right<B: FpBackend>(
    b: &mut B,
    x: &[Vec<B::V>],
    w: &[Vec<FpNum>],
) -> ModelResult<Vec<Vec<B::V>>> {
    let d = w.len();
    let d2 = w.first().map_or(0, |r| r.len());
    let mut out = Vec::with_capacity(x.len());
    for row in x {
        if row.len() != d {
            return Err(ModelError::ShapeMismatch(format!(
                "row has {} entries, matrix expects {d}",
                row.len()
            )));
        }
        let mut orow = Vec::with_capacity(d2);
        for j in 0..d2 {
            let mut terms = Vec::with_capacity(d);
            for (k, xv) in row.iter().enumerate() {
                let c = b.constant(w[k][j]);
                terms.push(b.mul(xv, &c)?);
            }
            orow.push(b.iter_add(&terms)?);
        }
        out.push(orow);
    }
    Ok(out)
}

/// Pairwise pre-softmax scores then entrywise exp:
/// A[i][j] = exp((X G X^T)[i][j]) with G = W_Q W_K^T folded to constants.
pub fn attention_matrix<B: FpBackend>(
    b: &mut B,
    x: &[Vec<B::V>],
    w_q: &[Vec<FpNum>],
    w_k: &[Vec<FpNum>],
) -> ModelResult<Vec<Vec<B::V>>> {
    let p = b.precision();
    let g = fold_qk(w_q, w_k, p)?;
    // Stage 1: Y = X * G.
    let y = matmul_const_right(b, x, &g)?;
    // Stage 2: s_ij = <Y_i, X_j>, then exp entrywise.
    let n = x.len();
    let mut a = Vec::with_capacity(n);
    for yi in &y {
        let mut row = Vec::with_capacity(n);
        for xj in x.iter().take(n) {
            let mut terms = Vec::with_capacity(yi.len());
            for (k, yv) in yi.iter().enumerate() {
                terms.push(b.mul(yv, &xj[k])?);
            }
            let s = b.iter_add(&terms)?;
            row.push(b.exp(&s)?);
        }
        a.push(row);
    }
    Ok(a)
}

/// W_Q * W_K^T evaluated in plain p-bit arithmetic (parameters only).
pub fn fold_qk(
    w_q: &[Vec<FpNum>],
    w_k: &[Vec<FpNum>],
    _p: Precision,
) -> ModelResult<Vec<Vec<FpNum>>> {
    let d = w_q.len();
    if w_k.len() != d || w_q.iter().chain(w_k).any(|r| r.len() != d) {
        return Err(ModelError::ShapeMismatch("query/key matrices must be d x d".into()));
    }
    let mut g = vec![vec![]; d];
    for i in 0..d {
        for j in 0..d {
            // (W_Q W_K^T)[i][j] = sum_k W_Q[i][k] * W_K[j][k]
            let terms: Vec<FpNum> = (0..d).map(|k| fp_mul(&w_q[i][k], &w_k[j][k])).collect();
            g[i].push(fp_iter_add(&terms)?);
        }
    }
    Ok(g)
}

/// Full attention layer: row-normalized attention times the value
/// projection. Construction order: A, then X W_V, then row sums, then the
/// numerators, then one division per entry.
pub fn attention_layer<B: FpBackend>(
    b: &mut B,
    x: &[Vec<B::V>],
    w_q: &[Vec<FpNum>],
    w_k: &[Vec<FpNum>],
    w_v: &[Vec<FpNum>],
) -> ModelResult<Vec<Vec<B::V>>> {
    let a = attention_matrix(b, x, w_q, w_k)?;
    let xv = matmul_const_right(b, x, w_v)?;
    let n = x.len();
    let d = xv.first().map_or(0, |r| r.len());
    let mut row_sums = Vec::with_capacity(n);
    for arow in &a {
        let s = b.iter_add(arow)?;
        b.check_nonzero(&s, ModelError::RowSumZero)?;
        row_sums.push(s);
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut orow = Vec::with_capacity(d);
        for j in 0..d {
            let mut terms = Vec::with_capacity(n);
            for k in 0..n {
                terms.push(b.mul(&a[i][k], &xv[k][j])?);
            }
            let numer = b.iter_add(&terms)?;
            orow.push(b.div_total(&numer, &row_sums[i])?);
        }
        out.push(orow);
    }
    Ok(out)
}

/// Row-wise affine map W x_i + b; the bias joins the product list so the
/// whole entry is one single-rounding sum.
pub fn mlp<B: FpBackend>(
    b: &mut B,
    x: &[Vec<B::V>],
    w: &[Vec<FpNum>],
    bias: &[FpNum],
) -> ModelResult<Vec<Vec<B::V>>> {
    let d = w.len();
    let mut out = Vec::with_capacity(x.len());
    for row in x {
        if row.len() != d {
            return Err(ModelError::ShapeMismatch("mlp row width".into()));
        }
        let mut orow = Vec::with_capacity(d);
        for j in 0..d {
            let mut terms = Vec::with_capacity(d + 1);
            for (k, xv) in row.iter().enumerate() {
                let c = b.constant(w[j][k]);
                terms.push(b.mul(&c, xv)?);
            }
            terms.push(b.constant(bias[j]));
            orow.push(b.iter_add(&terms)?);
        }
        out.push(orow);
    }
    Ok(out)
}

/// Per-row normalization (x - mean) / sqrt(variance); constant rows (zero
/// variance) normalize to the zero row.
pub fn layer_norm<B: FpBackend>(b: &mut B, x: &[Vec<B::V>]) -> ModelResult<Vec<Vec<B::V>>> {
    let p = b.precision();
    let mut out = Vec::with_capacity(x.len());
    for row in x {
        let d = row.len();
        let dconst = b.constant(FpNum::from_int(d as i64, p));
        let sum = b.iter_add(row)?;
        let mu = b.div_total(&sum, &dconst)?;
        let neg_mu = b.neg(&mu);
        let dev: Vec<B::V> = row
            .iter()
            .map(|v| b.add(v, &neg_mu))
            .collect::<ModelResult<_>>()?;
        let sq: Vec<B::V> = dev
            .iter()
            .map(|v| b.mul(v, v))
            .collect::<ModelResult<_>>()?;
        let sqsum = b.iter_add(&sq)?;
        let var = b.div_total(&sqsum, &dconst)?;
        let denom = b.sqrt_total(&var)?;
        let zero = b.constant(FpNum::zero(p));
        let mut orow = Vec::with_capacity(d);
        for v in &dev {
            let q = b.div_total(v, &denom)?;
            orow.push(b.choose_on_zero(&var, &zero, &q)?);
        }
        out.push(orow);
    }
    Ok(out)
}

/// Valid (no padding) stride-1 convolution; each output entry is one
/// iterated addition over the h_k*w_k*c products plus the bias, products
/// in (m, n, q) loop order.
pub fn conv2d<B: FpBackend>(
    b: &mut B,
    x: &FeatureMap<B::V>,
    kernels: &[ConvKernel],
) -> ModelResult<FeatureMap<B::V>> {
    let k0 = kernels
        .first()
        .ok_or_else(|| ModelError::ShapeMismatch("empty kernel list".into()))?;
    let (hk, wk) = (k0.weights.h, k0.weights.w);
    for k in kernels {
        if k.weights.h != hk || k.weights.w != wk || k.weights.c != x.c {
            return Err(ModelError::ShapeMismatch(
                "kernels must share one shape matching the input channels".into(),
            ));
        }
    }
    if hk > x.h || wk > x.w {
        return Err(ModelError::KernelTooLarge);
    }
    let (oh, ow) = (x.h - hk + 1, x.w - wk + 1);
    let mut data = Vec::with_capacity(oh * ow * kernels.len());
    for i in 0..oh {
        for j in 0..ow {
            for kern in kernels {
                let mut terms = Vec::with_capacity(hk * wk * x.c + 1);
                for m in 0..hk {
                    for nn in 0..wk {
                        for q in 0..x.c {
                            let kc = b.constant(*kern.weights.at(m, nn, q));
                            terms.push(b.mul(x.at(i + m, j + nn, q), &kc)?);
                        }
                    }
                }
                terms.push(b.constant(kern.bias));
                data.push(b.iter_add(&terms)?);
            }
        }
    }
    FeatureMap::new(oh, ow, kernels.len(), data)
}

/// Token-index map to embedded feature map via one-hot selection.
pub fn codebook_lookup<B: FpBackend>(
    b: &mut B,
    indices: &[B::Sel],
    h: usize,
    w: usize,
    codebook: &Codebook,
) -> ModelResult<FeatureMap<B::V>> {
    if indices.len() != h * w {
        return Err(ModelError::ShapeMismatch(format!(
            "index map {}x{} needs {} entries, got {}",
            h,
            w,
            h * w,
            indices.len()
        )));
    }
    let mut data = Vec::with_capacity(h * w * codebook.dim());
    for sel in indices {
        data.extend(b.select_row(sel, &codebook.rows)?);
    }
    FeatureMap::new(h, w, codebook.dim(), data)
}

/// Entrywise residual addition.
pub fn residual_add<B: FpBackend>(
    b: &mut B,
    x: &FeatureMap<B::V>,
    y: &FeatureMap<B::V>,
) -> ModelResult<FeatureMap<B::V>> {
    if x.h != y.h || x.w != y.w || x.c != y.c {
        return Err(ModelError::ShapeMismatch(format!(
            "residual shapes {}x{}x{} vs {}x{}x{}",
            x.h, x.w, x.c, y.h, y.w, y.c
        )));
    }
    let data = x
        .data
        .iter()
        .zip(&y.data)
        .map(|(a, c)| b.add(a, c))
        .collect::<ModelResult<Vec<_>>>()?;
    FeatureMap::new(x.h, x.w, x.c, data)
}

/// Reference-convenience entry points over plain numbers.
pub mod direct {
    use super::*;
    use crate::backend::{FpDirect, ModelInputs};

    fn closed(p: Precision) -> FpDirect {
        FpDirect::new(
            p,
            ModelInputs {
                scalars: vec![],
                tokens: vec![],
            },
        )
    }

    pub fn up_interpolate_fp(
        x: &FeatureMap<FpNum>,
        h2: usize,
        w2: usize,
    ) -> ModelResult<FeatureMap<FpNum>> {
        let p = x.data.first().map_or(Precision::new(4).unwrap(), |v| v.precision());
        super::up_interpolate(&mut closed(p), x, h2, w2)
    }

    pub fn attention_matrix_fp(
        x: &[Vec<FpNum>],
        w_q: &[Vec<FpNum>],
        w_k: &[Vec<FpNum>],
    ) -> ModelResult<Vec<Vec<FpNum>>> {
        let p = x[0][0].precision();
        super::attention_matrix(&mut closed(p), x, w_q, w_k)
    }

    pub fn attention_layer_fp(
        x: &[Vec<FpNum>],
        w_q: &[Vec<FpNum>],
        w_k: &[Vec<FpNum>],
        w_v: &[Vec<FpNum>],
    ) -> ModelResult<Vec<Vec<FpNum>>> {
        let p = x[0][0].precision();
        super::attention_layer(&mut closed(p), x, w_q, w_k, w_v)
    }

    pub fn mlp_fp(
        x: &[Vec<FpNum>],
        w: &[Vec<FpNum>],
        bias: &[FpNum],
    ) -> ModelResult<Vec<Vec<FpNum>>> {
        let p = x[0][0].precision();
        super::mlp(&mut closed(p), x, w, bias)
    }

    pub fn layer_norm_fp(x: &[Vec<FpNum>]) -> ModelResult<Vec<Vec<FpNum>>> {
        let p = x[0][0].precision();
        super::layer_norm(&mut closed(p), x)
    }

    pub fn conv2d_fp(
        x: &FeatureMap<FpNum>,
        kernels: &[ConvKernel],
    ) -> ModelResult<FeatureMap<FpNum>> {
        let p = x.data[0].precision();
        super::conv2d(&mut closed(p), x, kernels)
    }

    pub fn codebook_lookup_fp(
        indices: &[usize],
        h: usize,
        w: usize,
        codebook: &Codebook,
    ) -> ModelResult<FeatureMap<FpNum>> {
        let p = codebook.rows[0][0].precision();
        super::codebook_lookup(&mut closed(p), indices, h, w, codebook)
    }

    pub fn residual_add_fp(
        x: &FeatureMap<FpNum>,
        y: &FeatureMap<FpNum>,
    ) -> ModelResult<FeatureMap<FpNum>> {
        let p = x.data[0].precision();
        super::residual_add(&mut closed(p), x, y)
    }
}
