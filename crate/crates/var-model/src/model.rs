//! Phase composition: token-map transformer, feature-map reconstruction,
//! and the decoder, all over one backend.
//!
//! The transformer input is the single 1 x d seed row. Each layer first
//! runs its upsample stage, which appends new token maps per the schedule
//! below, then attention over the whole sequence, then g = LN . MLP . LN
//! (either normalization optional). Scale growth schedule: layer i < m
//! appends scale i+1 (when present); the last layer appends every
//! remaining scale, so the sequence always reaches n = sum of scale areas.
//!
//! Phases 2 and 3 consume token-index inputs (one one-hot selector per
//! position per scale), embed them through the codebook, upsample each
//! scale to the finest shape, convolve, and sum entrywise across scales;
//! the decoder blocks then run in configured order. Phase 1 feeds the
//! sequence output; next-token prediction is out of scope, so the phases
//! are composed side by side in one artifact.

use crate::backend::FpBackend;
use crate::config::{ModelConfig, ModelParams};
use crate::error::ModelResult;
use crate::ops;
use crate::types::{DecoderBlock, FeatureMap, TokenSequence};

/// Which scales each layer's upsample stage appends (scale indices).
pub fn upscale_schedule(m: usize, n_scales: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); m];
    let mut next = 1usize;
    for (i, slot) in out.iter_mut().enumerate() {
        if i + 1 == m {
            slot.extend(next..n_scales);
            next = n_scales;
        } else if next < n_scales {
            slot.push(next);
            next += 1;
        }
    }
    out
}

pub struct ModelOutput<V> {
    /// Final transformer sequence, n x d.
    pub sequence: TokenSequence<V>,
    /// Decoded image map when phases 2/3 are configured.
    pub image: Option<FeatureMap<V>>,
}

/// Runs the full model, pulling inputs from the backend in layout order:
/// first the d scalars of the seed row, then one token selector per
/// position per scale (coarse to fine, row-major).
pub fn run_model<B: FpBackend>(
    b: &mut B,
    cfg: &ModelConfig,
    params: &ModelParams,
) -> ModelResult<ModelOutput<B::V>> {
    let sequence = run_transformer(b, cfg, params)?;
    let image = match (&cfg.phase2, &params.codebook) {
        (Some(_), Some(codebook)) => {
            let fmap = run_reconstruction(b, cfg, params, codebook)?;
            Some(run_decoder(b, params, fmap)?)
        }
        _ => None,
    };
    Ok(ModelOutput { sequence, image })
}

/// Phase 1.
pub fn run_transformer<B: FpBackend>(
    b: &mut B,
    cfg: &ModelConfig,
    params: &ModelParams,
) -> ModelResult<TokenSequence<B::V>> {
    let d = cfg.transformer.dim;
    let scales = &cfg.transformer.scales;
    let seed_row: Vec<B::V> = (0..d)
        .map(|_| b.next_scalar_input())
        .collect::<ModelResult<_>>()?;
    let mut shapes = vec![scales[0]];
    let mut rows = vec![seed_row];
    let schedule = upscale_schedule(params.layers.len(), scales.len());

    for (layer, stage) in params.layers.iter().zip(&schedule) {
        // Upsample stage: append per-schedule scales, each an
        // up-interpolation of the current finest map.
        for &scale_ix in stage {
            let (th, tw) = scales[scale_ix];
            let (fh, fw) = *shapes.last().unwrap();
            let start: usize = shapes[..shapes.len() - 1].iter().map(|(h, w)| h * w).sum();
            let finest = FeatureMap::new(
                fh,
                fw,
                d,
                rows[start..start + fh * fw]
                    .iter()
                    .flatten()
                    .cloned()
                    .collect(),
            )?;
            let up = ops::up_interpolate(b, &finest, th, tw)?;
            for i in 0..th {
                for j in 0..tw {
                    rows.push((0..d).map(|l| up.at(i, j, l).clone()).collect());
                }
            }
            shapes.push((th, tw));
        }
        // Attention over the whole sequence, then g = LN . MLP . LN.
        let mut x = ops::attention_layer(b, &rows, &layer.w_q, &layer.w_k, &layer.w_v)?;
        if layer.ln_in {
            x = ops::layer_norm(b, &x)?;
        }
        x = ops::mlp(b, &x, &layer.mlp_w, &layer.mlp_b)?;
        if layer.ln_out {
            x = ops::layer_norm(b, &x)?;
        }
        rows = x;
    }
    let seq = TokenSequence { shapes, rows };
    seq.check()?;
    Ok(seq)
}

/// Phase 2: per-scale index maps through the codebook, upsampled to the
/// finest scale, convolved, and summed entrywise across scales in one
/// iterated addition per entry.
pub fn run_reconstruction<B: FpBackend>(
    b: &mut B,
    cfg: &ModelConfig,
    params: &ModelParams,
    codebook: &crate::types::Codebook,
) -> ModelResult<FeatureMap<B::V>> {
    let scales = &cfg.transformer.scales;
    let (fh, fw) = cfg.final_scale();
    let mut per_scale = Vec::with_capacity(scales.len());
    for &(h, w) in scales {
        let sels: Vec<B::Sel> = (0..h * w)
            .map(|_| b.next_onehot_input(codebook.size()))
            .collect::<ModelResult<_>>()?;
        let embedded = ops::codebook_lookup(b, &sels, h, w, codebook)?;
        let up = ops::up_interpolate(b, &embedded, fh, fw)?;
        per_scale.push(ops::conv2d(b, &up, &params.phase2_kernels)?);
    }
    let first = &per_scale[0];
    let (oh, ow, oc) = (first.h, first.w, first.c);
    let mut data = Vec::with_capacity(oh * ow * oc);
    for ix in 0..oh * ow * oc {
        let terms: Vec<B::V> = per_scale.iter().map(|m| m.data[ix].clone()).collect();
        data.push(b.iter_add(&terms)?);
    }
    FeatureMap::new(oh, ow, oc, data)
}

/// Phase 3: decoder blocks in configured order.
pub fn run_decoder<B: FpBackend>(
    b: &mut B,
    params: &ModelParams,
    mut x: FeatureMap<B::V>,
) -> ModelResult<FeatureMap<B::V>> {
    for block in &params.decoder {
        x = match block {
            DecoderBlock::ResNet { conv1, conv2 } => {
                let y1 = ops::conv2d(b, &x, conv1)?;
                let y2 = ops::conv2d(b, &y1, conv2)?;
                ops::residual_add(b, &x, &y2)?
            }
            DecoderBlock::Attention { w_q, w_k, w_v } => {
                let rows: Vec<Vec<B::V>> = (0..x.h * x.w)
                    .map(|ix| x.data[ix * x.c..(ix + 1) * x.c].to_vec())
                    .collect();
                let out = ops::attention_layer(b, &rows, w_q, w_k, w_v)?;
                FeatureMap::new(x.h, x.w, x.c, out.into_iter().flatten().collect())?
            }
            DecoderBlock::UpSample { target, kernels } => {
                let up = ops::up_interpolate(b, &x, target.0, target.1)?;
                ops::conv2d(b, &up, kernels)?
            }
        };
    }
    Ok(x)
}

/// Input layout sizes for a config: (scalar count, one token selector per
/// position per scale when phase 2 is present).
pub fn input_layout(cfg: &ModelConfig) -> (usize, Vec<(usize, usize)>) {
    let scalars = cfg.transformer.dim;
    let tokens = if cfg.phase2.is_some() {
        cfg.transformer.scales.clone()
    } else {
        Vec::new()
    };
    (scalars, tokens)
}

/// Deterministic input sampler for verification campaigns: seed-row values
/// with magnitudes in [1/4, 2) and uniform token indices.
pub fn sample_inputs(cfg: &ModelConfig, seed: u64) -> crate::backend::ModelInputs {
    use rand::{RngCore, SeedableRng};
    let p = cfg.precision_checked().expect("validated");
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed ^ 0x7a93_11c4_55d1_9e02);
    let (n_scalars, token_shapes) = input_layout(cfg);
    let pb = p.get();
    let scalars = (0..n_scalars)
        .map(|_| {
            let half = 1u64 << (pb - 1);
            let mag = half + rng.next_u64() % half;
            let neg = rng.next_u32() & 1 == 1;
            let e = -(pb as i64) + (rng.next_u32() % 3) as i64 - 1;
            tcvar_fp::FpNum::new(if neg { -(mag as i64) } else { mag as i64 }, e, p).unwrap()
        })
        .collect();
    let c_vae = cfg.phase2.as_ref().map_or(1, |p2| p2.codebook_size);
    let mut tokens = Vec::new();
    for (h, w) in &token_shapes {
        for _ in 0..h * w {
            tokens.push((rng.next_u64() % c_vae as u64) as usize);
        }
    }
    crate::backend::ModelInputs { scalars, tokens }
}
