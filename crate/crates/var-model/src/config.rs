//! Model configuration: the human-editable TOML schema, validation with
//! field-level diagnostics, and deterministic parameter generation.
//!
//! Weights are either seeded (ChaCha-derived, mapped straight onto
//! significand/exponent fields so every platform draws the same values) or
//! the identity configuration used by the pass-through checks.

use crate::error::{ModelError, ModelResult};
use crate::types::{Codebook, ConvKernel, DecoderBlock, FeatureMap, LayerParams};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use tcvar_fp::{FpNum, Precision};

pub const MAX_LAYERS: usize = 8;
pub const MAX_TOKENS: usize = 4096;
pub const MAX_DIM: usize = 16;
pub const MAX_CODEBOOK: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelConfig {
    /// Significand bits of every value in the model.
    pub precision: u32,
    /// Reduction policy for the compiled circuit: "strict" or "tree".
    #[serde(default = "default_policy")]
    pub policy: String,
    pub transformer: TransformerCfg,
    /// Feature-map reconstruction (phase 2); omit for a transformer-only
    /// model.
    #[serde(default)]
    pub phase2: Option<Phase2Cfg>,
    /// Decoder blocks (phase 3); requires phase 2.
    #[serde(default)]
    pub decoder: Option<DecoderCfg>,
    #[serde(default)]
    pub weights: WeightsCfg,
}

fn default_policy() -> String {
    "strict".into()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TransformerCfg {
    /// Transformer layer count m (held O(1): at most 8).
    pub layers: usize,
    /// Hidden dimension d.
    pub dim: usize,
    /// Token-map scales (h_i, w_i), coarse to fine.
    pub scales: Vec<(usize, usize)>,
    /// Layer norm before the MLP inside each g block.
    #[serde(default = "default_true")]
    pub ln_in: bool,
    /// Layer norm after the MLP inside each g block.
    #[serde(default = "default_true")]
    pub ln_out: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Phase2Cfg {
    pub codebook_size: usize,
    pub codebook_dim: usize,
    /// Post-upsample convolution: kernel count (output channels).
    #[serde(default = "default_one")]
    pub kernels: usize,
    #[serde(default = "default_one")]
    pub kernel_h: usize,
    #[serde(default = "default_one")]
    pub kernel_w: usize,
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DecoderCfg {
    #[serde(default)]
    pub block: Vec<DecoderBlockCfg>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DecoderBlockCfg {
    /// "resnet" | "attention" | "upsample".
    pub kind: String,
    /// Upsample target (h, w); required for upsample blocks.
    #[serde(default)]
    pub target: Option<(usize, usize)>,
    /// Kernel height/width for the post-upsample convolution (defaults 1x1,
    /// which also keeps resnet blocks dimension-preserving).
    #[serde(default = "default_one")]
    pub kernel_h: usize,
    #[serde(default = "default_one")]
    pub kernel_w: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WeightsCfg {
    #[serde(default)]
    pub seed: u64,
    /// "seeded" draws pseudo-random parameters; "identity" builds the
    /// pass-through configuration (zero query/key, identity value and MLP).
    #[serde(default = "default_mode")]
    pub mode: String,
}

impl Default for WeightsCfg {
    fn default() -> Self {
        WeightsCfg {
            seed: 0,
            mode: default_mode(),
        }
    }
}

fn default_mode() -> String {
    "seeded".into()
}

impl ModelConfig {
    pub fn from_toml(text: &str) -> ModelResult<Self> {
        let cfg: ModelConfig =
            toml::from_str(text).map_err(|e| ModelError::Config(format!("toml: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn precision_checked(&self) -> ModelResult<Precision> {
        Precision::new(self.precision).map_err(|e| ModelError::Config(format!("precision: {e}")))
    }

    /// Total token count n = sum of scale areas.
    pub fn token_count(&self) -> usize {
        self.transformer.scales.iter().map(|(h, w)| h * w).sum()
    }

    /// Final (finest) scale.
    pub fn final_scale(&self) -> (usize, usize) {
        *self.transformer.scales.last().expect("validated nonempty")
    }

    pub fn validate(&self) -> ModelResult<()> {
        let fail = |f: &str, msg: String| Err(ModelError::Config(format!("{f}: {msg}")));
        self.precision_checked()?;
        let t = &self.transformer;
        if t.layers == 0 || t.layers > MAX_LAYERS {
            return fail("transformer.layers", format!("must be 1..={MAX_LAYERS}"));
        }
        if t.dim == 0 || t.dim > MAX_DIM {
            return fail("transformer.dim", format!("must be 1..={MAX_DIM}"));
        }
        if t.scales.is_empty() {
            return fail("transformer.scales", "at least one scale".into());
        }
        if t.scales[0] != (1, 1) {
            return fail("transformer.scales", "first scale must be 1x1".into());
        }
        for win in t.scales.windows(2) {
            let ((h0, w0), (h1, w1)) = (win[0], win[1]);
            if h1 < h0 || w1 < w0 {
                return fail("transformer.scales", "scales must be nondecreasing".into());
            }
        }
        if self.token_count() > MAX_TOKENS {
            return fail(
                "transformer.scales",
                format!("token count {} over the cap {MAX_TOKENS}", self.token_count()),
            );
        }
        match self.policy.as_str() {
            "strict" | "tree" => {}
            other => return fail("policy", format!("unknown policy {other:?}")),
        }
        match self.weights.mode.as_str() {
            "seeded" | "identity" => {}
            other => return fail("weights.mode", format!("unknown mode {other:?}")),
        }
        if let Some(p2) = &self.phase2 {
            if p2.codebook_size == 0 || p2.codebook_size > MAX_CODEBOOK {
                return fail("phase2.codebook_size", format!("must be 1..={MAX_CODEBOOK}"));
            }
            if p2.codebook_dim == 0 || p2.codebook_dim > MAX_DIM {
                return fail("phase2.codebook_dim", format!("must be 1..={MAX_DIM}"));
            }
            let (fh, fw) = self.final_scale();
            if p2.kernel_h > fh || p2.kernel_w > fw {
                return fail("phase2.kernel_h/w", "kernel larger than the final map".into());
            }
            if p2.kernels == 0 || p2.kernels > MAX_DIM {
                return fail("phase2.kernels", format!("must be 1..={MAX_DIM}"));
            }
            // The kernel-volume assumption ties h_k * w_k * c to n.
            if p2.kernel_h * p2.kernel_w * p2.codebook_dim > self.token_count() {
                return fail(
                    "phase2",
                    "kernel volume h_k*w_k*c exceeds the token count n".into(),
                );
            }
            // Phase-3 shape walk.
            let mut h = fh - p2.kernel_h + 1;
            let mut w = fw - p2.kernel_w + 1;
            let mut c = p2.kernels;
            if let Some(dec) = &self.decoder {
                for (ix, blk) in dec.block.iter().enumerate() {
                    let f = format!("decoder.block[{ix}]");
                    match blk.kind.as_str() {
                        "resnet" => {
                            if blk.kernel_h != 1 || blk.kernel_w != 1 {
                                return fail(&f, "resnet kernels must be 1x1 to preserve dims".into());
                            }
                        }
                        "attention" => {
                            if h * w > MAX_TOKENS {
                                return fail(&f, "attention over too many positions".into());
                            }
                        }
                        "upsample" => {
                            let Some((th, tw)) = blk.target else {
                                return fail(&f, "upsample needs a target".into());
                            };
                            if th < h || tw < w {
                                return fail(&f, "upsample target must not shrink".into());
                            }
                            if blk.kernel_h > th || blk.kernel_w > tw {
                                return fail(&f, "kernel larger than the upsampled map".into());
                            }
                            h = th - blk.kernel_h + 1;
                            w = tw - blk.kernel_w + 1;
                        }
                        other => return fail(&f, format!("unknown block kind {other:?}")),
                    }
                    if h * w * c > crate::types::MAX_MAP_ENTRIES {
                        return fail(&f, "map grows past desk scale".into());
                    }
                }
            }
        } else if self.decoder.as_ref().is_some_and(|d| !d.block.is_empty()) {
            return fail("decoder", "decoder requires phase2".into());
        }
        Ok(())
    }
}

/// Fully materialized parameters.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub p: Precision,
    pub layers: Vec<LayerParams>,
    pub codebook: Option<Codebook>,
    pub phase2_kernels: Vec<ConvKernel>,
    pub decoder: Vec<DecoderBlock>,
}

struct WeightGen {
    rng: ChaCha20Rng,
    p: Precision,
    identity: bool,
}

impl WeightGen {
    /// One weight with magnitude in [1/4, 1): sign, full-range significand,
    /// exponent -p-1 or -p. Drawn field-by-field for platform stability.
    fn value(&mut self) -> FpNum {
        let pb = self.p.get();
        let half = 1u64 << (pb - 1);
        let mag = half + self.rng.next_u64() % half;
        let neg = self.rng.next_u32() & 1 == 1;
        let e = -(pb as i64) - (self.rng.next_u32() & 1) as i64;
        FpNum::new(if neg { -(mag as i64) } else { mag as i64 }, e, self.p).unwrap()
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Vec<Vec<FpNum>> {
        (0..rows)
            .map(|_| (0..cols).map(|_| self.value()).collect())
            .collect()
    }

    fn identity_matrix(&self, d: usize) -> Vec<Vec<FpNum>> {
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        if i == j {
                            FpNum::one(self.p)
                        } else {
                            FpNum::zero(self.p)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn zero_matrix(&self, d: usize) -> Vec<Vec<FpNum>> {
        vec![vec![FpNum::zero(self.p); d]; d]
    }

    fn kernel(&mut self, hk: usize, wk: usize, c: usize, identity: bool) -> ConvKernel {
        if identity {
            // 1x1 pass-through on channel 0 of a single-channel map.
            let mut data = vec![FpNum::zero(self.p); hk * wk * c];
            data[0] = FpNum::one(self.p);
            ConvKernel {
                weights: FeatureMap::new(hk, wk, c, data).unwrap(),
                bias: FpNum::zero(self.p),
            }
        } else {
            let data = (0..hk * wk * c).map(|_| self.value()).collect();
            ConvKernel {
                weights: FeatureMap::new(hk, wk, c, data).unwrap(),
                bias: self.value(),
            }
        }
    }
}

impl ModelParams {
    /// Deterministic materialization: one draw order, seeded by the config.
    pub fn from_config(cfg: &ModelConfig) -> ModelResult<Self> {
        cfg.validate()?;
        let p = cfg.precision_checked()?;
        let mut g = WeightGen {
            rng: ChaCha20Rng::seed_from_u64(cfg.weights.seed),
            p,
            identity: cfg.weights.mode == "identity",
        };
        let d = cfg.transformer.dim;
        let mut layers = Vec::with_capacity(cfg.transformer.layers);
        for _ in 0..cfg.transformer.layers {
            let (w_q, w_k, w_v, mlp_w, mlp_b) = if g.identity {
                (
                    g.zero_matrix(d),
                    g.zero_matrix(d),
                    g.identity_matrix(d),
                    g.identity_matrix(d),
                    vec![FpNum::zero(p); d],
                )
            } else {
                (
                    g.matrix(d, d),
                    g.matrix(d, d),
                    g.matrix(d, d),
                    g.matrix(d, d),
                    (0..d).map(|_| g.value()).collect(),
                )
            };
            layers.push(LayerParams {
                w_q,
                w_k,
                w_v,
                mlp_w,
                mlp_b,
                ln_in: cfg.transformer.ln_in,
                ln_out: cfg.transformer.ln_out,
            });
        }

        let mut codebook = None;
        let mut phase2_kernels = Vec::new();
        let mut decoder = Vec::new();
        if let Some(p2) = &cfg.phase2 {
            let rows = if g.identity {
                (0..p2.codebook_size)
                    .map(|i| {
                        (0..p2.codebook_dim)
                            .map(|j| {
                                if j == i % p2.codebook_dim {
                                    FpNum::one(p)
                                } else {
                                    FpNum::zero(p)
                                }
                            })
                            .collect()
                    })
                    .collect()
            } else {
                (0..p2.codebook_size)
                    .map(|_| (0..p2.codebook_dim).map(|_| g.value()).collect())
                    .collect()
            };
            codebook = Some(Codebook { rows });
            let ident = g.identity;
            phase2_kernels = (0..p2.kernels)
                .map(|_| g.kernel(p2.kernel_h, p2.kernel_w, p2.codebook_dim, ident))
                .collect();
            let c = p2.kernels;
            if let Some(dec) = &cfg.decoder {
                for blk in &dec.block {
                    match blk.kind.as_str() {
                        "resnet" => {
                            let ident = g.identity;
                            let conv1 = (0..c).map(|_| g.kernel(1, 1, c, ident)).collect();
                            let conv2 = (0..c).map(|_| g.kernel(1, 1, c, ident)).collect();
                            decoder.push(DecoderBlock::ResNet { conv1, conv2 });
                        }
                        "attention" => {
                            let (w_q, w_k, w_v) = if g.identity {
                                (g.zero_matrix(c), g.zero_matrix(c), g.identity_matrix(c))
                            } else {
                                (g.matrix(c, c), g.matrix(c, c), g.matrix(c, c))
                            };
                            decoder.push(DecoderBlock::Attention { w_q, w_k, w_v });
                        }
                        "upsample" => {
                            let ident = g.identity;
                            let kernels = (0..c)
                                .map(|_| g.kernel(blk.kernel_h, blk.kernel_w, c, ident))
                                .collect();
                            decoder.push(DecoderBlock::UpSample {
                                target: blk.target.unwrap(),
                                kernels,
                            });
                        }
                        _ => unreachable!("validated"),
                    }
                    let _ = &mut c;
                }
            }
        }
        Ok(ModelParams {
            p,
            layers,
            codebook,
            phase2_kernels,
            decoder,
        })
    }
}
