//! Reference implementation of the three-phase autoregressive image
//! pipeline in exact p-bit float semantics: the coarse-to-fine token
//! transformer, codebook-based feature-map reconstruction, and the
//! convolution/attention/upsample decoder.
//!
//! Everything is written once, generic over [`backend::FpBackend`]; the
//! direct backend makes this crate the ground-truth oracle, and the
//! compiler crate reuses the identical operation sequence to build
//! circuits.

pub mod backend;
mod config;
mod error;
mod model;
pub mod ops;
mod types;

pub use backend::{FpBackend, FpDirect, ModelInputs, TraceBackend, TraceOp};
pub use config::{
    DecoderBlockCfg, DecoderCfg, ModelConfig, ModelParams, Phase2Cfg, TransformerCfg, WeightsCfg,
    MAX_CODEBOOK, MAX_DIM, MAX_LAYERS, MAX_TOKENS,
};
pub use error::{ModelError, ModelResult};
pub use model::{
    input_layout, run_decoder, run_model, run_reconstruction, run_transformer, sample_inputs,
    upscale_schedule, ModelOutput,
};
pub use ops::{bicubic_weight, fold_qk};
pub use types::{
    Codebook, ConvKernel, DecoderBlock, FeatureMap, LayerParams, TokenSequence, MAX_MAP_ENTRIES,
};

use tcvar_fp::FpNum;

/// Direct-evaluation wrappers over plain numbers (the oracle surface).
pub mod direct {
    pub use crate::ops::direct::*;
    use super::*;

    /// Full reference run from concrete inputs.
    pub fn run_model_fp(
        cfg: &ModelConfig,
        params: &ModelParams,
        inputs: ModelInputs,
    ) -> ModelResult<ModelOutput<FpNum>> {
        let mut b = FpDirect::new(cfg.precision_checked()?, inputs);
        run_model(&mut b, cfg, params)
    }

    /// Phase 1 only.
    pub fn var_transformer_fp(
        cfg: &ModelConfig,
        params: &ModelParams,
        x0: Vec<FpNum>,
    ) -> ModelResult<TokenSequence<FpNum>> {
        let mut b = FpDirect::new(
            cfg.precision_checked()?,
            ModelInputs {
                scalars: x0,
                tokens: vec![],
            },
        );
        run_transformer(&mut b, cfg, params)
    }
}
