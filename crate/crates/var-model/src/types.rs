//! Model data shapes.

use crate::error::{ModelError, ModelResult};
use tcvar_fp::FpNum;

/// Desk-scale cap on feature-map entries (h * w * c).
pub const MAX_MAP_ENTRIES: usize = 1 << 14;

/// 3-d feature map, row-major with the channel fastest:
/// index (i, j, l) = (i * w + j) * c + l.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMap<T> {
    pub h: usize,
    pub w: usize,
    pub c: usize,
    pub data: Vec<T>,
}

impl<T: Clone> FeatureMap<T> {
    pub fn new(h: usize, w: usize, c: usize, data: Vec<T>) -> ModelResult<Self> {
        if h * w * c != data.len() {
            return Err(ModelError::ShapeMismatch(format!(
                "{h}x{w}x{c} map needs {} entries, got {}",
                h * w * c,
                data.len()
            )));
        }
        if h * w * c > MAX_MAP_ENTRIES || h == 0 || w == 0 || c == 0 {
            return Err(ModelError::ShapeMismatch(format!(
                "map {h}x{w}x{c} outside desk scale"
            )));
        }
        Ok(FeatureMap { h, w, c, data })
    }

    pub fn filled(h: usize, w: usize, c: usize, v: T) -> ModelResult<Self> {
        Self::new(h, w, c, vec![v; h * w * c])
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, l: usize) -> &T {
        &self.data[(i * self.w + j) * self.c + l]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize, l: usize) -> &mut T {
        &mut self.data[(i * self.w + j) * self.c + l]
    }
}

/// Sequence of per-scale token maps flattened to one n x d matrix,
/// n = sum of h_i * w_i over the scales present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence<T> {
    pub shapes: Vec<(usize, usize)>,
    pub rows: Vec<Vec<T>>,
}

impl<T> TokenSequence<T> {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn check(&self) -> ModelResult<()> {
        let want: usize = self.shapes.iter().map(|(h, w)| h * w).sum();
        if want != self.rows.len() {
            return Err(ModelError::ShapeMismatch(format!(
                "token sequence rows {} != sum of scale areas {}",
                self.rows.len(),
                want
            )));
        }
        Ok(())
    }
}

/// VQ codebook: c_vae rows of dimension d_vae.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    pub rows: Vec<Vec<FpNum>>,
}

impl Codebook {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }
}

/// One convolution kernel with its bias.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvKernel {
    /// (h_k, w_k, c) weights.
    pub weights: FeatureMap<FpNum>,
    pub bias: FpNum,
}

/// Per-transformer-layer parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerParams {
    pub w_q: Vec<Vec<FpNum>>,
    pub w_k: Vec<Vec<FpNum>>,
    pub w_v: Vec<Vec<FpNum>>,
    pub mlp_w: Vec<Vec<FpNum>>,
    pub mlp_b: Vec<FpNum>,
    /// layer norm before the MLP (g = LN_out . MLP . LN_in).
    pub ln_in: bool,
    pub ln_out: bool,
}

/// Decoder block kinds, applied in configured order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecoderBlock {
    /// Two dimension-preserving convolutions plus the residual path.
    ResNet {
        conv1: Vec<ConvKernel>,
        conv2: Vec<ConvKernel>,
    },
    /// Flatten to h*w tokens over c channels, one attention layer, reshape.
    Attention {
        w_q: Vec<Vec<FpNum>>,
        w_k: Vec<Vec<FpNum>>,
        w_v: Vec<Vec<FpNum>>,
    },
    /// Bicubic upsample to the target size, then a convolution stack.
    UpSample {
        target: (usize, usize),
        kernels: Vec<ConvKernel>,
    },
}
