//! Stacked denoising autoencoders: greedy layer-wise pretraining with a
//! sparsity penalty, whole-network fine-tuning, and bottleneck feature
//! extraction for the appearance, motion and joint pipelines.

mod train;

pub use train::{
    dae_gradient, dae_objective, deep_gradient, deep_objective, kl_sparsity, pretrain_layer,
    stack_and_finetune, LayerGrad, PretrainedLayer, TrainedSdae,
};

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{MotionBounds, PatchBatch, PipelineKind};
use crate::linalg::{Matrix, Rng, Vector};

/// Largest representable sigmoid output strictly below 1; keeps bottleneck
/// features inside the open interval (0, 1) even under saturation.
const SIGMOID_MAX: f64 = 1.0 - 1e-16;
const SIGMOID_MIN: f64 = 1e-300;

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    (1.0 / (1.0 + (-z).exp())).clamp(SIGMOID_MIN, SIGMOID_MAX)
}

/// One affine layer: `W` is out_dim x in_dim, `b` has out_dim entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub w: Matrix,
    pub b: Vector,
}

impl LayerParams {
    pub fn in_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.rows()
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(in_dim: usize, out_dim: usize, rng: &mut Rng) -> LayerParams {
        let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let mut w = Matrix::zeros(out_dim, in_dim);
        for v in w.data_mut() {
            *v = rng.uniform(-bound, bound);
        }
        LayerParams {
            w,
            b: Vector::zeros(out_dim),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.w.validate()?;
        self.b.validate()?;
        if self.b.len() != self.w.rows() {
            return Err(Error::shape(format!(
                "bias length {} does not match weight rows {}",
                self.b.len(),
                self.w.rows()
            )));
        }
        Ok(())
    }
}

/// Hyperparameters for one SDAE pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdaeConfig {
    /// Input dimension followed by encoder widths down to the bottleneck.
    pub layer_dims: Vec<usize>,
    pub noise_variance: f64,
    /// Target mean activation μ for the sparsity penalty.
    pub sparsity_target: f64,
    pub sparsity_weight: f64,
    /// Frobenius weight penalty during pretraining.
    pub lambda_pre: f64,
    /// Frobenius weight penalty during fine-tuning.
    pub lambda_fine: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub pretrain_epochs: usize,
    pub finetune_epochs: usize,
    pub seed: u64,
}

impl SdaeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layer_dims.len() < 2 {
            return Err(Error::config(
                "layer_dims needs the input dim plus at least one encoder width".to_string(),
            ));
        }
        if self.layer_dims.contains(&0) {
            return Err(Error::config("layer_dims entries must be >= 1".to_string()));
        }
        // After the (possibly over-complete) first encoder layer, widths
        // must strictly decrease toward the bottleneck.
        for w in self.layer_dims[1..].windows(2) {
            if w[1] >= w[0] {
                return Err(Error::config(format!(
                    "encoder widths must strictly decrease after the first layer: {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::config("learning_rate must be > 0".to_string()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config("momentum must be in [0, 1)".to_string()));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be >= 1".to_string()));
        }
        if self.noise_variance < 0.0 {
            return Err(Error::config("noise_variance must be >= 0".to_string()));
        }
        if !(0.0 < self.sparsity_target && self.sparsity_target < 1.0) {
            return Err(Error::config("sparsity_target must be in (0, 1)".to_string()));
        }
        if self.sparsity_weight < 0.0 || self.lambda_pre < 0.0 || self.lambda_fine < 0.0 {
            return Err(Error::config("penalty weights must be >= 0".to_string()));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn bottleneck_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }
}

/// Trained (or freshly initialized) SDAE for one pipeline. The decoder
/// mirrors the encoder: decoder layer `l` has the transposed shape of
/// encoder layer `L - l` (bottleneck counted once).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdaeModel {
    pub kind: PipelineKind,
    pub encoder: Vec<LayerParams>,
    pub decoder: Vec<LayerParams>,
    pub config: SdaeConfig,
    pub input_dim: usize,
}

impl SdaeModel {
    /// Randomly initialized model without any training.
    pub fn init(kind: PipelineKind, config: SdaeConfig, rng: &mut Rng) -> Result<SdaeModel> {
        config.validate()?;
        let dims = &config.layer_dims;
        let mut encoder = Vec::with_capacity(dims.len() - 1);
        for l in 1..dims.len() {
            encoder.push(LayerParams::init(dims[l - 1], dims[l], rng));
        }
        let mut decoder = Vec::with_capacity(dims.len() - 1);
        for l in (1..dims.len()).rev() {
            decoder.push(LayerParams::init(dims[l], dims[l - 1], rng));
        }
        Ok(SdaeModel {
            kind,
            encoder,
            decoder,
            input_dim: config.input_dim(),
            config,
        })
    }

    pub fn bottleneck_dim(&self) -> usize {
        self.config.bottleneck_dim()
    }

    /// Uncorrupted forward pass through the encoder only, one sample per row.
    pub fn encode_rows(&self, rows: &Matrix) -> Result<Matrix> {
        if rows.cols() != self.input_dim {
            return Err(Error::shape(format!(
                "input dim {} does not match model input dim {}",
                rows.cols(),
                self.input_dim
            )));
        }
        let mut acts = rows.clone();
        for layer in &self.encoder {
            acts = train::layer_forward(layer, &acts);
        }
        Ok(acts)
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let dims = &self.config.layer_dims;
        let n_layers = dims.len() - 1;
        if self.encoder.len() != n_layers || self.decoder.len() != n_layers {
            return Err(Error::shape("layer count does not match config".to_string()));
        }
        for (l, layer) in self.encoder.iter().enumerate() {
            layer.validate()?;
            if layer.in_dim() != dims[l] || layer.out_dim() != dims[l + 1] {
                return Err(Error::shape(format!("encoder layer {l} has wrong shape")));
            }
        }
        for (l, layer) in self.decoder.iter().enumerate() {
            layer.validate()?;
            // Mirror of encoder layer n_layers - 1 - l.
            let enc = &self.encoder[n_layers - 1 - l];
            if layer.in_dim() != enc.out_dim() || layer.out_dim() != enc.in_dim() {
                return Err(Error::shape(format!(
                    "decoder layer {l} does not mirror its encoder layer"
                )));
            }
        }
        if self.input_dim != dims[0] {
            return Err(Error::shape("input_dim does not match layer_dims[0]".to_string()));
        }
        Ok(())
    }
}

/// Bottleneck representation of one patch.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub kind: PipelineKind,
    pub values: Vector,
}

/// Element-wise logistic sigmoid of the affine map `W x + b`.
pub fn encode_layer(params: &LayerParams, x: &Vector) -> Result<Vector> {
    if x.len() != params.in_dim() {
        return Err(Error::shape(format!(
            "input length {} does not match layer input dim {}",
            x.len(),
            params.in_dim()
        )));
    }
    let mut out = Vector::zeros(params.out_dim());
    for r in 0..params.out_dim() {
        let z: f64 = params
            .w
            .row(r)
            .iter()
            .zip(x.data())
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + params.b.get(r);
        out.set(r, sigmoid(z));
    }
    Ok(out)
}

/// Additive zero-mean Gaussian corruption. The result is deliberately not
/// clipped back to [0, 1]; reconstruction always targets the clean input.
pub fn corrupt(x: &Vector, noise_variance: f64, rng: &mut Rng) -> Result<Vector> {
    let noise = crate::linalg::gaussian_sample(rng, x.len(), 0.0, noise_variance)?;
    let data = x
        .data()
        .iter()
        .zip(noise.data())
        .map(|(a, b)| a + b)
        .collect();
    Ok(Vector::from_raw(data))
}

pub(crate) fn corrupt_rows(rows: &Matrix, noise_variance: f64, rng: &mut Rng) -> Matrix {
    if noise_variance == 0.0 {
        return rows.clone();
    }
    let sd = noise_variance.sqrt();
    let mut out = rows.clone();
    for v in out.data_mut() {
        *v += sd * rng.normal();
    }
    out
}

/// Uncorrupted encoder forward pass stopping at the bottleneck.
pub fn extract_features(model: &SdaeModel, batch: &PatchBatch) -> Result<Vec<FeatureVector>> {
    if batch.kind != model.kind {
        return Err(Error::domain(format!(
            "batch kind {:?} does not match model kind {:?}",
            batch.kind, model.kind
        )));
    }
    if batch.dim != model.input_dim {
        return Err(Error::shape(format!(
            "batch dim {} does not match model input dim {}",
            batch.dim, model.input_dim
        )));
    }
    let acts = model.encode_rows(&batch.vectors)?;
    let mut out = Vec::with_capacity(batch.len());
    for i in 0..acts.rows() {
        out.push(FeatureVector {
            kind: model.kind,
            values: Vector::from_raw(acts.row(i).to_vec()),
        });
    }
    Ok(out)
}

/// On-disk container: the model plus the motion normalization bounds the
/// ingest stage recorded (motion and joint pipelines only).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdaeModelFile {
    pub model: SdaeModel,
    pub motion_bounds: Option<MotionBounds>,
}

pub fn save_model(path: &Path, model: &SdaeModel, motion_bounds: Option<MotionBounds>) -> Result<()> {
    let file = SdaeModelFile {
        model: model.clone(),
        motion_bounds,
    };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::format(format!("serialize model: {e}")))?;
    fs::write(path, text)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<(SdaeModel, Option<MotionBounds>)> {
    let text = fs::read_to_string(path)?;
    let file: SdaeModelFile = serde_json::from_str(&text)
        .map_err(|e| Error::format(format!("{}: {e}", path.display())))?;
    file.model.validate()?;
    Ok((file.model, file.motion_bounds))
}
