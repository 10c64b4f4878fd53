//! Gradient machinery and the two training stages: greedy layer-wise
//! pretraining of denoising autoencoder pairs, then whole-network
//! fine-tuning.
//!
//! The canonical objectives are defined over a full sample set:
//!
//! * pretraining (per layer): Σᵢ ‖xᵢ − x̂ᵢ‖² + λ(‖W‖²F + ‖W′‖²F) + β·φ(μ‖μ̂),
//!   where x̂ᵢ decodes the encoding of the corrupted input and μ̂ⱼ is the mean
//!   activation of hidden unit j over the set;
//! * fine-tuning (whole net): Σᵢ ‖xᵢ − x̂ᵢ‖² + λ_F Σₗ (‖Wₗ‖²F + ‖W′ₗ‖²F)
//!   with clean inputs and no sparsity term.
//!
//! `dae_gradient` / `deep_gradient` compute the exact analytic gradients of
//! those objectives; the SGD loops split the same gradients into mini-batch
//! contributions (weight decay and sparsity scaled by batch fraction) and
//! normalize each update by batch size so the learning rate is per-sample.

use crate::error::{Error, Result};
use crate::ingest::PatchBatch;
use crate::linalg::{matmul, matmul_transa, matmul_transb, Matrix, Rng, Vector};
use crate::sdae::{corrupt_rows, sigmoid, LayerParams, SdaeConfig, SdaeModel};

/// Gradient of the objective with respect to one layer's parameters.
#[derive(Debug, Clone)]
pub struct LayerGrad {
    pub w: Matrix,
    pub b: Vector,
}

/// One pretrained encoder/decoder pair plus its per-epoch objective.
#[derive(Debug, Clone)]
pub struct PretrainedLayer {
    pub encoder: LayerParams,
    pub decoder: LayerParams,
    /// Objective before training and after each epoch (length epochs+1),
    /// always evaluated on the full set with a fixed corruption draw.
    pub loss_trace: Vec<f64>,
}

/// Fully trained SDAE plus the loss traces of both training stages.
#[derive(Debug, Clone)]
pub struct TrainedSdae {
    pub model: SdaeModel,
    pub pretrain_traces: Vec<Vec<f64>>,
    pub finetune_trace: Vec<f64>,
}

/// Forward through one layer for a batch of row-samples.
pub(crate) fn layer_forward(layer: &LayerParams, acts: &Matrix) -> Matrix {
    let mut z = matmul_transb(acts, &layer.w).expect("layer shapes are validated upstream");
    for r in 0..z.rows() {
        let row = z.row_mut(r);
        for (c, v) in row.iter_mut().enumerate() {
            *v = sigmoid(*v + layer.b.get(c));
        }
    }
    z
}

fn forward_all(layers: &[LayerParams], input: &Matrix) -> Vec<Matrix> {
    let mut acts = Vec::with_capacity(layers.len());
    let mut cur = input;
    for layer in layers {
        let next = layer_forward(layer, cur);
        acts.push(next);
        cur = acts.last().unwrap();
    }
    acts
}

fn col_sums(m: &Matrix) -> Vector {
    let mut out = Vector::zeros(m.cols());
    for r in 0..m.rows() {
        for (c, v) in m.row(r).iter().enumerate() {
            out.set(c, out.get(c) + v);
        }
    }
    out
}

fn gather_rows(m: &Matrix, idx: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(idx.len(), m.cols());
    for (r, &i) in idx.iter().enumerate() {
        out.row_mut(r).copy_from_slice(m.row(i));
    }
    out
}

fn sum_sq_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

const MU_HAT_CLAMP: f64 = 1e-12;

/// KL-form sparsity penalty φ(μ‖μ̂): non-negative, zero exactly when every
/// μ̂ⱼ equals the target μ. Its gradient matches the cross-entropy form.
pub fn kl_sparsity(target: f64, mu_hat: &[f64]) -> f64 {
    mu_hat
        .iter()
        .map(|&m| {
            let m = m.clamp(MU_HAT_CLAMP, 1.0 - MU_HAT_CLAMP);
            target * (target / m).ln() + (1.0 - target) * ((1.0 - target) / (1.0 - m)).ln()
        })
        .sum()
}

fn sparsity_psi(target: f64, mu_hat: &[f64]) -> Vec<f64> {
    mu_hat
        .iter()
        .map(|&m| {
            let m = m.clamp(MU_HAT_CLAMP, 1.0 - MU_HAT_CLAMP);
            -target / m + (1.0 - target) / (1.0 - m)
        })
        .collect()
}

/// Backprop through a stack of sigmoid layers for the squared-error loss
/// against `target`. `weight_decay` is the effective Frobenius coefficient
/// for this call; `psi_scaled`, when present, is added to dJ/dA of the first
/// layer's activations (the sparsity path).
fn backward_net(
    layers: &[LayerParams],
    input: &Matrix,
    target: &Matrix,
    acts: &[Matrix],
    weight_decay: f64,
    psi_scaled: Option<&[f64]>,
) -> Vec<LayerGrad> {
    let n_layers = layers.len();
    let last = &acts[n_layers - 1];

    // dJ/dZ of the output layer.
    let mut delta = Matrix::zeros(last.rows(), last.cols());
    for r in 0..last.rows() {
        let a_row = last.row(r);
        let t_row = target.row(r);
        let d_row = delta.row_mut(r);
        for c in 0..a_row.len() {
            let a = a_row[c];
            d_row[c] = 2.0 * (a - t_row[c]) * a * (1.0 - a);
        }
    }

    let mut grads: Vec<Option<LayerGrad>> = (0..n_layers).map(|_| None).collect();
    for l in (0..n_layers).rev() {
        let a_prev = if l == 0 { input } else { &acts[l - 1] };
        let mut gw = matmul_transa(&delta, a_prev).expect("shapes consistent");
        if weight_decay != 0.0 {
            gw.sub_scaled_in_place(&layers[l].w, -2.0 * weight_decay);
        }
        let gb = col_sums(&delta);
        grads[l] = Some(LayerGrad { w: gw, b: gb });

        if l > 0 {
            let mut da = matmul(&delta, &layers[l].w).expect("shapes consistent");
            if l == 1 {
                if let Some(psi) = psi_scaled {
                    for r in 0..da.rows() {
                        for (c, v) in da.row_mut(r).iter_mut().enumerate() {
                            *v += psi[c];
                        }
                    }
                }
            }
            let a = &acts[l - 1];
            for r in 0..da.rows() {
                let a_row = a.row(r);
                for (c, v) in da.row_mut(r).iter_mut().enumerate() {
                    *v *= a_row[c] * (1.0 - a_row[c]);
                }
            }
            delta = da;
        }
    }
    grads.into_iter().map(|g| g.unwrap()).collect()
}

/// Pretraining objective of a single denoising autoencoder pair over a full
/// sample set, with the corruption passed in explicitly so the value is
/// deterministic.
pub fn dae_objective(
    encoder: &LayerParams,
    decoder: &LayerParams,
    clean: &Matrix,
    corrupted: &Matrix,
    lambda: f64,
    sparsity_weight: f64,
    sparsity_target: f64,
) -> f64 {
    let hidden = layer_forward(encoder, corrupted);
    let recon = layer_forward(decoder, &hidden);
    let mut loss = sum_sq_diff(clean, &recon);
    loss += lambda * (encoder.w.frobenius_sq() + decoder.w.frobenius_sq());
    if sparsity_weight != 0.0 {
        loss += sparsity_weight * kl_sparsity(sparsity_target, &hidden.col_means());
    }
    loss
}

/// Exact analytic gradient of [`dae_objective`] (including the μ̂ dependency
/// of the sparsity term). Returns (objective, encoder grad, decoder grad).
pub fn dae_gradient(
    encoder: &LayerParams,
    decoder: &LayerParams,
    clean: &Matrix,
    corrupted: &Matrix,
    lambda: f64,
    sparsity_weight: f64,
    sparsity_target: f64,
) -> (f64, LayerGrad, LayerGrad) {
    let n = clean.rows();
    let layers = [encoder.clone(), decoder.clone()];
    let acts = forward_all(&layers, corrupted);
    let mu_hat = acts[0].col_means();

    let mut loss = sum_sq_diff(clean, &acts[1]);
    loss += lambda * (encoder.w.frobenius_sq() + decoder.w.frobenius_sq());
    let psi_scaled: Option<Vec<f64>> = if sparsity_weight != 0.0 {
        loss += sparsity_weight * kl_sparsity(sparsity_target, &mu_hat);
        let scale = sparsity_weight / n as f64;
        Some(
            sparsity_psi(sparsity_target, &mu_hat)
                .into_iter()
                .map(|p| p * scale)
                .collect(),
        )
    } else {
        None
    };

    let mut grads = backward_net(
        &layers,
        corrupted,
        clean,
        &acts,
        lambda,
        psi_scaled.as_deref(),
    );
    let gd = grads.pop().unwrap();
    let ge = grads.pop().unwrap();
    (loss, ge, gd)
}

/// Fine-tuning objective over the whole encoder+decoder stack with clean
/// inputs: reconstruction plus Frobenius penalties, no sparsity.
pub fn deep_objective(layers: &[LayerParams], data: &Matrix, lambda_fine: f64) -> f64 {
    let acts = forward_all(layers, data);
    let mut loss = sum_sq_diff(data, acts.last().unwrap());
    loss += lambda_fine * layers.iter().map(|l| l.w.frobenius_sq()).sum::<f64>();
    loss
}

/// Exact analytic gradient of [`deep_objective`].
pub fn deep_gradient(layers: &[LayerParams], data: &Matrix, lambda_fine: f64) -> (f64, Vec<LayerGrad>) {
    let acts = forward_all(layers, data);
    let mut loss = sum_sq_diff(data, acts.last().unwrap());
    loss += lambda_fine * layers.iter().map(|l| l.w.frobenius_sq()).sum::<f64>();
    let grads = backward_net(layers, data, data, &acts, lambda_fine, None);
    (loss, grads)
}

struct Momentum {
    vel: Vec<LayerGrad>,
}

impl Momentum {
    fn new(layers: &[LayerParams]) -> Momentum {
        Momentum {
            vel: layers
                .iter()
                .map(|l| LayerGrad {
                    w: Matrix::zeros(l.w.rows(), l.w.cols()),
                    b: Vector::zeros(l.b.len()),
                })
                .collect(),
        }
    }

    /// v ← m·v − (lr/batch)·g;  θ ← θ + v
    fn step(&mut self, layers: &mut [LayerParams], grads: &[LayerGrad], lr: f64, momentum: f64, batch_len: usize) {
        let scale = lr / batch_len as f64;
        for ((layer, grad), vel) in layers.iter_mut().zip(grads).zip(&mut self.vel) {
            for (v, g) in vel.w.data_mut().iter_mut().zip(grad.w.data()) {
                *v = momentum * *v - scale * g;
            }
            for (p, v) in layer.w.data_mut().iter_mut().zip(vel.w.data()) {
                *p += v;
            }
            for (v, g) in vel.b.data_mut().iter_mut().zip(grad.b.data()) {
                *v = momentum * *v - scale * g;
            }
            for (p, v) in layer.b.data_mut().iter_mut().zip(vel.b.data()) {
                *p += v;
            }
        }
    }
}

fn check_finite(loss: f64, stage: &str, epoch: usize) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::divergence(format!(
            "{stage} objective became non-finite at epoch {epoch}"
        )))
    }
}

/// Trains one denoising autoencoder pair on `data` (one sample per row) by
/// mini-batch SGD with momentum. The recorded loss trace holds the full-set
/// objective before training and after every epoch, evaluated with a fixed
/// corruption draw so epochs are comparable.
pub fn pretrain_layer(
    data: &Matrix,
    out_dim: usize,
    cfg: &SdaeConfig,
    rng: &mut Rng,
) -> Result<PretrainedLayer> {
    cfg.validate()?;
    if out_dim == 0 {
        return Err(Error::config("out_dim must be >= 1".to_string()));
    }
    let n = data.rows();
    if n < cfg.batch_size {
        return Err(Error::config(format!(
            "{n} samples is fewer than batch_size {}",
            cfg.batch_size
        )));
    }
    let in_dim = data.cols();
    let mut init_rng = rng.fork(1);
    let mut noise_rng = rng.fork(2);
    let mut shuffle_rng = rng.fork(3);
    let mut eval_rng = rng.fork(4);

    let mut net = vec![
        LayerParams::init(in_dim, out_dim, &mut init_rng),
        LayerParams::init(out_dim, in_dim, &mut init_rng),
    ];
    let eval_corrupted = corrupt_rows(data, cfg.noise_variance, &mut eval_rng);
    let objective = |net: &[LayerParams]| {
        dae_objective(
            &net[0],
            &net[1],
            data,
            &eval_corrupted,
            cfg.lambda_pre,
            cfg.sparsity_weight,
            cfg.sparsity_target,
        )
    };

    let mut trace = vec![objective(&net)];
    let mut momentum = Momentum::new(&net);
    let mut indices: Vec<usize> = (0..n).collect();

    for epoch in 0..cfg.pretrain_epochs {
        shuffle_rng.shuffle(&mut indices);
        // Running mean activation across the epoch; each batch's sparsity
        // gradient uses the estimate including that batch.
        let mut mu_run = vec![0.0f64; out_dim];
        let mut seen = 0usize;
        for chunk in indices.chunks(cfg.batch_size) {
            let xb = gather_rows(data, chunk);
            let xtb = corrupt_rows(&xb, cfg.noise_variance, &mut noise_rng);
            let acts = forward_all(&net, &xtb);
            let bn = chunk.len();

            let psi_scaled: Option<Vec<f64>> = if cfg.sparsity_weight != 0.0 {
                let batch_mu = acts[0].col_means();
                let total = (seen + bn) as f64;
                for (m, bm) in mu_run.iter_mut().zip(&batch_mu) {
                    *m = (*m * seen as f64 + bm * bn as f64) / total;
                }
                seen += bn;
                let scale = cfg.sparsity_weight / n as f64;
                Some(
                    sparsity_psi(cfg.sparsity_target, &mu_run)
                        .into_iter()
                        .map(|p| p * scale)
                        .collect(),
                )
            } else {
                None
            };

            let wd_eff = cfg.lambda_pre * bn as f64 / n as f64;
            let grads = backward_net(&net, &xtb, &xb, &acts, wd_eff, psi_scaled.as_deref());
            momentum.step(&mut net, &grads, cfg.learning_rate, cfg.momentum, bn);
        }
        let loss = objective(&net);
        check_finite(loss, "pretraining", epoch)?;
        trace.push(loss);
    }

    let decoder = net.pop().unwrap();
    let encoder = net.pop().unwrap();
    Ok(PretrainedLayer {
        encoder,
        decoder,
        loss_trace: trace,
    })
}

/// Greedy layer-wise pretraining followed by whole-network fine-tuning.
///
/// Each layer is pretrained on the uncorrupted forward activations of the
/// previous one; the decoder stack is initialized as the mirror of the
/// pretrained decoders; fine-tuning then runs clean-input backprop on the
/// full network.
pub fn stack_and_finetune(batch: &PatchBatch, cfg: &SdaeConfig, rng: &mut Rng) -> Result<TrainedSdae> {
    cfg.validate()?;
    if cfg.layer_dims[0] != batch.dim {
        return Err(Error::shape(format!(
            "layer_dims[0] = {} does not match batch dim {}",
            cfg.layer_dims[0], batch.dim
        )));
    }
    let n = batch.vectors.rows();
    if n < cfg.batch_size {
        return Err(Error::config(format!(
            "{n} samples is fewer than batch_size {}",
            cfg.batch_size
        )));
    }

    let dims = &cfg.layer_dims;
    let mut acts = batch.vectors.clone();
    let mut encoder = Vec::with_capacity(dims.len() - 1);
    let mut decoder_rev = Vec::with_capacity(dims.len() - 1);
    let mut pretrain_traces = Vec::with_capacity(dims.len() - 1);
    for l in 1..dims.len() {
        let mut layer_rng = rng.fork(l as u64);
        let pre = pretrain_layer(&acts, dims[l], cfg, &mut layer_rng)?;
        acts = layer_forward(&pre.encoder, &acts);
        encoder.push(pre.encoder);
        decoder_rev.push(pre.decoder);
        pretrain_traces.push(pre.loss_trace);
    }
    let decoder: Vec<LayerParams> = decoder_rev.into_iter().rev().collect();

    let mut net: Vec<LayerParams> = encoder.into_iter().chain(decoder).collect();
    let data = &batch.vectors;
    let mut finetune_trace = vec![deep_objective(&net, data, cfg.lambda_fine)];
    let mut momentum = Momentum::new(&net);
    let mut shuffle_rng = rng.fork(0x5f17);
    let mut indices: Vec<usize> = (0..n).collect();

    for epoch in 0..cfg.finetune_epochs {
        shuffle_rng.shuffle(&mut indices);
        for chunk in indices.chunks(cfg.batch_size) {
            let xb = gather_rows(data, chunk);
            let acts = forward_all(&net, &xb);
            let wd_eff = cfg.lambda_fine * chunk.len() as f64 / n as f64;
            let grads = backward_net(&net, &xb, &xb, &acts, wd_eff, None);
            momentum.step(&mut net, &grads, cfg.learning_rate, cfg.momentum, chunk.len());
        }
        let loss = deep_objective(&net, data, cfg.lambda_fine);
        check_finite(loss, "fine-tuning", epoch)?;
        finetune_trace.push(loss);
    }

    let n_enc = dims.len() - 1;
    let decoder: Vec<LayerParams> = net.split_off(n_enc);
    let encoder = net;
    let model = SdaeModel {
        kind: batch.kind,
        encoder,
        decoder,
        config: cfg.clone(),
        input_dim: dims[0],
    };
    model.validate()?;
    Ok(TrainedSdae {
        model,
        pretrain_traces,
        finetune_trace,
    })
}
