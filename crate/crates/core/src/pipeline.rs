//! Orchestration behind the CLI subcommands: dataset synthesis, training the
//! model bundle, scoring a test split, evaluation, and the ν sweep.
//!
//! Every stage derives its randomness by forking one run-seeded generator
//! with fixed stream ids, so re-running any subcommand with the same inputs
//! and seed reproduces its outputs byte for byte.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{FlowMethod, RunConfig};
use crate::detect::{
    decide, load_score_maps, score_sequence, write_frame_scores_csv, write_patch_scores_csv,
    DetectionResult, DetectorModels, ScoreMap,
};
use crate::error::{Error, Result};
use crate::eval::{frame_roc, pixel_roc, write_roc_csv, write_roc_dat};
use crate::fusion::{feature_matrix, learn_weights, FusionWeights, ScoreCalibration};
use crate::ingest::{
    appearance_patches_for_frame, extract_appearance_patches_multi, extract_motion_patches,
    fuse_early, load_ground_truth, load_sequence, pgm, subsample_batch, BitMask, FlowSequence,
    FrameSequence, GrayFrame, GroundTruth, MotionBounds, PatchBatch, PatchSpec, PipelineKind,
};
use crate::linalg::{Matrix, Rng};
use crate::ocsvm::{median_sigma, score as svm_score, train as svm_train, OcsvmConfig, OcsvmModel};
use crate::optflow::{horn_schunck, load_flo, FlowField};
use crate::sdae::{
    extract_features, load_model, save_model, stack_and_finetune, FeatureVector, SdaeModel,
    TrainedSdae,
};

// Stream ids for forking the run generator; fixed so train and nu-grid see
// identical training data.
const STREAM_APPEARANCE_SAMPLING: u64 = 11;
const STREAM_MOTION_SAMPLING: u64 = 12;
const STREAM_JOINT_SAMPLING: u64 = 13;
const STREAM_SDAE_BASE: u64 = 21;
const STREAM_SIGMA_BASE: u64 = 31;

/// Generates the synthetic dataset configured under `[synth]`.
pub fn run_synth(cfg: &RunConfig) -> Result<()> {
    crate::synth::generate_dataset(cfg)?;
    log::info!(
        "synthesized {} train and {} test clips under {}",
        cfg.dataset.train.len(),
        cfg.dataset.test.len(),
        cfg.dataset.root.display()
    );
    Ok(())
}

fn load_clips(cfg: &RunConfig, ids: &[String]) -> Result<Vec<FrameSequence>> {
    ids.iter()
        .map(|id| load_sequence(&cfg.clip_frames_dir(id)))
        .collect()
}

fn clip_flows(cfg: &RunConfig, seq: &FrameSequence) -> Result<Vec<FlowField>> {
    match cfg.flow.method {
        FlowMethod::Hs => {
            let mut fields = Vec::with_capacity(seq.len() - 1);
            for pair in seq.frames.windows(2) {
                fields.push(horn_schunck(
                    &pair[0],
                    &pair[1],
                    cfg.flow.alpha,
                    cfg.flow.iterations,
                )?);
            }
            Ok(fields)
        }
        FlowMethod::FloDir => {
            let dir = cfg
                .flow
                .flo_dir
                .as_ref()
                .expect("validated")
                .join(&seq.clip_id);
            let mut fields = Vec::with_capacity(seq.len() - 1);
            for t in 0..seq.len() - 1 {
                let path = dir.join(format!("flow_{t:06}.flo"));
                if !path.exists() {
                    return Err(Error::layout(format!(
                        "{}: flow file for pair {t} missing",
                        dir.display()
                    )));
                }
                let field = load_flo(&path)?;
                if field.width != seq.width || field.height != seq.height {
                    return Err(Error::shape(format!(
                        "{}: flow is {}x{}, frames are {}x{}",
                        path.display(),
                        field.width,
                        field.height,
                        seq.width,
                        seq.height
                    )));
                }
                fields.push(field);
            }
            Ok(fields)
        }
    }
}

/// Training patch batches for the three pipelines plus the recorded motion
/// normalization bounds.
pub struct TrainingBatches {
    pub appearance: PatchBatch,
    pub motion: PatchBatch,
    pub joint: PatchBatch,
    pub bounds: MotionBounds,
}

/// Ingest + optical flow + patch extraction over the training split.
pub fn build_training_batches(cfg: &RunConfig, rng: &Rng) -> Result<TrainingBatches> {
    let seqs = load_clips(cfg, &cfg.dataset.train)?;
    let mut flow_clips = Vec::with_capacity(seqs.len());
    for seq in &seqs {
        flow_clips.push(FlowSequence {
            clip_id: seq.clip_id.clone(),
            fields: clip_flows(cfg, seq)?,
        });
    }

    let appearance = extract_appearance_patches_multi(
        &seqs,
        &cfg.appearance_spec(),
        &mut rng.fork(STREAM_APPEARANCE_SAMPLING),
        cfg.patches.appearance.sample_cap,
    )?;

    let motion_spec = cfg.motion_spec();
    let (motion_full, bounds) = extract_motion_patches(&flow_clips, &motion_spec)?;

    // The joint pipeline needs appearance patches on exactly the motion grid
    // (same windows, same frames) for pixel-level early fusion.
    let aligned_spec = PatchSpec {
        scales: vec![cfg.patches.motion.window],
        stride: cfg.patches.motion.stride,
        target_w: cfg.patches.motion.window,
        target_h: cfg.patches.motion.window,
        channels: 1,
    };
    let mut rows = Vec::new();
    let mut origins = Vec::new();
    for (seq, flows) in seqs.iter().zip(&flow_clips) {
        for t in 0..flows.fields.len() {
            let (mut r, mut o) =
                appearance_patches_for_frame(&seq.frames[t], &seq.clip_id, t, &aligned_spec)?;
            rows.append(&mut r);
            origins.append(&mut o);
        }
    }
    let aligned_app =
        PatchBatch::from_rows(PipelineKind::Appearance, aligned_spec.dim(), rows, origins)?;
    let joint_full = fuse_early(&aligned_app, &motion_full)?;

    let motion = subsample_batch(
        motion_full,
        &mut rng.fork(STREAM_MOTION_SAMPLING),
        cfg.patches.motion.sample_cap,
    );
    let joint = subsample_batch(
        joint_full,
        &mut rng.fork(STREAM_JOINT_SAMPLING),
        cfg.patches.motion.sample_cap,
    );

    log::info!(
        "training patches: appearance {}, motion {}, joint {}",
        appearance.len(),
        motion.len(),
        joint.len()
    );
    Ok(TrainingBatches {
        appearance,
        motion,
        joint,
        bounds,
    })
}

fn calibration(scores: &[f64]) -> ScoreCalibration {
    let n = scores.len().max(1) as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    ScoreCalibration {
        mean,
        std: if std > 1e-12 { std } else { 1.0 },
    }
}

fn resolve_sigma(
    section: &crate::config::OcsvmSection,
    features: &[FeatureVector],
    rng: &mut Rng,
) -> f64 {
    match section.sigma {
        Some(s) => s,
        None => median_sigma(features, rng),
    }
}

pub fn bundle_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("bundle")
}

/// Full training run: ingest, flow, three SDAEs, three one-class SVMs,
/// fusion weight learning. Persists the bundle and a run log, and returns
/// the in-memory models.
pub fn run_train(cfg: &RunConfig) -> Result<DetectorModels> {
    cfg.validate()?;
    let rng = Rng::new(cfg.seed);
    let batches = build_training_batches(cfg, &rng)?;

    let sections = [
        (&cfg.sdae.appearance, &batches.appearance),
        (&cfg.sdae.motion, &batches.motion),
        (&cfg.sdae.joint, &batches.joint),
    ];
    let mut trained: Vec<TrainedSdae> = Vec::with_capacity(3);
    for (k, (section, batch)) in sections.into_iter().enumerate() {
        let stream = STREAM_SDAE_BASE + k as u64;
        let sdae_cfg = section.to_config(batch.dim, rng.fork(stream).seed());
        log::info!(
            "training {} SDAE: dims {:?}, {} patches",
            batch.kind.tag(),
            sdae_cfg.layer_dims,
            batch.len()
        );
        let out = stack_and_finetune(batch, &sdae_cfg, &mut rng.fork(stream))?;
        log::info!(
            "{}: fine-tune objective {:.4} -> {:.4}",
            batch.kind.tag(),
            out.finetune_trace.first().unwrap(),
            out.finetune_trace.last().unwrap()
        );
        trained.push(out);
    }

    let svm_sections = [&cfg.ocsvm.appearance, &cfg.ocsvm.motion, &cfg.ocsvm.joint];
    let batches_by_kind = [&batches.appearance, &batches.motion, &batches.joint];
    let mut svms: Vec<OcsvmModel> = Vec::with_capacity(3);
    let mut all_features: Vec<Vec<FeatureVector>> = Vec::with_capacity(3);
    for k in 0..3 {
        let features = extract_features(&trained[k].model, batches_by_kind[k])?;
        let sigma = resolve_sigma(
            svm_sections[k],
            &features,
            &mut rng.fork(STREAM_SIGMA_BASE + k as u64),
        );
        let svm_cfg = OcsvmConfig {
            nu: svm_sections[k].nu,
            rbf_sigma: sigma,
            tolerance: svm_sections[k].tolerance,
            max_passes: svm_sections[k].max_passes,
        };
        log::info!(
            "training {} one-class SVM: nu {}, sigma {:.4}",
            batches_by_kind[k].kind.tag(),
            svm_cfg.nu,
            sigma
        );
        svms.push(svm_train(&features, &svm_cfg)?);
        all_features.push(features);
    }

    // Fusion inputs: feature matrices scaled by 1/sqrt(N) so pipelines with
    // different sample counts contribute comparable per-sample energies.
    let min_bottleneck = trained.iter().map(|t| t.model.bottleneck_dim()).min().unwrap();
    if cfg.fusion.subspace_dim > min_bottleneck {
        return Err(Error::config(format!(
            "fusion.subspace_dim {} exceeds the smallest bottleneck dim {}",
            cfg.fusion.subspace_dim, min_bottleneck
        )));
    }
    let mut mats: Vec<Matrix> = Vec::with_capacity(3);
    for features in &all_features {
        let mut m = feature_matrix(features)?;
        m.scale_in_place(1.0 / (features.len() as f64).sqrt());
        mats.push(m);
    }
    let mut fusion = learn_weights(
        &[mats[0].clone(), mats[1].clone(), mats[2].clone()],
        cfg.fusion.subspace_dim,
        cfg.fusion.lambda_s,
    )?;
    if cfg.fusion.standardize {
        let mut cals = Vec::with_capacity(3);
        for k in 0..3 {
            let scores: Vec<f64> = all_features[k]
                .iter()
                .map(|f| svm_score(&svms[k], f))
                .collect::<Result<_>>()?;
            cals.push(calibration(&scores));
        }
        fusion.calibration = Some([cals[0], cals[1], cals[2]]);
    }
    log::info!(
        "learned fusion weights [{:.3}, {:.3}, {:.3}]",
        fusion.alpha.get(0),
        fusion.alpha.get(1),
        fusion.alpha.get(2)
    );

    let models = DetectorModels {
        sdae: [
            trained[0].model.clone(),
            trained[1].model.clone(),
            trained[2].model.clone(),
        ],
        svm: [svms[0].clone(), svms[1].clone(), svms[2].clone()],
        fusion,
        motion_bounds: batches.bounds,
    };
    models.validate()?;
    save_bundle(cfg, &models, &trained)?;
    Ok(models)
}

fn save_bundle(cfg: &RunConfig, models: &DetectorModels, trained: &[TrainedSdae]) -> Result<()> {
    let dir = bundle_dir(cfg);
    fs::create_dir_all(&dir)?;
    let tags = ["appearance", "motion", "joint"];
    for k in 0..3 {
        // Motion normalization travels with the models that consume flow.
        let bounds = if k == 0 { None } else { Some(models.motion_bounds) };
        save_model(&dir.join(format!("{}.sdae.json", tags[k])), &models.sdae[k], bounds)?;
        let svm_json = serde_json::to_string_pretty(&models.svm[k])
            .map_err(|e| Error::format(format!("serialize svm: {e}")))?;
        fs::write(dir.join(format!("{}.ocsvm.json", tags[k])), svm_json)?;
    }
    let fusion_json = serde_json::to_string_pretty(&models.fusion)
        .map_err(|e| Error::format(format!("serialize fusion: {e}")))?;
    fs::write(dir.join("fusion.json"), fusion_json)?;

    fs::write(cfg.output_dir.join("run_config.toml"), cfg.to_toml()?)?;
    let mut log_file = fs::File::create(cfg.output_dir.join("train_log.txt"))?;
    writeln!(log_file, "# resolved configuration\n{}", cfg.to_toml()?)?;
    for (k, t) in trained.iter().enumerate() {
        writeln!(log_file, "[{} sdae] layer_dims = {:?}", tags[k], t.model.config.layer_dims)?;
        for (l, trace) in t.pretrain_traces.iter().enumerate() {
            writeln!(log_file, "[{} pretrain layer {l}] objective = {:?}", tags[k], trace)?;
        }
        writeln!(log_file, "[{} finetune] objective = {:?}", tags[k], t.finetune_trace)?;
        writeln!(
            log_file,
            "[{} ocsvm] nu = {}, sigma = {}, rho = {}, support vectors = {}",
            tags[k],
            models.svm[k].config.nu,
            models.svm[k].config.rbf_sigma,
            models.svm[k].rho,
            models.svm[k].n_support_vectors()
        )?;
    }
    writeln!(log_file, "[fusion] alpha = {:?}", models.fusion.alpha.data())?;
    if let Some(cal) = &models.fusion.calibration {
        for (k, c) in cal.iter().enumerate() {
            writeln!(log_file, "[fusion] {} score mean = {}, std = {}", tags[k], c.mean, c.std)?;
        }
    }
    Ok(())
}

/// Loads a bundle saved by [`run_train`].
pub fn load_bundle(cfg: &RunConfig) -> Result<DetectorModels> {
    let dir = bundle_dir(cfg);
    let tags = ["appearance", "motion", "joint"];
    let mut sdae: Vec<SdaeModel> = Vec::with_capacity(3);
    let mut bounds: Option<MotionBounds> = None;
    for tag in tags {
        let (model, b) = load_model(&dir.join(format!("{tag}.sdae.json")))?;
        if b.is_some() {
            bounds = b;
        }
        sdae.push(model);
    }
    let bounds = bounds.ok_or_else(|| {
        Error::format(format!(
            "{}: no model file carries motion normalization bounds",
            dir.display()
        ))
    })?;
    let mut svm: Vec<OcsvmModel> = Vec::with_capacity(3);
    for tag in tags {
        let path = dir.join(format!("{tag}.ocsvm.json"));
        let text = fs::read_to_string(&path)?;
        svm.push(
            serde_json::from_str(&text)
                .map_err(|e| Error::format(format!("{}: {e}", path.display())))?,
        );
    }
    let fusion_path = dir.join("fusion.json");
    let fusion: FusionWeights = serde_json::from_str(&fs::read_to_string(&fusion_path)?)
        .map_err(|e| Error::format(format!("{}: {e}", fusion_path.display())))?;
    let models = DetectorModels {
        sdae: [sdae.remove(0), sdae.remove(0), sdae.remove(0)],
        svm: [svm.remove(0), svm.remove(0), svm.remove(0)],
        fusion,
        motion_bounds: bounds,
    };
    models.validate()?;
    Ok(models)
}

fn scores_dir(cfg: &RunConfig, clip_id: &str) -> PathBuf {
    cfg.output_dir.join("scores").join(clip_id)
}

/// Scores every test clip with the persisted bundle and writes per-clip
/// CSVs (fused patch scores, fused frame scores, per-pipeline frame scores)
/// plus optional detection masks.
pub fn run_score(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let models = load_bundle(cfg)?;
    let spec = cfg.test_spec();
    for clip_id in &cfg.dataset.test {
        let seq = load_sequence(&cfg.clip_frames_dir(clip_id))?;
        let flows = clip_flows(cfg, &seq)?;
        let frames = score_sequence(&seq, &flows, &models, &spec)?;
        let maps: Vec<ScoreMap> = frames.iter().map(|f| f.fused.clone()).collect();
        let result = decide(&maps, cfg.detect.eta);

        let dir = scores_dir(cfg, clip_id);
        fs::create_dir_all(&dir)?;
        write_patch_scores_csv(&dir.join("patch_scores.csv"), &maps)?;
        write_frame_scores_csv(&dir.join("frame_scores.csv"), &result)?;

        let mut per_pipeline = fs::File::create(dir.join("frame_scores_by_pipeline.csv"))?;
        for (t, frame) in frames.iter().enumerate() {
            let maxes: Vec<f64> = frame
                .per_pipeline
                .iter()
                .map(|m| m.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .collect();
            writeln!(per_pipeline, "{},{},{},{}", t, maxes[0], maxes[1], maxes[2])?;
        }

        if cfg.detect.write_masks {
            for (t, mask) in result.pixel_masks.iter().enumerate() {
                let mut img = GrayFrame::filled(mask.width, mask.height, 0);
                for y in 0..mask.height {
                    for x in 0..mask.width {
                        if mask.get(x, y) {
                            img.set(x, y, 255);
                        }
                    }
                }
                pgm::write_pgm(&dir.join(format!("mask_{t:06}.pgm")), &img)?;
            }
        }
        log::info!("scored {clip_id}: {} frames", seq.len());
    }
    Ok(())
}

/// Evaluation report; serialized as `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct EvalSummary {
    pub frame_auc: f64,
    pub frame_eer: f64,
    pub auc_appearance: f64,
    pub auc_motion: f64,
    pub auc_joint: f64,
    pub pixel_auc: Option<f64>,
    pub pixel_eer: Option<f64>,
    pub alpha: [f64; 3],
    pub n_test_frames: usize,
    pub n_anomalous_frames: usize,
}

fn read_frame_scores(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 2 {
            return Err(Error::format(format!("{}: bad row '{line}'", path.display())));
        }
        out.push(fields[1].trim().parse().map_err(|_| {
            Error::format(format!("{}: bad score '{}'", path.display(), fields[1]))
        })?);
    }
    Ok(out)
}

fn read_pipeline_scores(path: &Path) -> Result<[Vec<f64>; 3]> {
    let text = fs::read_to_string(path)?;
    let mut out: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::format(format!("{}: bad row '{line}'", path.display())));
        }
        for k in 0..3 {
            out[k].push(fields[k + 1].trim().parse().map_err(|_| {
                Error::format(format!("{}: bad score '{}'", path.display(), fields[k + 1]))
            })?);
        }
    }
    Ok(out)
}

/// Reads the score CSVs and ground truth for the test split, computes the
/// frame-level ROC (fused and per pipeline) and, when pixel masks exist, the
/// pixel-level ROC under the 40%-overlap rule. Writes `roc.csv`, `roc.dat`
/// and `summary.json` under `<output>/eval/`.
pub fn run_eval(cfg: &RunConfig) -> Result<EvalSummary> {
    cfg.validate()?;
    let models = load_bundle(cfg)?;
    let spec = cfg.test_spec();

    let mut fused_scores = Vec::new();
    let mut pipeline_scores: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut labels = Vec::new();
    let mut all_maps: Vec<ScoreMap> = Vec::new();
    let mut all_masks: Vec<BitMask> = Vec::new();
    let mut masks_complete = true;

    for clip_id in &cfg.dataset.test {
        let frames_dir = cfg.clip_frames_dir(clip_id);
        let n_frames = crate::ingest::count_frames(&frames_dir)?;
        let first = pgm::read_pgm(&frames_dir.join("frame_000000.pgm"))?;
        let gt = load_ground_truth(&cfg.clip_gt_dir(clip_id), n_frames)?;

        let dir = scores_dir(cfg, clip_id);
        let frame_scores = read_frame_scores(&dir.join("frame_scores.csv"))?;
        if frame_scores.len() != n_frames {
            return Err(Error::shape(format!(
                "{clip_id}: {} scored frames vs {n_frames} on disk",
                frame_scores.len()
            )));
        }
        let per_pipeline = read_pipeline_scores(&dir.join("frame_scores_by_pipeline.csv"))?;
        fused_scores.extend_from_slice(&frame_scores);
        for k in 0..3 {
            pipeline_scores[k].extend_from_slice(&per_pipeline[k]);
        }
        labels.extend_from_slice(&gt.frame_labels);

        match gt.pixel_masks {
            Some(masks) => {
                let maps = load_score_maps(
                    &dir.join("patch_scores.csv"),
                    clip_id,
                    first.width,
                    first.height,
                    spec.scales[0],
                    spec.stride,
                )?;
                if maps.len() != n_frames {
                    return Err(Error::shape(format!(
                        "{clip_id}: {} score maps vs {n_frames} frames",
                        maps.len()
                    )));
                }
                all_maps.extend(maps);
                all_masks.extend(masks);
            }
            None => masks_complete = false,
        }
    }

    let curve = frame_roc(&fused_scores, &labels)?;
    let per_pipeline_auc: Vec<f64> = (0..3)
        .map(|k| frame_roc(&pipeline_scores[k], &labels).map(|c| c.auc))
        .collect::<Result<_>>()?;

    let (pixel_auc, pixel_eer) = if masks_complete && !all_maps.is_empty() {
        let result: DetectionResult = decide(&all_maps, cfg.detect.eta);
        let gt = GroundTruth {
            frame_labels: labels.clone(),
            pixel_masks: Some(all_masks),
        };
        let pixel = pixel_roc(&result, &gt)?;
        (Some(pixel.auc), Some(pixel.eer))
    } else {
        (None, None)
    };

    let summary = EvalSummary {
        frame_auc: curve.auc,
        frame_eer: curve.eer,
        auc_appearance: per_pipeline_auc[0],
        auc_motion: per_pipeline_auc[1],
        auc_joint: per_pipeline_auc[2],
        pixel_auc,
        pixel_eer,
        alpha: [
            models.fusion.alpha.get(0),
            models.fusion.alpha.get(1),
            models.fusion.alpha.get(2),
        ],
        n_test_frames: labels.len(),
        n_anomalous_frames: labels.iter().filter(|&&l| l).count(),
    };

    let eval_dir = cfg.output_dir.join("eval");
    fs::create_dir_all(&eval_dir)?;
    write_roc_csv(&eval_dir.join("roc.csv"), &curve)?;
    write_roc_dat(&eval_dir.join("roc.dat"), &curve)?;
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::format(format!("serialize summary: {e}")))?;
    fs::write(eval_dir.join("summary.json"), json)?;
    Ok(summary)
}

/// One row of the ν sweep report.
#[derive(Debug, Clone, Serialize)]
pub struct NuGridRow {
    pub pipeline: String,
    pub nu: f64,
    pub outlier_fraction: f64,
    pub sv_fraction: f64,
}

/// Re-derives the training features with the persisted SDAEs and fits a
/// one-class SVM per (pipeline, ν) pair, reporting training-outlier and
/// support-vector fractions so ν can be chosen empirically.
pub fn run_nu_grid(cfg: &RunConfig) -> Result<Vec<NuGridRow>> {
    cfg.validate()?;
    let models = load_bundle(cfg)?;
    let rng = Rng::new(cfg.seed);
    let batches = build_training_batches(cfg, &rng)?;
    let batch_by_kind = [&batches.appearance, &batches.motion, &batches.joint];

    let mut rows = Vec::new();
    for k in 0..3 {
        let features = extract_features(&models.sdae[k], batch_by_kind[k])?;
        let n = features.len() as f64;
        for &nu in &cfg.nu_grid.values {
            let svm_cfg = OcsvmConfig {
                nu,
                rbf_sigma: models.svm[k].config.rbf_sigma,
                tolerance: models.svm[k].config.tolerance,
                max_passes: models.svm[k].config.max_passes,
            };
            let model = svm_train(&features, &svm_cfg)?;
            let outliers = features
                .iter()
                .filter(|f| svm_score(&model, f).map(|s| s > svm_cfg.tolerance).unwrap_or(false))
                .count();
            rows.push(NuGridRow {
                pipeline: batch_by_kind[k].kind.tag().to_string(),
                nu,
                outlier_fraction: outliers as f64 / n,
                sv_fraction: model.n_support_vectors() as f64 / n,
            });
        }
    }

    fs::create_dir_all(&cfg.output_dir)?;
    let mut out = fs::File::create(cfg.output_dir.join("nu_grid.csv"))?;
    writeln!(out, "pipeline,nu,outlier_fraction,sv_fraction")?;
    for row in &rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.pipeline, row.nu, row.outlier_fraction, row.sv_fraction
        )?;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Small but complete configuration that keeps the full pipeline cheap
    /// enough for unit-test budgets.
    pub(crate) fn fast_cfg(root: &Path, out: &Path) -> RunConfig {
        let mut cfg = RunConfig::desk_default(root, out);
        cfg.synth.width = 32;
        cfg.synth.height = 32;
        cfg.synth.frames_per_clip = 12;
        cfg.dataset.train = vec!["train_000".to_string()];
        cfg.dataset.test = vec!["test_000".to_string()];
        cfg.flow.iterations = 40;
        cfg.patches.appearance.scales = vec![8];
        cfg.patches.appearance.stride = 8;
        cfg.patches.appearance.target = 8;
        cfg.patches.appearance.sample_cap = 300;
        cfg.patches.motion.window = 8;
        cfg.patches.motion.stride = 8;
        cfg.patches.motion.sample_cap = 300;
        cfg.patches.test.size = 8;
        cfg.patches.test.stride = 8;
        for section in [
            &mut cfg.sdae.appearance,
            &mut cfg.sdae.motion,
            &mut cfg.sdae.joint,
        ] {
            section.hidden = vec![16, 8];
            section.batch_size = 32;
            section.pretrain_epochs = 3;
            section.finetune_epochs = 2;
            section.learning_rate = 0.1;
        }
        for section in [
            &mut cfg.ocsvm.appearance,
            &mut cfg.ocsvm.motion,
            &mut cfg.ocsvm.joint,
        ] {
            section.tolerance = 1e-5;
        }
        cfg.fusion.subspace_dim = 4;
        cfg
    }

    #[test]
    fn train_score_eval_roundtrip() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = fast_cfg(&tmp.path().join("data"), &tmp.path().join("out"));
        run_synth(&cfg).unwrap();
        let models = run_train(&cfg).unwrap();
        models.validate().unwrap();

        // Bundle round trip produces an equivalent detector.
        let loaded = load_bundle(&cfg).unwrap();
        assert_eq!(loaded.fusion.alpha.data(), models.fusion.alpha.data());

        run_score(&cfg).unwrap();
        let summary = run_eval(&cfg).unwrap();
        assert!(summary.frame_auc >= 0.0 && summary.frame_auc <= 1.0);
        assert!(summary.pixel_auc.is_some());
        assert_eq!(summary.n_test_frames, 12);
        assert!(cfg.output_dir.join("eval").join("summary.json").exists());
        assert!(cfg.output_dir.join("eval").join("roc.csv").exists());
        assert!(cfg.output_dir.join("run_config.toml").exists());
    }

    #[test]
    fn training_scene_scores_below_training_percentile() {
        // A frame from the training split must look unremarkable: every
        // fused cell score sits below the 95th percentile of the fused
        // scores observed over the whole training split (seed-fixed).
        let tmp = tempfile::tempdir().unwrap();
        let cfg = fast_cfg(&tmp.path().join("data"), &tmp.path().join("out"));
        run_synth(&cfg).unwrap();
        let models = run_train(&cfg).unwrap();

        let seq = load_sequence(&cfg.clip_frames_dir("train_000")).unwrap();
        let flows = clip_flows(&cfg, &seq).unwrap();
        let scored = score_sequence(&seq, &flows, &models, &cfg.test_spec()).unwrap();
        let mut all_scores: Vec<f64> = scored
            .iter()
            .flat_map(|f| f.fused.scores.data().iter().cloned())
            .collect();
        all_scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let p95 = all_scores[(all_scores.len() as f64 * 0.95) as usize];

        let frame = &scored[2].fused;
        for v in frame.scores.data() {
            assert!(*v < p95, "training-frame cell score {v} >= p95 {p95}");
        }
    }

    #[test]
    fn flo_dir_flow_source_runs_the_pipeline() {
        // Precomputed .flo files substitute for the in-repo solver.
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = fast_cfg(&tmp.path().join("data"), &tmp.path().join("out"));
        run_synth(&cfg).unwrap();

        let flo_root = tmp.path().join("flows");
        for clip in cfg.dataset.train.iter().chain(&cfg.dataset.test) {
            let seq = load_sequence(&cfg.clip_frames_dir(clip)).unwrap();
            let dir = flo_root.join(clip);
            fs::create_dir_all(&dir).unwrap();
            for (t, pair) in seq.frames.windows(2).enumerate() {
                let field =
                    horn_schunck(&pair[0], &pair[1], cfg.flow.alpha, cfg.flow.iterations).unwrap();
                crate::optflow::write_flo(&dir.join(format!("flow_{t:06}.flo")), &field).unwrap();
            }
        }

        cfg.flow.method = FlowMethod::FloDir;
        cfg.flow.flo_dir = Some(flo_root);
        run_train(&cfg).unwrap();
        run_score(&cfg).unwrap();
        let summary = run_eval(&cfg).unwrap();
        assert!(summary.frame_auc >= 0.0 && summary.frame_auc <= 1.0);
    }

    #[test]
    fn nu_grid_reports_all_pairs() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = fast_cfg(&tmp.path().join("data"), &tmp.path().join("out"));
        cfg.nu_grid.values = vec![0.1, 0.3];
        run_synth(&cfg).unwrap();
        run_train(&cfg).unwrap();
        let rows = run_nu_grid(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        for row in &rows {
            assert!(row.outlier_fraction <= row.nu + 0.1, "{row:?}");
            assert!(row.sv_fraction >= row.nu - 0.05, "{row:?}");
        }
        assert!(cfg.output_dir.join("nu_grid.csv").exists());
    }
}
