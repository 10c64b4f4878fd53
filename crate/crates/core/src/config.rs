//! Run configuration: a single TOML file drives every subcommand. Unknown
//! keys are rejected, and the fully resolved configuration (defaults
//! included) is echoed into the run log so no hyperparameter stays silent.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PatchSpec;
use crate::sdae::SdaeConfig;

fn default_seed() -> u64 {
    7
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub synth: SynthConfig,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub patches: PatchesConfig,
    #[serde(default)]
    pub sdae: SdaeSections,
    #[serde(default)]
    pub ocsvm: OcsvmSections,
    #[serde(default)]
    pub fusion: FusionConfig,
    #[serde(default)]
    pub detect: DetectConfig,
    #[serde(default)]
    pub nu_grid: NuGridConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub root: PathBuf,
    /// Clip ids of the training split (anomaly-free).
    pub train: Vec<String>,
    /// Clip ids of the test split.
    pub test: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub width: usize,
    pub height: usize,
    pub frames_per_clip: usize,
    /// Fraction of test frames containing the anomaly.
    pub anomaly_rate: f64,
    pub normal_objects: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            width: 64,
            height: 64,
            frames_per_clip: 40,
            anomaly_rate: 0.35,
            normal_objects: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowMethod {
    /// In-repo Horn–Schunck solver.
    Hs,
    /// Read precomputed Middlebury `.flo` files from `flo_dir`.
    FloDir,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub method: FlowMethod,
    /// `<flo_dir>/<clip_id>/flow_%06d.flo`, used with `method = "flo-dir"`.
    pub flo_dir: Option<PathBuf>,
    pub alpha: f64,
    pub iterations: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            method: FlowMethod::Hs,
            flo_dir: None,
            alpha: 1.0,
            iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PatchesConfig {
    pub appearance: AppearancePatchConfig,
    pub motion: MotionPatchConfig,
    pub test: TestPatchConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppearancePatchConfig {
    /// Multi-scale training windows, each warped to `target`.
    pub scales: Vec<usize>,
    pub stride: usize,
    pub target: usize,
    pub sample_cap: usize,
}

impl Default for AppearancePatchConfig {
    fn default() -> Self {
        AppearancePatchConfig {
            scales: vec![16, 24],
            stride: 8,
            target: 16,
            sample_cap: 1400,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionPatchConfig {
    /// Fixed window side; flow patches are never warped.
    pub window: usize,
    pub stride: usize,
    pub sample_cap: usize,
}

impl Default for MotionPatchConfig {
    fn default() -> Self {
        MotionPatchConfig {
            window: 16,
            stride: 8,
            sample_cap: 1200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TestPatchConfig {
    pub size: usize,
    pub stride: usize,
}

impl Default for TestPatchConfig {
    fn default() -> Self {
        TestPatchConfig {
            size: 16,
            stride: 16,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SdaeSections {
    pub appearance: SdaeSection,
    pub motion: SdaeSection,
    pub joint: SdaeSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SdaeSection {
    /// Encoder widths after the input layer, down to the bottleneck.
    pub hidden: Vec<usize>,
    pub noise_variance: f64,
    pub sparsity_target: f64,
    pub sparsity_weight: f64,
    pub lambda_pre: f64,
    pub lambda_fine: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub pretrain_epochs: usize,
    pub finetune_epochs: usize,
}

impl Default for SdaeSection {
    fn default() -> Self {
        SdaeSection {
            hidden: vec![128, 64, 32],
            noise_variance: 0.0003,
            sparsity_target: 0.05,
            sparsity_weight: 0.1,
            lambda_pre: 0.0001,
            lambda_fine: 0.0001,
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 128,
            pretrain_epochs: 10,
            finetune_epochs: 6,
        }
    }
}

impl SdaeSection {
    pub fn to_config(&self, input_dim: usize, seed: u64) -> SdaeConfig {
        let mut dims = Vec::with_capacity(self.hidden.len() + 1);
        dims.push(input_dim);
        dims.extend_from_slice(&self.hidden);
        SdaeConfig {
            layer_dims: dims,
            noise_variance: self.noise_variance,
            sparsity_target: self.sparsity_target,
            sparsity_weight: self.sparsity_weight,
            lambda_pre: self.lambda_pre,
            lambda_fine: self.lambda_fine,
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            batch_size: self.batch_size,
            pretrain_epochs: self.pretrain_epochs,
            finetune_epochs: self.finetune_epochs,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OcsvmSections {
    pub appearance: OcsvmSection,
    pub motion: OcsvmSection,
    pub joint: OcsvmSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OcsvmSection {
    pub nu: f64,
    /// Omit to use the median pairwise-distance heuristic.
    pub sigma: Option<f64>,
    pub tolerance: f64,
    pub max_passes: usize,
}

impl Default for OcsvmSection {
    fn default() -> Self {
        OcsvmSection {
            nu: 0.1,
            sigma: None,
            tolerance: 1e-6,
            max_passes: 400,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    pub subspace_dim: usize,
    pub lambda_s: f64,
    /// Standardize per-pipeline scores (training mean/std) before fusing.
    pub standardize: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            subspace_dim: 16,
            lambda_s: 0.1,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectConfig {
    /// Decision threshold η for flags and emitted masks.
    pub eta: f64,
    pub write_masks: bool,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            eta: 0.0,
            write_masks: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NuGridConfig {
    pub values: Vec<f64>,
}

impl Default for NuGridConfig {
    fn default() -> Self {
        NuGridConfig {
            values: vec![0.02, 0.05, 0.1, 0.2, 0.4],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Desk-scale defaults rooted at the given paths; used by tests and as a
    /// template for `synth`-generated runs.
    pub fn desk_default(root: impl Into<PathBuf>, output: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            seed: default_seed(),
            output_dir: output.into(),
            dataset: DatasetConfig {
                root: root.into(),
                train: vec!["train_000".to_string(), "train_001".to_string()],
                test: vec!["test_000".to_string(), "test_001".to_string()],
            },
            synth: SynthConfig::default(),
            flow: FlowConfig::default(),
            patches: PatchesConfig::default(),
            sdae: SdaeSections::default(),
            ocsvm: OcsvmSections::default(),
            fusion: FusionConfig::default(),
            detect: DetectConfig::default(),
            nu_grid: NuGridConfig::default(),
        }
    }

    /// Restores the published architecture widths: 1024-wide first layers for
    /// the appearance and motion pipelines, 2048 for the joint pipeline, each
    /// halving down over four encoder layers.
    pub fn apply_paper_arch(&mut self) {
        self.sdae.appearance.hidden = vec![1024, 512, 256, 128];
        self.sdae.motion.hidden = vec![1024, 512, 256, 128];
        self.sdae.joint.hidden = vec![2048, 1024, 512, 256];
    }

    pub fn validate(&self) -> Result<()> {
        if self.dataset.train.is_empty() {
            return Err(Error::config("dataset.train must list at least one clip".to_string()));
        }
        if self.dataset.test.is_empty() {
            return Err(Error::config("dataset.test must list at least one clip".to_string()));
        }
        if !(0.0..=1.0).contains(&self.synth.anomaly_rate) {
            return Err(Error::config("synth.anomaly_rate must be in [0, 1]".to_string()));
        }
        if self.synth.frames_per_clip < 2 {
            return Err(Error::config("synth.frames_per_clip must be >= 2".to_string()));
        }
        if self.flow.method == FlowMethod::FloDir && self.flow.flo_dir.is_none() {
            return Err(Error::config(
                "flow.method = \"flo-dir\" needs flow.flo_dir".to_string(),
            ));
        }
        if self.flow.alpha <= 0.0 || self.flow.iterations == 0 {
            return Err(Error::config("flow.alpha must be > 0 and flow.iterations >= 1".to_string()));
        }
        self.appearance_spec().validate()?;
        self.motion_spec().validate()?;
        self.test_spec().validate()?;
        if self.fusion.lambda_s <= 0.0 {
            return Err(Error::config("fusion.lambda_s must be > 0".to_string()));
        }
        if self.fusion.subspace_dim == 0 {
            return Err(Error::config("fusion.subspace_dim must be >= 1".to_string()));
        }
        Ok(())
    }

    pub fn appearance_spec(&self) -> PatchSpec {
        PatchSpec {
            scales: self.patches.appearance.scales.clone(),
            stride: self.patches.appearance.stride,
            target_w: self.patches.appearance.target,
            target_h: self.patches.appearance.target,
            channels: 1,
        }
    }

    pub fn motion_spec(&self) -> PatchSpec {
        PatchSpec {
            scales: vec![self.patches.motion.window],
            stride: self.patches.motion.stride,
            target_w: self.patches.motion.window,
            target_h: self.patches.motion.window,
            channels: 2,
        }
    }

    /// Single-scale identity-window spec used at test time.
    pub fn test_spec(&self) -> PatchSpec {
        PatchSpec {
            scales: vec![self.patches.test.size],
            stride: self.patches.test.stride,
            target_w: self.patches.test.size,
            target_h: self.patches.test.size,
            channels: 1,
        }
    }

    /// Fully resolved TOML echo, defaults included.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::config(format!("serialize config: {e}")))
    }

    pub fn clip_frames_dir(&self, clip_id: &str) -> PathBuf {
        self.dataset.root.join(clip_id).join("frames")
    }

    pub fn clip_gt_dir(&self, clip_id: &str) -> PathBuf {
        self.dataset.root.join(clip_id).join("gt")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::desk_default("data", "out");
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.sdae.appearance.momentum, 0.9);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"
            seed = 1
            frobnicate = true
            [dataset]
            root = "d"
            train = ["a"]
            test = ["b"]
        "#;
        let err = toml::from_str::<RunConfig>(text).unwrap_err();
        assert!(err.to_string().contains("frobnicate"), "{err}");
    }

    #[test]
    fn nested_unknown_keys_rejected() {
        let text = r#"
            [dataset]
            root = "d"
            train = ["a"]
            test = ["b"]
            [sdae.appearance]
            learning_rte = 0.1
        "#;
        assert!(toml::from_str::<RunConfig>(text).is_err());
    }

    #[test]
    fn published_hyperparameters_accepted_and_echoed() {
        let text = r#"
            [dataset]
            root = "d"
            train = ["a"]
            test = ["b"]
            [sdae.appearance]
            momentum = 0.9
            batch_size = 256
            noise_variance = 0.0003
            learning_rate = 0.01
            lambda_fine = 0.0001
            [fusion]
            lambda_s = 0.1
        "#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        let echo = cfg.to_toml().unwrap();
        for needle in [
            "momentum = 0.9",
            "batch_size = 256",
            "noise_variance = 0.0003",
            "lambda_s = 0.1",
        ] {
            assert!(echo.contains(needle), "echo missing {needle}:\n{echo}");
        }
    }

    #[test]
    fn paper_arch_widths() {
        let mut cfg = RunConfig::desk_default("d", "o");
        cfg.apply_paper_arch();
        assert_eq!(cfg.sdae.appearance.hidden, vec![1024, 512, 256, 128]);
        assert_eq!(cfg.sdae.joint.hidden, vec![2048, 1024, 512, 256]);
        let sdae_cfg = cfg.sdae.appearance.to_config(225, 1);
        assert_eq!(sdae_cfg.layer_dims, vec![225, 1024, 512, 256, 128]);
        sdae_cfg.validate().unwrap();
    }

    #[test]
    fn flo_dir_requires_path() {
        let mut cfg = RunConfig::desk_default("d", "o");
        cfg.flow.method = FlowMethod::FloDir;
        assert!(cfg.validate().is_err());
        cfg.flow.flo_dir = Some(PathBuf::from("flows"));
        cfg.validate().unwrap();
    }
}
