//! Dataset loading and patch extraction for the three representation
//! pipelines.
//!
//! On-disk layout per clip:
//! `<root>/<clip_id>/frames/frame_%06d.pgm` (binary P5, maxval 255),
//! `<root>/<clip_id>/gt/frame_labels.csv` with rows `frame_index,label`,
//! and optional `<root>/<clip_id>/gt/mask_%06d.pgm` pixel masks.

pub mod pgm;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Rng};
use crate::optflow::FlowField;

/// Which representation pipeline a batch / model / feature belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PipelineKind {
    Appearance,
    Motion,
    Joint,
}

impl PipelineKind {
    pub const ALL: [PipelineKind; 3] = [
        PipelineKind::Appearance,
        PipelineKind::Motion,
        PipelineKind::Joint,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            PipelineKind::Appearance => "appearance",
            PipelineKind::Motion => "motion",
            PipelineKind::Joint => "joint",
        }
    }
}

/// Single 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<GrayFrame> {
        if pixels.len() != width * height {
            return Err(Error::shape(format!(
                "frame pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(GrayFrame {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> GrayFrame {
        GrayFrame {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }
}

/// Ordered grayscale frames of one clip.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    pub width: usize,
    pub height: usize,
    pub frames: Vec<GrayFrame>,
    pub clip_id: String,
}

impl FrameSequence {
    pub fn new(clip_id: impl Into<String>, frames: Vec<GrayFrame>) -> Result<FrameSequence> {
        if frames.len() < 2 {
            return Err(Error::domain(
                "a sequence needs at least 2 frames (optical flow pairs)".to_string(),
            ));
        }
        let (width, height) = (frames[0].width, frames[0].height);
        if frames.iter().any(|f| f.width != width || f.height != height) {
            return Err(Error::shape("frames differ in size".to_string()));
        }
        Ok(FrameSequence {
            width,
            height,
            frames,
            clip_id: clip_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Sliding-window geometry plus target patch shape for one pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchSpec {
    /// Square window side lengths; each window is warped to the target size.
    pub scales: Vec<usize>,
    pub stride: usize,
    pub target_w: usize,
    pub target_h: usize,
    /// 1 (gray), 2 (flow) or 3 (gray + flow).
    pub channels: usize,
}

impl PatchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.stride < 1 {
            return Err(Error::config("patch stride must be >= 1".to_string()));
        }
        if self.scales.is_empty() || self.scales.iter().any(|&s| s < 1) {
            return Err(Error::config("patch scales must be non-empty, >= 1".to_string()));
        }
        if self.target_w < 1 || self.target_h < 1 {
            return Err(Error::config("patch target size must be >= 1".to_string()));
        }
        if !(1..=3).contains(&self.channels) {
            return Err(Error::config(format!(
                "patch channels must be 1, 2 or 3, got {}",
                self.channels
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.target_w * self.target_h * self.channels
    }
}

/// Where a patch came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchOrigin {
    pub clip_id: String,
    pub frame_index: usize,
    pub x: usize,
    pub y: usize,
    pub scale: usize,
}

/// Fixed-size normalized patch vectors, one per row. Every element lies in
/// [0, 1].
#[derive(Debug, Clone)]
pub struct PatchBatch {
    pub kind: PipelineKind,
    pub dim: usize,
    pub vectors: Matrix,
    pub origins: Vec<PatchOrigin>,
}

impl PatchBatch {
    /// Builds a batch from per-patch rows, checking the normalization and
    /// alignment invariants.
    pub fn from_rows(
        kind: PipelineKind,
        dim: usize,
        rows: Vec<Vec<f64>>,
        origins: Vec<PatchOrigin>,
    ) -> Result<PatchBatch> {
        if rows.len() != origins.len() {
            return Err(Error::shape(format!(
                "{} rows but {} origins",
                rows.len(),
                origins.len()
            )));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::shape("patch row with wrong dimension".to_string()));
        }
        if rows
            .iter()
            .any(|r| r.iter().any(|v| !(0.0..=1.0).contains(v)))
        {
            return Err(Error::domain(
                "patch values must lie in [0, 1]".to_string(),
            ));
        }
        Ok(PatchBatch::new(kind, dim, rows, origins))
    }

    fn new(kind: PipelineKind, dim: usize, rows: Vec<Vec<f64>>, origins: Vec<PatchOrigin>) -> PatchBatch {
        debug_assert_eq!(rows.len(), origins.len());
        debug_assert!(rows.iter().all(|r| r.len() == dim));
        debug_assert!(rows
            .iter()
            .all(|r| r.iter().all(|&v| (0.0..=1.0).contains(&v))));
        let n = rows.len();
        PatchBatch {
            kind,
            dim,
            vectors: Matrix::from_raw(n, dim, rows.concat()),
            origins,
        }
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }
}

/// Per-frame anomaly flags plus optional pixel masks.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub frame_labels: Vec<bool>,
    pub pixel_masks: Option<Vec<BitMask>>,
}

/// Binary mask over a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BitMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BitMask {
    pub fn empty(width: usize, height: usize) -> BitMask {
        BitMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn overlap(&self, other: &BitMask) -> usize {
        self.bits
            .iter()
            .zip(other.bits.iter())
            .filter(|(a, b)| **a && **b)
            .count()
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|&b| b)
    }
}

const FRAME_PREFIX: &str = "frame_";
const MASK_PREFIX: &str = "mask_";

fn indexed_pgm_name(prefix: &str, index: usize) -> String {
    format!("{prefix}{index:06}.pgm")
}

fn list_indexed_pgms(dir: &Path, prefix: &str) -> Result<Vec<usize>> {
    let mut indices = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(rest) = name.strip_prefix(prefix) {
            if let Some(num) = rest.strip_suffix(".pgm") {
                if num.len() == 6 {
                    if let Ok(idx) = num.parse::<usize>() {
                        indices.push(idx);
                    }
                }
            }
        }
    }
    indices.sort_unstable();
    Ok(indices)
}

fn check_contiguous(indices: &[usize], what: &str, dir: &Path) -> Result<()> {
    for (expected, &got) in indices.iter().enumerate() {
        if got != expected {
            return Err(Error::layout(format!(
                "{}: {what} index {expected} missing (next present is {got})",
                dir.display()
            )));
        }
    }
    Ok(())
}

/// Loads all `frame_%06d.pgm` files from a directory, in index order starting
/// at 0. The clip id is the parent directory's name when the directory itself
/// is called `frames`, otherwise the directory's own name.
pub fn load_sequence(dir: &Path) -> Result<FrameSequence> {
    let indices = list_indexed_pgms(dir, FRAME_PREFIX)?;
    if indices.is_empty() {
        return Err(Error::layout(format!(
            "{}: no frame_%06d.pgm files found",
            dir.display()
        )));
    }
    check_contiguous(&indices, "frame", dir)?;
    let mut frames = Vec::with_capacity(indices.len());
    for idx in 0..indices.len() {
        let frame = pgm::read_pgm(&dir.join(indexed_pgm_name(FRAME_PREFIX, idx)))?;
        if let Some(first) = frames.first() {
            let first: &GrayFrame = first;
            if frame.width != first.width || frame.height != first.height {
                return Err(Error::format(format!(
                    "{}: frame {idx} is {}x{}, expected {}x{}",
                    dir.display(),
                    frame.width,
                    frame.height,
                    first.width,
                    first.height
                )));
            }
        }
        frames.push(frame);
    }
    let clip_id = clip_id_from_dir(dir);
    FrameSequence::new(clip_id, frames)
}

fn clip_id_from_dir(dir: &Path) -> String {
    let own = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "clip".to_string());
    if own == "frames" {
        if let Some(parent) = dir.parent().and_then(|p| p.file_name()) {
            return parent.to_string_lossy().into_owned();
        }
    }
    own
}

/// Positions of a sliding window over one axis: 0, d, 2d, ... ≤ extent−window.
pub fn grid_positions(extent: usize, window: usize, stride: usize) -> Vec<usize> {
    if window > extent {
        return Vec::new();
    }
    (0..=(extent - window)).step_by(stride).collect()
}

/// Number of sliding-window cells along one axis.
pub fn grid_len(extent: usize, window: usize, stride: usize) -> usize {
    if window > extent {
        0
    } else {
        (extent - window) / stride + 1
    }
}

/// Crops a `side`x`side` window at (x0, y0) and bilinearly warps it to
/// `tw`x`th`, returning row-major values normalized by 255. A window already
/// at target size passes through bit-exactly.
fn warp_window(frame: &GrayFrame, x0: usize, y0: usize, side: usize, tw: usize, th: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(tw * th);
    if side == tw && side == th {
        for ty in 0..th {
            for tx in 0..tw {
                out.push(frame.get(x0 + tx, y0 + ty) as f64 / 255.0);
            }
        }
        return out;
    }
    let sx_scale = side as f64 / tw as f64;
    let sy_scale = side as f64 / th as f64;
    let last = (side - 1) as f64;
    for ty in 0..th {
        let sy = ((ty as f64 + 0.5) * sy_scale - 0.5).clamp(0.0, last);
        let y_lo = sy.floor() as usize;
        let y_hi = (y_lo + 1).min(side - 1);
        let fy = sy - y_lo as f64;
        for tx in 0..tw {
            let sx = ((tx as f64 + 0.5) * sx_scale - 0.5).clamp(0.0, last);
            let x_lo = sx.floor() as usize;
            let x_hi = (x_lo + 1).min(side - 1);
            let fx = sx - x_lo as f64;
            let p00 = frame.get(x0 + x_lo, y0 + y_lo) as f64;
            let p10 = frame.get(x0 + x_hi, y0 + y_lo) as f64;
            let p01 = frame.get(x0 + x_lo, y0 + y_hi) as f64;
            let p11 = frame.get(x0 + x_hi, y0 + y_hi) as f64;
            let top = p00 + fx * (p10 - p00);
            let bot = p01 + fx * (p11 - p01);
            out.push((top + fy * (bot - top)) / 255.0);
        }
    }
    out
}

/// Appearance patches for a single frame: every scale, every grid cell.
pub fn appearance_patches_for_frame(
    frame: &GrayFrame,
    clip_id: &str,
    frame_index: usize,
    spec: &PatchSpec,
) -> Result<(Vec<Vec<f64>>, Vec<PatchOrigin>)> {
    if spec.channels != 1 {
        return Err(Error::domain(format!(
            "appearance extraction needs channels=1, got {}",
            spec.channels
        )));
    }
    let mut rows = Vec::new();
    let mut origins = Vec::new();
    for &scale in &spec.scales {
        if scale > frame.width || scale > frame.height {
            return Err(Error::domain(format!(
                "frame {}x{} smaller than patch scale {scale}",
                frame.width, frame.height
            )));
        }
        for &y in &grid_positions(frame.height, scale, spec.stride) {
            for &x in &grid_positions(frame.width, scale, spec.stride) {
                rows.push(warp_window(frame, x, y, scale, spec.target_w, spec.target_h));
                origins.push(PatchOrigin {
                    clip_id: clip_id.to_string(),
                    frame_index,
                    x,
                    y,
                    scale,
                });
            }
        }
    }
    Ok((rows, origins))
}

/// Multi-scale appearance patch extraction over a whole sequence, with a
/// uniform random subsample when the candidate count exceeds `sample_cap`.
pub fn extract_appearance_patches(
    seq: &FrameSequence,
    spec: &PatchSpec,
    rng: &mut Rng,
    sample_cap: usize,
) -> Result<PatchBatch> {
    extract_appearance_patches_multi(std::slice::from_ref(seq), spec, rng, sample_cap)
}

/// Same as [`extract_appearance_patches`] over several clips jointly, so the
/// subsample cap applies to the whole corpus.
pub fn extract_appearance_patches_multi(
    seqs: &[FrameSequence],
    spec: &PatchSpec,
    rng: &mut Rng,
    sample_cap: usize,
) -> Result<PatchBatch> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut origins = Vec::new();
    for seq in seqs {
        for (idx, frame) in seq.frames.iter().enumerate() {
            let (mut r, mut o) = appearance_patches_for_frame(frame, &seq.clip_id, idx, spec)?;
            rows.append(&mut r);
            origins.append(&mut o);
        }
    }
    subsample(PipelineKind::Appearance, spec.dim(), rows, origins, rng, sample_cap)
}

/// Uniform random subsample of a batch down to `sample_cap` patches (no-op
/// when the batch is already small enough). Kept patches preserve their
/// original relative order.
pub fn subsample_batch(batch: PatchBatch, rng: &mut Rng, sample_cap: usize) -> PatchBatch {
    if batch.len() <= sample_cap {
        return batch;
    }
    let keep = rng.sample_indices(batch.len(), sample_cap);
    let mut rows = Vec::with_capacity(sample_cap);
    let mut origins = Vec::with_capacity(sample_cap);
    for &i in &keep {
        rows.push(batch.vectors.row(i).to_vec());
        origins.push(batch.origins[i].clone());
    }
    PatchBatch::new(batch.kind, batch.dim, rows, origins)
}

/// Number of contiguous `frame_%06d.pgm` files in a directory.
pub fn count_frames(dir: &Path) -> Result<usize> {
    let indices = list_indexed_pgms(dir, FRAME_PREFIX)?;
    check_contiguous(&indices, "frame", dir)?;
    Ok(indices.len())
}

fn subsample(
    kind: PipelineKind,
    dim: usize,
    rows: Vec<Vec<f64>>,
    origins: Vec<PatchOrigin>,
    rng: &mut Rng,
    sample_cap: usize,
) -> Result<PatchBatch> {
    if rows.len() <= sample_cap {
        return Ok(PatchBatch::new(kind, dim, rows, origins));
    }
    let keep = rng.sample_indices(rows.len(), sample_cap);
    let mut kept_rows = Vec::with_capacity(sample_cap);
    let mut kept_origins = Vec::with_capacity(sample_cap);
    let mut rows = rows;
    for &i in &keep {
        kept_rows.push(std::mem::take(&mut rows[i]));
        kept_origins.push(origins[i].clone());
    }
    Ok(PatchBatch::new(kind, dim, kept_rows, kept_origins))
}

/// Per-channel linear normalization bounds for optical flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelBounds {
    pub min: f64,
    pub max: f64,
}

impl ChannelBounds {
    fn fold(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    /// Linear map onto [0,1]; degenerate ranges collapse to 0.5, and values
    /// outside the recorded range (possible at test time) are clamped.
    pub fn normalize(&self, v: f64) -> f64 {
        let range = self.max - self.min;
        if range <= 0.0 {
            return 0.5;
        }
        ((v - self.min) / range).clamp(0.0, 1.0)
    }

    pub fn is_degenerate(&self) -> bool {
        self.max - self.min <= 0.0
    }
}

/// (min, max) per flow channel, computed over a training corpus and reused at
/// test time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionBounds {
    pub u: ChannelBounds,
    pub v: ChannelBounds,
}

/// Dense flow fields of one clip; field `t` maps frame `t` to frame `t+1`.
#[derive(Debug, Clone)]
pub struct FlowSequence {
    pub clip_id: String,
    pub fields: Vec<FlowField>,
}

/// Reduction pass: global per-channel (min, max) over the whole corpus.
pub fn motion_bounds(clips: &[FlowSequence]) -> MotionBounds {
    let mut u = ChannelBounds {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    };
    let mut v = u;
    for clip in clips {
        for field in &clip.fields {
            for &x in field.u.data() {
                u.fold(x);
            }
            for &x in field.v.data() {
                v.fold(x);
            }
        }
    }
    if !u.min.is_finite() {
        u = ChannelBounds { min: 0.0, max: 0.0 };
        v = u;
    }
    MotionBounds { u, v }
}

/// Motion patches for a single flow field using precomputed bounds. Window
/// size is the spec target (flow patches are fixed-size, never warped).
pub fn motion_patches_for_field(
    field: &FlowField,
    clip_id: &str,
    frame_index: usize,
    spec: &PatchSpec,
    bounds: &MotionBounds,
) -> Result<(Vec<Vec<f64>>, Vec<PatchOrigin>)> {
    if spec.channels != 2 {
        return Err(Error::domain(format!(
            "motion extraction needs channels=2, got {}",
            spec.channels
        )));
    }
    let (w, h) = (field.width, field.height);
    let (pw, ph) = (spec.target_w, spec.target_h);
    if pw > w || ph > h {
        return Err(Error::domain(format!(
            "flow field {w}x{h} smaller than window {pw}x{ph}"
        )));
    }
    let mut rows = Vec::new();
    let mut origins = Vec::new();
    for &y in &grid_positions(h, ph, spec.stride) {
        for &x in &grid_positions(w, pw, spec.stride) {
            let mut vec = Vec::with_capacity(pw * ph * 2);
            for dy in 0..ph {
                for dx in 0..pw {
                    vec.push(bounds.u.normalize(field.u.get(y + dy, x + dx)));
                }
            }
            for dy in 0..ph {
                for dx in 0..pw {
                    vec.push(bounds.v.normalize(field.v.get(y + dy, x + dx)));
                }
            }
            rows.push(vec);
            origins.push(PatchOrigin {
                clip_id: clip_id.to_string(),
                frame_index,
                x,
                y,
                scale: pw,
            });
        }
    }
    Ok((rows, origins))
}

/// Fixed-size motion patch extraction with corpus-global normalization.
/// Returns the batch plus the (min, max) bounds that must be persisted for
/// test time.
pub fn extract_motion_patches(
    clips: &[FlowSequence],
    spec: &PatchSpec,
) -> Result<(PatchBatch, MotionBounds)> {
    let bounds = motion_bounds(clips);
    if bounds.u.is_degenerate() {
        log::warn!("flow u-channel has zero range; normalizing to 0.5");
    }
    if bounds.v.is_degenerate() {
        log::warn!("flow v-channel has zero range; normalizing to 0.5");
    }
    let batch = extract_motion_patches_with_bounds(clips, spec, &bounds)?;
    Ok((batch, bounds))
}

/// Motion extraction reusing previously recorded normalization bounds.
pub fn extract_motion_patches_with_bounds(
    clips: &[FlowSequence],
    spec: &PatchSpec,
    bounds: &MotionBounds,
) -> Result<PatchBatch> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut origins = Vec::new();
    for clip in clips {
        for (idx, field) in clip.fields.iter().enumerate() {
            let (mut r, mut o) = motion_patches_for_field(field, &clip.clip_id, idx, spec, bounds)?;
            rows.append(&mut r);
            origins.append(&mut o);
        }
    }
    Ok(PatchBatch::new(PipelineKind::Motion, spec.dim(), rows, origins))
}

/// Pixel-level early fusion: per-patch channel concatenation of an appearance
/// batch and a motion batch that share origins.
pub fn fuse_early(app: &PatchBatch, mot: &PatchBatch) -> Result<PatchBatch> {
    if app.kind != PipelineKind::Appearance || mot.kind != PipelineKind::Motion {
        return Err(Error::domain(format!(
            "fuse_early takes (appearance, motion), got ({:?}, {:?})",
            app.kind, mot.kind
        )));
    }
    if app.origins.len() != mot.origins.len() {
        return Err(Error::alignment(format!(
            "batch sizes differ: {} vs {}",
            app.origins.len(),
            mot.origins.len()
        )));
    }
    for (i, (a, m)) in app.origins.iter().zip(mot.origins.iter()).enumerate() {
        if a != m {
            return Err(Error::alignment(format!(
                "origin {i} differs: {a:?} vs {m:?}"
            )));
        }
    }
    let dim = app.dim + mot.dim;
    let mut rows = Vec::with_capacity(app.len());
    for i in 0..app.len() {
        let mut row = Vec::with_capacity(dim);
        row.extend_from_slice(app.vectors.row(i));
        row.extend_from_slice(mot.vectors.row(i));
        rows.push(row);
    }
    Ok(PatchBatch::new(
        PipelineKind::Joint,
        dim,
        rows,
        app.origins.clone(),
    ))
}

/// Loads frame labels (and pixel masks when present) from a `gt` directory.
pub fn load_ground_truth(dir: &Path, n_frames: usize) -> Result<GroundTruth> {
    let labels_path = dir.join("frame_labels.csv");
    let text = fs::read_to_string(&labels_path).map_err(|e| {
        Error::layout(format!("{}: {e}", labels_path.display()))
    })?;
    let mut by_index: BTreeMap<usize, bool> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let idx_txt = parts.next().unwrap_or("");
        let label_txt = parts.next().ok_or_else(|| {
            Error::format(format!("frame_labels.csv line {}: expected 'index,label'", lineno + 1))
        })?;
        let idx: usize = idx_txt.trim().parse().map_err(|_| {
            Error::format(format!("frame_labels.csv line {}: bad index '{idx_txt}'", lineno + 1))
        })?;
        let label = match label_txt.trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::format(format!(
                    "frame_labels.csv line {}: label '{other}' outside {{0,1}}",
                    lineno + 1
                )))
            }
        };
        by_index.insert(idx, label);
    }
    let mut frame_labels = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        match by_index.get(&i) {
            Some(&l) => frame_labels.push(l),
            None => {
                return Err(Error::layout(format!(
                    "frame_labels.csv missing label for frame {i}"
                )))
            }
        }
    }

    let pixel_masks = if dir.join(indexed_pgm_name(MASK_PREFIX, 0)).exists() {
        let mut masks = Vec::with_capacity(n_frames);
        for i in 0..n_frames {
            let path = dir.join(indexed_pgm_name(MASK_PREFIX, i));
            if !path.exists() {
                return Err(Error::layout(format!(
                    "{}: mask index {i} missing",
                    dir.display()
                )));
            }
            let frame = pgm::read_pgm(&path)?;
            masks.push(BitMask {
                width: frame.width,
                height: frame.height,
                bits: frame.pixels.iter().map(|&p| p >= 128).collect(),
            });
        }
        Some(masks)
    } else {
        None
    };

    Ok(GroundTruth {
        frame_labels,
        pixel_masks,
    })
}
