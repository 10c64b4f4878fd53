//! Frame-level and pixel-level evaluation: ROC by sweeping the threshold η
//! over all distinct scores, AUC by trapezoid, interpolated EER,
//! precision/recall, and the 40%-overlap localization criterion.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::detect::DetectionResult;
use crate::error::{Error, Result};
use crate::ingest::GroundTruth;

/// One operating point of a threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub eta: f64,
}

/// ROC curve with its area and equal error rate.
#[derive(Debug, Clone)]
pub struct RocCurve {
    /// Sorted by FPR non-decreasing; TPR non-decreasing along the sweep.
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub eer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub precision: f64,
    pub recall: f64,
    pub eta: f64,
}

fn check_binary_inputs(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::shape(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::domain("scores must be finite".to_string()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::domain(
            "both classes must be present to sweep a curve".to_string(),
        ));
    }
    Ok((pos, neg))
}

/// Threshold sweep over all distinct score values (ties flip together); a
/// sample is flagged when score > η. The sweep starts at the maximum score
/// (nothing flagged) and ends at −∞ (everything flagged).
fn sweep(scores: &[f64], labels: &[bool]) -> Vec<(f64, usize, usize)> {
    // (eta, true positives, false positives) cumulative after flagging
    // everything strictly above eta.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    points.push((scores[order[0]], 0, 0));
    let mut i = 0;
    while i < order.len() {
        let value = scores[order[i]];
        while i < order.len() && scores[order[i]] == value {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let eta = if i < order.len() {
            scores[order[i]]
        } else {
            f64::NEG_INFINITY
        };
        points.push((eta, tp, fp));
    }
    points
}

fn interpolated_eer(points: &[RocPoint]) -> f64 {
    // g = FPR − (1 − TPR) goes from −1 at (0,0) to +1 at (1,1); find the
    // bracketing pair and interpolate linearly.
    let g = |p: &RocPoint| p.fpr + p.tpr - 1.0;
    for pair in points.windows(2) {
        let (g0, g1) = (g(&pair[0]), g(&pair[1]));
        if g0 == 0.0 {
            return pair[0].fpr;
        }
        if g0 < 0.0 && g1 >= 0.0 {
            if g1 == g0 {
                return pair[1].fpr;
            }
            let t = -g0 / (g1 - g0);
            return pair[0].fpr + t * (pair[1].fpr - pair[0].fpr);
        }
    }
    points.last().map(|p| p.fpr).unwrap_or(0.0)
}

fn curve_from_counts(points: &[(f64, usize, usize)], pos: usize, neg: usize) -> RocCurve {
    let roc: Vec<RocPoint> = points
        .iter()
        .map(|&(eta, tp, fp)| RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            eta,
        })
        .collect();
    let mut auc = 0.0;
    for pair in roc.windows(2) {
        auc += (pair[1].fpr - pair[0].fpr) * (pair[0].tpr + pair[1].tpr) / 2.0;
    }
    let eer = interpolated_eer(&roc);
    RocCurve {
        points: roc,
        auc,
        eer,
    }
}

/// Frame-level ROC over anomaly scores and binary labels.
pub fn frame_roc(frame_scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    let (pos, neg) = check_binary_inputs(frame_scores, labels)?;
    Ok(curve_from_counts(&sweep(frame_scores, labels), pos, neg))
}

/// Precision/recall sweep over the same thresholds as [`frame_roc`]; points
/// with no flagged samples are dropped.
pub fn precision_recall(frame_scores: &[f64], labels: &[bool]) -> Result<Vec<PrPoint>> {
    let (pos, _) = check_binary_inputs(frame_scores, labels)?;
    let mut out = Vec::new();
    for (eta, tp, fp) in sweep(frame_scores, labels) {
        if tp + fp == 0 {
            continue;
        }
        out.push(PrPoint {
            precision: tp as f64 / (tp + fp) as f64,
            recall: tp as f64 / pos as f64,
            eta,
        });
    }
    Ok(out)
}

/// The localization rule: a detection counts only when it covers strictly
/// more than 40% of the annotated anomalous pixels. Exact in integer
/// arithmetic: overlap/total > 2/5.
pub fn covers_forty_percent(overlap: usize, gt_pixels: usize) -> bool {
    5 * overlap > 2 * gt_pixels
}

/// Frame-classification rates under the 40%-overlap localization gate at a
/// fixed threshold η. A positive frame is a true positive iff the detected
/// mask covers > 40% of its annotated pixels; any detection on a frame with
/// an empty ground-truth mask is a false positive. Empty denominators yield
/// a rate of 0.
pub fn pixel_level_eval(result: &DetectionResult, gt: &GroundTruth, eta: f64) -> Result<(f64, f64)> {
    let masks = gt
        .pixel_masks
        .as_ref()
        .ok_or_else(|| Error::domain("pixel-level evaluation needs ground-truth masks".to_string()))?;
    if masks.len() != result.score_maps.len() {
        return Err(Error::shape(format!(
            "{} ground-truth masks vs {} score maps",
            masks.len(),
            result.score_maps.len()
        )));
    }
    let (mut tp, mut fn_, mut fp, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (map, gt_mask) in result.score_maps.iter().zip(masks) {
        let detected = map.paint_mask(eta);
        if gt_mask.any() {
            let overlap = detected.overlap(gt_mask);
            if covers_forty_percent(overlap, gt_mask.count()) {
                tp += 1;
            } else {
                fn_ += 1;
            }
        } else if detected.any() {
            fp += 1;
        } else {
            tn += 1;
        }
    }
    let tpr = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    let fpr = if fp + tn > 0 {
        fp as f64 / (fp + tn) as f64
    } else {
        0.0
    };
    Ok((tpr, fpr))
}

/// Pixel-level ROC: sweeps η over all distinct patch scores and evaluates
/// the localization criterion at each threshold.
pub fn pixel_roc(result: &DetectionResult, gt: &GroundTruth) -> Result<RocCurve> {
    let masks = gt
        .pixel_masks
        .as_ref()
        .ok_or_else(|| Error::domain("pixel-level evaluation needs ground-truth masks".to_string()))?;
    let has_pos = masks.iter().any(|m| m.any());
    let has_neg = masks.iter().any(|m| !m.any());
    if !has_pos || !has_neg {
        return Err(Error::domain(
            "both anomalous and normal frames are needed for a pixel-level curve".to_string(),
        ));
    }
    let mut all_scores: Vec<f64> = result
        .score_maps
        .iter()
        .flat_map(|m| m.scores.data().iter().cloned())
        .collect();
    all_scores.sort_by(|a, b| b.partial_cmp(a).unwrap());
    all_scores.dedup();

    let mut points = Vec::with_capacity(all_scores.len() + 2);
    let top = all_scores.first().cloned().unwrap_or(0.0);
    let (tpr0, fpr0) = pixel_level_eval(result, gt, top)?;
    points.push(RocPoint {
        fpr: fpr0,
        tpr: tpr0,
        eta: top,
    });
    for i in 0..all_scores.len() {
        let eta = if i + 1 < all_scores.len() {
            all_scores[i + 1]
        } else {
            f64::NEG_INFINITY
        };
        let (tpr, fpr) = pixel_level_eval(result, gt, eta)?;
        points.push(RocPoint { fpr, tpr, eta });
    }
    // The localization gate is not monotone in η pixel-for-pixel, but the
    // curve must be reported FPR-sorted.
    points.sort_by(|a, b| {
        a.fpr
            .partial_cmp(&b.fpr)
            .unwrap()
            .then(a.tpr.partial_cmp(&b.tpr).unwrap())
    });
    let mut auc = 0.0;
    for pair in points.windows(2) {
        auc += (pair[1].fpr - pair[0].fpr) * (pair[0].tpr + pair[1].tpr) / 2.0;
    }
    let eer = interpolated_eer(&points);
    Ok(RocCurve { points, auc, eer })
}

/// Writes `fpr,tpr,eta` rows.
pub fn write_roc_csv(path: &Path, curve: &RocCurve) -> Result<()> {
    let mut out = fs::File::create(path)?;
    for p in &curve.points {
        writeln!(out, "{},{},{}", p.fpr, p.tpr, p.eta)?;
    }
    Ok(())
}

/// Gnuplot-friendly two-column variant (`fpr tpr`, `#` header).
pub fn write_roc_dat(path: &Path, curve: &RocCurve) -> Result<()> {
    let mut out = fs::File::create(path)?;
    writeln!(out, "# fpr tpr")?;
    for p in &curve.points {
        writeln!(out, "{} {}", p.fpr, p.tpr)?;
    }
    Ok(())
}
