//! Synthetic scene generator. Stands in for real surveillance footage so the
//! whole pipeline can run end to end: normal activity is small dark squares
//! drifting at most 1 px/frame over a static textured background; the
//! anomaly is a large bright square moving at 4+ px/frame.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::Result;
use crate::ingest::{pgm, GrayFrame};
use crate::linalg::Rng;

fn hash2(x: usize, y: usize, salt: u64) -> u64 {
    let mut v = (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (y as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ salt;
    v ^= v >> 33;
    v = v.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    v ^= v >> 33;
    v
}

fn background(width: usize, height: usize, salt: u64) -> GrayFrame {
    let tau = std::f64::consts::TAU;
    let mut frame = GrayFrame::filled(width, height, 0);
    for y in 0..height {
        for x in 0..width {
            let wave = 16.0 * (tau * x as f64 / 13.0).sin() + 12.0 * (tau * y as f64 / 9.0).cos();
            let noise = (hash2(x, y, salt) % 17) as f64 - 8.0;
            let value = (110.0 + wave + noise).clamp(0.0, 255.0);
            frame.set(x, y, value as u8);
        }
    }
    frame
}

#[derive(Debug, Clone, Copy)]
struct Square {
    x: i64,
    y: i64,
    side: i64,
    intensity: u8,
}

impl Square {
    fn paint(&self, frame: &mut GrayFrame) {
        for dy in 0..self.side {
            for dx in 0..self.side {
                let (px, py) = (self.x + dx, self.y + dy);
                if px >= 0 && py >= 0 && (px as usize) < frame.width && (py as usize) < frame.height
                {
                    frame.set(px as usize, py as usize, self.intensity);
                }
            }
        }
    }
}

fn reflect(pos: i64, vel: &mut i64, max: i64) -> i64 {
    let mut next = pos + *vel;
    if next < 0 {
        next = -next;
        *vel = -*vel;
    }
    if next > max {
        next = 2 * max - next;
        *vel = -*vel;
    }
    next.clamp(0, max)
}

fn generate_clip(cfg: &RunConfig, clip_id: &str, mut rng: Rng, with_anomaly: bool) -> Result<()> {
    let (w, h) = (cfg.synth.width, cfg.synth.height);
    let n_frames = cfg.synth.frames_per_clip;
    let bg = background(w, h, rng.next_u64());

    // Normal activity: small dark squares on a ±1 px random walk.
    let mut normals: Vec<Square> = (0..cfg.synth.normal_objects)
        .map(|_| Square {
            x: rng.uniform_usize(w.saturating_sub(6)) as i64,
            y: rng.uniform_usize(h.saturating_sub(6)) as i64,
            side: 4 + rng.uniform_usize(3) as i64,
            intensity: (30 + rng.uniform_usize(30)) as u8,
        })
        .collect();

    // Anomaly: a large bright square crossing the scene at 4..6 px/frame,
    // active over a centered window sized by the configured rate.
    let anom_frames = (cfg.synth.anomaly_rate * n_frames as f64).round() as usize;
    let anom_start = (n_frames - anom_frames) / 2;
    let mut anomaly = Square {
        x: rng.uniform_usize(w.saturating_sub(14)) as i64,
        y: rng.uniform_usize(h.saturating_sub(14)) as i64,
        side: 11 + rng.uniform_usize(3) as i64,
        intensity: (220 + rng.uniform_usize(26)) as u8,
    };
    let mut avx: i64 = if rng.next_f64() < 0.5 { 4 } else { -5 };
    let mut avy: i64 = rng.uniform_usize(3) as i64 - 1;

    let frames_dir = cfg.dataset.root.join(clip_id).join("frames");
    let gt_dir = cfg.dataset.root.join(clip_id).join("gt");
    fs::create_dir_all(&frames_dir)?;
    fs::create_dir_all(&gt_dir)?;

    let mut labels = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let mut frame = bg.clone();
        for sq in &mut normals {
            let mut dx = rng.uniform_usize(3) as i64 - 1;
            let mut dy = rng.uniform_usize(3) as i64 - 1;
            sq.x = reflect(sq.x, &mut dx, (w as i64 - sq.side).max(0));
            sq.y = reflect(sq.y, &mut dy, (h as i64 - sq.side).max(0));
            sq.paint(&mut frame);
        }

        let anomalous = with_anomaly && t >= anom_start && t < anom_start + anom_frames;
        let mut mask = GrayFrame::filled(w, h, 0);
        if anomalous {
            anomaly.x = reflect(anomaly.x, &mut avx, (w as i64 - anomaly.side).max(0));
            anomaly.y = reflect(anomaly.y, &mut avy, (h as i64 - anomaly.side).max(0));
            anomaly.paint(&mut frame);
            let marker = Square {
                intensity: 255,
                ..anomaly
            };
            marker.paint(&mut mask);
        }
        labels.push(anomalous);

        pgm::write_pgm(&frames_dir.join(format!("frame_{t:06}.pgm")), &frame)?;
        if with_anomaly {
            pgm::write_pgm(&gt_dir.join(format!("mask_{t:06}.pgm")), &mask)?;
        }
    }

    let mut csv = fs::File::create(gt_dir.join("frame_labels.csv"))?;
    for (t, &label) in labels.iter().enumerate() {
        writeln!(csv, "{},{}", t, u8::from(label))?;
    }
    Ok(())
}

/// Writes every configured train and test clip under `dataset.root`,
/// deterministically from the run seed. Training clips are anomaly-free and
/// carry no masks; test clips get pixel masks for every frame.
pub fn generate_dataset(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let rng = Rng::new(cfg.seed);
    for (i, clip) in cfg.dataset.train.iter().enumerate() {
        generate_clip(cfg, clip, rng.fork(1_000 + i as u64), false)?;
    }
    for (i, clip) in cfg.dataset.test.iter().enumerate() {
        generate_clip(cfg, clip, rng.fork(2_000 + i as u64), true)?;
    }
    Ok(())
}

/// Recursively compares two generated dataset trees byte for byte; test
/// support for the determinism contract.
pub fn trees_identical(a: &Path, b: &Path) -> Result<bool> {
    let mut entries_a: Vec<_> = fs::read_dir(a)?.collect::<std::io::Result<_>>()?;
    let mut entries_b: Vec<_> = fs::read_dir(b)?.collect::<std::io::Result<_>>()?;
    entries_a.sort_by_key(|e| e.file_name());
    entries_b.sort_by_key(|e| e.file_name());
    if entries_a.len() != entries_b.len() {
        return Ok(false);
    }
    for (ea, eb) in entries_a.iter().zip(&entries_b) {
        if ea.file_name() != eb.file_name() {
            return Ok(false);
        }
        let (pa, pb) = (ea.path(), eb.path());
        if pa.is_dir() != pb.is_dir() {
            return Ok(false);
        }
        if pa.is_dir() {
            if !trees_identical(&pa, &pb)? {
                return Ok(false);
            }
        } else if fs::read(&pa)? != fs::read(&pb)? {
            return Ok(false);
        }
    }
    Ok(true)
}
