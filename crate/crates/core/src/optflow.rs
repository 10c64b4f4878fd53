//! Dense optical flow: an in-repo Horn–Schunck solver plus Middlebury `.flo`
//! ingestion so precomputed flow can be dropped in.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::GrayFrame;
use crate::linalg::Matrix;

/// Per-pixel displacement field between two consecutive frames, in
/// pixels/frame. `u` is the x-component, `v` the y-component; both are
/// height x width matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub u: Matrix,
    pub v: Matrix,
}

impl FlowField {
    pub fn new(u: Matrix, v: Matrix) -> Result<FlowField> {
        if u.rows() != v.rows() || u.cols() != v.cols() {
            return Err(Error::shape(format!(
                "flow components differ: {}x{} vs {}x{}",
                u.rows(),
                u.cols(),
                v.rows(),
                v.cols()
            )));
        }
        u.validate()?;
        v.validate()?;
        Ok(FlowField {
            width: u.cols(),
            height: u.rows(),
            u,
            v,
        })
    }

    pub fn zeros(width: usize, height: usize) -> FlowField {
        FlowField {
            width,
            height,
            u: Matrix::zeros(height, width),
            v: Matrix::zeros(height, width),
        }
    }
}

#[inline]
fn clamp_idx(i: isize, max: usize) -> usize {
    i.clamp(0, max as isize - 1) as usize
}

/// Brightness derivatives with replicate padding, averaged over both frames
/// so the constancy term is centered between them.
fn derivatives(prev: &[f64], next: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut ix = vec![0.0; w * h];
    let mut iy = vec![0.0; w * h];
    let mut it = vec![0.0; w * h];
    let at = |img: &[f64], x: isize, y: isize| img[clamp_idx(y, h) * w + clamp_idx(x, w)];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            ix[i] = 0.25
                * (at(prev, x + 1, y) - at(prev, x - 1, y) + at(next, x + 1, y)
                    - at(next, x - 1, y));
            iy[i] = 0.25
                * (at(prev, x, y + 1) - at(prev, x, y - 1) + at(next, x, y + 1)
                    - at(next, x, y - 1));
            it[i] = next[i] - prev[i];
        }
    }
    (ix, iy, it)
}

/// 4-neighbor average with replicate padding (border neighbors clamp to the
/// pixel itself).
#[inline]
fn neighbor_avg(field: &[f64], x: isize, y: isize, w: usize, h: usize) -> f64 {
    let at = |xx: isize, yy: isize| field[clamp_idx(yy, h) * w + clamp_idx(xx, w)];
    0.25 * (at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1))
}

/// The discrete objective the Jacobi iteration minimizes:
/// data term Σ (Ix·u + Iy·v + It)² plus α²/8 · Σ over clamped 4-neighbor
/// pairs of squared flow differences (both components).
fn hs_energy(ix: &[f64], iy: &[f64], it: &[f64], u: &[f64], v: &[f64], w: usize, h: usize, alpha: f64) -> f64 {
    let mut data = 0.0;
    let mut smooth = 0.0;
    let at = |f: &[f64], x: isize, y: isize| f[clamp_idx(y, h) * w + clamp_idx(x, w)];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            let r = ix[i] * u[i] + iy[i] * v[i] + it[i];
            data += r * r;
            for (dx, dy) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
                let du = u[i] - at(u, x + dx, y + dy);
                let dv = v[i] - at(v, x + dx, y + dy);
                smooth += du * du + dv * dv;
            }
        }
    }
    data + alpha * alpha * smooth / 8.0
}

/// Classic Horn–Schunck: Jacobi iteration on the brightness-constancy plus
/// smoothness energy. Deterministic given its inputs. Returns the flow field
/// along with the energy value before each update (length `iters + 1`,
/// trailing entry is the final energy).
pub fn horn_schunck_with_energy(
    prev: &GrayFrame,
    next: &GrayFrame,
    alpha: f64,
    iters: usize,
) -> Result<(FlowField, Vec<f64>)> {
    if prev.width != next.width || prev.height != next.height {
        return Err(Error::shape(format!(
            "frame sizes differ: {}x{} vs {}x{}",
            prev.width, prev.height, next.width, next.height
        )));
    }
    if alpha <= 0.0 {
        return Err(Error::domain(format!("alpha must be > 0, got {alpha}")));
    }
    if iters < 1 {
        return Err(Error::domain("iters must be >= 1".to_string()));
    }
    let (w, h) = (prev.width, prev.height);
    // Raw 0..255 intensities: the conventional scaling for which alpha ~ 1
    // balances the data term against the smoothness term.
    let to_f = |f: &GrayFrame| -> Vec<f64> { f.pixels.iter().map(|&p| p as f64).collect() };
    let prev_f = to_f(prev);
    let next_f = to_f(next);
    let (ix, iy, it) = derivatives(&prev_f, &next_f, w, h);

    let mut u = vec![0.0; w * h];
    let mut v = vec![0.0; w * h];
    let mut u_next = vec![0.0; w * h];
    let mut v_next = vec![0.0; w * h];
    let a2 = alpha * alpha;

    let mut energies = Vec::with_capacity(iters + 1);
    for _ in 0..iters {
        energies.push(hs_energy(&ix, &iy, &it, &u, &v, w, h, alpha));
        for y in 0..h as isize {
            for x in 0..w as isize {
                let i = y as usize * w + x as usize;
                let ubar = neighbor_avg(&u, x, y, w, h);
                let vbar = neighbor_avg(&v, x, y, w, h);
                let denom = a2 + ix[i] * ix[i] + iy[i] * iy[i];
                let common = (ix[i] * ubar + iy[i] * vbar + it[i]) / denom;
                u_next[i] = ubar - ix[i] * common;
                v_next[i] = vbar - iy[i] * common;
            }
        }
        std::mem::swap(&mut u, &mut u_next);
        std::mem::swap(&mut v, &mut v_next);
    }
    energies.push(hs_energy(&ix, &iy, &it, &u, &v, w, h, alpha));

    let field = FlowField::new(Matrix::from_vec(h, w, u)?, Matrix::from_vec(h, w, v)?)?;
    Ok((field, energies))
}

/// See [`horn_schunck_with_energy`]; this variant drops the energy trace.
pub fn horn_schunck(prev: &GrayFrame, next: &GrayFrame, alpha: f64, iters: usize) -> Result<FlowField> {
    horn_schunck_with_energy(prev, next, alpha, iters).map(|(f, _)| f)
}

const FLO_MAGIC: f32 = 202021.25;

/// Reads a Middlebury `.flo` file: f32 magic 202021.25, then width and height
/// as little-endian i32, then row-major interleaved (u, v) f32 pairs.
pub fn load_flo(path: &Path) -> Result<FlowField> {
    let bytes = fs::read(path)?;
    parse_flo(&bytes).map_err(|e| match e {
        Error::Format(msg) => Error::format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_flo(bytes: &[u8]) -> Result<FlowField> {
    if bytes.len() < 12 {
        return Err(Error::format("flo: header truncated".to_string()));
    }
    let magic = f32::from_le_bytes(bytes[0..4].try_into().unwrap());
    if magic != FLO_MAGIC {
        return Err(Error::format(format!(
            "flo: bad magic {magic} (expected {FLO_MAGIC})"
        )));
    }
    let width = i32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = i32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if width <= 0 || height <= 0 {
        return Err(Error::format(format!("flo: bad dimensions {width}x{height}")));
    }
    let (w, h) = (width as usize, height as usize);
    let expected = 12 + w * h * 2 * 4;
    if bytes.len() < expected {
        return Err(Error::format(format!(
            "flo: payload truncated, expected {expected} bytes, got {}",
            bytes.len()
        )));
    }
    let mut u = Matrix::zeros(h, w);
    let mut v = Matrix::zeros(h, w);
    let mut off = 12;
    for y in 0..h {
        for x in 0..w {
            let fu = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            let fv = f32::from_le_bytes(bytes[off + 4..off + 8].try_into().unwrap());
            if !fu.is_finite() || !fv.is_finite() {
                return Err(Error::format(format!(
                    "flo: non-finite flow at ({x},{y})"
                )));
            }
            u.set(y, x, fu as f64);
            v.set(y, x, fv as f64);
            off += 8;
        }
    }
    FlowField::new(u, v)
}

/// Writes a flow field in Middlebury `.flo` format (values narrowed to f32).
pub fn write_flo(path: &Path, field: &FlowField) -> Result<()> {
    let mut out = Vec::with_capacity(12 + field.width * field.height * 8);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(field.width as i32).to_le_bytes());
    out.extend_from_slice(&(field.height as i32).to_le_bytes());
    for y in 0..field.height {
        for x in 0..field.width {
            out.extend_from_slice(&(field.u.get(y, x) as f32).to_le_bytes());
            out.extend_from_slice(&(field.v.get(y, x) as f32).to_le_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}
