//! One-class SVM per representation type. The dual
//!
//! minimize ½ Σᵢⱼ αᵢαⱼ k(sᵢ,sⱼ)  s.t.  0 ≤ αᵢ ≤ 1/(νN),  Σαᵢ = 1
//!
//! is solved by pairwise SMO updates on the maximal violating pair. Anomaly
//! scores follow the ρ − wᵀΦ(s) convention: positive means outlier side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PipelineKind;
use crate::linalg::{Matrix, Rng, Vector};
use crate::sdae::FeatureVector;

/// Above this training size the kernel matrix is no longer cached densely;
/// rows are recomputed on demand.
const DENSE_KERNEL_LIMIT: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcsvmConfig {
    /// Expected outlier fraction bound, in (0, 1].
    pub nu: f64,
    /// RBF bandwidth σ.
    pub rbf_sigma: f64,
    /// KKT violation tolerance for SMO convergence.
    pub tolerance: f64,
    /// Iteration budget: at most `max_passes * N` pair updates.
    pub max_passes: usize,
}

impl OcsvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.nu && self.nu <= 1.0) {
            return Err(Error::config(format!("nu must be in (0,1], got {}", self.nu)));
        }
        if self.rbf_sigma <= 0.0 {
            return Err(Error::config(format!(
                "rbf_sigma must be > 0, got {}",
                self.rbf_sigma
            )));
        }
        if self.tolerance <= 0.0 {
            return Err(Error::config("tolerance must be > 0".to_string()));
        }
        if self.max_passes == 0 {
            return Err(Error::config("max_passes must be >= 1".to_string()));
        }
        Ok(())
    }
}

/// Trained one-class SVM: support vectors, their dual coefficients, and the
/// offset ρ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OcsvmModel {
    pub support_vectors: Matrix,
    pub dual_coeffs: Vector,
    pub rho: f64,
    pub config: OcsvmConfig,
    pub kind: PipelineKind,
    /// Size of the training set the model was fit on.
    pub train_n: usize,
}

/// exp(−‖a−b‖² / (2σ²)).
pub fn rbf_kernel(a: &FeatureVector, b: &FeatureVector, sigma: f64) -> Result<f64> {
    if a.values.len() != b.values.len() {
        return Err(Error::shape(format!(
            "feature dims differ: {} vs {}",
            a.values.len(),
            b.values.len()
        )));
    }
    if sigma <= 0.0 {
        return Err(Error::domain(format!("sigma must be > 0, got {sigma}")));
    }
    Ok(rbf_raw(a.values.data(), b.values.data(), sigma))
}

#[inline]
fn rbf_raw(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let mut d2 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        d2 += d * d;
    }
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// Median pairwise distance over a subset of at most 1,000 samples; the
/// standard bandwidth heuristic. Falls back to 1.0 when the data collapses
/// to a point.
pub fn median_sigma(features: &[FeatureVector], rng: &mut Rng) -> f64 {
    if features.len() < 2 {
        return 1.0;
    }
    let subset: Vec<&FeatureVector> = if features.len() > 1000 {
        rng.sample_indices(features.len(), 1000)
            .into_iter()
            .map(|i| &features[i])
            .collect()
    } else {
        features.iter().collect()
    };
    let mut dists = Vec::with_capacity(subset.len() * (subset.len() - 1) / 2);
    for i in 0..subset.len() {
        for j in (i + 1)..subset.len() {
            let mut d2 = 0.0;
            for (x, y) in subset[i].values.data().iter().zip(subset[j].values.data()) {
                let d = x - y;
                d2 += d * d;
            }
            dists.push(d2.sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = dists[dists.len() / 2];
    if median > 0.0 {
        median
    } else {
        1.0
    }
}

enum KernelCache<'a> {
    Dense(Matrix),
    Lazy { rows: &'a Matrix, sigma: f64 },
}

impl<'a> KernelCache<'a> {
    fn build(rows: &'a Matrix, sigma: f64) -> KernelCache<'a> {
        let n = rows.rows();
        if n <= DENSE_KERNEL_LIMIT {
            let mut k = Matrix::zeros(n, n);
            for i in 0..n {
                k.set(i, i, 1.0);
                for j in (i + 1)..n {
                    let v = rbf_raw(rows.row(i), rows.row(j), sigma);
                    k.set(i, j, v);
                    k.set(j, i, v);
                }
            }
            KernelCache::Dense(k)
        } else {
            KernelCache::Lazy { rows, sigma }
        }
    }

    fn row(&self, i: usize, out: &mut Vec<f64>) {
        match self {
            KernelCache::Dense(k) => {
                out.clear();
                out.extend_from_slice(k.row(i));
            }
            KernelCache::Lazy { rows, sigma } => {
                out.clear();
                let ri = rows.row(i);
                for j in 0..rows.rows() {
                    out.push(rbf_raw(ri, rows.row(j), *sigma));
                }
            }
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        match self {
            KernelCache::Dense(k) => k.get(i, j),
            KernelCache::Lazy { rows, sigma } => rbf_raw(rows.row(i), rows.row(j), *sigma),
        }
    }
}

/// Fits the dual by SMO-style coordinate updates on the maximal violating
/// pair until KKT violations drop below `cfg.tolerance`.
pub fn train(features: &[FeatureVector], cfg: &OcsvmConfig) -> Result<OcsvmModel> {
    cfg.validate()?;
    let n = features.len();
    if n < 2 {
        return Err(Error::domain(format!("need at least 2 samples, got {n}")));
    }
    let kind = features[0].kind;
    let dim = features[0].values.len();
    for (i, f) in features.iter().enumerate() {
        if f.kind != kind {
            return Err(Error::domain(format!("feature {i} has kind {:?}, expected {:?}", f.kind, kind)));
        }
        if f.values.len() != dim {
            return Err(Error::shape(format!(
                "feature {i} has dim {}, expected {dim}",
                f.values.len()
            )));
        }
    }

    let mut rows = Matrix::zeros(n, dim);
    for (i, f) in features.iter().enumerate() {
        rows.row_mut(i).copy_from_slice(f.values.data());
    }
    let kernel = KernelCache::build(&rows, cfg.rbf_sigma);
    let c = 1.0 / (cfg.nu * n as f64);

    // Feasible start: the first ⌊νN⌋ points take the box maximum, the next
    // one the remainder.
    let mut alpha = vec![0.0f64; n];
    let full = (cfg.nu * n as f64).floor() as usize;
    for a in alpha.iter_mut().take(full.min(n)) {
        *a = c;
    }
    if full < n {
        alpha[full] = (1.0 - full as f64 * c).max(0.0);
    }

    // Gradient of the dual objective: g = K α.
    let mut g = vec![0.0f64; n];
    let mut krow = Vec::with_capacity(n);
    for (i, gi) in g.iter_mut().enumerate() {
        kernel.row(i, &mut krow);
        *gi = krow.iter().zip(&alpha).map(|(k, a)| k * a).sum();
    }

    let bound_slack = 1e-12 * c;
    let max_iters = cfg.max_passes.saturating_mul(n);
    let mut converged = false;
    let mut krow_j = Vec::with_capacity(n);
    for _ in 0..max_iters {
        // Maximal violating pair: the point most able to take mass vs. the
        // point most needing to shed it.
        let mut i_up = usize::MAX;
        let mut g_up = f64::INFINITY;
        let mut j_dn = usize::MAX;
        let mut g_dn = f64::NEG_INFINITY;
        for idx in 0..n {
            if alpha[idx] < c - bound_slack && g[idx] < g_up {
                g_up = g[idx];
                i_up = idx;
            }
            if alpha[idx] > bound_slack && g[idx] > g_dn {
                g_dn = g[idx];
                j_dn = idx;
            }
        }
        if i_up == usize::MAX || j_dn == usize::MAX || g_dn - g_up <= cfg.tolerance {
            converged = true;
            break;
        }

        let (i, j) = (i_up, j_dn);
        let eta = kernel.at(i, i) + kernel.at(j, j) - 2.0 * kernel.at(i, j);
        let t_max = (c - alpha[i]).min(alpha[j]);
        let t = if eta > 1e-15 {
            ((g[j] - g[i]) / eta).min(t_max)
        } else {
            t_max
        };
        if t <= 0.0 {
            converged = true;
            break;
        }
        // Exact line search on a convex 1-D section: the dual objective can
        // only go down. Δobj = t(gᵢ − gⱼ) + ½t²η.
        debug_assert!(t * (g[i] - g[j]) + 0.5 * t * t * eta <= 1e-12);
        alpha[i] += t;
        alpha[j] -= t;
        if alpha[j] < bound_slack {
            alpha[j] = 0.0;
        }

        kernel.row(i, &mut krow);
        kernel.row(j, &mut krow_j);
        for ((gv, ki), kj) in g.iter_mut().zip(&krow).zip(&krow_j) {
            *gv += t * (ki - kj);
        }
    }
    if !converged {
        return Err(Error::convergence(format!(
            "SMO did not reach tolerance {} within {} pair updates",
            cfg.tolerance, max_iters
        )));
    }

    // ρ from margin support vectors: wᵀΦ(sᵢ) = ρ exactly there.
    let margin_band = 1e-7 * c;
    let margin: Vec<usize> = (0..n)
        .filter(|&i| alpha[i] > margin_band && alpha[i] < c - margin_band)
        .collect();
    let rho = if margin.is_empty() {
        let sv_g: Vec<f64> = (0..n).filter(|&i| alpha[i] > 0.0).map(|i| g[i]).collect();
        log::warn!("no margin support vector found; falling back to min over SVs for rho");
        sv_g.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        margin.iter().map(|&i| g[i]).sum::<f64>() / margin.len() as f64
    };

    let sv_idx: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0).collect();
    let mut support_vectors = Matrix::zeros(sv_idx.len(), dim);
    let mut dual_coeffs = Vector::zeros(sv_idx.len());
    for (r, &i) in sv_idx.iter().enumerate() {
        support_vectors.row_mut(r).copy_from_slice(rows.row(i));
        dual_coeffs.set(r, alpha[i]);
    }

    Ok(OcsvmModel {
        support_vectors,
        dual_coeffs,
        rho,
        config: *cfg,
        kind,
        train_n: n,
    })
}

impl OcsvmModel {
    /// wᵀΦ(s) in the kernel expansion: Σᵢ αᵢ k(svᵢ, s).
    pub fn projection(&self, s: &FeatureVector) -> Result<f64> {
        if s.kind != self.kind {
            return Err(Error::domain(format!(
                "feature kind {:?} does not match model kind {:?}",
                s.kind, self.kind
            )));
        }
        if s.values.len() != self.support_vectors.cols() {
            return Err(Error::shape(format!(
                "feature dim {} does not match model dim {}",
                s.values.len(),
                self.support_vectors.cols()
            )));
        }
        let mut acc = 0.0;
        for i in 0..self.support_vectors.rows() {
            acc += self.dual_coeffs.get(i)
                * rbf_raw(self.support_vectors.row(i), s.values.data(), self.config.rbf_sigma);
        }
        Ok(acc)
    }

    /// ½ αᵀKα over the stored support vectors.
    pub fn dual_objective(&self) -> f64 {
        let m = self.support_vectors.rows();
        let mut obj = 0.0;
        for i in 0..m {
            for j in 0..m {
                obj += self.dual_coeffs.get(i)
                    * self.dual_coeffs.get(j)
                    * rbf_raw(
                        self.support_vectors.row(i),
                        self.support_vectors.row(j),
                        self.config.rbf_sigma,
                    );
            }
        }
        0.5 * obj
    }

    pub fn n_support_vectors(&self) -> usize {
        self.support_vectors.rows()
    }
}

/// Outlier score A(s) = ρ − wᵀΦ(s); larger is more anomalous.
pub fn score(model: &OcsvmModel, s: &FeatureVector) -> Result<f64> {
    Ok(model.rho - model.projection(s)?)
}
