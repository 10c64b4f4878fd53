//! Late fusion: learn the simplex-constrained weight vector α over the three
//! pipelines from per-pipeline feature subspace energies, then combine
//! per-pipeline anomaly scores linearly.
//!
//! The weight recipe is sequential: per pipeline, take the top-d eigenvectors
//! of S·Sᵀ as the subspace map W_s, form the cost cᵏ = −tr(W_s S (W_s S)ᵀ) /
//! (2λ_s), and project c onto the probability simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matmul, matmul_transb, sym_eig, Matrix, Vector};
use crate::sdae::FeatureVector;

/// Pipelines are always ordered [appearance, motion, joint] in fusion
/// vectors and arrays.
pub const PIPELINE_ORDER: [&str; 3] = ["appearance", "motion", "joint"];

/// Strict-positivity floor applied after simplex projection.
pub const SIMPLEX_FLOOR: f64 = 1e-6;

/// Training-score mean/stddev used to standardize one pipeline's anomaly
/// scores before combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreCalibration {
    pub mean: f64,
    pub std: f64,
}

impl ScoreCalibration {
    pub fn apply(&self, raw: f64) -> f64 {
        (raw - self.mean) / self.std
    }
}

/// Learned fusion state: the simplex weights, the per-pipeline subspace maps
/// they were derived from, and optional score calibration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FusionWeights {
    /// α ordered [appearance, motion, joint]; strictly positive, sums to 1.
    pub alpha: Vector,
    pub subspace_maps: Vec<Matrix>,
    pub subspace_dim: usize,
    pub lambda_s: f64,
    /// Present when scores are standardized before combination.
    pub calibration: Option<[ScoreCalibration; 3]>,
}

impl FusionWeights {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.len() != 3 {
            return Err(Error::shape("alpha must have length 3".to_string()));
        }
        let sum: f64 = self.alpha.data().iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.alpha.data().iter().any(|&a| a <= 0.0) {
            return Err(Error::domain(format!(
                "alpha must be strictly positive and sum to 1, got {:?}",
                self.alpha.data()
            )));
        }
        Ok(())
    }

    /// Standardizes raw per-pipeline scores when calibration is present.
    pub fn calibrated(&self, raw: [f64; 3]) -> [f64; 3] {
        match &self.calibration {
            Some(cal) => [
                cal[0].apply(raw[0]),
                cal[1].apply(raw[1]),
                cal[2].apply(raw[2]),
            ],
            None => raw,
        }
    }
}

/// Builds the feature-dim x N matrix whose columns are the given features.
pub fn feature_matrix(features: &[FeatureVector]) -> Result<Matrix> {
    if features.is_empty() {
        return Err(Error::domain("no features".to_string()));
    }
    let dim = features[0].values.len();
    let mut m = Matrix::zeros(dim, features.len());
    for (col, f) in features.iter().enumerate() {
        if f.values.len() != dim {
            return Err(Error::shape(format!(
                "feature {col} has dim {}, expected {dim}",
                f.values.len()
            )));
        }
        for r in 0..dim {
            m.set(r, col, f.values.get(r));
        }
    }
    Ok(m)
}

/// Rows of the returned matrix are the top-`d` eigenvectors of S·Sᵀ, where
/// the columns of `features` are training feature vectors.
pub fn learn_subspace(features: &Matrix, d: usize) -> Result<Matrix> {
    let dim = features.rows();
    if d == 0 || d > dim {
        return Err(Error::domain(format!(
            "subspace dim must be in 1..={dim}, got {d}"
        )));
    }
    let gram = matmul_transb(features, features)?;
    let (values, vectors) = sym_eig(&gram, d)?;
    if values.data().iter().any(|&v| v < 1e-12) {
        log::warn!(
            "S·Sᵀ is rank-deficient for d = {d} (smallest kept eigenvalue {:.3e})",
            values.data().iter().cloned().fold(f64::INFINITY, f64::min)
        );
    }
    Ok(vectors)
}

/// cᵏ = −tr(W_s S (W_s S)ᵀ) / (2 λ_s) per pipeline.
pub fn fusion_costs(features: &[Matrix; 3], maps: &[Matrix; 3], lambda_s: f64) -> Result<Vector> {
    if lambda_s <= 0.0 {
        return Err(Error::domain(format!("lambda_s must be > 0, got {lambda_s}")));
    }
    let mut c = Vector::zeros(3);
    for k in 0..3 {
        let projected = matmul(&maps[k], &features[k])?;
        // tr(P Pᵀ) is the squared Frobenius norm of P.
        c.set(k, -projected.frobenius_sq() / (2.0 * lambda_s));
    }
    Ok(c)
}

/// Euclidean projection onto the probability simplex by sort-and-threshold,
/// then an ε-floor so every component stays strictly positive: components
/// that landed below `SIMPLEX_FLOOR` are raised to it and the slack above the
/// floor is rescaled so the sum stays exactly 1.
pub fn project_simplex(c: &Vector) -> Vector {
    let n = c.len();
    if n == 0 {
        return Vector::zeros(0);
    }
    let uniform = || Vector::from_raw(vec![1.0 / n as f64; n]);
    if n as f64 * SIMPLEX_FLOOR >= 1.0 {
        return uniform();
    }

    let mut sorted: Vec<f64> = c.data().to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in sorted.iter().enumerate() {
        cumulative += ui;
        let t = (cumulative - 1.0) / (i as f64 + 1.0);
        if ui - t > 0.0 {
            theta = t;
        }
    }
    let mut alpha: Vec<f64> = c.data().iter().map(|&v| (v - theta).max(0.0)).collect();

    for a in &mut alpha {
        if *a < SIMPLEX_FLOOR {
            *a = SIMPLEX_FLOOR;
        }
    }
    let slack: f64 = alpha.iter().map(|a| a - SIMPLEX_FLOOR).sum();
    if slack <= 0.0 {
        return uniform();
    }
    let scale = (1.0 - n as f64 * SIMPLEX_FLOOR) / slack;
    for a in &mut alpha {
        *a = SIMPLEX_FLOOR + (*a - SIMPLEX_FLOOR) * scale;
    }
    Vector::from_raw(alpha)
}

/// Sequential weight learning: subspaces, costs, simplex projection.
/// `features[k]` is the feature-dim x N matrix of pipeline k in the order
/// [appearance, motion, joint].
pub fn learn_weights(features: &[Matrix; 3], d: usize, lambda_s: f64) -> Result<FusionWeights> {
    let maps_vec: Vec<Matrix> = features
        .iter()
        .map(|s| learn_subspace(s, d))
        .collect::<Result<_>>()?;
    let maps: [Matrix; 3] = [
        maps_vec[0].clone(),
        maps_vec[1].clone(),
        maps_vec[2].clone(),
    ];
    let costs = fusion_costs(features, &maps, lambda_s)?;
    let alpha = project_simplex(&costs);
    let weights = FusionWeights {
        alpha,
        subspace_maps: maps_vec,
        subspace_dim: d,
        lambda_s,
        calibration: None,
    };
    weights.validate()?;
    Ok(weights)
}

/// Final anomaly score 𝒜 = Σₖ αᵏ·Aᵏ over [appearance, motion, joint].
pub fn combine_scores(weights: &FusionWeights, scores: [f64; 3]) -> f64 {
    weights
        .alpha
        .data()
        .iter()
        .zip(scores.iter())
        .map(|(a, s)| a * s)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn columns(cols: &[Vec<f64>]) -> Matrix {
        let dim = cols[0].len();
        let mut m = Matrix::zeros(dim, cols.len());
        for (c, col) in cols.iter().enumerate() {
            for r in 0..dim {
                m.set(r, c, col[r]);
            }
        }
        m
    }

    /// Brute-force projection: scan the simplex on a grid.
    fn grid_project(c: &[f64], step: f64) -> Vec<f64> {
        let g = (1.0 / step).round() as usize;
        let mut best = vec![0.0; 3];
        let mut best_d = f64::INFINITY;
        for i in 0..=g {
            for j in 0..=(g - i) {
                let k = g - i - j;
                let cand = [i as f64 / g as f64, j as f64 / g as f64, k as f64 / g as f64];
                let d: f64 = cand.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best_d {
                    best_d = d;
                    best = cand.to_vec();
                }
            }
        }
        best
    }

    #[test]
    fn subspace_of_diagonal_gram_is_axis_aligned() {
        // Columns scaled so S·Sᵀ is diagonal with distinct entries.
        let s = columns(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ]);
        let w = learn_subspace(&s, 2).unwrap();
        assert_abs_diff_eq!(w.get(0, 0).abs(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(w.get(1, 2).abs(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn subspace_finds_dominant_direction() {
        let mut rng = Rng::new(2);
        let mut cols = Vec::new();
        for _ in 0..50 {
            let t = rng.uniform(-1.0, 1.0);
            cols.push(vec![t + rng.uniform(-0.05, 0.05), t + rng.uniform(-0.05, 0.05)]);
        }
        let s = columns(&cols);
        let w = learn_subspace(&s, 1).unwrap();
        let dir = [w.get(0, 0), w.get(0, 1)];
        let target = [1.0 / 2.0f64.sqrt(), 1.0 / 2.0f64.sqrt()];
        let cosine = (dir[0] * target[0] + dir[1] * target[1]).abs();
        assert!(cosine >= (5.0f64).to_radians().cos(), "cosine {cosine}");
    }

    #[test]
    fn full_subspace_preserves_trace() {
        let mut rng = Rng::new(3);
        let mut cols = Vec::new();
        for _ in 0..20 {
            cols.push((0..4).map(|_| rng.uniform(-1.0, 1.0)).collect());
        }
        let s = columns(&cols);
        let w = learn_subspace(&s, 4).unwrap();
        let ws = matmul(&w, &s).unwrap();
        let gram = matmul_transb(&s, &s).unwrap();
        let trace: f64 = (0..4).map(|i| gram.get(i, i)).sum();
        assert_abs_diff_eq!(ws.frobenius_sq(), trace, epsilon = 1e-8 * trace);
    }

    #[test]
    fn costs_zero_for_zero_features() {
        let z = Matrix::zeros(3, 5);
        let maps = [
            Matrix::identity(3),
            Matrix::identity(3),
            Matrix::identity(3),
        ];
        let c = fusion_costs(&[z.clone(), z.clone(), z], &maps, 0.1).unwrap();
        assert_eq!(c.data(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn costs_plug_in_trace() {
        // One pipeline with projected trace t and λ_s = 0.5 gives c = −t.
        let s = columns(&[vec![1.0, 0.0], vec![1.0, 1.0]]);
        let map = Matrix::identity(2);
        let trace = matmul(&map, &s).unwrap().frobenius_sq();
        let c = fusion_costs(
            &[s.clone(), s.clone(), s],
            &[map.clone(), map.clone(), map],
            0.5,
        )
        .unwrap();
        assert_abs_diff_eq!(c.get(0), -trace, epsilon = 1e-12);
    }

    #[test]
    fn costs_match_recomputed_trace() {
        let mut rng = Rng::new(4);
        let mut mats = Vec::new();
        for _ in 0..3 {
            let cols: Vec<Vec<f64>> = (0..7)
                .map(|_| (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect())
                .collect();
            mats.push(columns(&cols));
        }
        let features: [Matrix; 3] = [mats[0].clone(), mats[1].clone(), mats[2].clone()];
        let maps: [Matrix; 3] = [
            learn_subspace(&features[0], 2).unwrap(),
            learn_subspace(&features[1], 2).unwrap(),
            learn_subspace(&features[2], 2).unwrap(),
        ];
        let lambda = 0.1;
        let c = fusion_costs(&features, &maps, lambda).unwrap();
        for k in 0..3 {
            let p = matmul(&maps[k], &features[k]).unwrap();
            let mut trace = 0.0;
            for r in 0..p.rows() {
                for v in p.row(r) {
                    trace += v * v;
                }
            }
            assert_abs_diff_eq!(c.get(k), -trace / (2.0 * lambda), epsilon = 1e-10);
        }
    }

    #[test]
    fn projection_fixes_point_already_on_simplex() {
        let c = Vector::from_vec(vec![0.2, 0.5, 0.3]).unwrap();
        let alpha = project_simplex(&c);
        for (a, e) in alpha.data().iter().zip(c.data()) {
            assert_abs_diff_eq!(a, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn projection_of_constant_vector_is_uniform() {
        for t in [-3.0, 0.0, 0.4, 7.0] {
            let alpha = project_simplex(&Vector::from_vec(vec![t, t, t]).unwrap());
            for a in alpha.data() {
                assert_abs_diff_eq!(*a, 1.0 / 3.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn projection_matches_grid_search() {
        let c = vec![0.9, 0.4, -0.2];
        let alpha = project_simplex(&Vector::from_vec(c.clone()).unwrap());
        let brute = grid_project(&c, 1e-3);
        for (a, b) in alpha.data().iter().zip(&brute) {
            assert!((a - b).abs() <= 2e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn projection_sum_and_floor() {
        let mut rng = Rng::new(6);
        for _ in 0..200 {
            let c = Vector::from_vec(vec![
                rng.uniform(-5.0, 5.0),
                rng.uniform(-5.0, 5.0),
                rng.uniform(-5.0, 5.0),
            ])
            .unwrap();
            let alpha = project_simplex(&c);
            let sum: f64 = alpha.data().iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            for a in alpha.data() {
                assert!(*a >= SIMPLEX_FLOOR);
            }
            // Idempotence.
            let again = project_simplex(&alpha);
            for (a, b) in again.data().iter().zip(alpha.data()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn identical_pipelines_get_uniform_weights() {
        let mut rng = Rng::new(7);
        let cols: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..4).map(|_| rng.uniform(0.0, 1.0)).collect())
            .collect();
        let s = columns(&cols);
        let w = learn_weights(&[s.clone(), s.clone(), s], 2, 0.1).unwrap();
        for a in w.alpha.data() {
            assert_abs_diff_eq!(*a, 1.0 / 3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn larger_trace_gets_strictly_smaller_weight() {
        let mut rng = Rng::new(8);
        let base: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..3).map(|_| rng.uniform(-0.5, 0.5)).collect())
            .collect();
        let small = columns(&base);
        let big_cols: Vec<Vec<f64>> = base.iter().map(|c| c.iter().map(|v| v * 1.5).collect()).collect();
        let big = columns(&big_cols);
        let w = learn_weights(&[big, small.clone(), small.clone()], 2, 10.0).unwrap();
        assert!(w.alpha.get(0) < w.alpha.get(1));
        assert_abs_diff_eq!(w.alpha.get(1), w.alpha.get(2), epsilon = 1e-9);
    }

    #[test]
    fn learned_weights_are_simplex_shaped() {
        // Shape contract shared with the reported reference weights such as
        // [0.2, 0.4, 0.4]: three positive values summing to 1.
        let mut rng = Rng::new(9);
        let mats: Vec<Matrix> = (0..3)
            .map(|_| {
                let cols: Vec<Vec<f64>> = (0..9)
                    .map(|_| (0..5).map(|_| rng.uniform(0.0, 1.0)).collect())
                    .collect();
                columns(&cols)
            })
            .collect();
        let w = learn_weights(&[mats[0].clone(), mats[1].clone(), mats[2].clone()], 3, 0.1).unwrap();
        w.validate().unwrap();
        let sum: f64 = w.alpha.data().iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        assert!(w.alpha.data().iter().all(|&a| a > 0.0));
    }

    #[test]
    fn combine_is_dot_product() {
        let w = FusionWeights {
            alpha: Vector::from_vec(vec![1.0 / 3.0; 3]).unwrap(),
            subspace_maps: vec![],
            subspace_dim: 1,
            lambda_s: 0.1,
            calibration: None,
        };
        assert_abs_diff_eq!(combine_scores(&w, [3.0, 0.0, -3.0]), 0.0, epsilon = 1e-15);

        let eps = 1e-9;
        let near_appearance = FusionWeights {
            alpha: Vector::from_vec(vec![1.0 - 2.0 * eps, eps, eps]).unwrap(),
            subspace_maps: vec![],
            subspace_dim: 1,
            lambda_s: 0.1,
            calibration: None,
        };
        let fused = combine_scores(&near_appearance, [2.5, -40.0, 40.0]);
        assert_abs_diff_eq!(fused, 2.5, epsilon = 1e-6);
    }

    #[test]
    fn calibration_standardizes_before_combination() {
        let w = FusionWeights {
            alpha: Vector::from_vec(vec![0.5, 0.25, 0.25]).unwrap(),
            subspace_maps: vec![],
            subspace_dim: 1,
            lambda_s: 0.1,
            calibration: Some([
                ScoreCalibration { mean: 1.0, std: 2.0 },
                ScoreCalibration { mean: 0.0, std: 1.0 },
                ScoreCalibration { mean: -1.0, std: 0.5 },
            ]),
        };
        let z = w.calibrated([3.0, 4.0, 0.0]);
        assert_eq!(z, [1.0, 4.0, 2.0]);
    }

    proptest! {
        #[test]
        fn projection_permutation_equivariant(
            a in -4.0f64..4.0, b in -4.0f64..4.0, c in -4.0f64..4.0
        ) {
            let base = project_simplex(&Vector::from_vec(vec![a, b, c]).unwrap());
            let perm = project_simplex(&Vector::from_vec(vec![c, a, b]).unwrap());
            prop_assert!((base.get(2) - perm.get(0)).abs() <= 1e-12);
            prop_assert!((base.get(0) - perm.get(1)).abs() <= 1e-12);
            prop_assert!((base.get(1) - perm.get(2)).abs() <= 1e-12);
        }

        #[test]
        fn combine_matches_independent_dot(seed in 0u64..300) {
            let mut rng = Rng::new(seed);
            let alpha = project_simplex(&Vector::from_vec(vec![
                rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
            ]).unwrap());
            let scores = [rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)];
            let w = FusionWeights {
                alpha: alpha.clone(),
                subspace_maps: vec![],
                subspace_dim: 1,
                lambda_s: 0.1,
                calibration: None,
            };
            let expected: f64 = alpha.data().iter().zip(scores.iter()).map(|(x, y)| x * y).sum();
            prop_assert_eq!(combine_scores(&w, scores), expected);
        }
    }
}
