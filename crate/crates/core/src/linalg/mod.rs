//! Dense vector/matrix arithmetic, symmetric eigendecomposition and seeded
//! sampling. Everything is `f64`; constructors reject non-finite values so
//! downstream code never has to re-check.

mod rng;

pub use rng::Rng;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from a row-major buffer, rejecting length mismatches and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Matrix> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("matrix entries must be finite".to_string()));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::shape("ragged rows".to_string()));
        }
        Matrix::from_vec(r, c, rows.concat())
    }

    /// Internal constructor for values produced by our own arithmetic.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Matrix {
        debug_assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// Validates the stored-value invariants; used after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::shape("matrix data length mismatch".to_string()));
        }
        if !self.data.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("matrix entries must be finite".to_string()));
        }
        Ok(())
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// self -= s * other (same shape).
    pub fn sub_scaled_in_place(&mut self, other: &Matrix, s: f64) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a -= s * b;
        }
    }

    pub fn col_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (m, v) in means.iter_mut().zip(self.row(r)) {
                *m += v;
            }
        }
        let n = self.rows.max(1) as f64;
        for m in &mut means {
            *m /= n;
        }
        means
    }
}

/// Dense vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(len: usize) -> Vector {
        Vector {
            data: vec![0.0; len],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Result<Vector> {
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("vector entries must be finite".to_string()));
        }
        Ok(Vector { data })
    }

    pub(crate) fn from_raw(data: Vec<f64>) -> Vector {
        Vector { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.data[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: f64) {
        self.data[i] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn validate(&self) -> Result<()> {
        if !self.data.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("vector entries must be finite".to_string()));
        }
        Ok(())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// Standard matrix product; `a.cols` must equal `b.rows`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::shape(format!(
            "matmul: {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    // ikj order keeps the inner loop streaming over contiguous rows.
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            if aik == 0.0 {
                continue;
            }
            let b_row = &b.data[k * b.cols..(k + 1) * b.cols];
            for (o, bv) in out_row.iter_mut().zip(b_row) {
                *o += aik * bv;
            }
        }
    }
    Ok(out)
}

/// a · bᵀ; `a.cols` must equal `b.cols`.
pub fn matmul_transb(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.cols {
        return Err(Error::shape(format!(
            "matmul_transb: {}x{} by ({}x{})ᵀ",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Matrix::zeros(a.rows, b.rows);
    for i in 0..a.rows {
        let a_row = a.row(i);
        for j in 0..b.rows {
            let b_row = b.row(j);
            let mut s = 0.0;
            for (av, bv) in a_row.iter().zip(b_row) {
                s += av * bv;
            }
            out.set(i, j, s);
        }
    }
    Ok(out)
}

/// aᵀ · b; `a.rows` must equal `b.rows`.
pub fn matmul_transa(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows != b.rows {
        return Err(Error::shape(format!(
            "matmul_transa: ({}x{})ᵀ by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Matrix::zeros(a.cols, b.cols);
    for k in 0..a.rows {
        let a_row = a.row(k);
        let b_row = b.row(k);
        for (i, av) in a_row.iter().enumerate() {
            if *av == 0.0 {
                continue;
            }
            let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, bv) in out_row.iter_mut().zip(b_row) {
                *o += av * bv;
            }
        }
    }
    Ok(out)
}

/// m · v as a vector.
pub fn mul_vec(m: &Matrix, v: &Vector) -> Result<Vector> {
    if m.cols != v.len() {
        return Err(Error::shape(format!(
            "mul_vec: {}x{} by len {}",
            m.rows,
            m.cols,
            v.len()
        )));
    }
    let mut out = Vector::zeros(m.rows);
    for r in 0..m.rows {
        out.data[r] = m
            .row(r)
            .iter()
            .zip(v.data.iter())
            .map(|(a, b)| a * b)
            .sum();
    }
    Ok(out)
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Top-`top_d` eigenpairs of a symmetric matrix via cyclic Jacobi rotations.
///
/// Returns the `top_d` largest eigenvalues in descending order and the
/// corresponding orthonormal eigenvectors as the rows of the returned matrix.
/// Input must be symmetric to an absolute tolerance of `1e-9` (scaled by the
/// largest entry magnitude); the strictly symmetric average `(m + mᵀ)/2` is
/// what actually gets decomposed.
pub fn sym_eig(m: &Matrix, top_d: usize) -> Result<(Vector, Matrix)> {
    let n = m.rows;
    if m.rows != m.cols {
        return Err(Error::shape(format!(
            "sym_eig needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    if top_d == 0 || top_d > n {
        return Err(Error::domain(format!(
            "top_d must be in 1..={}, got {}",
            n, top_d
        )));
    }
    let max_abs = m.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let sym_tol = 1e-9 * max_abs.max(1.0);
    for r in 0..n {
        for c in (r + 1)..n {
            if (m.get(r, c) - m.get(c, r)).abs() > sym_tol {
                return Err(Error::domain(format!(
                    "matrix not symmetric at ({r},{c}): {} vs {}",
                    m.get(r, c),
                    m.get(c, r)
                )));
            }
        }
    }

    // Work on the symmetrized copy; accumulate rotations into v (columns are
    // eigenvectors of the working matrix).
    let mut a = Matrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            a.set(r, c, 0.5 * (m.get(r, c) + m.get(c, r)));
        }
    }
    let mut v = Matrix::identity(n);

    let off_norm = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in (r + 1)..n {
                s += a.get(r, c) * a.get(r, c);
            }
        }
        s.sqrt()
    };
    let scale = max_abs.max(1e-300);
    let target = 1e-13 * scale * n as f64;

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Apply the rotation to rows/cols p and q.
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged && off_norm(&a) > target {
        return Err(Error::convergence(format!(
            "Jacobi sweep cap ({JACOBI_MAX_SWEEPS}) reached, off-diagonal norm {:.3e}",
            off_norm(&a)
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());

    let mut values = Vector::zeros(top_d);
    let mut vectors = Matrix::zeros(top_d, n);
    for (out_i, &idx) in order.iter().take(top_d).enumerate() {
        values.set(out_i, a.get(idx, idx));
        for k in 0..n {
            vectors.set(out_i, k, v.get(k, idx));
        }
    }
    Ok((values, vectors))
}

/// `n` i.i.d. Gaussian draws. Variance 0 returns the constant mean.
pub fn gaussian_sample(rng: &mut Rng, n: usize, mean: f64, variance: f64) -> Result<Vector> {
    if variance < 0.0 {
        return Err(Error::domain(format!("negative variance {variance}")));
    }
    if variance == 0.0 {
        return Ok(Vector::from_raw(vec![mean; n]));
    }
    let sd = variance.sqrt();
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        data.push(mean + sd * rng.normal());
    }
    Ok(Vector::from_raw(data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use super::Rng;

    fn matmul_oracle(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for k in 0..a.cols() {
                    s += a.get(i, k) * b.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn matmul_identity() {
        let mut rng = Rng::new(3);
        let m = random_matrix(&mut rng, 3, 3);
        let id = Matrix::identity(3);
        let prod = matmul(&id, &m).unwrap();
        assert_eq!(prod, m);
    }

    #[test]
    fn matmul_two_by_two() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![5.0, 6.0], vec![7.0, 8.0]]).unwrap();
        let c = matmul(&a, &b).unwrap();
        assert_eq!(c.data(), &[19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn matmul_matches_triple_loop_oracle() {
        let mut rng = Rng::new(42);
        let a = random_matrix(&mut rng, 7, 5);
        let b = random_matrix(&mut rng, 5, 3);
        let fast = matmul(&a, &b).unwrap();
        let slow = matmul_oracle(&a, &b);
        for (x, y) in fast.data().iter().zip(slow.data()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        assert!(matches!(matmul(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn transpose_products_match_explicit_transpose() {
        let mut rng = Rng::new(9);
        let a = random_matrix(&mut rng, 4, 6);
        let b = random_matrix(&mut rng, 5, 6);
        let fast = matmul_transb(&a, &b).unwrap();
        let slow = matmul(&a, &b.transpose()).unwrap();
        for (x, y) in fast.data().iter().zip(slow.data()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        let c = random_matrix(&mut rng, 5, 4);
        let d = random_matrix(&mut rng, 5, 3);
        let fast = matmul_transa(&c, &d).unwrap();
        let slow = matmul(&c.transpose(), &d).unwrap();
        for (x, y) in fast.data().iter().zip(slow.data()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn constructors_reject_non_finite() {
        assert!(Matrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Vector::from_vec(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn sym_eig_diagonal() {
        let m = Matrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        let (vals, vecs) = sym_eig(&m, 2).unwrap();
        assert_abs_diff_eq!(vals.get(0), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals.get(1), 2.0, epsilon = 1e-12);
        // Axis-aligned eigenvectors up to sign.
        assert_abs_diff_eq!(vecs.get(0, 0).abs(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(vecs.get(1, 2).abs(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn sym_eig_two_by_two_hand_solved() {
        // Characteristic polynomial of [[2,1],[1,2]]: (2-λ)² = 1 → λ ∈ {3,1}.
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let (vals, vecs) = sym_eig(&m, 2).unwrap();
        assert_abs_diff_eq!(vals.get(0), 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(vals.get(1), 1.0, epsilon = 1e-10);
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert_abs_diff_eq!(vecs.get(0, 0).abs(), inv_sqrt2, epsilon = 1e-10);
        assert_abs_diff_eq!(vecs.get(0, 1).abs(), inv_sqrt2, epsilon = 1e-10);
        assert_eq!(vecs.get(0, 0).signum(), vecs.get(0, 1).signum());
        assert_ne!(vecs.get(1, 0).signum(), vecs.get(1, 1).signum());
    }

    #[test]
    fn sym_eig_identity_residual_only() {
        // Degenerate spectrum: any unit vector works, so only check the residual.
        let m = Matrix::identity(4);
        let (vals, vecs) = sym_eig(&m, 1).unwrap();
        assert_abs_diff_eq!(vals.get(0), 1.0, epsilon = 1e-12);
        let v = Vector::from_vec(vecs.row(0).to_vec()).unwrap();
        let mv = mul_vec(&m, &v).unwrap();
        let residual = mv
            .data()
            .iter()
            .zip(v.data())
            .map(|(a, b)| (a - vals.get(0) * b).abs())
            .fold(0.0f64, f64::max);
        assert!(residual <= 1e-8);
    }

    #[test]
    fn sym_eig_rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&m, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn sym_eig_residual_and_orthonormality_random() {
        let mut rng = Rng::new(7);
        for n in [2usize, 5, 9] {
            let raw = random_matrix(&mut rng, n, n);
            let mut m = Matrix::zeros(n, n);
            for r in 0..n {
                for c in 0..n {
                    m.set(r, c, 0.5 * (raw.get(r, c) + raw.get(c, r)));
                }
            }
            let (vals, vecs) = sym_eig(&m, n).unwrap();
            // Residual per pair.
            for i in 0..n {
                let v = Vector::from_vec(vecs.row(i).to_vec()).unwrap();
                let mv = mul_vec(&m, &v).unwrap();
                let lam = vals.get(i);
                let res = mv
                    .data()
                    .iter()
                    .zip(v.data())
                    .map(|(a, b)| (a - lam * b).abs())
                    .fold(0.0f64, f64::max);
                assert!(res <= 1e-8 * lam.abs().max(1.0), "residual {res}");
            }
            // Pairwise orthonormal.
            for i in 0..n {
                for j in 0..n {
                    let vi = Vector::from_vec(vecs.row(i).to_vec()).unwrap();
                    let vj = Vector::from_vec(vecs.row(j).to_vec()).unwrap();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(vi.dot(&vj), expected, epsilon = 1e-8);
                }
            }
            // Trace identity for full top_d.
            let trace: f64 = (0..n).map(|i| m.get(i, i)).sum();
            let sum: f64 = vals.data().iter().sum();
            assert_abs_diff_eq!(sum, trace, epsilon = 1e-8 * trace.abs().max(1.0));
        }
    }

    #[test]
    fn gaussian_zero_variance_is_constant() {
        let mut rng = Rng::new(1);
        let v = gaussian_sample(&mut rng, 5, 0.0, 0.0).unwrap();
        assert_eq!(v.data(), &[0.0; 5]);
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = Rng::new(1);
        let n = 100_000;
        let v = gaussian_sample(&mut rng, n, 0.0, 1.0).unwrap();
        let mean: f64 = v.data().iter().sum::<f64>() / n as f64;
        let var: f64 = v.data().iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "sample mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "sample variance {var}");
    }

    #[test]
    fn gaussian_same_seed_same_stream() {
        let mut a = Rng::new(99);
        let mut b = Rng::new(99);
        let va = gaussian_sample(&mut a, 32, 0.5, 2.0).unwrap();
        let vb = gaussian_sample(&mut b, 32, 0.5, 2.0).unwrap();
        assert_eq!(va, vb);
    }

    #[test]
    fn gaussian_negative_variance_rejected() {
        let mut rng = Rng::new(1);
        assert!(matches!(
            gaussian_sample(&mut rng, 3, 0.0, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn fork_is_deterministic_and_state_independent() {
        let mut parent = Rng::new(11);
        let fork_before = parent.fork(4);
        let _ = parent.uniform(0.0, 1.0);
        let fork_after = parent.fork(4);
        let mut a = fork_before;
        let mut b = fork_after;
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_ne!(Rng::new(11).fork(4).next_u64(), Rng::new(11).fork(5).next_u64());
    }

    proptest! {
        #[test]
        fn matmul_associative(seed in 0u64..1_000) {
            let mut rng = Rng::new(seed);
            let a = random_matrix(&mut rng, 4, 3);
            let b = random_matrix(&mut rng, 3, 5);
            let c = random_matrix(&mut rng, 5, 2);
            let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
            let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
            for (x, y) in left.data().iter().zip(right.data()) {
                let tol = 1e-9 * x.abs().max(1.0);
                prop_assert!((x - y).abs() <= tol);
            }
        }

        #[test]
        fn sample_indices_distinct_sorted(seed in 0u64..500, n in 1usize..200, frac in 0.0f64..1.0) {
            let k = ((n as f64 * frac) as usize).min(n);
            let mut rng = Rng::new(seed);
            let idx = rng.sample_indices(n, k);
            prop_assert_eq!(idx.len(), k);
            for w in idx.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            for &i in &idx {
                prop_assert!(i < n);
            }
        }
    }
}
