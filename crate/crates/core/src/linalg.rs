//! Small dense matrices, a cyclic Jacobi symmetric eigensolver and a normalized null-vector solve.
//!
//! Everything here targets agent counts in the tens; no attempt is made at blocking or sparsity.

use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {asymmetry})")]
    NotSymmetric { asymmetry: f64 },
    #[error("jacobi sweeps did not converge: off-diagonal norm {off_norm} after {sweeps} sweeps")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("null space has dimension greater than one")]
    RankDeficient,
    #[error("normalized null vector does not exist: system is inconsistent (residual {residual})")]
    Inconsistent { residual: f64 },
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from nested rows. Panics when rows are ragged.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            assert_eq!(row.len(), n_cols, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: n_rows, cols: n_cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum()).collect()
    }

    /// `xᵀ A` as a row vector.
    pub fn vec_mul(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| (0..self.rows).map(|i| x[i] * self[(i, j)]).sum()).collect()
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        self.mul_vec(x).iter().zip(x).map(|(&a, &b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

fn off_diagonal_norm<T: Scalar>(a: &Matrix<T>) -> T {
    let mut acc = T::zero();
    for i in 0..a.rows {
        for j in 0..a.cols {
            if i != j {
                acc += a[(i, j)] * a[(i, j)];
            }
        }
    }
    acc.sqrt()
}

const MAX_JACOBI_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted ascending.
///
/// Sweeps stop once the off-diagonal Frobenius norm falls below `1e-12·max(1, ‖A‖_F)`
/// (or a few ulps of the scalar type when that is coarser).
pub fn symmetric_eigenvalues<T: Scalar>(a: &Matrix<T>) -> Result<Vec<T>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    let scale = a.frobenius_norm().max(T::one());
    if a.asymmetry() > T::lit(1e-12) * scale {
        return Err(LinalgError::NotSymmetric { asymmetry: a.asymmetry().as_f64() });
    }
    let threshold = T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) * scale;
    let mut m = a.clone();
    let mut sweeps = 0;
    while off_diagonal_norm(&m) > threshold {
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps, off_norm: off_diagonal_norm(&m).as_f64() });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, p, q);
            }
        }
        sweeps += 1;
    }
    let mut eig: Vec<T> = (0..n).map(|i| m[(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(eig)
}

/// One Jacobi rotation annihilating `m[p][q]`.
fn rotate<T: Scalar>(m: &mut Matrix<T>, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == T::zero() {
        return;
    }
    let two = T::lit(2.0);
    let theta = (m[(q, q)] - m[(p, p)]) / (two * apq);
    let t = if theta >= T::zero() {
        T::one() / (theta + (theta * theta + T::one()).sqrt())
    } else {
        -T::one() / (-theta + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let n = m.rows;
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = T::zero();
    m[(q, p)] = T::zero();
}

/// Solves `A x = 0, 1ᵀx = 1` for square `A` with a one-dimensional null space.
///
/// The normalization row is appended to `A` and the `(n+1)×n` system is reduced by
/// Gaussian elimination with partial pivoting. A pivot below `tol` means the null
/// space is larger than one dimension.
pub fn normalized_null_vector<T: Scalar>(a: &Matrix<T>) -> Result<Vec<T>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    let rows = n + 1;
    let width = n + 1;
    let mut aug = vec![T::zero(); rows * width];
    for i in 0..n {
        for j in 0..n {
            aug[i * width + j] = a[(i, j)];
        }
    }
    for j in 0..n {
        aug[n * width + j] = T::one();
    }
    aug[n * width + n] = T::one();

    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0)) * a.max_abs().max(T::one());
    for col in 0..n {
        let (pivot, best) = (col..rows).map(|r| (r, aug[r * width + col].abs())).fold((col, T::zero()), |acc, cur| {
            if cur.1 > acc.1 {
                cur
            } else {
                acc
            }
        });
        if best <= tol {
            return Err(LinalgError::RankDeficient);
        }
        if pivot != col {
            for k in 0..width {
                aug.swap(col * width + k, pivot * width + k);
            }
        }
        let piv = aug[col * width + col];
        for r in (col + 1)..rows {
            let factor = aug[r * width + col] / piv;
            if factor == T::zero() {
                continue;
            }
            for k in col..width {
                let v = aug[col * width + k];
                aug[r * width + k] -= factor * v;
            }
        }
    }
    // Row n is now all zeros on the left; its right-hand side measures consistency.
    let residual = aug[n * width + n].abs();
    if residual > tol.sqrt() {
        return Err(LinalgError::Inconsistent { residual: residual.as_f64() });
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = aug[i * width + n];
        for k in (i + 1)..n {
            acc -= aug[i * width + k] * x[k];
        }
        x[i] = acc / aug[i * width + i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonal_matrix_is_fixed_point() {
        let m = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, -1.0]]);
        assert_eq!(symmetric_eigenvalues(&m).unwrap(), vec![-1.0, 3.0]);
    }

    #[test]
    fn jacobi_two_by_two() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let m = Matrix::from_rows(&[vec![2.0f64, 1.0], vec![1.0, 2.0]]);
        let e = symmetric_eigenvalues(&m).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14);
        assert!((e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(symmetric_eigenvalues(&m), Err(LinalgError::NotSymmetric { .. })));
    }

    #[test]
    fn jacobi_trace_and_f32() {
        let m = Matrix::from_rows(&[vec![4.0f32, 1.0, 0.5], vec![1.0, 3.0, 0.25], vec![0.5, 0.25, 1.0]]);
        let e = symmetric_eigenvalues(&m).unwrap();
        let trace: f32 = e.iter().sum();
        assert!((trace - 8.0).abs() < 1e-5);
    }

    #[test]
    fn null_vector_of_rank_one_deficient_matrix() {
        // Columns sum to zero, so (1/2, 1/2) spans the null space of [[1,-1],[-1,1]].
        let m = Matrix::from_rows(&[vec![1.0f64, -1.0], vec![-1.0, 1.0]]);
        let x = normalized_null_vector(&m).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn null_vector_rank_deficiency_detected() {
        let m: Matrix<f64> = Matrix::zeros(3, 3);
        assert_eq!(normalized_null_vector(&m), Err(LinalgError::RankDeficient));
    }

    #[test]
    fn null_vector_of_nonsingular_matrix_is_inconsistent() {
        let m = Matrix::<f64>::identity(2);
        assert!(matches!(normalized_null_vector(&m), Err(LinalgError::Inconsistent { .. })));
    }

    #[test]
    fn products() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![3.0, 7.0]);
        assert_eq!(m.vec_mul(&[1.0, 1.0]), vec![4.0, 6.0]);
        assert_eq!(m.quadratic_form(&[1.0, 1.0]), 10.0);
        assert_eq!(m.transpose()[(0, 1)], 3.0);
    }
}
