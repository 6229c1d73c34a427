//! Small dense linear algebra: the systems here never exceed a dozen rows.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds from equally long rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self { rows: rows.len(), cols, data: rows.concat() }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<T>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        assert!(columns.iter().all(|c| c.len() == rows), "ragged columns");
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| crate::scalar::dot(self.row(i), x)).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |i, j| (0..self.cols).fold(T::zero(), |acc, k| acc + self[(i, k)] * other[(k, j)]))
    }

    pub fn max_abs(&self) -> T {
        crate::scalar::max_norm(&self.data)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> T {
        (0..self.cols).map(|j| (0..self.rows).fold(T::zero(), |acc, i| acc + self[(i, j)].abs())).fold(T::zero(), T::max)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.rows {
            list.entry(&&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        list.finish()
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    norm1: T,
    singular: bool,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &Matrix<T>) -> Self {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let norm1 = a.norm1();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut singular = false;
        for k in 0..n {
            let (pivot_row, pivot) =
                (k..n).map(|i| (i, lu[(i, k)].abs())).fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot == T::zero() || !pivot.is_finite() {
                singular = true;
                continue;
            }
            if pivot_row != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(k, pivot_row);
            }
            let diag = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / diag;
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    let delta = factor * lu[(k, j)];
                    lu[(i, j)] = lu[(i, j)] - delta;
                }
            }
        }
        Self { lu, perm, norm1, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
        x
    }

    /// 1-norm condition number, computed from the explicit inverse.
    /// Infinite when a zero pivot was met.
    pub fn condition(&self) -> T {
        if self.singular {
            return T::infinity();
        }
        let n = self.lu.rows;
        let mut inv_norm = T::zero();
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            let col = self.solve(&e);
            let sum = col.iter().fold(T::zero(), |acc, x| acc + x.abs());
            inv_norm = inv_norm.max(sum);
        }
        let cond = self.norm1 * inv_norm;
        if cond.is_finite() {
            cond
        } else {
            T::infinity()
        }
    }
}

/// Solves `a x = b`, refusing systems whose condition estimate exceeds `max_condition`.
pub fn solve_checked<T: Real>(a: &Matrix<T>, b: &[T], max_condition: T) -> Result<Vec<T>> {
    let lu = Lu::factor(a);
    let cond = lu.condition();
    if !(cond <= max_condition) {
        return Err(Error::SingularJacobian { condition: cond.to_f64_lossy() });
    }
    Ok(lu.solve(b))
}

/// Thin singular value decomposition `A = U diag(sigma) Vᵀ` by one-sided Jacobi
/// rotations. Singular values are sorted in decreasing order; `v` is always a
/// full `cols × cols` orthogonal matrix, so its trailing columns span the
/// kernel of `A`.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub sigma: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn new(a: &Matrix<T>) -> Self {
        let (rows, cols) = (a.rows, a.cols);
        let mut work = a.clone();
        let mut v = Matrix::identity(cols);
        let eps = T::epsilon();
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..cols {
                for q in p + 1..cols {
                    let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                    for i in 0..rows {
                        let (x, y) = (work[(i, p)], work[(i, q)]);
                        alpha = alpha + x * x;
                        beta = beta + y * y;
                        gamma = gamma + x * y;
                    }
                    if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (gamma + gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for i in 0..rows {
                        let (x, y) = (work[(i, p)], work[(i, q)]);
                        work[(i, p)] = c * x - s * y;
                        work[(i, q)] = s * x + c * y;
                    }
                    for i in 0..cols {
                        let (x, y) = (v[(i, p)], v[(i, q)]);
                        v[(i, p)] = c * x - s * y;
                        v[(i, q)] = s * x + c * y;
                    }
                }
            }
            if !rotated {
                break;
            }
        }

        let sigma_raw: Vec<T> = (0..cols).map(|j| crate::scalar::norm(&work.column(j))).collect();
        let mut order: Vec<usize> = (0..cols).collect();
        order.sort_by(|&i, &j| sigma_raw[j].partial_cmp(&sigma_raw[i]).unwrap_or(std::cmp::Ordering::Equal));

        let sigma: Vec<T> = order.iter().map(|&j| sigma_raw[j]).collect();
        let v = Matrix::from_fn(cols, cols, |i, k| v[(i, order[k])]);
        let u = Matrix::from_fn(rows, cols, |i, k| {
            let s = sigma_raw[order[k]];
            if s > T::zero() {
                work[(i, order[k])] / s
            } else {
                T::zero()
            }
        });
        Self { u, sigma, v }
    }

    /// Absolute cutoff `rel_tol · sigma_max`.
    pub fn threshold(&self, rel_tol: T) -> T {
        rel_tol * self.sigma.first().copied().unwrap_or_else(T::zero)
    }

    pub fn rank(&self, rel_tol: T) -> usize {
        let cut = self.threshold(rel_tol);
        self.sigma.iter().filter(|&&s| s > cut && s > T::zero()).count()
    }

    /// Orthonormal basis of the kernel, one vector per entry.
    pub fn null_space(&self, rel_tol: T) -> Vec<Vec<T>> {
        let r = self.rank(rel_tol);
        (r..self.v.cols).map(|j| self.v.column(j)).collect()
    }

    /// Orthonormal basis of the row space.
    pub fn row_space(&self, rel_tol: T) -> Vec<Vec<T>> {
        (0..self.rank(rel_tol)).map(|j| self.v.column(j)).collect()
    }

    /// Minimum-norm least-squares solution of `A x = b`.
    pub fn solve_min_norm(&self, b: &[T], rel_tol: T) -> Vec<T> {
        let cols = self.v.rows;
        let mut x = vec![T::zero(); cols];
        for k in 0..self.rank(rel_tol) {
            let coeff = crate::scalar::dot(&self.u.column(k), b) / self.sigma[k];
            for (xi, vi) in x.iter_mut().zip(self.v.column(k)) {
                *xi = *xi + coeff * vi;
            }
        }
        x
    }
}

/// Component of `x` orthogonal to the span of `vectors` (rank cutoff relative
/// to the largest singular value of the stacked vectors).
pub fn reject_from_span<T: Real>(x: &[T], vectors: &[Vec<T>], rel_tol: T) -> Vec<T> {
    if vectors.is_empty() {
        return x.to_vec();
    }
    let svd = Svd::new(&Matrix::from_rows(vectors));
    let mut out = x.to_vec();
    for basis in svd.row_space(rel_tol) {
        let c = crate::scalar::dot(&basis, x);
        for (o, b) in out.iter_mut().zip(&basis) {
            *o = *o - c * *b;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::norm;

    fn sample() -> Matrix<f64> {
        Matrix::from_rows(&[vec![4.0, -2.0, 1.0], vec![3.0, 6.0, -4.0], vec![2.0, 1.0, 8.0]])
    }

    #[test]
    fn lu_solves_and_reports_condition() {
        let a = sample();
        let x = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x);
        let lu = Lu::factor(&a);
        let sol = lu.solve(&b);
        for (s, e) in sol.iter().zip(x) {
            assert!((s - e).abs() < 1e-14);
        }
        let cond = lu.condition();
        assert!(cond > 1.0 && cond < 10.0);
    }

    #[test]
    fn singular_matrix_is_refused() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(solve_checked(&a, &[1.0, 1.0], 1e12), Err(Error::SingularJacobian { .. })));
    }

    #[test]
    fn svd_reconstructs_wide_matrix() {
        let a = Matrix::<f64>::from_rows(&[vec![1.0, 2.0, 0.0, -1.0], vec![0.0, 1.0, 3.0, 1.0]]);
        let svd = Svd::new(&a);
        assert_eq!(svd.rank(1e-12), 2);
        let kernel = svd.null_space(1e-12);
        assert_eq!(kernel.len(), 2);
        for k in &kernel {
            assert!(norm(&a.mul_vec(k)) < 1e-14);
            assert!((norm(k) - 1.0).abs() < 1e-14);
        }
        let rebuilt = Matrix::from_fn(2, 4, |i, j| (0..4).fold(0.0, |acc, k| acc + svd.u[(i, k)] * svd.sigma[k] * svd.v[(j, k)]));
        for i in 0..2 {
            for j in 0..4 {
                assert!((rebuilt[(i, j)] - a[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn min_norm_solution_lies_in_row_space() {
        let a = Matrix::<f64>::from_rows(&[vec![1.0, 1.0, 0.0]]);
        let x = Svd::new(&a).solve_min_norm(&[2.0], 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15 && x[2] == 0.0);
    }

    #[test]
    fn rejection_removes_span_component() {
        let r = reject_from_span::<f64>(&[1.0, 2.0, 3.0], &[vec![0.0, 2.0, 0.0]], 1e-10);
        assert!((r[0] - 1.0).abs() < 1e-15 && r[1].abs() < 1e-15 && (r[2] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::<f32>::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = Lu::factor(&a).solve(&[3.0, 5.0]);
        assert!((x[0] - 0.8).abs() < 1e-6 && (x[1] - 1.4).abs() < 1e-6);
    }
}
