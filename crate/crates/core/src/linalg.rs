//! Dense real linear algebra: a small row-major matrix type, Gram–Schmidt
//! orthonormalization, cyclic Jacobi for symmetric eigenproblems, one-sided
//! Jacobi SVD and determinants.
//!
//! Dimensions in this crate stay in the tens to low hundreds, so every kernel
//! favours accuracy and simplicity over blocking or cache tricks.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values outside `[0, 1]` by less than this are clamped silently; anything
/// further out is reported as [`Error::ClampOutOfRange`].
pub const CLAMP_TOLERANCE: f64 = 1e-8;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Numerical thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Bound on `‖QᵀQ − I‖_max` for orthonormal representatives.
    pub eps_orth: f64,
    /// Relative eigen/singular value residual bound.
    pub eps_eig: f64,
    /// Angles (radians) at or below this are treated as zero.
    pub eps_angle: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            eps_orth: 1e-10,
            eps_eig: 1e-9,
            eps_angle: 1e-7,
        }
    }
}

impl TolerancePolicy {
    pub fn new(eps_orth: f64, eps_eig: f64, eps_angle: f64) -> Result<Self> {
        let policy = Self {
            eps_orth,
            eps_eig,
            eps_angle,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("eps_orth", self.eps_orth),
            ("eps_eig", self.eps_eig),
            ("eps_angle", self.eps_angle),
        ] {
            if !(value > 0.0 && value < 1e-2) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} = {value} must lie in (0, 1e-2)"
                )));
            }
        }
        Ok(())
    }

    pub fn with_eps_angle(mut self, eps_angle: f64) -> Result<Self> {
        self.eps_angle = eps_angle;
        self.validate()?;
        Ok(self)
    }
}

/// Dense matrix with finite entries, stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape {
                rows,
                cols,
                reason: "dimensions must be positive",
            });
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidShape {
                rows,
                cols,
                reason: "entry count does not match shape",
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidShape {
                rows: rows.len(),
                cols,
                reason: "ragged rows",
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidShape {
                rows,
                cols: columns.len(),
                reason: "ragged columns",
            });
        }
        let cols = columns.len();
        let mut data = vec![0.0; rows * cols];
        for (j, column) in columns.iter().enumerate() {
            for (i, &x) in column.iter().enumerate() {
                data[i * cols + j] = x;
            }
        }
        Self::new(rows, cols, data)
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in values.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self::new(n, n, data)
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
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

    /// # Panics
    /// If the inner dimensions differ.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(l);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "tr_matmul row mismatch");
        let mut out = Self::zeros(self.cols, other.cols);
        for l in 0..self.rows {
            let left = self.row(l);
            let right = other.row(l);
            for (i, &a) in left.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(right) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "mul_vec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius inner product `tr(selfᵀ other)`.
    pub fn frobenius_dot(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        dot(&self.data, &other.data)
    }

    /// Submatrix formed by the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Clamp a cosine-like quantity into `[0, 1]`, rejecting values that are out
/// of range by more than [`CLAMP_TOLERANCE`].
pub fn clamp_unit(x: f64) -> Result<f64> {
    if !(-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&x) {
        return Err(Error::ClampOutOfRange(x));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// `‖QᵀQ − I‖_max`.
pub fn orthonormality_residual(q: &Matrix) -> f64 {
    let gram = q.tr_matmul(q);
    gram.max_abs_diff(&Matrix::identity(q.cols()))
}

/// Flip `v` so that its first entry with magnitude above `threshold` is positive.
pub(crate) fn canonical_sign(v: &mut [f64], threshold: f64) {
    if let Some(&lead) = v.iter().find(|x| x.abs() > threshold) {
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Orthonormal basis of the column span of `a` by Gram–Schmidt with one round
/// of reorthogonalization. Column `j` of the result spans the same flag as the
/// first `j + 1` columns of `a`; each column's first significant entry is
/// positive.
pub fn orthonormalize(a: &Matrix, tol: &TolerancePolicy) -> Result<Matrix> {
    let (n, k) = (a.rows(), a.cols());
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let original = a.column(j);
        let scale = norm(&original);
        let mut v = original;
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            }
        }
        let residual = norm(&v);
        if j >= n || scale == 0.0 || residual <= tol.eps_orth * scale {
            return Err(Error::RankDeficient {
                column: j,
                residual,
            });
        }
        v.iter_mut().for_each(|x| *x /= residual);
        basis.push(v);
    }
    for column in &mut basis {
        canonical_sign(column, tol.eps_orth);
    }
    Matrix::from_columns(&basis)
}

/// Eigenpairs of a symmetric matrix, values descending; column `i` of
/// `vectors` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

fn check_symmetric(s: &Matrix, tol: &TolerancePolicy) -> Result<()> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "symmetric eigenproblem needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let asym = s.max_abs_diff(&s.transpose());
    if asym > tol.eps_orth * s.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Cyclic Jacobi eigen-decomposition.
pub fn symmetric_eigen(s: &Matrix, tol: &TolerancePolicy) -> Result<SymmetricEigen> {
    check_symmetric(s, tol)?;
    let n = s.rows();
    // Work on the symmetrized copy so tiny asymmetries cannot bias rotations.
    let mut a = s.add(&s.transpose()).scale(0.5);
    let mut v = Matrix::identity(n);
    let total = a.frobenius_norm();

    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = c * arp - s * arq;
                    a[(r, q)] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[(p, r)];
                    let aqr = a[(q, r)];
                    a[(p, r)] = c * apr - s * aqr;
                    a[(q, r)] = s * apr + c * aqr;
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_columns(
        &order
            .iter()
            .map(|&i| v.column(i))
            .collect::<Vec<_>>(),
    )?;
    Ok(SymmetricEigen { values, vectors })
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub fn symmetric_eigenvalues(s: &Matrix, tol: &TolerancePolicy) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(s, tol)?.values)
}

/// Thin SVD `A = U diag(sigma) Vᵀ` with `r = min(rows, cols)` singular triples,
/// sorted descending. Left vectors belonging to zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &Matrix) -> Svd {
    if a.rows() < a.cols() {
        let t = svd(&a.transpose());
        return Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let (m, n) = (a.rows(), a.cols());
    let mut work = a.columns();
    let mut right: Vec<Vec<f64>> = Matrix::identity(n).columns();

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&work[p], &work[p]);
                let beta = dot(&work[q], &work[q]);
                let gamma = dot(&work[p], &work[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut work, p, q, c, s);
                rotate_pair(&mut right, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = work.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let u_cols: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            if norms[i] > 0.0 {
                work[i].iter().map(|x| x / norms[i]).collect()
            } else {
                vec![0.0; m]
            }
        })
        .collect();
    let v_cols: Vec<Vec<f64>> = order.iter().map(|&i| right[i].clone()).collect();
    Svd {
        u: Matrix::from_columns(&u_cols).expect("finite svd factors"),
        sigma,
        v: Matrix::from_columns(&v_cols).expect("finite svd factors"),
    }
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let (x, y) = (&mut head[p], &mut tail[0]);
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Singular values, sorted descending.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    svd(a).sigma
}

/// Determinant by cofactor expansion for order ≤ 3, partial-pivot LU beyond.
pub fn determinant(a: &Matrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "determinant of non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let m = |i, j| a[(i, j)];
    Ok(match a.rows() {
        1 => m(0, 0),
        2 => m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0),
        3 => {
            m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
        }
        n => {
            let mut lu = a.clone();
            let mut det = 1.0;
            for col in 0..n {
                let pivot = (col..n)
                    .max_by(|&i, &j| lu[(i, col)].abs().total_cmp(&lu[(j, col)].abs()))
                    .expect("non-empty pivot range");
                if lu[(pivot, col)] == 0.0 {
                    return Ok(0.0);
                }
                if pivot != col {
                    for j in 0..n {
                        let tmp = lu[(col, j)];
                        lu[(col, j)] = lu[(pivot, j)];
                        lu[(pivot, j)] = tmp;
                    }
                    det = -det;
                }
                let d = lu[(col, col)];
                det *= d;
                for i in (col + 1)..n {
                    let factor = lu[(i, col)] / d;
                    if factor == 0.0 {
                        continue;
                    }
                    for j in col..n {
                        lu[(i, j)] -= factor * lu[(col, j)];
                    }
                }
            }
            det
        }
    })
}
