//! Small dense linear algebra.
//!
//! Everything here targets the tiny matrices that appear in switching-system
//! analysis (dimension 1 to 8, mostly 2 to 4). Storage is row-major and every
//! public matrix is real; complex arithmetic only shows up in eigenvalues.

mod eigen;
mod expm;
mod svd;

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{invalid, Result};

pub use eigen::{eigenvalues, eigenvalues_qr, spectral_radius, spectrum, Spectrum};
pub use expm::matrix_exp;
pub use svd::{operator_norm, singular_values};

/// Dense row-major real matrix.
///
/// Most operations expect a square matrix; rectangular matrices are allowed
/// so that off-diagonal coupling blocks can be represented with the same type.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid("matrix dimensions must be positive");
        }
        if data.len() != rows * cols {
            return invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            ));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return invalid(format!("non-finite matrix entry {bad}"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from rows; rejects ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return invalid("matrix needs at least one row");
        }
        let c = rows[0].as_ref().len();
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != c {
                return invalid(format!(
                    "ragged rows: row 0 has {c} entries, row {i} has {}",
                    row.len()
                ));
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// 1x1 matrix.
    pub fn scalar(v: f64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![v],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dimension of a square matrix (number of rows).
    pub fn dim(&self) -> usize {
        self.rows
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

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn require_square(&self) -> Result<()> {
        if !self.is_square() {
            return invalid(format!(
                "square matrix required, got {}x{}",
                self.rows, self.cols
            ));
        }
        if !self.is_finite() {
            return invalid("matrix has non-finite entries");
        }
        Ok(())
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

    /// Matrix product. Panics on a dimension mismatch, which is always a
    /// programming error inside this crate; use [`Matrix::try_mul`] for
    /// user-supplied shapes.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        self.mul_into(rhs, &mut out);
        out
    }

    pub fn try_mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            ));
        }
        Ok(self.mul(rhs))
    }

    /// `out = self * rhs` without allocating.
    pub fn mul_into(&self, rhs: &Matrix, out: &mut Matrix) {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        assert!(out.rows == self.rows && out.cols == rhs.cols);
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        for i in 0..n {
            for j in 0..m {
                let mut acc = 0.0;
                for l in 0..k {
                    acc += self.data[i * k + l] * rhs.data[l * m + j];
                }
                out.data[i * m + j] = acc;
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "vector length differs from column count");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self - shift * I`.
    pub fn shifted(&self, shift: f64) -> Matrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= shift;
        }
        m
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Matrix {
        assert!(self.is_square());
        let mut result = Matrix::identity(self.rows);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert!(self.rows == other.rows && self.cols == other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Copy of the block with top-left corner `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        let mut out = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        out
    }

    /// Writes `block` into `self` at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Determinant by partial-pivot elimination.
    pub fn determinant(&self) -> f64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| a[x * n + k].abs().total_cmp(&a[y * n + k].abs()))
                .unwrap();
            if a[p * n + k] == 0.0 {
                return 0.0;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let piv = a[k * n + k];
            det *= piv;
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix> {
        self.require_square()?;
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        let scale = self.norm_1().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| a[(x, k)].abs().total_cmp(&a[(y, k)].abs()))
                .unwrap();
            if a[(p, k)].abs() <= 1e-14 * scale {
                return invalid("matrix is singular to working precision");
            }
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = t;
                let t = inv[(k, j)];
                inv[(k, j)] = inv[(p, j)];
                inv[(p, j)] = t;
            }
            let piv = a[(k, k)];
            for j in 0..n {
                a[(k, j)] /= piv;
                inv[(k, j)] /= piv;
            }
            for i in 0..n {
                if i != k {
                    let f = a[(i, k)];
                    if f != 0.0 {
                        for j in 0..n {
                            a[(i, j)] -= f * a[(k, j)];
                            inv[(i, j)] -= f * inv[(k, j)];
                        }
                    }
                }
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

pub fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Size of the largest Jordan block of `m` at eigenvalue `lambda`.
///
/// Returns 0 when `lambda` is not an eigenvalue. The block size is the first
/// power `j` at which the rank of `(m - lambda I)^j` stops dropping. Ranks are
/// numerical: a singular value of the `j`-th power counts as zero when it is
/// below `tol * ||m - lambda I||^j`. For a non-real `lambda` the real quadratic
/// factor `(m - lambda I)(m - conj(lambda) I)` is used instead; its powers have
/// the same stabilisation index.
pub fn jordan_order(m: &Matrix, lambda: Complex64, tol: f64) -> Result<usize> {
    m.require_square()?;
    if !(tol > 0.0) || !tol.is_finite() {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    if !lambda.re.is_finite() || !lambda.im.is_finite() {
        return invalid("eigenvalue must be finite");
    }
    let n = m.dim();
    let base = if lambda.im.abs() <= tol * lambda.norm().max(1.0) {
        m.shifted(lambda.re)
    } else {
        // m^2 - 2 Re(lambda) m + |lambda|^2 I
        m.mul(m)
            .sub(&m.scale(2.0 * lambda.re))
            .add(&Matrix::identity(n).scale(lambda.norm_sqr()))
    };
    let scale = operator_norm(&base)?;
    if scale == 0.0 {
        return Ok(1);
    }
    let rank_of = |p: &Matrix, j: i32| -> Result<usize> {
        let threshold = tol * scale.powi(j);
        Ok(singular_values(p)?
            .iter()
            .filter(|&&s| s > threshold)
            .count())
    };
    let mut power = base.clone();
    let mut rank = rank_of(&power, 1)?;
    if rank == n {
        return Ok(0);
    }
    for j in 1..=n {
        power = power.mul(&base);
        let next = rank_of(&power, j as i32 + 1)?;
        if next == rank {
            return Ok(j);
        }
        rank = next;
    }
    Ok(n)
}
