//! Dense row-major matrices, upper triangular matrices and plane rotations.
//!
//! Everything here is deliberately plain: `n` is desk-scale, so storage is a
//! flat `Vec<f64>` in row-major order (triangular matrices included) and the
//! kernels are straightforward loops with a fixed accumulation order.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense real matrix stored in row-major order.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries. Rejects empty shapes, a data
    /// length that does not match the shape, and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix shape must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {ncols}",
                    i + 1,
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(nrows, ncols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix shape must be positive");
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

    /// Square diagonal matrix. Panics on an empty or non-finite diagonal.
    pub fn diag(values: &[f64]) -> Self {
        assert!(values.iter().all(|x| x.is_finite()), "non-finite diagonal");
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major view of the entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
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

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Entrywise difference `self - rhs`.
    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension(format!(
                "cannot subtract {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Leading `k x k` block.
    pub fn leading_block(&self, k: usize) -> Matrix {
        assert!(k > 0 && k <= self.rows && k <= self.cols);
        let mut out = Self::zeros(k, k);
        for i in 0..k {
            out.data[i * k..(i + 1) * k].copy_from_slice(&self.row(i)[..k]);
        }
        out
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        two_norm_vector(&self.data)
    }

    /// Rotates rows `g.i` and `g.j` in place:
    /// `row_i <- c*row_i + s*row_j`, `row_j <- -s*row_i + c*row_j`.
    pub fn rotate_rows(&mut self, g: &GivensRotation) -> Result<()> {
        self.check_index(g.j, self.rows)?;
        let (c, s) = (g.c, g.s);
        let n = self.cols;
        let (head, tail) = self.data.split_at_mut(g.j * n);
        let ri = &mut head[g.i * n..(g.i + 1) * n];
        let rj = &mut tail[..n];
        for (x, y) in ri.iter_mut().zip(rj.iter_mut()) {
            let (a, b) = (*x, *y);
            *x = c * a + s * b;
            *y = -s * a + c * b;
        }
        Ok(())
    }

    /// Rotates columns `g.i` and `g.j` in place, the transpose of
    /// [`Matrix::rotate_rows`]. In matrix terms this is `M <- M Q^T` where
    /// `Q` is the rotation that `rotate_rows` multiplies on the left.
    pub fn rotate_cols(&mut self, g: &GivensRotation) -> Result<()> {
        self.check_index(g.j, self.cols)?;
        let (c, s) = (g.c, g.s);
        for r in 0..self.rows {
            let base = r * self.cols;
            let (a, b) = (self.data[base + g.i], self.data[base + g.j]);
            self.data[base + g.i] = c * a + s * b;
            self.data[base + g.j] = -s * a + c * b;
        }
        Ok(())
    }

    fn check_index(&self, index: usize, dim: usize) -> Result<()> {
        if index >= dim {
            Err(Error::IndexOutOfRange { index, dim })
        } else {
            Ok(())
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for x in self.row(i) {
                write!(f, "{x:>12.5e} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Euclidean norm with scaling, so that entries near the overflow or
/// underflow thresholds do not spoil the result. Accumulates in index order.
pub fn two_norm_vector(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * sum.sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Frobenius norm; see [`Matrix::frobenius_norm`].
pub fn frobenius_norm(m: &Matrix) -> f64 {
    m.frobenius_norm()
}

pub fn transpose(m: &Matrix) -> Matrix {
    m.transpose()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.matmul(b)
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n)
}

/// A plane rotation acting on indices `i < j`.
///
/// Applied from the left it maps rows as
/// `row_i <- c*row_i + s*row_j`, `row_j <- -s*row_i + c*row_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensRotation {
    pub i: usize,
    pub j: usize,
    pub c: f64,
    pub s: f64,
}

impl GivensRotation {
    /// Checks `i < j` and that `(c, s)` lies on the unit circle within 4 ulp.
    pub fn new(i: usize, j: usize, c: f64, s: f64) -> Result<Self> {
        if i >= j {
            return Err(Error::InvalidOption(format!(
                "rotation plane needs i < j, got ({i}, {j})"
            )));
        }
        if !c.is_finite() || !s.is_finite() || (c * c + s * s - 1.0).abs() > 4.0 * f64::EPSILON {
            return Err(Error::InvalidOption(format!(
                "rotation coefficients ({c}, {s}) are not on the unit circle"
            )));
        }
        Ok(Self { i, j, c, s })
    }

    pub fn identity(i: usize, j: usize) -> Self {
        Self {
            i,
            j,
            c: 1.0,
            s: 0.0,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            s: -self.s,
            ..*self
        }
    }

    pub fn is_identity(&self) -> bool {
        self.c == 1.0 && self.s == 0.0
    }
}

/// Output of [`givens_compute`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensCoefficients {
    pub c: f64,
    pub s: f64,
    pub r: f64,
    /// Both inputs were zero; the identity rotation was returned.
    pub degenerate: bool,
}

impl GivensCoefficients {
    pub fn in_plane(&self, i: usize, j: usize) -> GivensRotation {
        GivensRotation {
            i,
            j,
            c: self.c,
            s: self.s,
        }
    }
}

/// Rotation taking the pair `(a, b)` to `(r, 0)` with `r = hypot(a, b) >= 0`.
pub fn givens_compute(a: f64, b: f64) -> GivensCoefficients {
    if b == 0.0 {
        // Covers a == b == 0 as well; keeps r = |a| >= 0.
        let sign = if a < 0.0 { -1.0 } else { 1.0 };
        return GivensCoefficients {
            c: sign,
            s: 0.0,
            r: a.abs(),
            degenerate: a == 0.0,
        };
    }
    if a == 0.0 {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        return GivensCoefficients {
            c: 0.0,
            s: sign,
            r: b.abs(),
            degenerate: false,
        };
    }
    let r = a.hypot(b);
    GivensCoefficients {
        c: a / r,
        s: b / r,
        r,
        degenerate: false,
    }
}

/// Returns `Q M` where `Q` is `g` embedded in the identity; only rows `g.i`
/// and `g.j` change.
pub fn apply_left(m: &Matrix, g: &GivensRotation) -> Result<Matrix> {
    let mut out = m.clone();
    out.rotate_rows(g)?;
    Ok(out)
}

/// Returns `M Q^T`; only columns `g.i` and `g.j` change.
pub fn apply_right(m: &Matrix, g: &GivensRotation) -> Result<Matrix> {
    let mut out = m.clone();
    out.rotate_cols(g)?;
    Ok(out)
}

/// Givens QR: returns `(Q, R)` with `A = Q R`, `Q` orthogonal and `R` upper
/// triangular with exact zeros below the diagonal. `A` must be square.
pub fn qr_decompose(a: &Matrix) -> Result<(Matrix, Matrix)> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut r = a.clone();
    let mut qt = Matrix::identity(n);
    for j in 0..n {
        for i in (j + 1)..n {
            if r[(i, j)] == 0.0 {
                continue;
            }
            let g = givens_compute(r[(j, j)], r[(i, j)]).in_plane(j, i);
            r.rotate_rows(&g)?;
            qt.rotate_rows(&g)?;
            r[(i, j)] = 0.0;
        }
    }
    Ok((qt.transpose(), r))
}

/// Square upper triangular matrix with a nonzero diagonal.
#[derive(Clone, PartialEq)]
pub struct UpperTriangular(Matrix);

impl UpperTriangular {
    /// Validates squareness, exact zeros below the diagonal and a nonzero
    /// diagonal. The first violation in row-major order is reported.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        for i in 0..n {
            for j in 0..i {
                if m[(i, j)] != 0.0 {
                    return Err(Error::NotUpperTriangular {
                        row: i,
                        col: j,
                        value: m[(i, j)],
                    });
                }
            }
        }
        if let Some(index) = (0..n).find(|&i| m[(i, i)] == 0.0) {
            return Err(Error::Singular { index });
        }
        Ok(Self(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Re-triangularizes a general square matrix: `A = Q R`. The returned
    /// triangular factor has the singular values and right singular vectors of `A`.
    pub fn from_general(a: &Matrix) -> Result<(Matrix, Self)> {
        let (q, r) = qr_decompose(a)?;
        Ok((q, Self::new(r)?))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn corner(&self) -> f64 {
        let n = self.n();
        self.0[(n - 1, n - 1)]
    }

    pub fn leading_block(&self, k: usize) -> UpperTriangular {
        UpperTriangular(self.0.leading_block(k))
    }

    pub fn min_abs_diagonal(&self) -> f64 {
        (0..self.n())
            .map(|i| self.0[(i, i)].abs())
            .fold(f64::INFINITY, f64::min)
    }
}

impl Index<(usize, usize)> for UpperTriangular {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl TryFrom<Matrix> for UpperTriangular {
    type Error = Error;

    fn try_from(m: Matrix) -> Result<Self> {
        Self::new(m)
    }
}

impl fmt::Debug for UpperTriangular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UpperTriangular({:?})", self.0)
    }
}
