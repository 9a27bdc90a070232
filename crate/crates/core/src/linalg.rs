//! Dense least-squares kernel: column-equilibrated Householder QR.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally long columns.
    pub fn from_columns(columns: &[Vec<S>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    got: c.len(),
                });
            }
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
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
    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ * v`.
    pub fn tr_mul_vec(&self, v: &[S]) -> Vec<S> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![S::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a * vi;
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<S> std::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Householder QR of a column-scaled design, reusable across right-hand sides.
///
/// Columns are scaled to unit Euclidean norm before factorizing so that the
/// rank test does not depend on the units of the regressors (a cubic term and
/// an intercept differ by several orders of magnitude).
#[derive(Debug, Clone)]
pub struct QrFactor<S> {
    qr: Matrix<S>,
    betas: Vec<S>,
    heads: Vec<S>,
    scales: Vec<S>,
}

impl<S: Scalar> QrFactor<S> {
    pub fn new(a: &Matrix<S>) -> Result<Self> {
        let (n, p) = (a.rows(), a.cols());
        if n < p || p == 0 {
            return Err(Error::InsufficientSample { have: n, need: p });
        }
        if !a.all_finite() {
            return Err(Error::NumericalFailure(
                "non-finite entry in design matrix".into(),
            ));
        }
        let mut qr = a.clone();
        let mut scales = Vec::with_capacity(p);
        for j in 0..p {
            let norm = (0..n).map(|i| qr[(i, j)] * qr[(i, j)]).sum::<S>().sqrt();
            if norm == S::zero() {
                return Err(Error::RankDeficient { column: j });
            }
            let inv = norm.recip();
            for i in 0..n {
                qr[(i, j)] = qr[(i, j)] * inv;
            }
            scales.push(inv);
        }
        let tol = S::epsilon().sqrt() * S::lit(1e-2);
        let mut betas = Vec::with_capacity(p);
        let mut heads = Vec::with_capacity(p);
        for k in 0..p {
            let alpha = (k..n).map(|i| qr[(i, k)] * qr[(i, k)]).sum::<S>().sqrt();
            if alpha <= tol {
                return Err(Error::RankDeficient { column: k });
            }
            let x0 = qr[(k, k)];
            let alpha = if x0 > S::zero() { -alpha } else { alpha };
            // reflector v = x - alpha e1; v[k] lives in `heads`, the rest below the diagonal
            let v0 = x0 - alpha;
            qr[(k, k)] = v0;
            let vnorm_sq = v0 * v0 + (k + 1..n).map(|i| qr[(i, k)] * qr[(i, k)]).sum::<S>();
            let beta = S::lit(2.0) / vnorm_sq;
            for j in k + 1..p {
                let s = (k..n).map(|i| qr[(i, k)] * qr[(i, j)]).sum::<S>() * beta;
                for i in k..n {
                    qr[(i, j)] = qr[(i, j)] - s * qr[(i, k)];
                }
            }
            qr[(k, k)] = alpha;
            betas.push(beta);
            heads.push(v0);
        }
        Ok(Self {
            qr,
            betas,
            heads,
            scales,
        })
    }

    pub fn nrows(&self) -> usize {
        self.qr.rows()
    }

    pub fn ncols(&self) -> usize {
        self.qr.cols()
    }

    fn apply_qt(&self, b: &mut [S]) {
        let (n, p) = (self.qr.rows(), self.qr.cols());
        for k in 0..p {
            let v0 = self.heads[k];
            let mut s = v0 * b[k];
            for i in k + 1..n {
                s = s + self.qr[(i, k)] * b[i];
            }
            s = s * self.betas[k];
            b[k] = b[k] - s * v0;
            for i in k + 1..n {
                b[i] = b[i] - s * self.qr[(i, k)];
            }
        }
    }

    /// Least-squares coefficients for right-hand side `y`.
    pub fn solve(&self, y: &[S]) -> Result<Vec<S>> {
        let (n, p) = (self.qr.rows(), self.qr.cols());
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        let mut b = y.to_vec();
        self.apply_qt(&mut b);
        let mut coef = vec![S::zero(); p];
        for k in (0..p).rev() {
            let mut s = b[k];
            for j in k + 1..p {
                s = s - self.qr[(k, j)] * coef[j];
            }
            coef[k] = s / self.qr[(k, k)];
        }
        for (c, &sc) in coef.iter_mut().zip(&self.scales) {
            *c = *c * sc;
        }
        Ok(coef)
    }
}

/// Least-squares solution of `a * x ≈ b`.
pub fn lstsq<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Result<Vec<S>> {
    QrFactor::new(a)?.solve(b)
}
