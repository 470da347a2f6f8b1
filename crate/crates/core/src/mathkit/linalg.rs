//! Small dense linear algebra: a row-major complex matrix and a real
//! Cholesky factorization with diagonal jitter.

use num_complex::Complex64;

use crate::error::{check_len, invalid, Result};

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        check_len("matrix data", rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    /// `u * v^H`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("vector", self.cols, x.len())?;
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `A^H x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("vector", self.rows, x.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (r, xr) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * xr;
            }
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        check_len("inner dimension", self.cols, other.rows)?;
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

pub fn vdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    norm_sqr(a).sqrt()
}

/// Lower-triangular Cholesky factor (row-major, `n x n`) of a real
/// symmetric matrix. If the plain factorization breaks down, a diagonal
/// jitter starting at `1e-12` (relative to the largest diagonal entry) is
/// added and increased tenfold until it succeeds.
///
/// Returns the factor and the jitter that was applied.
pub fn cholesky_jittered(a: &[f64], n: usize) -> Result<(Vec<f64>, f64)> {
    check_len("matrix data", n * n, a.len())?;
    let scale = (0..n).fold(0.0_f64, |m, i| m.max(a[i * n + i].abs())).max(f64::MIN_POSITIVE);
    if let Some(l) = cholesky(a, n, 0.0) {
        return Ok((l, 0.0));
    }
    let mut jitter = 1e-12 * scale;
    while jitter <= 1e-2 * scale {
        if let Some(l) = cholesky(a, n, jitter) {
            return Ok((l, jitter));
        }
        jitter *= 10.0;
    }
    Err(invalid("matrix", "not positive semidefinite within jitter budget"))
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues and row-major eigenvectors (column `i`
/// belongs to eigenvalue `i`).
pub fn symmetric_eigen(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len("matrix data", n * n, a.len())?;
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].powi(2))
            .sum();
        let diag: f64 = (0..n).map(|i| m[i * n + i].powi(2)).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Ok(((0..n).map(|i| m[i * n + i]).collect(), v))
}

/// Nearest (Frobenius) positive semidefinite matrix with unit diagonal
/// restored afterwards: negative eigenvalues are clipped to zero.
pub fn clip_to_psd_correlation(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let (vals, vecs) = symmetric_eigen(a, n)?;
    let mut out = vec![0.0; n * n];
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        for i in 0..n {
            let vi = vecs[i * n + k] * lambda;
            for j in 0..n {
                out[i * n + j] += vi * vecs[j * n + k];
            }
        }
    }
    let d: Vec<f64> = (0..n).map(|i| out[i * n + i].max(f64::MIN_POSITIVE).sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] /= d[i] * d[j];
        }
    }
    Ok(out)
}

fn cholesky(a: &[f64], n: usize, jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            if i == j {
                s += jitter;
            }
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}
