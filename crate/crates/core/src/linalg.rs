//! Dense row-major matrices, vectors, and the least-squares solver.
//!
//! Every public constructor and operation rejects non-finite entries, so a
//! `Matrix` or `Vector` in hand is always finite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative ridge jitter added to the normal equations, scaled by the mean
/// diagonal of the Gram matrix.
pub const RIDGE_JITTER: f64 = 1e-8;

/// Refinement sweeps against the un-jittered normal equations.
const REFINEMENT_STEPS: usize = 4;

fn check_finite(data: &[f64], what: &str) -> Result<()> {
    if data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = Error;
    fn try_from(raw: RawMatrix) -> Result<Self> {
        Matrix::from_vec(raw.rows, raw.cols, raw.data)
    }
}

impl Matrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        check_finite(&data, "matrix construction")?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Caller guarantees `data.len() == rows * cols` and finiteness.
    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vector {
        Vector::from_vec_unchecked((0..self.rows).map(|r| self.get(r, c)).collect())
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// Selects rows by index, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix::from_vec_unchecked(idx.len(), self.cols, data)
    }

    /// Appends a trailing column of ones.
    pub fn with_intercept_column(&self) -> Matrix {
        let cols = self.cols + 1;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.push(1.0);
        }
        Matrix::from_vec_unchecked(self.rows, cols, data)
    }

    pub fn scale(&self, k: f64) -> Result<Matrix> {
        let data: Vec<f64> = self.data.iter().map(|v| v * k).collect();
        check_finite(&data, "matrix scale")?;
        Ok(Matrix::from_vec_unchecked(self.rows, self.cols, data))
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        if self.cols != v.len() {
            return Err(Error::Shape(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let out: Vec<f64> = (0..self.rows)
            .map(|r| dot(self.row(r), v.as_slice()))
            .collect();
        check_finite(&out, "matrix-vector product")?;
        Ok(Vector::from_vec_unchecked(out))
    }

    /// Gram matrix `selfᵀ · self`.
    pub fn gram(&self) -> Matrix {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..n {
                    g[i * n + j] += ri * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[i * n + j] = g[j * n + i];
            }
        }
        Matrix::from_vec_unchecked(n, n, g)
    }

    /// `selfᵀ · y`.
    pub fn transpose_mul_vec(&self, y: &Vector) -> Result<Vector> {
        if self.rows != y.len() {
            return Err(Error::Shape(format!(
                "transpose of {}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                y.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(self.row(r)) {
                *o += x * yr;
            }
        }
        Ok(Vector::from_vec_unchecked(out))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;
    fn try_from(data: Vec<f64>) -> Result<Self> {
        Vector::from_vec(data)
    }
}

impl Vector {
    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        check_finite(&data, "vector construction")?;
        Ok(Self(data))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub(crate) fn from_vec_unchecked(data: Vec<f64>) -> Self {
        Self(data)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn select(&self, idx: &[usize]) -> Vector {
        Vector(idx.iter().map(|&i| self.0[i]).collect())
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = vec![0.0; a.rows * b.cols];
    for i in 0..a.rows {
        let out_row = &mut out[i * b.cols..(i + 1) * b.cols];
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            if aik == 0.0 {
                continue;
            }
            for (o, &bkj) in out_row.iter_mut().zip(b.row(k)) {
                *o += aik * bkj;
            }
        }
    }
    check_finite(&out, "matmul")?;
    Ok(Matrix::from_vec_unchecked(a.rows, b.cols, out))
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.rows;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a.get(j, j);
        for k in 0..j {
            diag -= l.get(j, k) * l.get(j, k);
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let ljj = diag.sqrt();
        l.data[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.data[i * n + j] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the Cholesky factor `L`.
fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for (k, zk) in z.iter().enumerate().take(i) {
            s -= l.get(i, k) * zk;
        }
        z[i] = s / l.get(i, i);
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for (k, xk) in x.iter().enumerate().skip(i + 1) {
            s -= l.get(k, i) * xk;
        }
        x[i] = s / l.get(i, i);
    }
    x
}

/// Returns β minimizing ‖Xβ − y‖².
///
/// Solves the jittered normal equations `(XᵀX + λI)β = Xᵀy` by Cholesky with
/// `λ = RIDGE_JITTER · trace(XᵀX) / cols`, then runs a few refinement sweeps
/// against the un-jittered system. Refinement removes the ridge bias along
/// well-determined directions; along null directions (redundant columns) the
/// iterate stays at the minimum-norm solution.
pub fn solve_least_squares(x: &Matrix, y: &Vector) -> Result<Vector> {
    if x.rows == 0 || x.cols == 0 {
        return Err(Error::EmptyData("least squares on an empty design".into()));
    }
    if x.rows != y.len() {
        return Err(Error::Shape(format!(
            "design has {} rows but target has {} entries",
            x.rows,
            y.len()
        )));
    }
    let gram = x.gram();
    let rhs = x.transpose_mul_vec(y)?;
    let n = x.cols;
    let trace: f64 = (0..n).map(|i| gram.get(i, i)).sum();
    // An all-zero design still needs a positive diagonal.
    let jitter = if trace > 0.0 {
        RIDGE_JITTER * trace / n as f64
    } else {
        RIDGE_JITTER
    };
    let mut jittered = gram.clone();
    for i in 0..n {
        jittered.data[i * n + i] += jitter;
    }
    let l = cholesky(&jittered)?;
    let mut beta = cholesky_solve(&l, rhs.as_slice());
    for _ in 0..REFINEMENT_STEPS {
        let residual: Vec<f64> = (0..n)
            .map(|i| rhs[i] - dot(gram.row(i), &beta))
            .collect();
        let correction = cholesky_solve(&l, &residual);
        for (b, c) in beta.iter_mut().zip(correction) {
            *b += c;
        }
    }
    Vector::from_vec(beta)
}
