//! Dense complex linear algebra.
//!
//! Everything here works on small dense matrices (dimension at most a few
//! thousand). Matrices are row-major `Vec<Complex64>`; there is no sparse path.

mod eig;
mod types;

pub use eig::{hermitian_eig, hermitian_eig_with, Eigen};
pub use types::{DensityMatrix, Hermitian, Projector};

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Dense complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Which tensor factor survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::validation("matrix", "dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::validation(
                "matrix",
                format!("expected {} entries, got {}", rows * cols, data.len()),
            ));
        }
        if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation(
                format!("matrix[{}][{}]", i / cols, i % cols),
                "entry is not finite",
            ));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::validation("matrix", "ragged rows"));
        }
        Self::from_vec(
            r,
            c,
            rows.iter().flatten().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// |psi><psi| for a (not necessarily normalized) vector.
    pub fn outer(psi: &[C64]) -> Self {
        let n = psi.len();
        Self::from_fn(n, n, |i, j| psi[i] * psi[j].conj())
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

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        let oc = other.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * oc..(i + 1) * oc];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * oc..(k + 1) * oc];
                for (o, b) in out_row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// self * other * self^dagger
    pub fn sandwich(&self, other: &CMatrix) -> CMatrix {
        self.matmul(other).matmul(&self.adjoint())
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &CMatrix, s: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest |M[i][j] - conj(M[j][i])|.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.max_abs().max(1.0)
    }

    /// (M + M^dagger) / 2
    pub fn hermitian_part(&self) -> CMatrix {
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] = C64::new(self[(i, i)].re, 0.0);
            for j in i + 1..self.cols {
                let z = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        out
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].re).collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product with the default dimension cap.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    tensor_with(a, b, NumericPolicy::DEFAULT.dim_cap)
}

pub fn tensor_with(a: &CMatrix, b: &CMatrix, cap: usize) -> Result<CMatrix> {
    let rows = a.rows.checked_mul(b.rows);
    let cols = a.cols.checked_mul(b.cols);
    match (rows, cols) {
        (Some(r), Some(c)) if r <= cap && c <= cap => {}
        _ => {
            return Err(Error::resource(format!(
                "tensor product of {}x{} and {}x{} exceeds dimension cap {cap}",
                a.rows, a.cols, b.rows, b.cols
            )))
        }
    }
    let (rb, cb) = (b.rows, b.cols);
    let mut out = CMatrix::zeros(a.rows * rb, a.cols * cb);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = x * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// A^{(x) n}. `n` must be at least 1.
pub fn tensor_power(a: &CMatrix, n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::validation("n", "tensor power needs n >= 1"));
    }
    let cap = NumericPolicy::DEFAULT.dim_cap;
    let dim_ok = |d: usize| d.checked_pow(n as u32).is_some_and(|x| x <= cap);
    if !dim_ok(a.rows) || !dim_ok(a.cols) {
        return Err(Error::resource(format!(
            "{}^{n} exceeds dimension cap {cap}",
            a.rows.max(a.cols)
        )));
    }
    let mut out = a.clone();
    for _ in 1..n {
        out = tensor(&out, a)?;
    }
    Ok(out)
}

/// Tensor product of a sequence of matrices, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> Result<CMatrix> {
    let mut it = factors.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::validation("factors", "empty tensor product"))?;
    it.try_fold(first.clone(), |acc, m| tensor(&acc, m))
}

/// Partial trace over one factor of a `dim_a * dim_b` square matrix.
pub fn partial_trace(m: &CMatrix, dim_a: usize, dim_b: usize, keep: Keep) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::validation("matrix", "partial trace needs a square matrix"));
    }
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != m.rows {
        return Err(Error::validation(
            "dims",
            format!("{} does not factor as {dim_a} x {dim_b}", m.rows),
        ));
    }
    Ok(match keep {
        Keep::First => CMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
        Keep::Second => CMatrix::from_fn(dim_b, dim_b, |k, l| {
            (0..dim_a).map(|i| m[(i * dim_b + k, i * dim_b + l)]).sum()
        }),
    })
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::validation("matrix", "trace norm needs a square matrix"));
    }
    if m.is_hermitian(1e-12) {
        let e = hermitian_eig(&m.hermitian_part())?;
        return Ok(e.values.iter().map(|v| v.abs()).sum());
    }
    let gram = m.adjoint().matmul(m).hermitian_part();
    let e = hermitian_eig(&gram)?;
    Ok(e.values.iter().map(|v| v.max(0.0).sqrt()).sum())
}

/// Largest |eigenvalue| of a Hermitian matrix.
pub fn operator_norm_hermitian(m: &CMatrix) -> Result<f64> {
    let e = hermitian_eig(&m.hermitian_part())?;
    Ok(e.values.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

/// Real part of tr(A B) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.cols, b.rows);
    assert_eq!(a.rows, b.cols);
    let mut acc = ZERO;
    for i in 0..a.rows {
        for k in 0..a.cols {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian};

    fn phi_plus() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::outer(&[C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)])
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&CMatrix::diag(&[0.3, -0.7])).unwrap() - 1.0).abs() < 1e-14);
        let x = phi_plus().sub(&CMatrix::identity(4).scale(0.25));
        assert!((trace_norm(&x).unwrap() - 1.5).abs() < 1e-12);
        let rho = random_density(3, 5);
        assert!((trace_norm(rho.matrix()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_rejects_rectangular() {
        assert!(matches!(
            trace_norm(&CMatrix::zeros(2, 3)),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn non_hermitian_trace_norm_uses_singular_values() {
        // [[0,1],[0,0]] has singular values {1, 0}
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = ONE;
        assert!((trace_norm(&m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_examples() {
        let half = CMatrix::identity(2).scale(0.5);
        let p = tensor_power(&half, 3).unwrap();
        assert!(p.sub(&CMatrix::identity(8).scale(0.125)).max_abs() < 1e-15);
        let t = tensor(&CMatrix::diag(&[1.0, 0.0]), &CMatrix::diag(&[0.0, 1.0])).unwrap();
        assert_eq!(t, CMatrix::diag(&[0.0, 1.0, 0.0, 0.0]));
        assert_eq!(tensor_power(&half, 1).unwrap(), half);
    }

    #[test]
    fn tensor_index_formula() {
        let a = random_hermitian(2, 1);
        let b = CMatrix::from_fn(3, 3, |i, j| C64::new(i as f64 + 0.5, j as f64 - 1.0));
        let t = tensor(&a, &b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..3 {
                    for l in 0..3 {
                        assert_eq!(t[(i * 3 + k, j * 3 + l)], a[(i, j)] * b[(k, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_cap_is_enforced() {
        let big = CMatrix::identity(65);
        assert!(matches!(tensor(&big, &big), Err(Error::Resource(_))));
        assert!(matches!(
            tensor_power(&CMatrix::identity(2), 13),
            Err(Error::Resource(_))
        ));
        assert!(tensor_power(&CMatrix::identity(2), 12).is_ok());
    }

    #[test]
    fn partial_trace_examples() {
        let rho = random_density(2, 11);
        let sigma = random_density(3, 12);
        let joint = tensor(rho.matrix(), sigma.matrix()).unwrap();
        let back = partial_trace(&joint, 2, 3, Keep::First).unwrap();
        assert!(back.sub(rho.matrix()).max_abs() < 1e-12);
        let back_b = partial_trace(&joint, 2, 3, Keep::Second).unwrap();
        assert!(back_b.sub(sigma.matrix()).max_abs() < 1e-12);

        let reduced = partial_trace(&phi_plus(), 2, 2, Keep::First).unwrap();
        assert!(reduced.sub(&CMatrix::identity(2).scale(0.5)).max_abs() < 1e-15);

        let psd = random_density(4, 13);
        let half = partial_trace(psd.matrix(), 2, 2, Keep::Second).unwrap();
        assert!((half.trace().re - psd.matrix().trace().re).abs() < 1e-12);

        assert!(partial_trace(&CMatrix::identity(5), 2, 2, Keep::First).is_err());
    }
}
