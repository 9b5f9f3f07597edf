use serde::{Deserialize, Serialize};

use super::{hermitian_eig, CMatrix, Eigen, C64};
use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

/// A matrix symmetrized to exact Hermiticity at construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::validation("matrix", "Hermitian matrix must be square"));
        }
        if !m.is_hermitian(NumericPolicy::DEFAULT.hermitian_tol) {
            return Err(Error::validation(
                "matrix",
                format!("not Hermitian (defect {:.3e})", m.hermiticity_defect()),
            ));
        }
        Ok(Hermitian(m.hermitian_part()))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn eig(&self) -> Eigen {
        hermitian_eig(&self.0).expect("symmetrized input is Hermitian")
    }
}

/// Hermitian idempotent matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projector(CMatrix);

impl Projector {
    pub fn new(m: CMatrix) -> Result<Self> {
        let h = Hermitian::new(m)?.0;
        let defect = h.matmul(&h).sub(&h).max_abs();
        if defect > NumericPolicy::DEFAULT.projector_tol * (h.rows() as f64).max(1.0) {
            return Err(Error::validation(
                "projector",
                format!("P^2 != P (defect {defect:.3e})"),
            ));
        }
        Ok(Projector(h))
    }

    /// Projector onto the span of the given orthonormal columns.
    pub fn from_columns(u: &CMatrix, columns: &[usize]) -> Self {
        let n = u.rows();
        let mut p = CMatrix::zeros(n, n);
        for &k in columns {
            for i in 0..n {
                let a = u[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    p[(i, j)] += a * u[(j, k)].conj();
                }
            }
        }
        Projector(p.hermitian_part())
    }

    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        Projector(m)
    }

    pub fn identity(n: usize) -> Self {
        Projector(CMatrix::identity(n))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn rank(&self) -> f64 {
        self.0.trace().re
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

/// Hermitian, positive-semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity. Eigenvalues in
    /// `[-psd_clip, 0)` are clipped to zero and the trace renormalized.
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::new_with(m, &NumericPolicy::DEFAULT)
    }

    pub fn new_with(m: CMatrix, policy: &NumericPolicy) -> Result<Self> {
        let h = Hermitian::new(m)?;
        let tr = h.0.trace().re;
        if (tr - 1.0).abs() > policy.trace_tol {
            return Err(Error::validation(
                "state",
                format!("trace is {tr}, expected 1"),
            ));
        }
        let e = h.eig();
        let min = e.values.last().copied().unwrap_or(0.0);
        if min < -policy.psd_clip {
            return Err(Error::validation(
                "state",
                format!("not positive semidefinite (min eigenvalue {min:.3e})"),
            ));
        }
        if min < 0.0 {
            let clipped = e.apply_fn(|v| v.max(0.0));
            let t = clipped.trace().re;
            return Ok(DensityMatrix(clipped.scale(1.0 / t).hermitian_part()));
        }
        Ok(DensityMatrix(h.0))
    }

    /// Wrap a matrix known to be a state (product of states, channel output).
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        DensityMatrix(m.hermitian_part())
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::validation("psi", "zero or non-finite state vector"));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(DensityMatrix(CMatrix::outer(&v)))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut m = CMatrix::zeros(d, d);
        m[(i, i)] = C64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix(CMatrix::identity(d).scale(1.0 / d as f64))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(CMatrix::diag(probs))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn eig(&self) -> Eigen {
        hermitian_eig(&self.0).expect("density matrices are Hermitian")
    }

    /// Convex combination `sum_i w_i rho_i` (weights assumed to sum to one).
    pub fn mixture(weights: &[f64], states: &[&DensityMatrix]) -> Self {
        let d = states[0].dim();
        let mut acc = CMatrix::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            if *w != 0.0 {
                acc.add_scaled(&s.0, *w);
            }
        }
        DensityMatrix(acc.hermitian_part())
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        Ok(DensityMatrix(super::tensor(&self.0, &other.0)?))
    }
}
