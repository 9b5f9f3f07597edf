//! Numeric tolerances and resource caps shared by every module.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericPolicy {
    /// Max |M[i][j] - conj(M[j][i])| accepted as Hermitian.
    pub hermitian_tol: f64,
    /// Jacobi stops when the off-diagonal Frobenius norm drops below this (relative to ||M||_F, floored at 1).
    pub jacobi_tol: f64,
    pub jacobi_max_sweeps: usize,
    /// Largest matrix dimension any tensor construction may produce.
    pub dim_cap: usize,
    /// Eigenvalues in [-psd_clip, 0) are clipped to zero.
    pub psd_clip: f64,
    pub trace_tol: f64,
    pub row_sum_tol: f64,
    pub kraus_tol: f64,
    pub povm_tol: f64,
    pub projector_tol: f64,
    /// Eigenvalues below this count as exact zeros inside entropy sums.
    pub entropy_zero: f64,
    /// Eigenvalues closer than this are merged into one frequency class.
    pub degeneracy_merge: f64,
    /// Largest alphabet^n that sequence enumeration will attempt.
    pub enumeration_cap: u64,
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        hermitian_tol: 1e-12,
        jacobi_tol: 1e-13,
        jacobi_max_sweeps: 100,
        dim_cap: 4096,
        psd_clip: 1e-10,
        trace_tol: 1e-10,
        row_sum_tol: 1e-12,
        kraus_tol: 1e-10,
        povm_tol: 1e-9,
        projector_tol: 1e-10,
        entropy_zero: 1e-14,
        degeneracy_merge: 1e-12,
        enumeration_cap: 1 << 22,
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}
