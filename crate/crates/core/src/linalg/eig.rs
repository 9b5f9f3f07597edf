//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use super::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

/// Eigen-decomposition `M = U diag(values) U^dagger`.
///
/// `values` are sorted descending; column `k` of `vectors` belongs to
/// `values[k]` and has its first non-negligible component real positive.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn reconstruct(&self) -> CMatrix {
        let u = &self.vectors;
        let n = self.values.len();
        CMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| u[(i, k)] * self.values[k] * u[(j, k)].conj())
                .sum()
        })
    }

    /// `sum_k f(lambda_k) |u_k><u_k|`
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let u = &self.vectors;
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let mut out = CMatrix::zeros(n, n);
        for (k, &w) in fv.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = u[(i, k)] * w;
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * u[(j, k)].conj();
                }
            }
        }
        out
    }
}

pub fn hermitian_eig(m: &CMatrix) -> Result<Eigen> {
    hermitian_eig_with(m, &NumericPolicy::DEFAULT)
}

pub fn hermitian_eig_with(m: &CMatrix, policy: &NumericPolicy) -> Result<Eigen> {
    if !m.is_square() {
        return Err(Error::validation("matrix", "eigendecomposition needs a square matrix"));
    }
    if !m.is_hermitian(policy.hermitian_tol) {
        return Err(Error::validation(
            "matrix",
            format!(
                "not Hermitian (defect {:.3e} > {:.1e})",
                m.hermiticity_defect(),
                policy.hermitian_tol
            ),
        ));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);
    let threshold = policy.jacobi_tol * scale;

    let mut converged = n < 2;
    for _ in 0..policy.jacobi_max_sweeps {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::resource(format!(
            "Jacobi did not converge in {} sweeps",
            policy.jacobi_max_sweeps
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag = a.real_diagonal();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let col = v.column(src);
        let pivot = col
            .iter()
            .find(|z| z.norm() > 1e-12)
            .copied()
            .unwrap_or(C64::new(1.0, 0.0));
        let phase = pivot.conj() / pivot.norm();
        for (i, z) in col.iter().enumerate() {
            vectors[(i, k)] = z * phase;
        }
    }
    Ok(Eigen { values, vectors })
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilate a[p][q] with the unitary U = diag(1, w) * [[c, s], [-s, c]].
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let abs_g = g.norm();
    if abs_g < 1e-300 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let w = g.conj() / abs_g;
    let theta = (aqq - app) / (2.0 * abs_g);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();
    let sw = w * s;
    let cw = w * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - sw * akq;
        a[(k, q)] = akp * s + cw * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - sw.conj() * aqk;
        a[(q, k)] = apk * s + cw.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(app - t * abs_g, 0.0);
    a[(q, q)] = C64::new(aqq + t * abs_g, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - sw * vkq;
        v[(k, q)] = vkp * s + cw * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_hermitian;

    #[test]
    fn diagonal_and_pauli_x() {
        let e = hermitian_eig(&CMatrix::diag(&[0.25, 0.75])).unwrap();
        assert_eq!(e.values, vec![0.75, 0.25]);
        let mut x = CMatrix::zeros(2, 2);
        x[(0, 1)] = C64::new(1.0, 0.0);
        x[(1, 0)] = C64::new(1.0, 0.0);
        let e = hermitian_eig(&x).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_six_by_six_reconstructs() {
        let m = random_hermitian(6, 7);
        let e = hermitian_eig(&m).unwrap();
        assert!(e.reconstruct().sub(&m).frobenius_norm() <= 1e-9);
        let uu = e.vectors.adjoint().matmul(&e.vectors);
        assert!(uu.sub(&CMatrix::identity(6)).max_abs() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn phase_convention_and_determinism() {
        let m = random_hermitian(5, 3);
        let e1 = hermitian_eig(&m).unwrap();
        let e2 = hermitian_eig(&m).unwrap();
        assert_eq!(e1.vectors, e2.vectors);
        for k in 0..5 {
            let first = e1.vectors.column(k).into_iter().find(|z| z.norm() > 1e-12).unwrap();
            assert!(first.im.abs() < 1e-15 && first.re > 0.0);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(hermitian_eig(&m), Err(Error::Validation { .. })));
    }

    #[test]
    fn degenerate_spectrum() {
        let e = hermitian_eig(&CMatrix::identity(4).scale(0.25)).unwrap();
        assert!(e.values.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }
}
