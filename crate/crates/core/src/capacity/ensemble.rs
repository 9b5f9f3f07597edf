//! Ascent over signal ensembles `{p_i, w_i}` on a `D`-dimensional input.
//!
//! Priors are softmax logits, states are `A A^dagger / tr(A A^dagger)` for a
//! free complex `A`, so every point of the parameter space is a valid ensemble.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, C64};

#[derive(Clone, Copy, Debug)]
pub(crate) struct EnsembleSpace {
    pub dim: usize,
    pub m: usize,
}

impl EnsembleSpace {
    pub fn len(&self) -> usize {
        self.m + self.m * 2 * self.dim * self.dim
    }

    pub fn decode(&self, x: &[f64]) -> (Vec<f64>, Vec<CMatrix>) {
        let logits = &x[..self.m];
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let s: f64 = w.iter().sum();
        let prior = w.into_iter().map(|v| v / s).collect();
        let d = self.dim;
        let states = (0..self.m)
            .map(|i| {
                let off = self.m + i * 2 * d * d;
                let a = CMatrix::from_fn(d, d, |r, c| {
                    let k = off + 2 * (r * d + c);
                    C64::new(x[k], x[k + 1])
                });
                let g = a.matmul(&a.adjoint());
                let t = g.trace().re;
                if t > 0.0 {
                    g.scale(1.0 / t).hermitian_part()
                } else {
                    CMatrix::identity(d).scale(1.0 / d as f64)
                }
            })
            .collect();
        (prior, states)
    }

    pub fn random(&self, rng: &mut impl Rng) -> Vec<f64> {
        (0..self.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    }

    /// Uniform prior over computational basis states (cycled when `m > dim`).
    pub fn basis_start(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.len()];
        let d = self.dim;
        for i in 0..self.m {
            let b = i % d;
            let off = self.m + i * 2 * d * d;
            x[off + 2 * (b * d)] = 1.0;
        }
        x
    }

    /// Encode explicit pure-ish states given as `A` factors with a prior.
    pub fn encode(&self, prior: &[f64], factors: &[CMatrix]) -> Vec<f64> {
        let mut x = vec![0.0; self.len()];
        let d = self.dim;
        for i in 0..self.m {
            x[i] = prior[i].max(1e-300).ln();
            let off = self.m + i * 2 * d * d;
            for r in 0..d {
                for c in 0..d {
                    let z = factors[i][(r, c)];
                    x[off + 2 * (r * d + c)] = z.re;
                    x[off + 2 * (r * d + c) + 1] = z.im;
                }
            }
        }
        x
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct AscentStats {
    pub iterations: usize,
    pub evaluations: usize,
}

/// Forward-difference gradient ascent with step doubling/halving.
pub(crate) fn ascend<F>(mut x: Vec<f64>, f: &F, max_iter: usize, tol: f64) -> (Vec<f64>, f64, AscentStats)
where
    F: Fn(&[f64]) -> f64,
{
    let h = 1e-7;
    let mut fx = f(&x);
    let mut stats = AscentStats { iterations: 0, evaluations: 1 };
    let mut step = 0.1;
    let mut flat = 0;
    for _ in 0..max_iter {
        stats.iterations += 1;
        let mut g = vec![0.0; x.len()];
        for k in 0..x.len() {
            let keep = x[k];
            x[k] = keep + h;
            g[k] = (f(&x) - fx) / h;
            x[k] = keep;
        }
        stats.evaluations += x.len();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            break;
        }
        let mut improved = false;
        while step > 1e-12 {
            let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b / norm).collect();
            let fy = f(&y);
            stats.evaluations += 1;
            if fy > fx {
                let gain = fy - fx;
                x = y;
                fx = fy;
                step *= 2.0;
                improved = true;
                flat = if gain < tol { flat + 1 } else { 0 };
                break;
            }
            step /= 2.0;
        }
        if !improved || flat >= 5 {
            break;
        }
    }
    (x, fx, stats)
}
