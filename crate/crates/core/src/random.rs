//! Seeded random fixtures: Hermitian matrices, states, channels.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{ClassicalChannel, CqChannel, QuantumChannel};
use crate::linalg::{CMatrix, DensityMatrix, C64};
use crate::rng::{domain, stream};

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian(d: usize, seed: u64) -> CMatrix {
    let g = ginibre(d, d, &mut stream(seed, &[domain::FIXTURE, 0]));
    g.add(&g.adjoint()).scale(0.5).hermitian_part()
}

/// Hilbert-Schmidt random state (`G G^dagger / tr`).
pub fn random_density_rng(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = ginibre(d, d, rng);
    let w = g.matmul(&g.adjoint());
    let t = w.trace().re;
    DensityMatrix::from_trusted(w.scale(1.0 / t))
}

pub fn random_density(d: usize, seed: u64) -> DensityMatrix {
    random_density_rng(d, &mut stream(seed, &[domain::FIXTURE, 1]))
}

pub fn random_pure_vector(d: usize, rng: &mut impl Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

pub fn random_pure(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    DensityMatrix::from_trusted(CMatrix::outer(&random_pure_vector(d, rng)))
}

/// Orthonormalize the columns of a tall matrix (modified Gram-Schmidt).
pub fn orthonormal_columns(mut m: CMatrix) -> CMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    for j in 0..cols {
        for k in 0..j {
            let proj: C64 = (0..rows).map(|i| m[(i, k)].conj() * m[(i, j)]).sum();
            for i in 0..rows {
                let sub = m[(i, k)] * proj;
                m[(i, j)] -= sub;
            }
        }
        let n = (0..rows).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            m[(i, j)] /= n;
        }
    }
    m
}

/// Channel from a Haar-random isometry `C^d_in -> C^d_out (x) C^env`.
pub fn random_channel_rng(
    d_in: usize,
    d_out: usize,
    env: usize,
    rng: &mut impl Rng,
) -> QuantumChannel {
    let v = orthonormal_columns(ginibre(d_out * env, d_in, rng));
    let kraus = (0..env)
        .map(|e| CMatrix::from_fn(d_out, d_in, |i, j| v[(i * env + e, j)]))
        .collect();
    QuantumChannel::new(kraus).expect("isometry blocks are complete")
}

pub fn random_channel(d: usize, seed: u64) -> QuantumChannel {
    random_channel_rng(d, d, d * d, &mut stream(seed, &[domain::FIXTURE, 2]))
}

pub fn random_cq_rng(a: usize, d: usize, rng: &mut impl Rng) -> CqChannel {
    let states = (0..a).map(|_| random_density_rng(d, rng)).collect();
    CqChannel::new(states).expect("random states are valid")
}

pub fn random_cq(a: usize, d: usize, seed: u64) -> CqChannel {
    random_cq_rng(a, d, &mut stream(seed, &[domain::FIXTURE, 3]))
}

pub fn random_probability(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_stochastic_rng(a: usize, b: usize, rng: &mut impl Rng) -> ClassicalChannel {
    let rows = (0..a).map(|_| random_probability(b, rng)).collect();
    ClassicalChannel::new(rows).expect("rows are distributions")
}

pub fn random_stochastic(a: usize, b: usize, seed: u64) -> ClassicalChannel {
    random_stochastic_rng(a, b, &mut stream(seed, &[domain::FIXTURE, 4]))
}
