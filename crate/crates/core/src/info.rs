//! Entropic quantities in bits.

use crate::channel::{ChannelSpec, ClassicalChannel, CqChannel};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Eigen};
use crate::policy::NumericPolicy;

/// Validated probability vector.
pub fn check_probability(p: &[f64], path: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::validation(path, "empty distribution"));
    }
    if let Some(i) = p.iter().position(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::validation(format!("{path}[{i}]"), "weight must be nonnegative"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > NumericPolicy::DEFAULT.row_sum_tol {
        return Err(Error::validation(path, format!("weights sum to {s}, expected 1")));
    }
    Ok(())
}

fn plogp(p: f64) -> f64 {
    if p <= NumericPolicy::DEFAULT.entropy_zero {
        0.0
    } else {
        -p * p.log2()
    }
}

/// `H(P) = -sum p log2 p`
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().map(|&x| plogp(x)).sum()
}

/// Binary entropy `h2(p)`.
pub fn h2(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// `I(P, W)`
pub fn mutual_information(p: &[f64], w: &ClassicalChannel) -> f64 {
    let q = w.output_distribution(p);
    let mut total = 0.0;
    for (x, &px) in p.iter().enumerate() {
        if px <= 0.0 {
            continue;
        }
        for (y, &wyx) in w.rows()[x].iter().enumerate() {
            if wyx > 0.0 && q[y] > 0.0 {
                total += px * wyx * (wyx / q[y]).log2();
            }
        }
    }
    total.max(0.0)
}

/// Entropy of an eigenvalue list.
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    values.iter().map(|&x| plogp(x)).sum()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.eig().values)
}

pub fn entropy_of_eigen(e: &Eigen) -> f64 {
    spectrum_entropy(&e.values)
}

/// Prior over a list of states.
#[derive(Clone, Debug)]
pub struct Ensemble {
    prior: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(prior: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        check_probability(&prior, "prior")?;
        if prior.len() != states.len() {
            return Err(Error::validation(
                "states",
                format!("{} weights but {} states", prior.len(), states.len()),
            ));
        }
        if states.iter().any(|s| s.dim() != states[0].dim()) {
            return Err(Error::validation("states", "states have different dimensions"));
        }
        Ok(Ensemble { prior, states })
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn average(&self) -> DensityMatrix {
        let refs: Vec<&DensityMatrix> = self.states.iter().collect();
        DensityMatrix::mixture(&self.prior, &refs)
    }
}

/// `chi = S(sum P rho) - sum P S(rho)`
pub fn holevo_chi(e: &Ensemble) -> f64 {
    let avg = von_neumann_entropy(&e.average());
    let cond: f64 = e
        .prior
        .iter()
        .zip(&e.states)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, s)| p * von_neumann_entropy(s))
        .sum();
    (avg - cond).max(0.0)
}

/// `S(V|P) = sum_x P(x) S(V(x))`
pub fn conditional_entropy(p: &[f64], v: &CqChannel) -> f64 {
    p.iter()
        .enumerate()
        .filter(|(_, px)| **px > 0.0)
        .map(|(x, px)| px * von_neumann_entropy(v.state(x)))
        .sum()
}

/// Holevo quantity of `x -> V(x)` under prior `P`, with per-state entropies
/// precomputed.
pub fn chi_with_entropies(p: &[f64], v: &CqChannel, state_entropies: &[f64]) -> f64 {
    let avg = von_neumann_entropy(&v.average(p));
    let cond: f64 = p.iter().zip(state_entropies).map(|(a, b)| a * b).sum();
    (avg - cond).max(0.0)
}

pub fn cq_chi(p: &[f64], v: &CqChannel) -> f64 {
    let ent: Vec<f64> = v.states().iter().map(von_neumann_entropy).collect();
    chi_with_entropies(p, v, &ent)
}

/// `I(P, W)` for a classical channel, `chi(P, V)` for a cq channel.
pub fn letter_information(spec: &ChannelSpec, p: &[f64]) -> Result<f64> {
    let a = spec
        .input_alphabet()
        .ok_or_else(|| Error::validation("channel", "letter information needs a classical input alphabet"))?;
    if p.len() != a {
        return Err(Error::validation("P", format!("length {} differs from alphabet size {a}", p.len())));
    }
    Ok(match spec {
        ChannelSpec::Classical(w) => mutual_information(p, w),
        ChannelSpec::Cq(v) => cq_chi(p, v),
        ChannelSpec::Quantum(_) => unreachable!(),
    })
}

/// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let root = rho.eig().apply_fn(|v| v.max(0.0).sqrt());
    let inner = root.sandwich(sigma.matrix()).hermitian_part();
    let e = crate::linalg::hermitian_eig(&inner).expect("Hermitian");
    let t: f64 = e.values.iter().map(|v| v.max(0.0).sqrt()).sum();
    (t * t).min(1.0)
}

/// Right-hand side of the Fannes-type bound `mu log2 d - mu log2 mu`.
pub fn fannes_bound(mu: f64, d: usize) -> f64 {
    if mu <= 0.0 {
        0.0
    } else {
        mu * (d as f64).log2() - mu * mu.log2()
    }
}
