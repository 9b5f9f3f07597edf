//! Random binning codes for compound wiretap channels.

mod decoder;
mod ensemble;
mod evaluate;
mod leakage;
mod pgm;

pub use decoder::{build_classical_decoder, ClassicalDecoder, DecoderScope};
pub use ensemble::{evaluate_error_random_coding, EnsembleDecoder, EnsembleOptions, RandomCodingState};
pub use evaluate::{evaluate_error, EvaluationMode, SimulationReport, StateReport};
pub use leakage::{classical_leakage, cq_leakage, evaluate_leakage};
pub use pgm::{evaluate_cq_code, evaluate_quantum_code, pgm_code_for_channel, pgm_decoder, quantum_leakage, QuantumCodeReport, QuantumCodeSpec};

use std::fmt::Write as _;

use serde::Serialize;

use crate::capacity::{solve_csi, solve_no_csi_lower, SolverOptions};
use crate::channel::CompoundFamily;
use crate::error::{Error, Result};
use crate::info::{check_probability, letter_information};
use crate::policy::NumericPolicy;
use crate::rng::{domain, stream};
use crate::typicality::TypicalSampler;

/// Tolerance applied before rounding `2^x` to an integer.
const ROUNDING_SLACK: f64 = 1e-9;

/// Code sizes and slacks.
///
/// `J` and `L` can be astronomically large at moderate `n`, so sizes are
/// kept as base-2 logarithms with integer views where they fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeParams {
    pub n: usize,
    pub log2_j: f64,
    pub log2_l: Vec<f64>,
    pub omega: f64,
    pub mu: f64,
    pub zeta: f64,
    pub csi: bool,
    pub rate_infeasible: bool,
    /// Per-state `I(P_t, legal_t)`.
    pub legal_information: Vec<f64>,
    /// Per-state `chi(P_t, eavesdrop_t)`.
    pub eavesdrop_information: Vec<f64>,
}

fn ceil_pow2(x: f64) -> f64 {
    if x >= 60.0 {
        x
    } else {
        (x.exp2() - ROUNDING_SLACK).ceil().max(1.0).log2()
    }
}

fn floor_pow2(x: f64) -> f64 {
    if x >= 60.0 {
        x
    } else {
        (x.exp2() + ROUNDING_SLACK).floor().max(1.0).log2()
    }
}

fn as_count(log2: f64) -> Option<u64> {
    if log2 < 62.0 {
        Some(log2.exp2().round() as u64)
    } else {
        None
    }
}

impl CodeParams {
    /// Explicit sizes, bypassing the formulas.
    pub fn explicit(n: usize, j: u64, l_per_t: Vec<u64>, csi: bool) -> Result<Self> {
        if n == 0 || j == 0 || l_per_t.iter().any(|&l| l == 0) || l_per_t.is_empty() {
            return Err(Error::validation("params", "n, J and every L must be at least 1"));
        }
        Ok(CodeParams {
            n,
            log2_j: (j as f64).log2(),
            log2_l: l_per_t.iter().map(|&l| (l as f64).log2()).collect(),
            omega: 0.0,
            mu: 0.0,
            zeta: 0.0,
            csi,
            rate_infeasible: false,
            legal_information: vec![],
            eavesdrop_information: vec![],
        })
    }

    pub fn j(&self) -> Option<u64> {
        as_count(self.log2_j)
    }

    pub fn l(&self, t: usize) -> Option<u64> {
        as_count(self.log2_l[t.min(self.log2_l.len() - 1)])
    }

    pub fn rate(&self) -> f64 {
        self.log2_j / self.n as f64
    }

    /// Reference error level `sqrt(T) 2^{-n omega / 2}` of the random-coding bound.
    pub fn error_target(&self, theta_size: usize) -> f64 {
        (theta_size as f64).sqrt() * (-(self.n as f64) * self.omega / 2.0).exp2()
    }
}

/// Size a binning code from the family and per-state input distributions.
///
/// With `csi` each state has its own `L_t`; without, one distribution
/// (`p_per_t[0]`) and a shared `L` sized by the worst eavesdropper.
pub fn size_code(
    family: &CompoundFamily,
    p_per_t: &[Vec<f64>],
    n: usize,
    omega: f64,
    mu: f64,
    zeta: f64,
    csi: bool,
) -> Result<CodeParams> {
    if n == 0 {
        return Err(Error::validation("n", "block length must be at least 1"));
    }
    for (name, v) in [("omega", omega), ("mu", mu), ("zeta", zeta)] {
        if !(v > 0.0) {
            return Err(Error::validation(name, "slack must be positive"));
        }
    }
    let t_count = family.theta_size();
    let dists: Vec<&Vec<f64>> = if csi {
        if p_per_t.len() != t_count {
            return Err(Error::validation("P", format!("need {t_count} distributions, got {}", p_per_t.len())));
        }
        p_per_t.iter().collect()
    } else {
        let p = p_per_t
            .first()
            .ok_or_else(|| Error::validation("P", "need an input distribution"))?;
        vec![p; t_count]
    };
    for (t, p) in dists.iter().enumerate() {
        check_probability(p, &format!("P[{t}]"))?;
    }
    let mut legal = Vec::with_capacity(t_count);
    let mut eve = Vec::with_capacity(t_count);
    for (t, pair) in family.pairs().iter().enumerate() {
        legal.push(letter_information(&pair.legal, dists[t])?);
        eve.push(letter_information(&pair.eavesdrop, dists[t])?);
    }
    let nf = n as f64;
    let log2_l: Vec<f64> = if csi {
        eve.iter().map(|chi| ceil_pow2(nf * (chi + 2.0 * zeta))).collect()
    } else {
        let worst = eve.iter().map(|chi| chi + 2.0 * zeta).fold(f64::MIN, f64::max);
        vec![ceil_pow2(nf * worst)]
    };
    let exponent = (0..t_count)
        .map(|t| nf * legal[t] - log2_l[if csi { t } else { 0 }])
        .fold(f64::INFINITY, f64::min)
        - nf * mu;
    let rate_infeasible = exponent < 1.0 - ROUNDING_SLACK;
    let log2_j = if rate_infeasible { 0.0 } else { floor_pow2(exponent) };
    Ok(CodeParams {
        n,
        log2_j,
        log2_l,
        omega,
        mu,
        zeta,
        csi,
        rate_infeasible,
        legal_information: legal,
        eavesdrop_information: eve,
    })
}

/// Code sizes for a target fraction of a solved capacity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateSizing {
    /// Solved capacity (or no-CSI lower bound) the rate is measured against.
    pub capacity: f64,
    pub rate_fraction: f64,
    /// Common value of `omega`, `mu` and `zeta`, `(1 - f) C / 3`.
    pub slack: f64,
    pub p_per_t: Vec<Vec<f64>>,
    pub params: CodeParams,
}

/// Size a binning code at `rate_fraction` of the capacity, splitting the
/// remaining gap evenly between the three slacks.
///
/// With `csi` every state gets the argmax distribution of its own pair and
/// the capacity is the smallest per-pair value; without, the no-CSI lower
/// bound and its argmax are used.
pub fn size_at_fraction(family: &CompoundFamily, n: usize, rate_fraction: f64, csi: bool, seed: u64) -> Result<RateSizing> {
    if !(rate_fraction > 0.0 && rate_fraction < 1.0) {
        return Err(Error::validation("rate_fraction", "must lie in (0, 1)"));
    }
    let opts = SolverOptions { seed, ..Default::default() };
    let (capacity, p_per_t) = if csi {
        let mut capacity = f64::INFINITY;
        let mut p_per_t = Vec::with_capacity(family.theta_size());
        for pair in family.pairs() {
            let sub = CompoundFamily::new(family.kind(), vec![pair.clone()])?;
            let rep = solve_csi(&sub, &opts)?;
            capacity = capacity.min(rep.value);
            p_per_t.push(rep.distribution);
        }
        (capacity, p_per_t)
    } else {
        let rep = solve_no_csi_lower(family, &opts)?;
        (rep.value, vec![rep.distribution])
    };
    if capacity <= 1e-9 {
        return Err(Error::Infeasible("secrecy capacity is zero".into()));
    }
    let slack = (1.0 - rate_fraction) * capacity / 3.0;
    let params = size_code(family, &p_per_t, n, slack, slack, slack, csi)?;
    if params.rate_infeasible {
        return Err(Error::Infeasible(format!("no message fits at n = {n}")));
    }
    Ok(RateSizing { capacity, rate_fraction, slack, p_per_t, params })
}

/// `J x L` matrix of codewords for one state (or the shared no-CSI book).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Book {
    pub j: usize,
    pub l: usize,
    /// Row-major `[j][l]`, each a length-`n` input sequence.
    pub codewords: Vec<Vec<usize>>,
}

impl Book {
    pub fn codeword(&self, j: usize, l: usize) -> &[usize] {
        &self.codewords[j * self.l + l]
    }

    pub fn bin(&self, j: usize) -> &[Vec<usize>] {
        &self.codewords[j * self.l..(j + 1) * self.l]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingDescriptor {
    pub p: Vec<f64>,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WiretapCodebook {
    pub n: usize,
    pub csi: bool,
    pub seed: u64,
    pub books: Vec<Book>,
    pub sampling: Vec<SamplingDescriptor>,
}

impl WiretapCodebook {
    pub fn j(&self) -> usize {
        self.books[0].j
    }

    /// Book used in state `t` (the shared book without CSI).
    pub fn book(&self, t: usize) -> &Book {
        if self.csi {
            &self.books[t]
        } else {
            &self.books[0]
        }
    }

    /// One line per codeword: `t j l` followed by the symbols.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# n={} csi={} seed={}", self.n, self.csi, self.seed);
        for (t, book) in self.books.iter().enumerate() {
            for j in 0..book.j {
                for l in 0..book.l {
                    let word: Vec<String> = book.codeword(j, l).iter().map(|x| x.to_string()).collect();
                    let _ = writeln!(out, "{t} {j} {l}: {}", word.join(" "));
                }
            }
        }
        out
    }
}

/// Draw every codeword i.i.d. from the truncated distribution `p'_t`.
///
/// Codeword `(t, j, l)` comes from its own stream, so a book with fewer
/// bins or indices is a sub-book of a larger one under the same seed.
pub fn sample_codebook(params: &CodeParams, p_per_t: &[Vec<f64>], delta: f64, seed: u64) -> Result<WiretapCodebook> {
    let j = params
        .j()
        .ok_or_else(|| Error::resource("J is too large to materialize a codebook"))? as usize;
    let t_count = if params.csi { params.log2_l.len() } else { 1 };
    if p_per_t.len() < t_count {
        return Err(Error::validation("P", format!("need {t_count} distributions")));
    }
    let cap = NumericPolicy::DEFAULT.enumeration_cap as usize;
    let mut books = Vec::with_capacity(t_count);
    let mut sampling = Vec::with_capacity(t_count);
    for t in 0..t_count {
        let l = params
            .l(t)
            .ok_or_else(|| Error::resource("L is too large to materialize a codebook"))? as usize;
        if j.saturating_mul(l) > cap {
            return Err(Error::resource(format!("J*L = {} exceeds codeword cap {cap}", j as u128 * l as u128)));
        }
        let sampler = TypicalSampler::new(&p_per_t[t], params.n, delta)?;
        let mut codewords = Vec::with_capacity(j * l);
        for jj in 0..j {
            for ll in 0..l {
                let mut rng = stream(seed, &[domain::CODEBOOK, t as u64, jj as u64, ll as u64]);
                codewords.push(sampler.sample(&mut rng));
            }
        }
        books.push(Book { j, l, codewords });
        sampling.push(SamplingDescriptor {
            p: p_per_t[t].clone(),
            delta,
        });
    }
    Ok(WiretapCodebook {
        n: params.n,
        csi: params.csi,
        seed,
        books,
        sampling,
    })
}

#[cfg(test)]
mod tests;
