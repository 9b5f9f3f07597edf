use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{ClassicalDecoder, WiretapCodebook};
use crate::channel::ClassicalChannel;
use crate::error::{Error, Result};
use crate::rng::{domain, stream};
use crate::typicality::sequence_at;

/// Largest output space enumerated by the exact path.
pub const EXACT_OUTPUT_CAP: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationMode {
    /// Exact when the output space fits under the cap, Monte-Carlo otherwise.
    Auto,
    MonteCarlo,
    Exact,
    RandomCoding,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateReport {
    pub t: usize,
    pub max_error: f64,
    pub avg_error: f64,
    /// 95% half-width for the average error (0 on exact paths).
    pub ci_half_width: f64,
    pub trials: u64,
    pub per_message: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leakage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disjoint: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collisions_removed: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub mode: EvaluationMode,
    pub n: usize,
    pub log2_j: f64,
    pub seed: u64,
    pub states: Vec<StateReport>,
    /// `max_t max_j` error.
    pub max_error: f64,
    /// `max_t` of the message-averaged error.
    pub max_avg_error: f64,
}

impl SimulationReport {
    pub(crate) fn from_states(mode: EvaluationMode, n: usize, log2_j: f64, seed: u64, states: Vec<StateReport>) -> Self {
        let max_error = states.iter().map(|s| s.max_error).fold(0.0, f64::max);
        let max_avg_error = states.iter().map(|s| s.avg_error).fold(0.0, f64::max);
        SimulationReport {
            mode,
            n,
            log2_j,
            seed,
            states,
            max_error,
            max_avg_error,
        }
    }
}

fn half_width(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        0.0
    } else {
        1.96 * (p * (1.0 - p) / trials as f64).sqrt()
    }
}

/// Decoding error of a materialized code in every state.
///
/// `decoders` holds one decoder per state or a single shared one.
pub fn evaluate_error(
    codebook: &WiretapCodebook,
    decoders: &[ClassicalDecoder],
    legal: &[ClassicalChannel],
    trials: u64,
    seed: u64,
    mode: EvaluationMode,
) -> Result<SimulationReport> {
    if decoders.is_empty() || legal.is_empty() {
        return Err(Error::validation("decoders", "need at least one decoder and channel"));
    }
    let b = legal[0].outputs();
    let n = codebook.n;
    let space = b.checked_pow(n as u32).filter(|&s| s <= EXACT_OUTPUT_CAP);
    let mode = match mode {
        EvaluationMode::Auto if space.is_some() => EvaluationMode::Exact,
        EvaluationMode::Auto => EvaluationMode::MonteCarlo,
        EvaluationMode::Exact if space.is_none() => {
            return Err(Error::resource(format!("{b}^{n} outputs exceed the exact-path cap {EXACT_OUTPUT_CAP}")))
        }
        EvaluationMode::RandomCoding => {
            return Err(Error::validation("mode", "use evaluate_error_random_coding for ensemble averages"))
        }
        m => m,
    };
    if mode == EvaluationMode::MonteCarlo && trials == 0 {
        return Err(Error::validation("trials", "need at least one trial"));
    }
    let mut states = Vec::with_capacity(legal.len());
    for (t, w) in legal.iter().enumerate() {
        let decoder = &decoders[t.min(decoders.len() - 1)];
        let book = codebook.book(t);
        let report = match mode {
            EvaluationMode::Exact => exact_state(t, book, decoder, w, space.unwrap()),
            _ => monte_carlo_state(t, book, decoder, w, trials, seed),
        };
        states.push(report);
    }
    Ok(SimulationReport::from_states(mode, n, (codebook.j() as f64).log2(), seed, states))
}

fn monte_carlo_state(
    t: usize,
    book: &super::Book,
    decoder: &ClassicalDecoder,
    w: &ClassicalChannel,
    trials: u64,
    seed: u64,
) -> StateReport {
    let j_count = book.j;
    let outcomes: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let j = (i % j_count as u64) as usize;
            let mut rng = stream(seed, &[domain::ERROR_TRIAL, t as u64, i]);
            let l = rng.random_range(0..book.l);
            let y = w.sample_sequence(book.codeword(j, l), &mut rng);
            decoder.decode(&y) != Some(j)
        })
        .collect();
    let mut errors = vec![0u64; j_count];
    let mut counts = vec![0u64; j_count];
    for (i, e) in outcomes.iter().enumerate() {
        let j = i % j_count;
        counts[j] += 1;
        errors[j] += u64::from(*e);
    }
    let per_message: Vec<f64> = errors
        .iter()
        .zip(&counts)
        .map(|(&e, &c)| if c == 0 { 0.0 } else { e as f64 / c as f64 })
        .collect();
    let total_err: u64 = errors.iter().sum();
    let avg = total_err as f64 / trials as f64;
    StateReport {
        t,
        max_error: per_message.iter().copied().fold(0.0, f64::max),
        avg_error: avg,
        ci_half_width: half_width(avg, trials),
        trials,
        per_message,
        leakage: None,
        disjoint: None,
        collisions_removed: None,
    }
}

fn exact_state(t: usize, book: &super::Book, decoder: &ClassicalDecoder, w: &ClassicalChannel, space: usize) -> StateReport {
    let (b, n) = (w.outputs(), decoder.n());
    let decisions: Vec<(Option<usize>, bool)> = (0..space)
        .into_par_iter()
        .map(|m| {
            let y = sequence_at(m, b, n);
            (decoder.decode(&y), decoder.raw_membership(&y) > 1)
        })
        .collect();
    let collisions = decisions.iter().filter(|d| d.1).count() as u64;
    // every output is assigned to at most one set; confirm the sets partition a subset of B^n
    let mut membership = vec![0u8; space];
    for (m, d) in decisions.iter().enumerate() {
        if d.0.is_some() {
            membership[m] += 1;
        }
    }
    let disjoint = membership.iter().all(|&c| c <= 1);
    let per_word: Vec<f64> = (0..book.j * book.l)
        .into_par_iter()
        .map(|k| {
            let (j, l) = (k / book.l, k % book.l);
            let x = book.codeword(j, l);
            let mut correct = 0.0;
            for (m, d) in decisions.iter().enumerate() {
                if d.0 == Some(j) {
                    correct += w.sequence_prob(x, &sequence_at(m, b, n));
                }
            }
            (1.0 - correct).clamp(0.0, 1.0)
        })
        .collect();
    let per_message: Vec<f64> = (0..book.j)
        .map(|j| per_word[j * book.l..(j + 1) * book.l].iter().sum::<f64>() / book.l as f64)
        .collect();
    StateReport {
        t,
        max_error: per_message.iter().copied().fold(0.0, f64::max),
        avg_error: per_message.iter().sum::<f64>() / book.j as f64,
        ci_half_width: 0.0,
        trials: 0,
        per_message,
        leakage: None,
        disjoint: Some(disjoint),
        collisions_removed: Some(collisions),
    }
}
