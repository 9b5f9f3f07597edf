//! Two-phase transmission: the channel state index is sent first over an
//! unprotected repeated block, then the message with the code of the decoded
//! state.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{lambda_capacity, SolverOptions};
use crate::channel::{classical_embed, sample_index, ChannelSpec, ClassicalChannel, CompoundFamily, CqChannel};
use crate::codes::{
    build_classical_decoder, classical_leakage, sample_codebook, size_at_fraction, size_code,
    RateSizing, ClassicalDecoder, CodeParams, EnsembleDecoder,
    RandomCodingState, WiretapCodebook,
};
use crate::error::{Error, Result};
use crate::info::fidelity;
use crate::linalg::{tensor_all, CMatrix, DensityMatrix};
use crate::policy::NumericPolicy;
use crate::rng::{domain, stream};
use crate::typicality::sequence_at;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolParams {
    /// Target decoding failure.
    pub lambda: f64,
    /// Phase-1 target `delta = 2^-c'`.
    pub c_prime: f64,
    pub seed: u64,
    /// Overrides the computed repetition count.
    pub repetitions: Option<usize>,
    /// Phase-2 block length.
    pub n2: usize,
    /// Phase-2 rate as a fraction of the secrecy capacity with state
    /// information; the remaining gap is split evenly between the slacks.
    pub rate_fraction: f64,
    pub decoder: EnsembleDecoder,
    /// Typical-set width of the codeword distribution.
    pub delta: f64,
    /// Block length of the exactly evaluated leakage code.
    pub leakage_n: usize,
}

impl ProtocolParams {
    pub fn new(lambda: f64, c_prime: f64, n2: usize, seed: u64) -> Self {
        ProtocolParams {
            lambda,
            c_prime,
            seed,
            repetitions: None,
            n2,
            rate_fraction: 0.5,
            decoder: EnsembleDecoder::MaximumLikelihood,
            delta: 1.0,
            leakage_n: 8,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::validation("lambda", "must lie in (0, 1)"));
        }
        if !(self.c_prime > 0.0) {
            return Err(Error::validation("c_prime", "must be positive"));
        }
        if !(self.rate_fraction > 0.0 && self.rate_fraction < 1.0) {
            return Err(Error::validation("rate_fraction", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// `ceil(log2(c) c')` with `c = 1 - lambda` clamped at 1.
    pub fn literal_repetitions(&self) -> i64 {
        let c = (1.0 - self.lambda).max(1.0);
        (c.log2() * self.c_prime).ceil() as i64
    }
}

/// Largest number of candidate signal sets searched exhaustively.
pub const EXHAUSTIVE_CAP: u64 = 200_000;
pub const RANDOM_SEARCH: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Phase1Code {
    pub theta_size: usize,
    pub lambda_capacity: f64,
    pub l: usize,
    pub r: usize,
    pub literal_repetitions: i64,
    /// Per-repetition exponent of the plurality vote, bits.
    pub exponent: f64,
    pub codewords: Vec<Vec<usize>>,
    /// `exhaustive`, `random` or `none`.
    pub search: String,
    /// Smallest pairwise `-log2 F` over states and codeword pairs.
    pub min_distinguishability: f64,
    /// `confusion[t][i][k]`: probability of deciding `k` when `i` is sent in
    /// state `t`; `k = T` means no decision.
    pub confusion: Vec<Vec<Vec<f64>>>,
}

impl Phase1Code {
    pub fn length(&self) -> usize {
        self.l * self.r
    }

    /// Plurality vote over `r` block decisions; ties go to the smallest index.
    pub fn transmit(&self, t: usize, rng: &mut impl Rng) -> usize {
        let tn = self.theta_size;
        if tn == 1 {
            return 0;
        }
        let mut votes = vec![0usize; tn + 1];
        for _ in 0..self.r {
            votes[sample_index(&self.confusion[t][t], rng)] += 1;
        }
        let mut best = 0;
        for k in 1..tn {
            if votes[k] > votes[best] {
                best = k;
            }
        }
        best
    }
}

fn letter_cq(spec: &ChannelSpec) -> CqChannel {
    match spec {
        ChannelSpec::Classical(w) => classical_embed(w),
        ChannelSpec::Cq(v) => v.clone(),
        ChannelSpec::Quantum(q) => {
            let d = q.input_dim();
            let states = (0..d)
                .map(|x| q.apply(&DensityMatrix::basis(d, x)).expect("dimension matches"))
                .collect();
            CqChannel::new(states).expect("channel outputs are states")
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let mut c: u128 = 1;
    for i in 0..k.min(n) as u128 {
        c = c * (n as u128 - i) / (i + 1);
        if c > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    c as u64
}

fn next_subset(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Phase-1 code: `T` sequences of length `l` maximizing the smallest pairwise
/// `-log2` fidelity over all states, repeated `r` times.
pub fn build_phase1(legal: &[ChannelSpec], params: &ProtocolParams) -> Result<Phase1Code> {
    params.validate()?;
    let tn = legal.len();
    if tn == 0 {
        return Err(Error::validation("family", "no channel states"));
    }
    if tn == 1 {
        return Ok(Phase1Code {
            theta_size: 1,
            lambda_capacity: f64::NAN,
            l: 0,
            r: 0,
            literal_repetitions: params.literal_repetitions(),
            exponent: f64::INFINITY,
            codewords: vec![vec![]],
            search: "none".into(),
            min_distinguishability: f64::INFINITY,
            confusion: vec![vec![vec![1.0, 0.0]]],
        });
    }
    let cap = lambda_capacity(legal, &SolverOptions { seed: params.seed, ..Default::default() })?;
    if cap.infeasible {
        return Err(Error::Infeasible("phase-1 lambda-capacity is zero".into()));
    }
    let l = (((tn as f64).log2() / cap.value) - 1e-9).ceil().max(1.0) as usize;
    let letters: Vec<CqChannel> = legal.iter().map(letter_cq).collect();
    let a = letters[0].inputs();
    let policy = NumericPolicy::DEFAULT;
    let space = (a as u64).checked_pow(l as u32).filter(|&s| s <= policy.enumeration_cap).ok_or_else(|| {
        Error::resource(format!("phase-1 input space {a}^{l} exceeds the enumeration cap"))
    })?;
    if (space as usize) < tn {
        return Err(Error::Infeasible("fewer phase-1 sequences than channel states".into()));
    }
    // per-letter -log2 fidelity tables
    let dist: Vec<Vec<Vec<f64>>> = letters
        .iter()
        .map(|v| {
            (0..a)
                .map(|x| (0..a).map(|y| -fidelity(v.state(x), v.state(y)).max(1e-300).log2()).collect())
                .collect()
        })
        .collect();
    let seqs: Vec<Vec<usize>> = (0..space).map(|m| sequence_at(m as usize, a, l)).collect();
    let score = |set: &[usize]| -> f64 {
        let mut worst = f64::INFINITY;
        for t in 0..tn {
            for i in 0..set.len() {
                for j in i + 1..set.len() {
                    let s: f64 = seqs[set[i]].iter().zip(&seqs[set[j]]).map(|(&x, &y)| dist[t][x][y]).sum();
                    worst = worst.min(s);
                }
            }
        }
        worst
    };
    let subsets = binomial(space, tn as u64);
    let (best, search) = if l <= 4 && subsets <= EXHAUSTIVE_CAP {
        let mut idx: Vec<usize> = (0..tn).collect();
        let mut best = (idx.clone(), score(&idx));
        while next_subset(&mut idx, space as usize) {
            let s = score(&idx);
            if s > best.1 {
                best = (idx.clone(), s);
            }
        }
        (best, "exhaustive")
    } else {
        let cands: Vec<(Vec<usize>, f64)> = (0..RANDOM_SEARCH)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(params.seed, &[domain::PROBE, 50_000 + k as u64]);
                let mut set: Vec<usize> = Vec::with_capacity(tn);
                while set.len() < tn {
                    let c = rng.random_range(0..space as usize);
                    if !set.contains(&c) {
                        set.push(c);
                    }
                }
                set.sort_unstable();
                let s = score(&set);
                (set, s)
            })
            .collect();
        let mut best = 0;
        for (i, c) in cands.iter().enumerate() {
            if c.1 > cands[best].1 {
                best = i;
            }
        }
        (cands[best].clone(), "random")
    };
    let codewords: Vec<Vec<usize>> = best.0.iter().map(|&i| seqs[i].clone()).collect();
    let confusion = if legal.iter().all(|c| matches!(c, ChannelSpec::Classical(_))) {
        let ws: Vec<&ClassicalChannel> = legal.iter().map(|c| c.as_classical().unwrap()).collect();
        classical_confusion(&ws, &codewords)?
    } else {
        quantum_confusion(&letters, &codewords)?
    };
    let mut exponent = f64::INFINITY;
    for conf_t in &confusion {
        for (i, row) in conf_t.iter().enumerate() {
            for k in 0..tn {
                if k == i {
                    continue;
                }
                let gap = row[i].sqrt() - row[k].sqrt();
                let e = if gap <= 0.0 { 0.0 } else { -(1.0 - gap * gap).max(0.0).log2() };
                exponent = exponent.min(e);
            }
        }
    }
    if exponent <= 0.0 {
        return Err(Error::Infeasible("phase-1 block does not separate the states".into()));
    }
    let r = params
        .repetitions
        .unwrap_or_else(|| (params.c_prime / exponent - 1e-12).ceil().max(1.0) as usize);
    Ok(Phase1Code {
        theta_size: tn,
        lambda_capacity: cap.value,
        l,
        r,
        literal_repetitions: params.literal_repetitions(),
        exponent,
        codewords,
        search: search.into(),
        min_distinguishability: best.1,
        confusion,
    })
}

/// MAP decoding under a uniform prior over (codeword, state), exact by
/// enumerating outputs.
fn classical_confusion(ws: &[&ClassicalChannel], codewords: &[Vec<usize>]) -> Result<Vec<Vec<Vec<f64>>>> {
    let tn = ws.len();
    let l = codewords[0].len();
    let b = ws[0].outputs();
    let outs = (b as u64)
        .checked_pow(l as u32)
        .filter(|&s| s <= NumericPolicy::DEFAULT.enumeration_cap)
        .ok_or_else(|| Error::resource("phase-1 output space exceeds the enumeration cap"))?;
    let mut conf = vec![vec![vec![0.0; tn + 1]; codewords.len()]; tn];
    for m in 0..outs {
        let y = sequence_at(m as usize, b, l);
        let lik: Vec<Vec<f64>> = ws.iter().map(|w| codewords.iter().map(|x| w.sequence_prob(x, &y)).collect()).collect();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for i in 0..codewords.len() {
            let s: f64 = (0..tn).map(|t| lik[t][i]).sum();
            if s > best_score {
                best = i;
                best_score = s;
            }
        }
        for t in 0..tn {
            for i in 0..codewords.len() {
                conf[t][i][best] += lik[t][i];
            }
        }
    }
    Ok(conf)
}

/// Pretty-good measurement for the state-averaged signals.
fn quantum_confusion(letters: &[CqChannel], codewords: &[Vec<usize>]) -> Result<Vec<Vec<Vec<f64>>>> {
    let tn = letters.len();
    let outputs: Vec<Vec<CMatrix>> = letters
        .iter()
        .map(|v| {
            codewords
                .iter()
                .map(|x| {
                    let parts: Vec<CMatrix> = x.iter().map(|&s| v.state(s).matrix().clone()).collect();
                    let refs = &parts;
                    tensor_all(refs)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let averaged: Vec<DensityMatrix> = (0..codewords.len())
        .map(|i| {
            let d = outputs[0][i].rows();
            let mut m = CMatrix::zeros(d, d);
            for o in &outputs {
                m.add_scaled(&o[i], 1.0 / tn as f64);
            }
            DensityMatrix::from_trusted(m)
        })
        .collect();
    let priors = vec![1.0 / codewords.len() as f64; codewords.len()];
    let code = crate::codes::pgm_decoder(&averaged, &priors)?;
    let mut conf = vec![vec![vec![0.0; tn + 1]; codewords.len()]; tn];
    for t in 0..tn {
        for i in 0..codewords.len() {
            for k in 0..codewords.len() {
                conf[t][i][k] = crate::linalg::trace_product(&outputs[t][i], &code.povm[k]).max(0.0);
            }
            conf[t][i][tn] = crate::linalg::trace_product(&outputs[t][i], &code.completion).max(0.0);
            let s: f64 = conf[t][i].iter().sum();
            for v in conf[t][i].iter_mut() {
                *v /= s;
            }
        }
    }
    Ok(conf)
}

/// Phase-1 error rate per state over `trials` seeded transmissions.
pub fn phase1_error(code: &Phase1Code, trials: u64, seed: u64) -> Vec<f64> {
    (0..code.theta_size)
        .map(|t| {
            let errs: u64 = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream(seed, &[domain::PHASE1_TRIAL, t as u64, i]);
                    (code.transmit(t, &mut rng) != t) as u64
                })
                .sum();
            errs as f64 / trials as f64
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlocklengthReport {
    pub phase1_length: usize,
    pub n_phase2: usize,
    pub ratio: f64,
}

pub fn blocklength_accounting(phase1_length: usize, n_phase2: usize) -> BlocklengthReport {
    BlocklengthReport { phase1_length, n_phase2, ratio: phase1_length as f64 / n_phase2 as f64 }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlocklengthSweep {
    pub rows: Vec<BlocklengthReport>,
    pub strictly_decreasing: bool,
}

pub fn blocklength_sweep(phase1_length: usize, n_values: &[usize]) -> BlocklengthSweep {
    let rows: Vec<BlocklengthReport> = n_values.iter().map(|&n| blocklength_accounting(phase1_length, n)).collect();
    let strictly_decreasing = rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
    BlocklengthSweep { rows, strictly_decreasing }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Phase1Summary {
    pub l: usize,
    pub r: usize,
    pub literal_repetitions: i64,
    pub exponent: f64,
    pub lambda_capacity: f64,
    pub search: String,
    pub codewords: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranscriptReport {
    pub theta_size: usize,
    pub capacity: f64,
    pub log2_j: f64,
    pub n2: usize,
    pub trials: u64,
    pub seed: u64,
    pub oracle_csi: bool,
    pub phase1: Phase1Summary,
    /// `explicit` (sampled codebooks) or `random-coding` (ensemble average).
    pub phase2_mode: String,
    pub log2_l: Vec<f64>,
    pub epsilon1: f64,
    pub epsilon2: f64,
    /// Mean conditional phase-2 error probability behind `epsilon2`.
    pub epsilon2_conditional: f64,
    pub overall_failure: f64,
    pub overall_success: f64,
    pub per_t_failure: Vec<f64>,
    pub adversarial_failure: f64,
    pub union_bound_holds: bool,
    /// Trials whose phase-2 decoder was picked by the decoded state index.
    pub decoded_index_selections: u64,
    pub leakage_n: usize,
    pub phase2_leakage: Vec<Option<f64>>,
    pub blocklength: BlocklengthReport,
}

/// Explicit codebooks (joint-typicality decoding only) are used while
/// `J * L_t` stays below this.
pub const EXPLICIT_CODEWORD_CAP: f64 = 4096.0;

enum Phase2<'a> {
    Explicit {
        book: WiretapCodebook,
        decoders: Vec<ClassicalDecoder>,
    },
    Ensemble(Vec<RandomCodingState<'a>>),
}

/// Phase-2 code sizes at `rate_fraction` of the capacity with state
/// information.
pub fn size_phase2(family: &CompoundFamily, n: usize, rate_fraction: f64, seed: u64) -> Result<RateSizing> {
    size_at_fraction(family, n, rate_fraction, true, seed)
}

/// Run the two-phase scheme for `trials` messages.
pub fn run_protocol(family: &CompoundFamily, params: &ProtocolParams, trials: u64) -> Result<TranscriptReport> {
    run_protocol_with(family, params, trials, false)
}

/// With `oracle_csi` the receiver is handed the true state instead of the
/// phase-1 decision.
pub fn run_protocol_with(
    family: &CompoundFamily,
    params: &ProtocolParams,
    trials: u64,
    oracle_csi: bool,
) -> Result<TranscriptReport> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::validation("trials", "need at least one trial"));
    }
    let tn = family.theta_size();
    let legal: Vec<ChannelSpec> = family.pairs().iter().map(|p| p.legal.clone()).collect();
    let pairs: Vec<(&ClassicalChannel, &ClassicalChannel)> = (0..tn)
        .map(|t| family.classical_pair(t))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::validation("kind", "phase 2 runs on classical families"))?;
    let phase1 = build_phase1(&legal, params)?;
    let sizing = size_phase2(family, params.n2, params.rate_fraction, params.seed)?;
    let p_per_t = &sizing.p_per_t;
    let code_params = &sizing.params;
    let total = (0..tn).map(|t| code_params.log2_j + code_params.log2_l[t]).fold(0.0, f64::max);
    let dec_delta = match params.decoder {
        EnsembleDecoder::JointTypical { delta } => delta,
        EnsembleDecoder::MaximumLikelihood => 0.0,
    };
    let jt = matches!(params.decoder, EnsembleDecoder::JointTypical { .. });
    let phase2 = if jt && total <= EXPLICIT_CODEWORD_CAP.log2() {
        let book = sample_codebook(code_params, p_per_t, params.delta, params.seed)?;
        let decoders = (0..tn)
            .map(|t| build_classical_decoder(book.book(t), &[pairs[t].0.clone()], dec_delta))
            .collect();
        Phase2::Explicit { book, decoders }
    } else {
        Phase2::Ensemble(
            (0..tn)
                .map(|t| RandomCodingState::new(pairs[t].0, &p_per_t[t], code_params, t, params.delta, params.decoder))
                .collect::<Result<_>>()?,
        )
    };

    let selections = AtomicU64::new(0);
    // (t, phase-1 error, phase-2 error with true index, overall failure,
    // conditional phase-2 error probability)
    let outcomes: Vec<(usize, bool, bool, bool, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r1 = stream(params.seed, &[domain::PHASE1_TRIAL, u64::MAX, i]);
            let t = r1.random_range(0..tn);
            let decoded = phase1.transmit(t, &mut r1);
            let t_hat = if oracle_csi { t } else { decoded };
            let mut r2 = stream(params.seed, &[domain::PHASE2_TRIAL, i]);
            selections.fetch_add(1, Ordering::Relaxed);
            let (own_ok, selected_ok, q) = match &phase2 {
                Phase2::Explicit { book, decoders } => {
                    let b = book.book(t);
                    let j = r2.random_range(0..b.j);
                    let l = r2.random_range(0..b.l);
                    let y = pairs[t].0.sample_sequence(b.codeword(j, l), &mut r2);
                    let own = decoders[t].decode(&y) == Some(j);
                    let sel = decoders[t_hat].decode(&y) == Some(j);
                    (own, sel, (!own) as u8 as f64)
                }
                Phase2::Ensemble(states) => {
                    let mut rq = stream(params.seed, &[domain::ERROR_TRIAL, t as u64, i]);
                    let q = states[t].trial(&mut rq).expect("validated sampler");
                    let own = r2.random::<f64>() >= q;
                    // a decoder for another state is counted as a failure
                    (own, own && t_hat == t, q)
                }
            };
            (t, decoded != t, !own_ok, !selected_ok, q)
        })
        .collect();
    let n = trials as f64;
    let epsilon1 = outcomes.iter().filter(|o| o.1).count() as f64 / n;
    let epsilon2 = outcomes.iter().filter(|o| o.2).count() as f64 / n;
    let epsilon2_conditional = outcomes.iter().map(|o| o.4).sum::<f64>() / n;
    let overall_failure = outcomes.iter().filter(|o| o.3).count() as f64 / n;
    let per_t_failure: Vec<f64> = (0..tn)
        .map(|t| {
            let total = outcomes.iter().filter(|o| o.0 == t).count();
            let bad = outcomes.iter().filter(|o| o.0 == t && o.3).count();
            if total == 0 {
                0.0
            } else {
                bad as f64 / total as f64
            }
        })
        .collect();
    let adversarial_failure = per_t_failure.iter().cloned().fold(0.0, f64::max);

    let phase2_leakage = (0..tn)
        .map(|t| small_leakage(family, t, &p_per_t[t], sizing.slack, params))
        .collect();

    Ok(TranscriptReport {
        theta_size: tn,
        capacity: sizing.capacity,
        log2_j: code_params.log2_j,
        n2: params.n2,
        trials,
        seed: params.seed,
        oracle_csi,
        phase1: Phase1Summary {
            l: phase1.l,
            r: phase1.r,
            literal_repetitions: phase1.literal_repetitions,
            exponent: phase1.exponent,
            lambda_capacity: phase1.lambda_capacity,
            search: phase1.search.clone(),
            codewords: phase1.codewords.clone(),
        },
        phase2_mode: match phase2 {
            Phase2::Explicit { .. } => "explicit",
            Phase2::Ensemble(_) => "random-coding",
        }
        .into(),
        log2_l: code_params.log2_l.clone(),
        epsilon1,
        epsilon2,
        epsilon2_conditional,
        overall_failure,
        overall_success: 1.0 - overall_failure,
        per_t_failure,
        adversarial_failure,
        union_bound_holds: overall_failure <= epsilon1 + epsilon2 + 1e-9,
        decoded_index_selections: selections.load(Ordering::Relaxed),
        leakage_n: params.leakage_n,
        phase2_leakage,
        blocklength: blocklength_accounting(phase1.length(), params.n2),
    })
}

/// Exact leakage of a formula-sized code at the small block length, with
/// at least two messages.
fn small_leakage(family: &CompoundFamily, t: usize, p: &[f64], slack: f64, params: &ProtocolParams) -> Option<f64> {
    let n = params.leakage_n;
    let (_, eve) = family.classical_pair(t)?;
    let sub = CompoundFamily::new(family.kind(), vec![family.pair(t).clone()]).ok()?;
    let sized = size_code(&sub, &[p.to_vec()], n, slack, slack, slack, true).ok()?;
    let j = sized.j()?.max(2);
    let l = sized.l(0)?;
    if (j * l) as f64 > EXPLICIT_CODEWORD_CAP {
        return None;
    }
    let cp = CodeParams::explicit(n, j, vec![l], true).ok()?;
    let book = sample_codebook(&cp, &[p.to_vec()], params.delta, params.seed).ok()?;
    classical_leakage(book.book(0), eve).ok()
}

#[cfg(test)]
mod tests;
