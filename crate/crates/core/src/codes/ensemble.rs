use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use super::decoder::{counts_jointly_typical, jointly_typical};
use super::evaluate::{EvaluationMode, SimulationReport, StateReport};
use super::CodeParams;
use crate::channel::ClassicalChannel;
use crate::error::{Error, Result};
use crate::policy::NumericPolicy;
use crate::rng::{domain, stream};
use crate::typicality::{counts, for_each_type, ln_factorials, typical_mass, within_width, TypicalSampler};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleDecoder {
    /// Joint typicality with collision removal, width `delta`.
    JointTypical { delta: f64 },
    /// Maximum likelihood; ties count as errors.
    MaximumLikelihood,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleOptions {
    pub trials: u64,
    pub seed: u64,
    /// Width of the typical set the codewords are drawn from.
    pub delta: f64,
    pub decoder: EnsembleDecoder,
}

/// Joint types `(X', y)` for one output type, with probabilities under `p'`.
struct TypeTable {
    /// `(log-likelihood score, ln probability, jointly typical)`, sorted by score.
    entries: Vec<(f64, f64, bool)>,
    /// `ln sum` of the probabilities of jointly typical joint types.
    ln_jt: f64,
    /// Suffix `ln sum` of probabilities over `entries[i..]`.
    ln_suffix: Vec<f64>,
}

fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

struct Context<'a> {
    w: &'a ClassicalChannel,
    p: &'a [f64],
    n: usize,
    delta: f64,
    delta_dec: f64,
    ln_mass: f64,
    lf: Vec<f64>,
}

impl Context<'_> {
    fn table(&self, ny: &[usize]) -> Result<TypeTable> {
        let a = self.p.len();
        let b = ny.len();
        let mut size = 1.0f64;
        for &c in ny {
            let mut k = 1.0;
            for i in 1..a {
                k = k * (c + i) as f64 / i as f64;
            }
            size *= k;
        }
        if size > NumericPolicy::DEFAULT.enumeration_cap as f64 {
            return Err(Error::resource("too many joint types to enumerate"));
        }
        let mut per_b: Vec<Vec<(Vec<usize>, f64)>> = Vec::with_capacity(b);
        for &c in ny {
            let mut list = Vec::new();
            for_each_type(c, a, |k| {
                let mut ln = self.lf[c];
                for (x, &kx) in k.iter().enumerate() {
                    ln -= self.lf[kx];
                    if kx > 0 {
                        ln += if self.p[x] > 0.0 { kx as f64 * self.p[x].ln() } else { f64::NEG_INFINITY };
                    }
                }
                if ln > f64::NEG_INFINITY {
                    list.push((k.to_vec(), ln));
                }
            });
            per_b.push(list);
        }
        let mut entries = Vec::new();
        let mut ln_jt = f64::NEG_INFINITY;
        let mut idx = vec![0usize; b];
        if per_b.iter().any(|l| l.is_empty()) {
            return Ok(TypeTable {
                entries,
                ln_jt,
                ln_suffix: vec![f64::NEG_INFINITY],
            });
        }
        let mut joint = vec![0usize; a * b];
        let mut marg = vec![0usize; a];
        loop {
            let mut ln = -self.ln_mass;
            marg.iter_mut().for_each(|m| *m = 0);
            let mut score = 0.0;
            for (yb, &i) in idx.iter().enumerate() {
                let (k, lp) = &per_b[yb][i];
                ln += lp;
                for (x, &kx) in k.iter().enumerate() {
                    joint[x * b + yb] = kx;
                    marg[x] += kx;
                    if kx > 0 {
                        let wp = self.w.prob(x, yb);
                        score += if wp > 0.0 { kx as f64 * wp.ln() } else { f64::NEG_INFINITY };
                    }
                }
            }
            if within_width(&marg, self.p, self.n, self.delta) {
                let jt = counts_jointly_typical(&joint, &marg, self.w, self.delta_dec);
                if jt {
                    ln_jt = ln_add(ln_jt, ln);
                }
                entries.push((score, ln, jt));
            }
            // odometer over per-output compositions
            let mut pos = 0;
            loop {
                if pos == b {
                    entries.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
                    let mut ln_suffix = vec![f64::NEG_INFINITY; entries.len() + 1];
                    for i in (0..entries.len()).rev() {
                        ln_suffix[i] = ln_add(ln_suffix[i + 1], entries[i].1);
                    }
                    return Ok(TypeTable {
                        entries,
                        ln_jt,
                        ln_suffix,
                    });
                }
                idx[pos] += 1;
                if idx[pos] < per_b[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }
}

impl TypeTable {
    /// `ln Pr[score(X') >= s0]` under `p'`.
    fn ln_at_least(&self, s0: f64) -> f64 {
        let tol = 1e-9 * s0.abs().max(1.0);
        let i = self.entries.partition_point(|e| e.0 < s0 - tol);
        self.ln_suffix[i]
    }
}

/// `1 - (1 - q)^M` with `ln q` and `log2 M` given.
fn union_error(ln_q: f64, log2_m: Option<f64>) -> f64 {
    let Some(log2_m) = log2_m else { return 0.0 };
    if ln_q == f64::NEG_INFINITY {
        return 0.0;
    }
    let q = ln_q.exp().min(1.0);
    if q >= 1.0 {
        return 1.0;
    }
    let ln_m = log2_m * std::f64::consts::LN_2;
    // M ln(1 - q), kept in the log domain for huge M
    let ln_abs = ln_m + (-(-q).ln_1p()).ln();
    -(-(ln_abs.exp())).exp_m1()
}

fn competitors_log2(params: &CodeParams, t: usize) -> Option<f64> {
    let log2_l = params.log2_l[t.min(params.log2_l.len() - 1)];
    if params.log2_j <= 0.0 {
        return None;
    }
    let log2_j_minus_1 = if params.log2_j < 50.0 {
        (params.log2_j.exp2() - 1.0).log2()
    } else {
        params.log2_j
    };
    Some(log2_j_minus_1 + log2_l)
}

/// Random-coding ensemble for one channel state; draws per-trial conditional
/// error probabilities.
pub struct RandomCodingState<'a> {
    ctx: Context<'a>,
    sampler: TypicalSampler,
    log2_m: Option<f64>,
    decoder: EnsembleDecoder,
    cache: Mutex<HashMap<Vec<usize>, std::sync::Arc<TypeTable>>>,
}

impl<'a> RandomCodingState<'a> {
    pub fn new(
        w: &'a ClassicalChannel,
        p: &'a [f64],
        params: &CodeParams,
        t: usize,
        delta: f64,
        decoder: EnsembleDecoder,
    ) -> Result<Self> {
        let ctx = Context {
            w,
            p,
            n: params.n,
            delta,
            delta_dec: match decoder {
                EnsembleDecoder::JointTypical { delta } => delta,
                EnsembleDecoder::MaximumLikelihood => 0.0,
            },
            ln_mass: typical_mass(p, params.n, delta)?.ln(),
            lf: ln_factorials(params.n),
        };
        Ok(RandomCodingState {
            ctx,
            sampler: TypicalSampler::new(p, params.n, delta)?,
            log2_m: competitors_log2(params, t),
            decoder,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Error probability averaged over the other codewords, given the
    /// transmitted codeword and output drawn from `rng`.
    pub fn trial(&self, rng: &mut impl rand::Rng) -> Result<f64> {
        let w = self.ctx.w;
        let x = self.sampler.sample(rng);
        let y = w.sample_sequence(&x, rng);
        let ny = counts(&y, w.outputs());
        let table = {
            let hit = self.cache.lock().unwrap().get(&ny).cloned();
            match hit {
                Some(tb) => tb,
                None => {
                    let tb = std::sync::Arc::new(self.ctx.table(&ny)?);
                    self.cache.lock().unwrap().insert(ny, tb.clone());
                    tb
                }
            }
        };
        Ok(match self.decoder {
            EnsembleDecoder::JointTypical { delta } => {
                if !jointly_typical(&x, &y, w, delta) {
                    1.0
                } else {
                    union_error(table.ln_jt, self.log2_m)
                }
            }
            EnsembleDecoder::MaximumLikelihood => {
                let s0 = x.iter().zip(&y).map(|(&a, &b)| w.prob(a, b).ln()).sum::<f64>();
                union_error(table.ln_at_least(s0), self.log2_m)
            }
        })
    }
}

/// Average decoding error of the random binning ensemble.
///
/// Each trial draws the transmitted codeword from `p'_t` and the output
/// from `W_t^n`; the remaining `(J - 1) L_t` codewords of other bins are
/// integrated out exactly through the joint-type distribution of an
/// independent codeword with the observed output. The receiver tests
/// against the channel of the actual state.
pub fn evaluate_error_random_coding(
    legal: &[ClassicalChannel],
    p_per_t: &[Vec<f64>],
    params: &CodeParams,
    opts: &EnsembleOptions,
) -> Result<SimulationReport> {
    if opts.trials == 0 {
        return Err(Error::validation("trials", "need at least one trial"));
    }
    let mut states = Vec::with_capacity(legal.len());
    for (t, w) in legal.iter().enumerate() {
        let p = if params.csi { &p_per_t[t] } else { &p_per_t[0] };
        let state = RandomCodingState::new(w, p, params, t, opts.delta, opts.decoder)?;
        let errors: Vec<f64> = (0..opts.trials)
            .into_par_iter()
            .map(|i| state.trial(&mut stream(opts.seed, &[domain::ERROR_TRIAL, t as u64, i])))
            .collect::<Result<_>>()?;
        let avg = errors.iter().sum::<f64>() / opts.trials as f64;
        let var = errors.iter().map(|e| (e - avg).powi(2)).sum::<f64>() / (opts.trials.max(2) - 1) as f64;
        states.push(StateReport {
            t,
            max_error: avg,
            avg_error: avg,
            ci_half_width: 1.96 * (var / opts.trials as f64).sqrt(),
            trials: opts.trials,
            per_message: vec![],
            leakage: None,
            disjoint: None,
            collisions_removed: None,
        });
    }
    Ok(SimulationReport::from_states(
        EvaluationMode::RandomCoding,
        params.n,
        params.log2_j,
        opts.seed,
        states,
    ))
}
