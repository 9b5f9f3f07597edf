//! Numerical evaluation of compound wiretap capacity expressions.

mod ensemble;
mod simplex;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{ChannelSpec, CompoundFamily, FamilyKind, QuantumChannel};
use crate::error::{Error, Result};
use crate::info::{letter_information, von_neumann_entropy};
use crate::linalg::{CMatrix, DensityMatrix};
use crate::random::random_probability;
use crate::rng::{domain, stream};

use ensemble::{ascend, EnsembleSpace};
use simplex::{fit_resolution, grid_argmax, pattern_search};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Coarse simplex grid resolution (points `k / resolution`).
    pub resolution: usize,
    /// Pattern-search step at which refinement stops.
    pub tolerance: f64,
    /// Also optimize over a prefix channel `V -> A` with `|V| = |A| + 1`.
    pub prefix: bool,
    /// Seeded random starts besides the grid optimum.
    pub restarts: usize,
    /// Random starts for ensemble (quantum-input) ascent.
    pub ensemble_restarts: usize,
    pub seed: u64,
    pub alphabet_cap: usize,
    /// Largest number of grid points evaluated; the resolution is lowered to fit.
    pub grid_cap: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            resolution: 64,
            tolerance: 1e-7,
            prefix: false,
            restarts: 4,
            ensemble_restarts: 16,
            seed: 0,
            alphabet_cap: 8,
            grid_cap: 100_000,
        }
    }
}

/// Auxiliary channel `V -> A` placed in front of every letter channel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrefixChannel {
    pub aux_alphabet_size: usize,
    pub matrix: Vec<Vec<f64>>,
}

impl PrefixChannel {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        crate::channel::ClassicalChannel::validate(&matrix, "prefix")?;
        Ok(PrefixChannel { aux_alphabet_size: matrix.len(), matrix })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerStateValue {
    pub t: usize,
    pub legal_information: f64,
    pub eavesdrop_information: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OptimizerTrace {
    pub grid_resolution: usize,
    pub grid_points: usize,
    pub iterations: usize,
    pub evaluations: usize,
    pub restarts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityReport {
    /// One of `csi`, `no-csi`, `cq-csi`, `regularized-<n>`.
    pub mode: String,
    pub value: f64,
    /// Argmax input distribution (over the auxiliary alphabet when a prefix is used).
    pub distribution: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefix: Option<PrefixChannel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signals: Option<Vec<CMatrix>>,
    pub per_t: Vec<PerStateValue>,
    /// Optimum without a prefix channel, reported alongside the prefixed one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plain_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub trace: OptimizerTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObjectiveValue {
    pub per_t: Vec<PerStateValue>,
    pub min: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Quantifier {
    Csi,
    NoCsi,
}

struct Letters<'a> {
    legal: Vec<&'a ChannelSpec>,
    eavesdrop: Vec<&'a ChannelSpec>,
    alphabet: usize,
}

fn letters(family: &CompoundFamily) -> Result<Letters<'_>> {
    if family.kind() == FamilyKind::Quantum {
        return Err(Error::validation(
            "kind",
            "quantum families need signal ensembles; use the regularized solver",
        ));
    }
    let alphabet = family.input_alphabet().expect("letter families have an alphabet");
    Ok(Letters {
        legal: family.pairs().iter().map(|p| &p.legal).collect(),
        eavesdrop: family.pairs().iter().map(|p| &p.eavesdrop).collect(),
        alphabet,
    })
}

fn per_state(l: &Letters, p: &[f64], prefix: Option<&[Vec<f64>]>) -> Result<Vec<PerStateValue>> {
    let eval = |c: &ChannelSpec| -> Result<f64> {
        match prefix {
            Some(u) => letter_information(&c.compose_prefix(u).expect("letter channel"), p),
            None => letter_information(c, p),
        }
    };
    let mut out = Vec::with_capacity(l.legal.len());
    for t in 0..l.legal.len() {
        let i = eval(l.legal[t])?;
        let chi = eval(l.eavesdrop[t])?;
        out.push(PerStateValue { t, legal_information: i, eavesdrop_information: chi, value: i - chi });
    }
    Ok(out)
}

fn combine(per_t: &[PerStateValue], q: Quantifier) -> f64 {
    match q {
        Quantifier::Csi => per_t.iter().map(|v| v.value).fold(f64::INFINITY, f64::min),
        Quantifier::NoCsi => {
            let i = per_t.iter().map(|v| v.legal_information).fold(f64::INFINITY, f64::min);
            let chi = per_t.iter().map(|v| v.eavesdrop_information).fold(f64::NEG_INFINITY, f64::max);
            i - chi
        }
    }
}

/// `min_t I(P, B_t) - chi(P, Z_t)`, optionally behind a prefix channel (then
/// `p` is a distribution on the auxiliary alphabet).
pub fn objective_csi(
    family: &CompoundFamily,
    p: &[f64],
    prefix: Option<&PrefixChannel>,
) -> Result<ObjectiveValue> {
    objective(family, p, prefix, Quantifier::Csi)
}

/// `min_t I(P, B_t) - max_t chi(P, Z_t)`.
pub fn objective_no_csi(
    family: &CompoundFamily,
    p: &[f64],
    prefix: Option<&PrefixChannel>,
) -> Result<ObjectiveValue> {
    objective(family, p, prefix, Quantifier::NoCsi)
}

fn objective(
    family: &CompoundFamily,
    p: &[f64],
    prefix: Option<&PrefixChannel>,
    q: Quantifier,
) -> Result<ObjectiveValue> {
    let l = letters(family)?;
    if let Some(u) = prefix {
        if u.matrix.iter().any(|r| r.len() != l.alphabet) {
            return Err(Error::validation("prefix", "rows must match the input alphabet"));
        }
    }
    let per_t = per_state(&l, p, prefix.map(|u| u.matrix.as_slice()))?;
    let min = combine(&per_t, q);
    Ok(ObjectiveValue { per_t, min })
}

/// Maximize `min_t I - chi` over P (and a prefix channel when enabled).
pub fn solve_csi(family: &CompoundFamily, options: &SolverOptions) -> Result<CapacityReport> {
    solve_letters(family, options, Quantifier::Csi)
}

/// Maximize the no-CSI lower bound `min_t I - max_t chi`.
pub fn solve_no_csi_lower(family: &CompoundFamily, options: &SolverOptions) -> Result<CapacityReport> {
    solve_letters(family, options, Quantifier::NoCsi)
}

fn random_start(a: usize, seed: u64, coords: &[u64]) -> Vec<f64> {
    let mut rng = stream(seed, coords);
    random_probability(a, &mut rng)
}

fn solve_letters(family: &CompoundFamily, options: &SolverOptions, q: Quantifier) -> Result<CapacityReport> {
    let l = letters(family)?;
    let a = l.alphabet;
    if a > options.alphabet_cap {
        return Err(Error::resource(format!(
            "input alphabet {a} exceeds the solver cap {}",
            options.alphabet_cap
        )));
    }
    let f = |p: &[f64]| combine(&per_state(&l, p, None).expect("validated"), q);
    let r = fit_resolution(a, options.resolution, options.grid_cap as u128);
    let (g, gv, points) = grid_argmax(a, r, &f);
    let step = 1.0 / r as f64;

    let mut starts = vec![(g, gv)];
    for k in 0..options.restarts {
        let p = random_start(a, options.seed, &[domain::RESTART, k as u64]);
        let v = f(&p);
        starts.push((p, v));
    }
    let runs: Vec<_> = starts
        .into_par_iter()
        .map(|(p, v)| pattern_search(p, v, step, options.tolerance, &f))
        .collect();
    let mut trace = OptimizerTrace {
        grid_resolution: r,
        grid_points: points,
        iterations: 0,
        evaluations: points,
        restarts: options.restarts,
    };
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        trace.iterations += run.2.iterations;
        trace.evaluations += run.2.evaluations;
        if run.1 > runs[best].1 {
            best = i;
        }
    }
    let (p, plain, _) = runs[best].clone();

    let mode = match (q, family.kind()) {
        (Quantifier::NoCsi, _) => "no-csi",
        (Quantifier::Csi, FamilyKind::Cq) => "cq-csi",
        _ => "csi",
    }
    .to_string();

    if !options.prefix {
        let per_t = per_state(&l, &p, None)?;
        let value = combine(&per_t, q);
        return Ok(CapacityReport {
            mode,
            value,
            distribution: p,
            prefix: None,
            signals: None,
            per_t,
            plain_value: None,
            label: None,
            trace,
        });
    }

    let v = a + 1;
    let g = |pv: &[f64], u: &[Vec<f64>]| combine(&per_state(&l, pv, Some(u)).expect("validated"), q);
    let mut pv0 = p.clone();
    pv0.push(0.0);
    let mut u0: Vec<Vec<f64>> = (0..a)
        .map(|i| (0..a).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    u0.push(vec![1.0 / a as f64; a]);
    let mut starts = vec![(pv0, u0)];
    for k in 0..options.restarts {
        let coords = [domain::RESTART, 1_000 + k as u64];
        let mut rng = stream(options.seed, &coords);
        let pv = random_probability(v, &mut rng);
        let u = (0..v).map(|_| random_probability(a, &mut rng)).collect();
        starts.push((pv, u));
    }
    let runs: Vec<_> = starts
        .into_par_iter()
        .map(|(pv, u)| alternate(pv, u, step, options.tolerance, &g))
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        trace.iterations += run.3.iterations;
        trace.evaluations += run.3.evaluations;
        if run.2 > runs[best].2 {
            best = i;
        }
    }
    let (pv, u, _, _) = runs[best].clone();
    let per_t = per_state(&l, &pv, Some(&u))?;
    let value = combine(&per_t, q);
    Ok(CapacityReport {
        mode,
        value,
        distribution: pv,
        prefix: Some(PrefixChannel { aux_alphabet_size: v, matrix: u }),
        signals: None,
        per_t,
        plain_value: Some(plain),
        label: None,
        trace,
    })
}

#[derive(Clone, Copy, Debug, Default)]
struct RunStats {
    iterations: usize,
    evaluations: usize,
}

/// Alternating ascent: `P_V` with the prefix fixed, then each prefix row.
fn alternate<G>(
    mut pv: Vec<f64>,
    mut u: Vec<Vec<f64>>,
    step: f64,
    tol: f64,
    g: &G,
) -> (Vec<f64>, Vec<Vec<f64>>, f64, RunStats)
where
    G: Fn(&[f64], &[Vec<f64>]) -> f64,
{
    let mut val = g(&pv, &u);
    let mut stats = RunStats::default();
    for _ in 0..200 {
        let before = val;
        let (p2, v2, s) = pattern_search(pv, val, step, tol, &|p: &[f64]| g(p, &u));
        pv = p2;
        val = v2;
        stats.iterations += s.iterations;
        stats.evaluations += s.evaluations;
        for r in 0..u.len() {
            let row = u[r].clone();
            let h = |x: &[f64]| {
                let mut tmp = u.clone();
                tmp[r] = x.to_vec();
                g(&pv, &tmp)
            };
            let (row2, v3, s) = pattern_search(row, val, step, tol, &h);
            u[r] = row2;
            val = v3;
            stats.iterations += s.iterations;
            stats.evaluations += s.evaluations;
        }
        if val - before < tol {
            break;
        }
    }
    (pv, u, val, stats)
}

/// Regularized values `(1/n) max (chi(P, B^n) - chi(P, Z^n))` for `n = 1..=n_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularizedReport {
    pub reports: Vec<CapacityReport>,
    /// Values non-decreasing in n within 1e-6.
    pub monotone: bool,
}

fn quantum_pairs(family: &CompoundFamily) -> Result<Vec<(QuantumChannel, QuantumChannel)>> {
    let fam = match family.kind() {
        FamilyKind::Quantum => family.clone(),
        FamilyKind::Classical => family.embedded_quantum()?,
        FamilyKind::Cq => {
            return Err(Error::validation(
                "kind",
                "cq families have a classical alphabet; use solve_csi",
            ))
        }
    };
    Ok(fam
        .pairs()
        .iter()
        .map(|p| (p.legal.as_quantum().unwrap().clone(), p.eavesdrop.as_quantum().unwrap().clone()))
        .collect())
}

/// Channel as a linear map on row-major `vec(rho)`.
struct Transfer {
    d_in: usize,
    d_out: usize,
    m: CMatrix,
}

impl Transfer {
    fn new(ch: &QuantumChannel) -> Self {
        let (d_in, d_out) = (ch.input_dim(), ch.output_dim());
        let mut m = CMatrix::zeros(d_out * d_out, d_in * d_in);
        for k in 0..d_in {
            for l in 0..d_in {
                let mut e = CMatrix::zeros(d_in, d_in);
                e[(k, l)] = crate::linalg::C64::new(1.0, 0.0);
                let out = ch.apply_matrix(&e);
                for i in 0..d_out {
                    for j in 0..d_out {
                        m[(i * d_out + j, k * d_in + l)] = out[(i, j)];
                    }
                }
            }
        }
        Transfer { d_in, d_out, m }
    }

    fn apply(&self, w: &CMatrix) -> CMatrix {
        let (di, d) = (self.d_in, self.d_out);
        CMatrix::from_fn(d, d, |i, j| {
            let row = i * d + j;
            let mut acc = crate::linalg::C64::new(0.0, 0.0);
            for k in 0..di {
                for l in 0..di {
                    acc += self.m[(row, k * di + l)] * w[(k, l)];
                }
            }
            acc
        })
    }
}

fn holevo_of_outputs(ch: &Transfer, prior: &[f64], states: &[CMatrix]) -> f64 {
    let d = ch.d_out;
    let mut avg = CMatrix::zeros(d, d);
    let mut cond = 0.0;
    for (p, w) in prior.iter().zip(states) {
        let out = ch.apply(w);
        cond += p * von_neumann_entropy(&DensityMatrix::from_trusted(out.clone()));
        avg.add_scaled(&out, *p);
    }
    von_neumann_entropy(&DensityMatrix::from_trusted(avg)) - cond
}

fn hermitian_sqrt(w: &CMatrix) -> CMatrix {
    let e = crate::linalg::hermitian_eig(w).expect("state");
    e.apply_fn(|v| v.max(0.0).sqrt())
}

struct EnsembleRun {
    prior: Vec<f64>,
    states: Vec<CMatrix>,
    value: f64,
    iterations: usize,
    evaluations: usize,
}

/// The first `structured` starts always reach the full ascent.
fn best_ensemble<F>(space: EnsembleSpace, starts: Vec<Vec<f64>>, structured: usize, f: &F) -> EnsembleRun
where
    F: Fn(&[f64], &[CMatrix]) -> f64 + Sync,
{
    let obj = |x: &[f64]| {
        let (p, s) = space.decode(x);
        f(&p, &s)
    };
    // short screening ascent from every start, then full ascent from the best two
    let screened: Vec<_> = starts.into_par_iter().map(|x| ascend(x, &obj, 40, 1e-12)).collect();
    let (mut it, mut ev) = (0, 0);
    let mut order: Vec<usize> = (0..screened.len()).collect();
    for r in &screened {
        it += r.2.iterations;
        ev += r.2.evaluations;
    }
    order.sort_by(|&a, &b| screened[b].1.partial_cmp(&screened[a].1).unwrap().then(a.cmp(&b)));
    let mut keep: Vec<usize> = (0..structured).collect();
    for &i in order.iter().take(2) {
        if !keep.contains(&i) {
            keep.push(i);
        }
    }
    let finalists: Vec<Vec<f64>> = keep.iter().map(|&i| screened[i].0.clone()).collect();
    let runs: Vec<_> = finalists.into_par_iter().map(|x| ascend(x, &obj, 400, 1e-12)).collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        it += r.2.iterations;
        ev += r.2.evaluations;
        if r.1 > runs[best].1 {
            best = i;
        }
    }
    let (prior, states) = space.decode(&runs[best].0);
    let value = f(&prior, &states);
    EnsembleRun { prior, states, value, iterations: it, evaluations: ev }
}

/// Truncated regularization of the compound cq wiretap capacity.
pub fn solve_cq_regularized(
    family: &CompoundFamily,
    n_max: usize,
    options: &SolverOptions,
) -> Result<RegularizedReport> {
    let pairs = quantum_pairs(family)?;
    if n_max == 0 {
        return Err(Error::validation("n_max", "must be at least 1"));
    }
    let d = pairs[0].0.input_dim();
    let dn = d.checked_pow(n_max as u32).unwrap_or(usize::MAX);
    if n_max > 2 || dn.saturating_mul(dn) > 16 {
        return Err(Error::resource(format!(
            "regularization needs d^(2n) <= 16 and n <= 2 (got d = {d}, n = {n_max})"
        )));
    }
    let m = d * d;
    let blocks: Vec<Vec<(Transfer, Transfer)>> = (1..=n_max)
        .map(|n| {
            pairs
                .iter()
                .map(|(l, e)| Ok((Transfer::new(&l.tensor_power(n)?), Transfer::new(&e.tensor_power(n)?))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let per = |n: usize, prior: &[f64], states: &[CMatrix]| -> Vec<PerStateValue> {
        blocks[n - 1]
            .iter()
            .enumerate()
            .map(|(t, (l, e))| {
                let i = holevo_of_outputs(l, prior, states) / n as f64;
                let chi = holevo_of_outputs(e, prior, states) / n as f64;
                PerStateValue { t, legal_information: i, eavesdrop_information: chi, value: i - chi }
            })
            .collect()
    };
    let mut reports: Vec<CapacityReport> = Vec::new();
    let mut prev: Option<(Vec<f64>, Vec<CMatrix>)> = None;
    for n in 1..=n_max {
        let f = |prior: &[f64], states: &[CMatrix]| combine(&per(n, prior, states), Quantifier::Csi);
        let space = EnsembleSpace { dim: d.pow(n as u32), m };
        let mut starts = vec![space.basis_start()];
        let mut extra = (0, 0);
        if let Some((p1, s1)) = &prev {
            // a d-signal single-letter ensemble whose square fits in m signals
            let small = EnsembleSpace { dim: d, m: d };
            let mut order: Vec<usize> = (0..p1.len()).collect();
            order.sort_by(|&a, &b| p1[b].partial_cmp(&p1[a]).unwrap().then(a.cmp(&b)));
            let top: Vec<usize> = order.into_iter().take(d).collect();
            let mass: f64 = top.iter().map(|&i| p1[i]).sum();
            let pri: Vec<f64> = top.iter().map(|&i| p1[i] / mass).collect();
            let fac: Vec<CMatrix> = top.iter().map(|&i| hermitian_sqrt(&s1[i])).collect();
            let mut cs = vec![small.basis_start(), small.encode(&pri, &fac)];
            for k in 0..options.ensemble_restarts / 4 {
                let mut rng = stream(options.seed, &[domain::RESTART, 10_100 + n as u64, k as u64]);
                cs.push(small.random(&mut rng));
            }
            let f1 = |prior: &[f64], states: &[CMatrix]| combine(&per(1, prior, states), Quantifier::Csi);
            let compact = best_ensemble(small, cs, 2, &f1);
            extra = (compact.iterations, compact.evaluations);
            let roots: Vec<CMatrix> = compact.states.iter().map(hermitian_sqrt).collect();
            let mut prior = Vec::with_capacity(m);
            let mut factors = Vec::with_capacity(m);
            for i in 0..d {
                for j in 0..d {
                    prior.push(compact.prior[i] * compact.prior[j]);
                    factors.push(crate::linalg::tensor(&roots[i], &roots[j]).expect("small"));
                }
            }
            starts.push(space.encode(&prior, &factors));
        }
        let structured = starts.len();
        for k in 0..options.ensemble_restarts {
            let mut rng = stream(options.seed, &[domain::RESTART, 10_000 + n as u64, k as u64]);
            starts.push(space.random(&mut rng));
        }
        let run = best_ensemble(space, starts, structured, &f);
        let per_t = per(n, &run.prior, &run.states);
        let value = combine(&per_t, Quantifier::Csi);
        reports.push(CapacityReport {
            mode: format!("regularized-{n}"),
            value,
            distribution: run.prior.clone(),
            prefix: None,
            signals: Some(run.states.clone()),
            per_t,
            plain_value: None,
            label: Some("lower-estimate".into()),
            trace: OptimizerTrace {
                grid_resolution: 0,
                grid_points: 0,
                iterations: run.iterations + extra.0,
                evaluations: run.evaluations + extra.1,
                restarts: options.ensemble_restarts,
            },
        });
        prev = Some((run.prior, run.states));
    }
    let monotone = reports.windows(2).all(|w| w[1].value >= w[0].value - 1e-6);
    Ok(RegularizedReport { reports, monotone })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Degradedness {
    /// The n = 1 grid surrogate held; the report carries `min_t max_P (I_t - chi_t)`.
    Applicable { report: CapacityReport, surrogate: String },
    /// Worst violation of `I(P, B_t) >= I(P, Z_t)` found on the grid.
    NotApplicable { t: usize, distribution: Vec<f64>, margin: f64 },
}

/// Single-letter shortcut for degraded families, checked on the P grid.
pub fn degradedness_shortcut(family: &CompoundFamily, options: &SolverOptions) -> Result<Degradedness> {
    let l = letters(family)?;
    let a = l.alphabet;
    if a > options.alphabet_cap {
        return Err(Error::resource(format!("input alphabet {a} exceeds the solver cap")));
    }
    let r = fit_resolution(a, options.resolution, options.grid_cap as u128);
    let pts = simplex::grid_points(a, r);
    let worst = pts
        .par_iter()
        .map(|p| {
            let per = per_state(&l, p, None).expect("validated");
            per.iter()
                .map(|v| (v.value, v.t))
                .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
        })
        .collect::<Vec<_>>();
    let mut wi = 0;
    for (i, w) in worst.iter().enumerate() {
        if w.0 < worst[wi].0 {
            wi = i;
        }
    }
    if worst[wi].0 < -1e-12 {
        return Ok(Degradedness::NotApplicable {
            t: worst[wi].1,
            distribution: pts[wi].clone(),
            margin: worst[wi].0,
        });
    }
    let mut per_t = Vec::new();
    let mut best: Option<CapacityReport> = None;
    let mut trace = OptimizerTrace::default();
    for t in 0..family.theta_size() {
        let sub = CompoundFamily::new(family.kind(), vec![family.pair(t).clone()])?;
        let plain = SolverOptions { prefix: false, ..options.clone() };
        let rep = solve_letters(&sub, &plain, Quantifier::Csi)?;
        let mut v = rep.per_t[0].clone();
        v.t = t;
        per_t.push(v);
        trace.grid_resolution = rep.trace.grid_resolution;
        trace.grid_points += rep.trace.grid_points;
        trace.iterations += rep.trace.iterations;
        trace.evaluations += rep.trace.evaluations;
        trace.restarts = rep.trace.restarts;
        if best.as_ref().map_or(true, |b| rep.value < b.value) {
            best = Some(rep);
        }
    }
    let best = best.expect("non-empty family");
    Ok(Degradedness::Applicable {
        report: CapacityReport {
            mode: best.mode,
            value: best.value,
            distribution: best.distribution,
            prefix: None,
            signals: None,
            per_t,
            plain_value: None,
            label: Some("single-letter (degradedness checked at n = 1 on the grid)".into()),
            trace,
        },
        surrogate: format!("n = 1, grid resolution 1/{r}"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaCapacity {
    pub value: f64,
    pub per_t: Vec<f64>,
    /// Zero capacity: no phase-1 code exists.
    pub infeasible: bool,
}

/// `inf_t max_P chi(P, W_t)` over the legal channels.
pub fn lambda_capacity(legal: &[ChannelSpec], options: &SolverOptions) -> Result<LambdaCapacity> {
    if legal.is_empty() {
        return Err(Error::validation("legal", "family is empty"));
    }
    let mut per_t = Vec::with_capacity(legal.len());
    for (t, c) in legal.iter().enumerate() {
        let v = match c {
            ChannelSpec::Quantum(q) => {
                let d = q.input_dim();
                if d * d > 16 {
                    return Err(Error::resource(format!("input dimension {d} exceeds the ensemble cap")));
                }
                let space = EnsembleSpace { dim: d, m: d * d };
                let mut starts = vec![space.basis_start()];
                for k in 0..options.ensemble_restarts {
                    let mut rng = stream(options.seed, &[domain::RESTART, 20_000 + t as u64, k as u64]);
                    starts.push(space.random(&mut rng));
                }
                let tq = Transfer::new(q);
                best_ensemble(space, starts, 1, &|p: &[f64], s: &[CMatrix]| holevo_of_outputs(&tq, p, s)).value
            }
            _ => {
                let a = c.input_alphabet().expect("letter channel");
                if a > options.alphabet_cap {
                    return Err(Error::resource(format!("input alphabet {a} exceeds the solver cap")));
                }
                let f = |p: &[f64]| letter_information(c, p).expect("validated");
                let r = fit_resolution(a, options.resolution, options.grid_cap as u128);
                let (g, gv, _) = grid_argmax(a, r, &f);
                let mut best = pattern_search(g, gv, 1.0 / r as f64, options.tolerance, &f).1;
                for k in 0..options.restarts {
                    let p = random_start(a, options.seed, &[domain::RESTART, 30_000 + t as u64, k as u64]);
                    let v = f(&p);
                    best = best.max(pattern_search(p, v, 1.0 / r as f64, options.tolerance, &f).1);
                }
                best
            }
        };
        per_t.push(v.max(0.0));
    }
    let value = per_t.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(LambdaCapacity { value, per_t, infeasible: value <= 1e-9 })
}
