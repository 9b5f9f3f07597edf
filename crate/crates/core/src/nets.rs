//! Diamond-distance bounds, greedy tau-nets over qubit channels, and
//! discretization of parameterized families.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{CompoundFamily, FamilyKind, QuantumChannel};
use crate::codes::QuantumCodeSpec;
use crate::error::{Error, Result};
use crate::info::{fannes_bound, von_neumann_entropy};
use crate::linalg::{trace_norm, CMatrix, DensityMatrix};
use crate::random::{random_channel_rng, random_pure, random_pure_vector};
use crate::rng::{domain, stream};

pub const DEFAULT_PROBES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    MaximallyEntangled,
    Product,
    Entangled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceBounds {
    pub lower: f64,
    pub upper: f64,
    pub witness_kind: WitnessKind,
    /// Input state achieving `lower` (on reference (x) input for entangled witnesses).
    pub witness: CMatrix,
}

fn check_dims(w: &QuantumChannel, v: &QuantumChannel) -> Result<()> {
    if w.input_dim() != v.input_dim() || w.output_dim() != v.output_dim() {
        return Err(Error::validation(
            "channel",
            format!(
                "dimension mismatch: {}->{} vs {}->{}",
                w.input_dim(),
                w.output_dim(),
                v.input_dim(),
                v.output_dim()
            ),
        ));
    }
    Ok(())
}

/// `|| (id (x) (W - W'))(phi+) ||_1` with the normalized maximally entangled input.
pub fn choi_distance(w: &QuantumChannel, v: &QuantumChannel) -> Result<f64> {
    check_dims(w, v)?;
    trace_norm(&w.choi().matrix().sub(v.choi().matrix()))
}

/// `[lower, upper]` sandwich for `||W - W'||_diamond` with the default probe count.
pub fn diamond_bounds(w: &QuantumChannel, v: &QuantumChannel, seed: u64) -> Result<DistanceBounds> {
    diamond_bounds_with(w, v, DEFAULT_PROBES, seed)
}

/// Probe `i` is drawn from its own stream, so a larger probe set always
/// contains a smaller one and the lower bound can only grow.
pub fn diamond_bounds_with(
    w: &QuantumChannel,
    v: &QuantumChannel,
    probes: usize,
    seed: u64,
) -> Result<DistanceBounds> {
    check_dims(w, v)?;
    let d = w.input_dim();
    let choi = choi_distance(w, v)?;
    let upper = d as f64 * choi;
    let ext_w = QuantumChannel::identity(d).tensor(w)?;
    let ext_v = QuantumChannel::identity(d).tensor(v)?;
    let results: Vec<(f64, WitnessKind, CMatrix)> = (0..probes)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, &[domain::PROBE, i as u64]);
            if i % 2 == 0 {
                let rho = random_pure(d, &mut rng).into_matrix();
                let diff = w.apply_matrix(&rho).sub(&v.apply_matrix(&rho));
                (trace_norm(&diff).unwrap_or(0.0), WitnessKind::Product, rho)
            } else {
                let psi = random_pure_vector(d * d, &mut rng);
                let rho = CMatrix::outer(&psi);
                let diff = ext_w.apply_matrix(&rho).sub(&ext_v.apply_matrix(&rho));
                (trace_norm(&diff).unwrap_or(0.0), WitnessKind::Entangled, rho)
            }
        })
        .collect();
    let mut best = (choi, WitnessKind::MaximallyEntangled, maximally_entangled(d));
    for r in results {
        if r.0 > best.0 {
            best = r;
        }
    }
    Ok(DistanceBounds { lower: best.0, upper, witness_kind: best.1, witness: best.2 })
}

fn maximally_entangled(d: usize) -> CMatrix {
    let s = 1.0 / (d as f64).sqrt();
    let v: Vec<_> = (0..d * d)
        .map(|k| crate::linalg::C64::new(if k / d == k % d { s } else { 0.0 }, 0.0))
        .collect();
    CMatrix::outer(&v)
}

/// Upper bound from Choi matrices alone, with a Frobenius pre-check.
struct ChoiPoint {
    choi: CMatrix,
    d: usize,
}

impl ChoiPoint {
    fn new(ch: &QuantumChannel) -> Self {
        ChoiPoint { choi: ch.choi().into_matrix(), d: ch.input_dim() }
    }

    /// `d * ||J - J'||_1`, or `None` when the Frobenius bounds already decide
    /// that it exceeds `limit`.
    fn upper_within(&self, other: &ChoiPoint, limit: f64) -> Option<f64> {
        let diff = self.choi.sub(&other.choi);
        let fro = diff.frobenius_norm();
        if self.d as f64 * fro > limit {
            return None;
        }
        let u = self.d as f64 * trace_norm(&diff).expect("Hermitian difference");
        (u <= limit).then_some(u)
    }

    fn upper(&self, other: &ChoiPoint) -> f64 {
        self.d as f64 * trace_norm(&self.choi.sub(&other.choi)).expect("Hermitian difference")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageSample {
    pub sample: usize,
    pub nearest: usize,
    /// Diamond upper bound to the nearest element.
    pub bound: f64,
    pub covered: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauNet {
    pub d: usize,
    pub tau: f64,
    pub seed: u64,
    pub budget: usize,
    #[serde(skip)]
    pub channels: Vec<QuantumChannel>,
    pub size: usize,
    /// `log2` of the reference cardinality `(3/tau)^(2 d^4)`.
    pub log2_size_reference: f64,
    pub coverage: Vec<CoverageSample>,
    pub coverage_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

pub const COVERAGE_SAMPLES: usize = 200;

fn net_sample(d: usize, seed: u64, dom: u64, i: usize) -> QuantumChannel {
    random_channel_rng(d, d, d * d, &mut stream(seed, &[dom, i as u64]))
}

/// Greedy random covering: a sampled channel joins the net when its diamond
/// upper bound to every element exceeds `tau`.
pub fn build_tau_net(d: usize, tau: f64, seed: u64, budget: usize) -> Result<TauNet> {
    if d != 2 {
        return Err(Error::resource(format!("tau-nets are capped at d = 2 (got {d})")));
    }
    // upper bounds never exceed 2d, so larger radii are pointless
    if !(tau > 0.0 && tau <= 2.0 * d as f64) {
        return Err(Error::validation("tau", format!("must lie in (0, {}]", 2 * d)));
    }
    let mut channels = Vec::new();
    let mut points: Vec<ChoiPoint> = Vec::new();
    for i in 0..budget {
        let ch = net_sample(d, seed, domain::NET_SAMPLE, i);
        let p = ChoiPoint::new(&ch);
        if points.iter().all(|q| q.upper_within(&p, tau).is_none()) {
            points.push(p);
            channels.push(ch);
        }
    }
    let coverage: Vec<CoverageSample> = (0..COVERAGE_SAMPLES)
        .into_par_iter()
        .map(|s| {
            let p = ChoiPoint::new(&net_sample(d, seed, domain::NET_COVERAGE, s));
            let mut best = (0, f64::INFINITY);
            for (k, q) in points.iter().enumerate() {
                let u = q.upper(&p);
                if u < best.1 {
                    best = (k, u);
                }
            }
            CoverageSample { sample: s, nearest: best.0, bound: best.1, covered: best.1 <= tau }
        })
        .collect();
    let coverage_fraction = coverage.iter().filter(|c| c.covered).count() as f64 / COVERAGE_SAMPLES as f64;
    let warning = (coverage_fraction < 0.95).then(|| {
        format!("incomplete net: coverage {coverage_fraction:.3} < 0.95 after {budget} samples")
    });
    Ok(TauNet {
        d,
        tau,
        seed,
        budget,
        size: channels.len(),
        channels,
        log2_size_reference: 2.0 * (d as f64).powi(4) * (3.0 / tau).log2(),
        coverage,
        coverage_fraction,
        warning,
    })
}

impl TauNet {
    /// The net as a quantum family file (each element paired with itself).
    pub fn to_family(&self) -> Result<CompoundFamily> {
        CompoundFamily::quantum(self.channels.iter().map(|c| (c.clone(), c.clone())).collect())
    }
}

/// `tau = xi / (-log2 xi)`.
pub fn tau_for_xi(xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::validation("xi", "must lie in (0, 1)"));
    }
    Ok(xi / -xi.log2())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemberRecord {
    pub s: f64,
    pub nearest: usize,
    /// Diamond upper bounds to the nearest net pair (legal, eavesdropper).
    pub legal_distance: f64,
    pub eavesdrop_distance: f64,
    pub within_tau: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discretization {
    pub xi: f64,
    pub tau: f64,
    pub block_length: usize,
    /// Parameters of the retained members.
    pub theta_prime: Vec<f64>,
    #[serde(skip)]
    pub family: CompoundFamily,
    pub members: Vec<MemberRecord>,
    /// Largest measured distance over members (either side).
    pub max_distance: f64,
    /// `N * max_distance`.
    pub success_degradation_bound: f64,
    /// `2 tau log2 d - 2 tau log2 tau` at the measured distance.
    pub leakage_inflation_bound: f64,
}

/// Parameter grid used to sample a generator family.
pub const DISCRETIZATION_GRID: usize = 201;

/// Build `theta'` greedily over a parameter grid plus seeded fresh samples.
pub fn discretize_family(
    family: &CompoundFamily,
    xi: f64,
    block_length: usize,
    seed: u64,
) -> Result<Discretization> {
    let tau = tau_for_xi(xi)?;
    if family.kind() != FamilyKind::Quantum {
        return Err(Error::validation("kind", "discretization needs a quantum family"));
    }
    let member = |s: f64| -> (QuantumChannel, QuantumChannel) {
        match family.generator() {
            Some(g) => g.member(s),
            None => {
                let p = family.pair(0);
                (p.legal.as_quantum().unwrap().clone(), p.eavesdrop.as_quantum().unwrap().clone())
            }
        }
    };
    let grid: Vec<f64> = (0..DISCRETIZATION_GRID)
        .map(|i| i as f64 / (DISCRETIZATION_GRID - 1) as f64)
        .collect();
    let mut kept: Vec<(f64, ChoiPoint, ChoiPoint)> = Vec::new();
    for &s in &grid {
        let (l, e) = member(s);
        let (pl, pe) = (ChoiPoint::new(&l), ChoiPoint::new(&e));
        let close = kept.iter().any(|(_, kl, ke)| kl.upper(&pl) <= tau && ke.upper(&pe) <= tau);
        if !close {
            kept.push((s, pl, pe));
        }
    }
    let mut probe_s: Vec<f64> = grid.clone();
    let mut rng = stream(seed, &[domain::NET_COVERAGE, 1]);
    use rand::Rng;
    probe_s.extend((0..COVERAGE_SAMPLES).map(|_| rng.random::<f64>()));
    let members: Vec<MemberRecord> = probe_s
        .par_iter()
        .map(|&s| {
            let (l, e) = member(s);
            let (pl, pe) = (ChoiPoint::new(&l), ChoiPoint::new(&e));
            let mut best = (0, f64::INFINITY, f64::INFINITY);
            for (k, (_, kl, ke)) in kept.iter().enumerate() {
                let (a, b) = (kl.upper(&pl), ke.upper(&pe));
                if a.max(b) < best.1.max(best.2) {
                    best = (k, a, b);
                }
            }
            MemberRecord {
                s,
                nearest: best.0,
                legal_distance: best.1,
                eavesdrop_distance: best.2,
                within_tau: best.1 <= tau && best.2 <= tau,
            }
        })
        .collect();
    let max_distance = members
        .iter()
        .map(|m| m.legal_distance.max(m.eavesdrop_distance))
        .fold(0.0, f64::max);
    let d_out = member(0.0).1.output_dim();
    let theta_prime: Vec<f64> = kept.iter().map(|k| k.0).collect();
    let fam = CompoundFamily::quantum(theta_prime.iter().map(|&s| member(s)).collect())?;
    Ok(Discretization {
        xi,
        tau,
        block_length,
        theta_prime,
        family: fam,
        members,
        max_distance,
        success_degradation_bound: block_length as f64 * max_distance,
        leakage_inflation_bound: 2.0 * fannes_bound(max_distance, d_out),
        })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationCheck {
    pub s: f64,
    pub nearest: usize,
    pub success_member: f64,
    pub success_net: f64,
    pub success_drop: f64,
    /// `max_j || (W^N - W'^N)(w_j) ||_1` on the code's signals.
    pub trace_difference: f64,
    pub bound: f64,
    pub pass: bool,
    pub leakage_member: f64,
    pub leakage_net: f64,
    /// Fannes-type bound at the measured output distance, `d = d_out^N`.
    pub leakage_bound: f64,
    pub leakage_pass: bool,
}

fn chi_uniform(outputs: &[CMatrix]) -> f64 {
    let d = outputs[0].rows();
    let w = 1.0 / outputs.len() as f64;
    let mut avg = CMatrix::zeros(d, d);
    let mut cond = 0.0;
    for o in outputs {
        avg.add_scaled(o, w);
        cond += w * von_neumann_entropy(&DensityMatrix::from_trusted(o.clone()));
    }
    von_neumann_entropy(&DensityMatrix::from_trusted(avg)) - cond
}

/// Measure success and leakage of a code designed for the nearest net element
/// when the true channel is member `s`.
pub fn check_perturbation(
    disc: &Discretization,
    source: &CompoundFamily,
    code: &QuantumCodeSpec,
    record: &MemberRecord,
) -> Result<PerturbationCheck> {
    let n = disc.block_length;
    let (lm, em) = match source.generator() {
        Some(g) => g.member(record.s),
        None => {
            let p = source.pair(0);
            (p.legal.as_quantum().unwrap().clone(), p.eavesdrop.as_quantum().unwrap().clone())
        }
    };
    let pair = disc.family.pair(record.nearest);
    let (ln, en) = (pair.legal.as_quantum().unwrap(), pair.eavesdrop.as_quantum().unwrap());
    let signals = &code.signals;
    let j = signals.len() as f64;
    let mut s_member = 0.0;
    let mut s_net = 0.0;
    let mut trace_difference: f64 = 0.0;
    let mut eve_m = Vec::new();
    let mut eve_n = Vec::new();
    let mut eve_dist: f64 = 0.0;
    for (k, w) in signals.iter().enumerate() {
        let om = lm.apply_n(w.matrix(), n)?;
        let on = ln.apply_n(w.matrix(), n)?;
        s_member += om.matmul(&code.povm[k]).trace().re / j;
        s_net += on.matmul(&code.povm[k]).trace().re / j;
        trace_difference = trace_difference.max(trace_norm(&om.sub(&on))?);
        let zm = em.apply_n(w.matrix(), n)?;
        let zn = en.apply_n(w.matrix(), n)?;
        eve_dist = eve_dist.max(trace_norm(&zm.sub(&zn))?);
        eve_m.push(zm);
        eve_n.push(zn);
    }
    let bound = n as f64 * disc.max_distance;
    let drop = s_net - s_member;
    let (lk_m, lk_n) = (chi_uniform(&eve_m), chi_uniform(&eve_n));
    let d_out = eve_m[0].rows();
    let leakage_bound = 2.0 * fannes_bound(eve_dist, d_out);
    Ok(PerturbationCheck {
        s: record.s,
        nearest: record.nearest,
        success_member: s_member,
        success_net: s_net,
        success_drop: drop,
        trace_difference,
        bound,
        pass: drop <= bound + 1e-12 && trace_difference <= bound + 1e-12,
        leakage_member: lk_m,
        leakage_net: lk_n,
        leakage_bound,
        leakage_pass: (lk_m - lk_n).abs() <= leakage_bound + 1e-12,
    })
}

#[cfg(test)]
mod tests;
