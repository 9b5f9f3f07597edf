use rayon::prelude::*;
use serde::Serialize;

use super::{average_typical_projector, smoothed_matrix, truncate_to_typical};
use crate::channel::{sample_index, CqChannel};
use crate::error::{Error, Result};
use crate::info::check_probability;
use crate::linalg::{hermitian_eig, operator_norm_hermitian, CMatrix};
use crate::rng::{domain, stream};

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationOptions {
    pub n: usize,
    pub alpha: f64,
    /// Classical typical-set width for the codeword distribution.
    pub delta: f64,
    pub l_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Eigenvalue cutoff parameter of the large-eigenvalue projector.
    pub lambda: f64,
    /// Deviation threshold used for the tail fraction.
    pub epsilon: f64,
    /// Replace sampling by the exact `p'`-weighted average.
    pub exhaustive: bool,
}

impl ConcentrationOptions {
    pub fn new(n: usize, alpha: f64, l_values: Vec<usize>, trials: usize, seed: u64) -> Self {
        ConcentrationOptions {
            n,
            alpha,
            delta: 1.0,
            l_values,
            trials,
            seed,
            lambda: 0.05,
            epsilon: 0.1,
            exhaustive: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationRow {
    pub l: usize,
    pub trials: usize,
    pub median_deviation: f64,
    pub max_deviation: f64,
    pub median_cutoff_deviation: f64,
    pub max_cutoff_deviation: f64,
    /// Fraction of trials with deviation above epsilon.
    pub tail_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub options: ConcentrationOptions,
    pub typical_set_size: usize,
    pub support_dim: usize,
    pub cutoff_rank: usize,
    /// `|| Theta - Pi' Theta Pi' ||`
    pub cutoff_gap: f64,
    pub rows: Vec<ConcentrationRow>,
    /// Negated log-log slope of the median deviation against `L`.
    pub zeta_measured: Option<f64>,
    /// `-log2(tail fraction) / n` at the largest `L`.
    pub upsilon_measured: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Empirical operator concentration of averages of smoothed operators.
pub fn aw_concentration_trial(v: &CqChannel, p: &[f64], opts: &ConcentrationOptions) -> Result<ConcentrationReport> {
    check_probability(p, "P")?;
    if p.len() != v.inputs() {
        return Err(Error::validation("P", "length differs from the input alphabet"));
    }
    if opts.l_values.iter().any(|&l| l == 0) {
        return Err(Error::validation("L", "L must be at least 1"));
    }
    if !opts.exhaustive && opts.trials == 0 {
        return Err(Error::validation("trials", "need at least one trial"));
    }
    let dist = truncate_to_typical(p, opts.n, opts.delta)?;
    let pv = average_typical_projector(v, p, opts.n, opts.alpha)?;
    let qs: Vec<CMatrix> = dist
        .sequences
        .par_iter()
        .map(|xn| smoothed_matrix(v, xn, opts.alpha, &pv.projector))
        .collect::<Result<_>>()?;
    let dim = qs[0].rows();
    let mut theta = CMatrix::zeros(dim, dim);
    for (q, w) in qs.iter().zip(&dist.weights) {
        theta.add_scaled(q, *w);
    }
    let e = hermitian_eig(&theta)?;
    let threshold = opts.lambda / pv.rank.max(1) as f64;
    let kept: Vec<usize> = (0..dim).filter(|&i| e.values[i] > threshold).collect();
    let cut = e.apply_fn(|x| if x > threshold { x } else { 0.0 });
    let cutoff_gap = operator_norm_hermitian(&theta.sub(&cut))?;

    let deviation = |avg: &CMatrix| -> Result<(f64, f64)> {
        Ok((
            operator_norm_hermitian(&avg.sub(&theta))?,
            operator_norm_hermitian(&avg.sub(&cut))?,
        ))
    };

    let mut rows = Vec::new();
    for &l in &opts.l_values {
        let devs: Vec<(f64, f64)> = if opts.exhaustive {
            let mut avg = CMatrix::zeros(dim, dim);
            for (q, w) in qs.iter().zip(&dist.weights) {
                avg.add_scaled(q, *w);
            }
            vec![deviation(&avg)?]
        } else {
            (0..opts.trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = stream(opts.seed, &[domain::CONCENTRATION, l as u64, trial as u64]);
                    let mut avg = CMatrix::zeros(dim, dim);
                    for _ in 0..l {
                        let k = sample_index(&dist.weights, &mut rng);
                        avg.add_scaled(&qs[k], 1.0 / l as f64);
                    }
                    deviation(&avg)
                })
                .collect::<Result<_>>()?
        };
        let theta_devs: Vec<f64> = devs.iter().map(|d| d.0).collect();
        let cut_devs: Vec<f64> = devs.iter().map(|d| d.1).collect();
        let tail = theta_devs.iter().filter(|&&d| d > opts.epsilon).count() as f64 / devs.len() as f64;
        rows.push(ConcentrationRow {
            l,
            trials: devs.len(),
            median_deviation: median(theta_devs.clone()),
            max_deviation: theta_devs.iter().copied().fold(0.0, f64::max),
            median_cutoff_deviation: median(cut_devs.clone()),
            max_cutoff_deviation: cut_devs.iter().copied().fold(0.0, f64::max),
            tail_fraction: tail,
        });
    }

    let zeta_measured = slope(&rows);
    let upsilon_measured = rows.last().filter(|_| !opts.exhaustive).map(|r| {
        let f = r.tail_fraction.max(1.0 / (r.trials + 1) as f64);
        -f.log2() / opts.n as f64
    });
    Ok(ConcentrationReport {
        options: opts.clone(),
        typical_set_size: dist.len(),
        support_dim: pv.rank,
        cutoff_rank: kept.len(),
        cutoff_gap,
        rows,
        zeta_measured,
        upsilon_measured,
    })
}

fn slope(rows: &[ConcentrationRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.median_deviation > 0.0)
        .map(|r| ((r.l as f64).log2(), r.median_deviation.log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}
