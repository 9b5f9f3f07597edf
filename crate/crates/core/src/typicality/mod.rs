//! Typical sets and typical projectors.

mod concentration;
mod quantum;

pub use concentration::{aw_concentration_trial, ConcentrationOptions, ConcentrationReport, ConcentrationRow};
pub use quantum::{
    conditional_typical_projector, gentle_check, smoothed_operator, typical_projector,
    GentleCheck, Inequality, ProjectorCertificate, SmoothedOperator, SpectrumClasses,
};
pub(crate) use quantum::{average_typical_projector, smoothed_matrix};

use rand::Rng;
use serde::Serialize;

use crate::channel::sample_index;
use crate::error::{Error, Result};
use crate::info::check_probability;
use crate::policy::NumericPolicy;

/// Slack absorbing rounding in `n P(x)` when the width is zero.
const COUNT_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TypicalityParams {
    pub n: usize,
    pub delta: f64,
    pub alpha: f64,
}

impl TypicalityParams {
    pub fn new(n: usize, delta: f64, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("n", "block length must be at least 1"));
        }
        if !(alpha > 0.0) {
            return Err(Error::validation("alpha", "alpha must be positive"));
        }
        if !(delta >= 0.0) {
            return Err(Error::validation("delta", "delta must be nonnegative"));
        }
        Ok(TypicalityParams { n, delta, alpha })
    }
}

/// Symbol counts `N(x | x^n)`.
pub fn counts(xs: &[usize], a: usize) -> Vec<usize> {
    let mut c = vec![0; a];
    for &x in xs {
        c[x] += 1;
    }
    c
}

/// `|N(x) - n P(x)| <= width * sqrt(n P(x) (1 - P(x)))` for every symbol.
pub fn within_width(counts: &[usize], p: &[f64], n: usize, width: f64) -> bool {
    counts.iter().zip(p).all(|(&c, &px)| {
        let mean = n as f64 * px;
        let sd = (n as f64 * px * (1.0 - px)).max(0.0).sqrt();
        (c as f64 - mean).abs() <= width * sd + COUNT_SLACK
    })
}

pub fn is_typical(xs: &[usize], p: &[f64], delta: f64) -> bool {
    within_width(&counts(xs, p.len()), p, xs.len(), delta)
}

/// Whether `xs` has exact type `P`.
pub fn has_type(xs: &[usize], p: &[f64]) -> bool {
    within_width(&counts(xs, p.len()), p, xs.len(), 0.0)
}

fn enumeration_size(a: usize, n: usize) -> Result<usize> {
    let cap = NumericPolicy::DEFAULT.enumeration_cap as usize;
    match a.checked_pow(n as u32) {
        Some(s) if s <= cap => Ok(s),
        _ => Err(Error::resource(format!("{a}^{n} sequences exceed enumeration cap {cap}"))),
    }
}

/// Sequence with index `m` in lexicographic order (first symbol most significant).
pub fn sequence_at(mut m: usize, a: usize, n: usize) -> Vec<usize> {
    let mut xs = vec![0; n];
    for k in (0..n).rev() {
        xs[k] = m % a;
        m /= a;
    }
    xs
}

/// All `delta`-typical sequences in lexicographic order.
pub fn typical_set(p: &[f64], n: usize, delta: f64) -> Result<Vec<Vec<usize>>> {
    check_probability(p, "P")?;
    let a = p.len();
    let total = enumeration_size(a, n)?;
    Ok((0..total)
        .map(|m| sequence_at(m, a, n))
        .filter(|xs| is_typical(xs, p, delta))
        .collect())
}

/// `P^n(x^n)`
pub fn product_prob(p: &[f64], xs: &[usize]) -> f64 {
    xs.iter().map(|&x| p[x]).product()
}

/// `p'`: the product distribution conditioned on the typical set.
#[derive(Clone, Debug, Serialize)]
pub struct TruncatedDistribution {
    pub sequences: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    /// `P^n(T)` before renormalization.
    pub mass: f64,
}

impl TruncatedDistribution {
    pub fn sample(&self, rng: &mut impl Rng) -> &[usize] {
        &self.sequences[sample_index(&self.weights, rng)]
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }
}

pub fn truncate_to_typical(p: &[f64], n: usize, delta: f64) -> Result<TruncatedDistribution> {
    let sequences = typical_set(p, n, delta)?;
    let raw: Vec<f64> = sequences.iter().map(|xs| product_prob(p, xs)).collect();
    let mass: f64 = raw.iter().sum();
    if sequences.is_empty() || mass <= 0.0 {
        return Err(Error::Degenerate(format!(
            "typical set of P at n = {n}, delta = {delta} is empty"
        )));
    }
    Ok(TruncatedDistribution {
        weights: raw.iter().map(|w| w / mass).collect(),
        sequences,
        mass,
    })
}

/// `ln k!` for `k = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Calls `f` with every composition of `n` into `a` nonnegative parts.
pub fn for_each_type(n: usize, a: usize, mut f: impl FnMut(&[usize])) {
    fn rec(rest: usize, slot: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if slot + 1 == cur.len() {
            cur[slot] = rest;
            f(cur);
            return;
        }
        for c in 0..=rest {
            cur[slot] = c;
            rec(rest - c, slot + 1, cur, f);
        }
    }
    let mut cur = vec![0; a];
    rec(n, 0, &mut cur, &mut f);
}

fn type_count(n: usize, a: usize) -> f64 {
    // C(n + a - 1, a - 1)
    let mut c = 1.0;
    for i in 1..a {
        c = c * (n + i) as f64 / i as f64;
    }
    c
}

/// `P^n(T^n_{P,delta})` summed over type classes.
pub fn typical_mass(p: &[f64], n: usize, delta: f64) -> Result<f64> {
    check_probability(p, "P")?;
    let a = p.len();
    if type_count(n, a) > NumericPolicy::DEFAULT.enumeration_cap as f64 {
        return Err(Error::resource("too many type classes to enumerate"));
    }
    let lf = ln_factorials(n);
    let mut mass = 0.0;
    for_each_type(n, a, |c| {
        if !within_width(c, p, n, delta) {
            return;
        }
        let mut ln = lf[n];
        for (&k, &px) in c.iter().zip(p) {
            ln -= lf[k];
            if k > 0 {
                ln += k as f64 * px.ln();
            }
        }
        mass += ln.exp();
    });
    Ok(mass)
}

/// Draws from `p'` by rejection from `P^n`; usable at any `n`.
#[derive(Clone, Debug)]
pub struct TypicalSampler {
    p: Vec<f64>,
    n: usize,
    delta: f64,
}

impl TypicalSampler {
    pub fn new(p: &[f64], n: usize, delta: f64) -> Result<Self> {
        check_probability(p, "P")?;
        if n == 0 {
            return Err(Error::validation("n", "block length must be at least 1"));
        }
        let a = p.len();
        let mut nonempty = false;
        if type_count(n, a) <= NumericPolicy::DEFAULT.enumeration_cap as f64 {
            for_each_type(n, a, |c| {
                if !nonempty && within_width(c, p, n, delta) && c.iter().zip(p).all(|(&k, &px)| k == 0 || px > 0.0) {
                    nonempty = true;
                }
            });
        } else {
            nonempty = true;
        }
        if !nonempty {
            return Err(Error::Degenerate(format!(
                "typical set of P at n = {n}, delta = {delta} is empty"
            )));
        }
        Ok(TypicalSampler {
            p: p.to_vec(),
            n,
            delta,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn distribution(&self) -> &[f64] {
        &self.p
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<usize> {
        loop {
            let xs: Vec<usize> = (0..self.n).map(|_| sample_index(&self.p, rng)).collect();
            if is_typical(&xs, &self.p, self.delta) {
                return xs;
            }
        }
    }
}

#[cfg(test)]
mod tests;
