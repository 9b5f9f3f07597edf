use serde::Serialize;

use crate::channel::{CqChannel, QuantumChannel};
use crate::error::{Error, Result};
use crate::info::{check_probability, holevo_chi, Ensemble};
use crate::linalg::{hermitian_eig, trace_product, CMatrix, DensityMatrix};
use crate::policy::NumericPolicy;

/// Signal states with a POVM decoder `{D_j}` plus completion element.
#[derive(Clone, Debug, Serialize)]
pub struct QuantumCodeSpec {
    #[serde(skip)]
    pub signals: Vec<DensityMatrix>,
    pub priors: Vec<f64>,
    #[serde(skip)]
    pub povm: Vec<CMatrix>,
    #[serde(skip)]
    pub completion: CMatrix,
    /// `tr(w(j) D_j)` on the states the decoder was built for.
    pub success: Vec<f64>,
    pub average_success: f64,
}

impl QuantumCodeSpec {
    pub fn messages(&self) -> usize {
        self.povm.len()
    }

    pub fn dim(&self) -> usize {
        self.completion.rows()
    }

    /// Largest deviation of `sum D_j + completion` from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let mut total = self.completion.clone();
        for d in &self.povm {
            total = total.add(d);
        }
        total.sub(&CMatrix::identity(self.dim())).max_abs()
    }
}

/// Pretty-good measurement `D_j = S^{-1/2} p_j w(j) S^{-1/2}`, `S = sum p_j w(j)`,
/// with the inverse taken on the support of `S`.
pub fn pgm_decoder(signals: &[DensityMatrix], priors: &[f64]) -> Result<QuantumCodeSpec> {
    if signals.is_empty() {
        return Err(Error::validation("signals", "need at least one signal state"));
    }
    check_probability(priors, "priors")?;
    if priors.len() != signals.len() {
        return Err(Error::validation("priors", "one prior per signal required"));
    }
    let d = signals[0].dim();
    if signals.iter().any(|s| s.dim() != d) {
        return Err(Error::validation("signals", "signals live on different spaces"));
    }
    let refs: Vec<&DensityMatrix> = signals.iter().collect();
    let s = DensityMatrix::mixture(priors, &refs);
    let e = hermitian_eig(s.matrix())?;
    let cutoff = 1e-12 * e.values[0].max(1e-300);
    let inv_sqrt = e.apply_fn(|v| if v > cutoff { 1.0 / v.sqrt() } else { 0.0 });
    let povm: Vec<CMatrix> = signals
        .iter()
        .zip(priors)
        .map(|(w, &p)| inv_sqrt.sandwich(&w.matrix().scale(p)).hermitian_part())
        .collect();
    let mut sum = CMatrix::zeros(d, d);
    for m in &povm {
        sum = sum.add(m);
    }
    let completion = CMatrix::identity(d).sub(&sum).hermitian_part();
    let min = *hermitian_eig(&completion)?.values.last().unwrap();
    if min < -NumericPolicy::DEFAULT.povm_tol {
        return Err(Error::Degenerate(format!("completion element not PSD (min eigenvalue {min:.3e})")));
    }
    let success: Vec<f64> = signals
        .iter()
        .zip(&povm)
        .map(|(w, d)| trace_product(w.matrix(), d))
        .collect();
    let average_success = success.iter().zip(priors).map(|(s, p)| s * p).sum();
    Ok(QuantumCodeSpec {
        signals: signals.to_vec(),
        priors: priors.to_vec(),
        povm,
        completion,
        success,
        average_success,
    })
}

/// Code whose decoder is the PGM of the channel outputs `W^n(w(j))`; the
/// signals stay the channel inputs.
pub fn pgm_code_for_channel(
    inputs: &[DensityMatrix],
    priors: &[f64],
    channel: &QuantumChannel,
    n: usize,
) -> Result<QuantumCodeSpec> {
    let outputs: Vec<DensityMatrix> = inputs
        .iter()
        .map(|w| Ok(DensityMatrix::from_trusted(channel.apply_n(w.matrix(), n)?)))
        .collect::<Result<_>>()?;
    let mut code = pgm_decoder(&outputs, priors)?;
    code.signals = inputs.to_vec();
    Ok(code)
}

#[derive(Clone, Debug, Serialize)]
pub struct QuantumCodeReport {
    pub success: Vec<f64>,
    /// `(1/J) sum_j tr(W^n(w(j)) D_j)`
    pub average_success: f64,
    pub max_error: f64,
    pub completeness_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meets_lambda: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leakage: Option<f64>,
}

fn report(code: &QuantumCodeSpec, outputs: &[CMatrix], lambda: Option<f64>) -> Result<QuantumCodeReport> {
    if outputs.iter().any(|o| o.rows() != code.dim()) {
        return Err(Error::validation("code", "decoder acts on a different space than the channel output"));
    }
    let success: Vec<f64> = outputs
        .iter()
        .zip(&code.povm)
        .map(|(o, d)| trace_product(o, d))
        .collect();
    let average_success = success.iter().sum::<f64>() / success.len() as f64;
    let max_error = success.iter().map(|s| 1.0 - s).fold(0.0, f64::max);
    Ok(QuantumCodeReport {
        average_success,
        max_error,
        completeness_defect: code.completeness_defect(),
        lambda,
        meets_lambda: lambda.map(|l| average_success >= 1.0 - l),
        leakage: None,
        success,
    })
}

fn block_length(total: usize, d: usize) -> Result<usize> {
    let mut n = 0;
    let mut acc = 1usize;
    while acc < total {
        acc *= d;
        n += 1;
    }
    if acc != total || n == 0 {
        return Err(Error::validation("signals", format!("dimension {total} is not a power of {d}")));
    }
    Ok(n)
}

/// Exact success of the code's POVM on `W^{(x) n}(w(j))`.
pub fn evaluate_quantum_code(code: &QuantumCodeSpec, legal: &QuantumChannel, lambda: Option<f64>) -> Result<QuantumCodeReport> {
    let n = block_length(code.signals[0].dim(), legal.input_dim())?;
    let outputs = code
        .signals
        .iter()
        .map(|w| legal.apply_n(w.matrix(), n))
        .collect::<Result<Vec<_>>>()?;
    report(code, &outputs, lambda)
}

/// Exact success on cq outputs `V^n(x_j)` for one codeword per message.
pub fn evaluate_cq_code(code: &QuantumCodeSpec, v: &CqChannel, codewords: &[Vec<usize>], lambda: Option<f64>) -> Result<QuantumCodeReport> {
    if codewords.len() != code.messages() {
        return Err(Error::validation("codewords", "one codeword per message required"));
    }
    let outputs = codewords
        .iter()
        .map(|x| v.apply(x).map(DensityMatrix::into_matrix))
        .collect::<Result<Vec<_>>>()?;
    report(code, &outputs, lambda)
}

/// `chi` of the uniform ensemble `{V^{(x) n}(w(j))}` seen by the eavesdropper.
pub fn quantum_leakage(code: &QuantumCodeSpec, eavesdrop: &QuantumChannel) -> Result<f64> {
    let n = block_length(code.signals[0].dim(), eavesdrop.input_dim())?;
    let states = code
        .signals
        .iter()
        .map(|w| Ok(DensityMatrix::new(eavesdrop.apply_n(w.matrix(), n)?)?))
        .collect::<Result<Vec<_>>>()?;
    let j = states.len();
    Ok(holevo_chi(&Ensemble::new(vec![1.0 / j as f64; j], states)?))
}
