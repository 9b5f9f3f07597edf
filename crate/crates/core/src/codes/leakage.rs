use rayon::prelude::*;

use super::{Book, WiretapCodebook};
use crate::channel::{ChannelSpec, ClassicalChannel, CqChannel};
use crate::error::{Error, Result};
use crate::info::{shannon_entropy, von_neumann_entropy};
use crate::linalg::DensityMatrix;
use crate::typicality::sequence_at;

use super::evaluate::EXACT_OUTPUT_CAP;

/// `I(J; Z^n)` for uniform `J`, uniform `l` within the bin, exact over `c^n` outputs.
pub fn classical_leakage(book: &Book, v: &ClassicalChannel) -> Result<f64> {
    let n = book.codewords.first().map_or(0, Vec::len);
    let c = v.outputs();
    let space = c
        .checked_pow(n as u32)
        .filter(|&s| s <= EXACT_OUTPUT_CAP)
        .ok_or_else(|| {
            Error::resource(format!(
                "{c}^{n} eavesdropper outputs exceed the exact cap {EXACT_OUTPUT_CAP}; use a smaller n"
            ))
        })?;
    let conditionals: Vec<Vec<f64>> = (0..book.j)
        .into_par_iter()
        .map(|j| {
            (0..space)
                .map(|m| {
                    let z = sequence_at(m, c, n);
                    book.bin(j).iter().map(|x| v.sequence_prob(x, &z)).sum::<f64>() / book.l as f64
                })
                .collect()
        })
        .collect();
    let jf = book.j as f64;
    let mut marginal = vec![0.0; space];
    for cond in &conditionals {
        for (m, p) in marginal.iter_mut().zip(cond) {
            *m += p / jf;
        }
    }
    let cond_entropy: f64 = conditionals.iter().map(|p| shannon_entropy(p)).sum::<f64>() / jf;
    Ok((shannon_entropy(&marginal) - cond_entropy).max(0.0))
}

/// `chi(J; Z^{(x) n})` from bin-average output states.
pub fn cq_leakage(book: &Book, v: &CqChannel) -> Result<f64> {
    let bins: Vec<DensityMatrix> = (0..book.j)
        .map(|j| {
            let states = book.bin(j).iter().map(|x| v.apply(x)).collect::<Result<Vec<_>>>()?;
            let refs: Vec<&DensityMatrix> = states.iter().collect();
            Ok(DensityMatrix::mixture(&vec![1.0 / book.l as f64; book.l], &refs))
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&DensityMatrix> = bins.iter().collect();
    let avg = DensityMatrix::mixture(&vec![1.0 / book.j as f64; book.j], &refs);
    let cond: f64 = bins.iter().map(von_neumann_entropy).sum::<f64>() / book.j as f64;
    Ok((von_neumann_entropy(&avg) - cond).max(0.0))
}

/// Exact leakage of each state's book through that state's eavesdropper.
pub fn evaluate_leakage(codebook: &WiretapCodebook, eavesdrop: &[&ChannelSpec]) -> Result<Vec<f64>> {
    eavesdrop
        .iter()
        .enumerate()
        .map(|(t, spec)| {
            let book = codebook.book(t);
            match spec {
                ChannelSpec::Classical(w) => classical_leakage(book, w),
                ChannelSpec::Cq(v) => cq_leakage(book, v),
                ChannelSpec::Quantum(_) => Err(Error::validation(
                    format!("states[{t}].eavesdrop"),
                    "binning codes need a classical-input eavesdropper",
                )),
            }
        })
        .collect()
}
