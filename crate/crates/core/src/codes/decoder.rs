use std::collections::HashMap;

use serde::Serialize;

use super::Book;
use crate::channel::ClassicalChannel;
use crate::error::{Error, Result};

const COUNT_SLACK: f64 = 1e-9;

/// Which legitimate channels the joint-typicality test runs against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderScope {
    /// Only the channel of the actual state (receiver knows `t`).
    State,
    /// Every legitimate channel of the family.
    Family,
}

#[derive(Clone, Debug)]
enum Rule {
    JointTypical {
        bins: Vec<Vec<Vec<usize>>>,
        channels: Vec<ClassicalChannel>,
        delta: f64,
    },
    Explicit {
        sets: HashMap<Vec<usize>, usize>,
        j: usize,
    },
}

/// Decoding sets `D_j`, pairwise disjoint; outputs in no set decode to `None`.
#[derive(Clone, Debug)]
pub struct ClassicalDecoder {
    n: usize,
    rule: Rule,
}

/// `|N(a,b) - N(a) W(b|a)| <= delta sqrt(N(a) W(b|a) (1 - W(b|a)))` for all `a, b`.
pub fn jointly_typical(x: &[usize], y: &[usize], w: &ClassicalChannel, delta: f64) -> bool {
    let (a, b) = (w.inputs(), w.outputs());
    let mut joint = vec![0usize; a * b];
    let mut marg = vec![0usize; a];
    for (&xi, &yi) in x.iter().zip(y) {
        joint[xi * b + yi] += 1;
        marg[xi] += 1;
    }
    counts_jointly_typical(&joint, &marg, w, delta)
}

pub(crate) fn counts_jointly_typical(joint: &[usize], marg: &[usize], w: &ClassicalChannel, delta: f64) -> bool {
    let b = w.outputs();
    for (x, &nx) in marg.iter().enumerate() {
        if nx == 0 {
            continue;
        }
        let nxf = nx as f64;
        for y in 0..b {
            let p = w.prob(x, y);
            let dev = (joint[x * b + y] as f64 - nxf * p).abs();
            if dev > delta * (nxf * p * (1.0 - p)).max(0.0).sqrt() + COUNT_SLACK {
                return false;
            }
        }
    }
    true
}

impl ClassicalDecoder {
    /// Decoder from explicitly listed sets; rejects overlapping sets.
    pub fn from_sets(n: usize, sets: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let j = sets.len();
        let mut map = HashMap::new();
        for (idx, set) in sets.into_iter().enumerate() {
            for y in set {
                if y.len() != n {
                    return Err(Error::validation(format!("D[{idx}]"), "output has the wrong length"));
                }
                if let Some(prev) = map.insert(y, idx) {
                    if prev != idx {
                        return Err(Error::validation(
                            format!("D[{idx}]"),
                            format!("decoding sets {prev} and {idx} overlap"),
                        ));
                    }
                }
            }
        }
        Ok(ClassicalDecoder {
            n,
            rule: Rule::Explicit { sets: map, j },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn messages(&self) -> usize {
        match &self.rule {
            Rule::JointTypical { bins, .. } => bins.len(),
            Rule::Explicit { j, .. } => *j,
        }
    }

    /// `Some(j)` if `y` lies in `D_j`.
    pub fn decode(&self, y: &[usize]) -> Option<usize> {
        match &self.rule {
            Rule::Explicit { sets, .. } => sets.get(y).copied(),
            Rule::JointTypical { bins, channels, delta } => {
                let mut found = None;
                for (j, bin) in bins.iter().enumerate() {
                    let hit = bin
                        .iter()
                        .any(|x| channels.iter().any(|w| jointly_typical(x, y, w, *delta)));
                    if hit {
                        if found.is_some() {
                            return None;
                        }
                        found = Some(j);
                    }
                }
                found
            }
        }
    }

    /// Number of sets `D_j` containing `y` before collision removal.
    pub fn raw_membership(&self, y: &[usize]) -> usize {
        match &self.rule {
            Rule::Explicit { sets, .. } => usize::from(sets.contains_key(y)),
            Rule::JointTypical { bins, channels, delta } => bins
                .iter()
                .filter(|bin| {
                    bin.iter()
                        .any(|x| channels.iter().any(|w| jointly_typical(x, y, w, *delta)))
                })
                .count(),
        }
    }
}

/// Joint-typicality decoder for one book against the given legitimate channels.
pub fn build_classical_decoder(book: &Book, channels: &[ClassicalChannel], delta_dec: f64) -> ClassicalDecoder {
    let bins = (0..book.j).map(|j| book.bin(j).to_vec()).collect();
    ClassicalDecoder {
        n: book.codewords.first().map_or(0, Vec::len),
        rule: Rule::JointTypical {
            bins,
            channels: channels.to_vec(),
            delta: delta_dec,
        },
    }
}
