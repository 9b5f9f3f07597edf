//! Family documents (JSON).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    ChannelGenerator, ChannelSpec, ClassicalChannel, CompoundFamily, CqChannel, FamilyGenerator,
    FamilyKind, QuantumChannel, WiretapPair,
};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityMatrix, C64};

/// Rows of `[re, im]` pairs.
pub type ComplexRows = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDocument {
    pub kind: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_alphabet: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_dim: Option<usize>,
    pub states: Vec<PairDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorDocument>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDocument {
    pub legal: ChannelDocument,
    pub eavesdrop: ChannelDocument,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelDocument {
    Classical { matrix: Vec<Vec<f64>> },
    Cq { states: Vec<ComplexRows> },
    Quantum { kraus: Vec<ComplexRows> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDocument {
    pub legal: GeneratorEntry,
    pub eavesdrop: GeneratorEntry,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorEntry {
    Fixed { kraus: Vec<ComplexRows> },
    Depolarizing { dim: usize, min: f64, max: f64 },
    AmplitudeDamping { min: f64, max: f64 },
    Dephasing { min: f64, max: f64 },
}

pub fn load_family(path: impl AsRef<Path>) -> Result<CompoundFamily> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_family(&text)
}

pub fn parse_family(text: &str) -> Result<CompoundFamily> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: FamilyDocument = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    from_document(doc)
}

pub fn save_family(family: &CompoundFamily, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&to_document(family)).expect("serializable");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Density matrix from JSON rows of `[re, im]` pairs.
pub fn parse_density_matrix(text: &str) -> Result<DensityMatrix> {
    let rows: ComplexRows = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: "state".into(),
        message: e.to_string(),
    })?;
    DensityMatrix::new(complex_matrix(&rows, "state")?)
}

fn complex_matrix(rows: &ComplexRows, path: &str) -> Result<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if r == 0 || c == 0 {
        return Err(Error::validation(path, "matrix is empty"));
    }
    let mut data = Vec::with_capacity(r * c);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(Error::validation(
                format!("{path}[{i}]"),
                format!("row has {} entries, expected {c}", row.len()),
            ));
        }
        data.extend(row.iter().map(|[re, im]| C64::new(*re, *im)));
    }
    CMatrix::from_vec(r, c, data).map_err(|e| Error::validation(path, e.to_string()))
}

fn complex_rows(m: &CMatrix) -> ComplexRows {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn rename(e: Error, path: &str) -> Error {
    match e {
        Error::Validation { path: inner, message } => Error::Validation {
            path: if inner.is_empty() {
                path.to_string()
            } else {
                format!("{path}.{inner}")
            },
            message,
        },
        other => other,
    }
}

fn kraus_list(ops: &[ComplexRows], path: &str) -> Result<Vec<CMatrix>> {
    ops.iter()
        .enumerate()
        .map(|(k, m)| complex_matrix(m, &format!("{path}.kraus[{k}]")))
        .collect()
}

fn channel_from_doc(doc: &ChannelDocument, kind: FamilyKind, path: &str) -> Result<ChannelSpec> {
    match (doc, kind) {
        (ChannelDocument::Classical { matrix }, FamilyKind::Classical | FamilyKind::Cq) => {
            ClassicalChannel::validate(matrix, &format!("{path}.matrix"))?;
            Ok(ChannelSpec::Classical(ClassicalChannel::new(matrix.clone())?))
        }
        (ChannelDocument::Cq { states }, FamilyKind::Cq) => {
            let mut out = Vec::with_capacity(states.len());
            for (x, s) in states.iter().enumerate() {
                let p = format!("{path}.states[{x}]");
                let m = complex_matrix(s, &p)?;
                out.push(DensityMatrix::new(m).map_err(|e| rename(e, &p))?);
            }
            CqChannel::new(out)
                .map(ChannelSpec::Cq)
                .map_err(|e| rename(e, path))
        }
        (ChannelDocument::Quantum { kraus }, FamilyKind::Quantum) => {
            let ops = kraus_list(kraus, path)?;
            QuantumChannel::validate(&ops, &format!("{path}.kraus"))?;
            Ok(ChannelSpec::Quantum(QuantumChannel::new(ops)?))
        }
        _ => Err(Error::validation(
            path,
            format!("channel representation does not match family kind {kind:?}"),
        )),
    }
}

fn generator_from_doc(doc: &GeneratorEntry, path: &str) -> Result<ChannelGenerator> {
    Ok(match doc {
        GeneratorEntry::Fixed { kraus } => {
            let ops = kraus_list(kraus, path)?;
            QuantumChannel::validate(&ops, &format!("{path}.kraus"))?;
            ChannelGenerator::Fixed(QuantumChannel::new(ops)?)
        }
        GeneratorEntry::Depolarizing { dim, min, max } => ChannelGenerator::Depolarizing {
            dim: *dim,
            min: *min,
            max: *max,
        },
        GeneratorEntry::AmplitudeDamping { min, max } => ChannelGenerator::AmplitudeDamping {
            min: *min,
            max: *max,
        },
        GeneratorEntry::Dephasing { min, max } => ChannelGenerator::Dephasing {
            min: *min,
            max: *max,
        },
    })
}

fn from_document(doc: FamilyDocument) -> Result<CompoundFamily> {
    let mut pairs = Vec::with_capacity(doc.states.len());
    for (t, pair) in doc.states.iter().enumerate() {
        pairs.push(WiretapPair {
            legal: channel_from_doc(&pair.legal, doc.kind, &format!("states[{t}].legal"))?,
            eavesdrop: channel_from_doc(&pair.eavesdrop, doc.kind, &format!("states[{t}].eavesdrop"))?,
        });
    }
    let generator = match &doc.generator {
        Some(g) => Some(FamilyGenerator {
            legal: generator_from_doc(&g.legal, "generator.legal")?,
            eavesdrop: generator_from_doc(&g.eavesdrop, "generator.eavesdrop")?,
        }),
        None => None,
    };
    if pairs.is_empty() {
        if let Some(g) = &generator {
            let (l, e) = g.member(0.0);
            pairs.push(WiretapPair {
                legal: ChannelSpec::Quantum(l),
                eavesdrop: ChannelSpec::Quantum(e),
            });
        }
    }
    let family = CompoundFamily::with_generator(doc.kind, pairs, generator)?;
    let declared = match doc.kind {
        FamilyKind::Quantum => doc.input_dim.map(|d| ("input_dim", d)),
        _ => doc.input_alphabet.map(|a| ("input_alphabet", a)),
    };
    if let Some((field, size)) = declared {
        let actual = match &family.pairs()[0].legal {
            ChannelSpec::Quantum(q) => q.input_dim(),
            other => other.input_alphabet().unwrap_or(0),
        };
        if actual != size {
            return Err(Error::validation(
                field,
                format!("declared {size} but channels have input size {actual}"),
            ));
        }
    }
    Ok(family)
}

fn channel_to_doc(spec: &ChannelSpec) -> ChannelDocument {
    match spec {
        ChannelSpec::Classical(w) => ChannelDocument::Classical {
            matrix: w.rows().to_vec(),
        },
        ChannelSpec::Cq(v) => ChannelDocument::Cq {
            states: v.states().iter().map(|s| complex_rows(s.matrix())).collect(),
        },
        ChannelSpec::Quantum(q) => ChannelDocument::Quantum {
            kraus: q.kraus().iter().map(complex_rows).collect(),
        },
    }
}

fn generator_to_doc(g: &ChannelGenerator) -> GeneratorEntry {
    match g {
        ChannelGenerator::Fixed(q) => GeneratorEntry::Fixed {
            kraus: q.kraus().iter().map(complex_rows).collect(),
        },
        ChannelGenerator::Depolarizing { dim, min, max } => GeneratorEntry::Depolarizing {
            dim: *dim,
            min: *min,
            max: *max,
        },
        ChannelGenerator::AmplitudeDamping { min, max } => GeneratorEntry::AmplitudeDamping {
            min: *min,
            max: *max,
        },
        ChannelGenerator::Dephasing { min, max } => GeneratorEntry::Dephasing {
            min: *min,
            max: *max,
        },
    }
}

pub fn to_document(family: &CompoundFamily) -> FamilyDocument {
    let first = &family.pairs()[0].legal;
    let (input_alphabet, input_dim) = match first {
        ChannelSpec::Quantum(q) => (None, Some(q.input_dim())),
        other => (other.input_alphabet(), None),
    };
    FamilyDocument {
        kind: family.kind(),
        input_alphabet,
        input_dim,
        states: family
            .pairs()
            .iter()
            .map(|p| PairDocument {
                legal: channel_to_doc(&p.legal),
                eavesdrop: channel_to_doc(&p.eavesdrop),
            })
            .collect(),
        generator: family.generator().map(|g| GeneratorDocument {
            legal: generator_to_doc(&g.legal),
            eavesdrop: generator_to_doc(&g.eavesdrop),
        }),
    }
}
