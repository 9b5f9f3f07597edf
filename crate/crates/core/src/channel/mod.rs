//! Classical, classical-quantum and Kraus channels, and compound families of
//! legitimate/eavesdropper pairs.

mod io;

pub use io::{load_family, parse_density_matrix, parse_family, save_family, to_document, FamilyDocument};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{tensor, tensor_all, CMatrix, DensityMatrix, C64, ONE, ZERO};
use crate::policy::NumericPolicy;

/// Stochastic matrix `W(y|x)`; row `x` is the output distribution for input `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalChannel {
    rows: Vec<Vec<f64>>,
}

impl ClassicalChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::validate(&rows, "matrix")?;
        Ok(ClassicalChannel { rows })
    }

    pub(crate) fn validate(rows: &[Vec<f64>], path: &str) -> Result<()> {
        if rows.is_empty() {
            return Err(Error::validation(path, "channel needs at least one input"));
        }
        let b = rows[0].len();
        if b == 0 {
            return Err(Error::validation(path, "channel needs at least one output"));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != b {
                return Err(Error::validation(
                    format!("{path}[{x}]"),
                    format!("row has {} entries, expected {b}", row.len()),
                ));
            }
            if let Some(y) = row.iter().position(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::validation(
                    format!("{path}[{x}][{y}]"),
                    "entry must be a finite nonnegative number",
                ));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > NumericPolicy::DEFAULT.row_sum_tol {
                return Err(Error::validation(
                    format!("{path}[{x}]"),
                    format!("row {x} sums to {s:.6}, expected 1"),
                ));
            }
        }
        Ok(())
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Self {
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]).expect("valid crossover")
    }

    pub fn noiseless(a: usize) -> Self {
        let rows = (0..a)
            .map(|x| (0..a).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        ClassicalChannel { rows }
    }

    /// Every input maps to the same output distribution.
    pub fn constant(a: usize, output: &[f64]) -> Result<Self> {
        Self::new(vec![output.to_vec(); a])
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    /// Output distribution `sum_x P(x) W(.|x)`.
    pub fn output_distribution(&self, p: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.outputs()];
        for (px, row) in p.iter().zip(&self.rows) {
            for (qy, w) in q.iter_mut().zip(row) {
                *qy += px * w;
            }
        }
        q
    }

    /// `W^n(y^n | x^n)`
    pub fn sequence_prob(&self, xs: &[usize], ys: &[usize]) -> f64 {
        xs.iter().zip(ys).map(|(&x, &y)| self.rows[x][y]).product()
    }

    /// Inverse-CDF draw of one output symbol.
    pub fn sample(&self, x: usize, rng: &mut impl Rng) -> usize {
        sample_index(&self.rows[x], rng)
    }

    pub fn sample_sequence(&self, xs: &[usize], rng: &mut impl Rng) -> Vec<usize> {
        xs.iter().map(|&x| self.sample(x, rng)).collect()
    }

    /// Prefix channel `U` (v x a) followed by this channel.
    pub fn compose_prefix(&self, prefix: &[Vec<f64>]) -> ClassicalChannel {
        let rows = prefix.iter().map(|u| self.output_distribution(u)).collect();
        ClassicalChannel { rows }
    }
}

/// Inverse-CDF sampling from a probability vector.
pub fn sample_index(p: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in p.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Symbol-to-state map `x -> V(x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CqChannel {
    states: Vec<DensityMatrix>,
}

impl CqChannel {
    pub fn new(states: Vec<DensityMatrix>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::validation("states", "cq channel needs at least one input"));
        }
        let d = states[0].dim();
        if let Some(x) = states.iter().position(|s| s.dim() != d) {
            return Err(Error::validation(
                format!("states[{x}]"),
                format!("dimension {} differs from {d}", states[x].dim()),
            ));
        }
        Ok(CqChannel { states })
    }

    pub fn inputs(&self) -> usize {
        self.states.len()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn state(&self, x: usize) -> &DensityMatrix {
        &self.states[x]
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    /// `V(x_1) (x) ... (x) V(x_n)`
    pub fn apply(&self, xs: &[usize]) -> Result<DensityMatrix> {
        if xs.is_empty() {
            return Err(Error::validation("xn", "input sequence is empty"));
        }
        if let Some(i) = xs.iter().position(|&x| x >= self.inputs()) {
            return Err(Error::validation(
                format!("xn[{i}]"),
                format!("symbol {} outside alphabet of size {}", xs[i], self.inputs()),
            ));
        }
        let cap = NumericPolicy::DEFAULT.dim_cap;
        if (self.dim() as f64).powi(xs.len() as i32) > cap as f64 {
            return Err(Error::resource(format!(
                "{}^{} exceeds dimension cap {cap}",
                self.dim(),
                xs.len()
            )));
        }
        let m = tensor_all(xs.iter().map(|&x| self.states[x].matrix()))?;
        Ok(DensityMatrix::from_trusted(m))
    }

    /// `sum_x P(x) V(x)`
    pub fn average(&self, p: &[f64]) -> DensityMatrix {
        let refs: Vec<&DensityMatrix> = self.states.iter().collect();
        DensityMatrix::mixture(p, &refs)
    }

    pub fn compose_prefix(&self, prefix: &[Vec<f64>]) -> CqChannel {
        CqChannel {
            states: prefix.iter().map(|u| self.average(u)).collect(),
        }
    }
}

/// Embed a stochastic matrix as a cq channel with diagonal output states.
pub fn classical_embed(w: &ClassicalChannel) -> CqChannel {
    CqChannel {
        states: w
            .rows()
            .iter()
            .map(|row| DensityMatrix::from_trusted(CMatrix::diag(row)))
            .collect(),
    }
}

/// Completely positive trace-preserving map in Kraus form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        Self::validate(&kraus, "kraus")?;
        Ok(QuantumChannel { kraus })
    }

    pub(crate) fn validate(kraus: &[CMatrix], path: &str) -> Result<()> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::validation(path, "need at least one Kraus operator"))?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if let Some(k) = kraus.iter().position(|k| k.rows() != d_out || k.cols() != d_in) {
            return Err(Error::validation(
                format!("{path}[{k}]"),
                "Kraus operators must share one shape",
            ));
        }
        let mut sum = CMatrix::zeros(d_in, d_in);
        for k in kraus {
            sum = sum.add(&k.adjoint().matmul(k));
        }
        let defect = sum.sub(&CMatrix::identity(d_in)).max_abs();
        if defect > NumericPolicy::DEFAULT.kraus_tol {
            return Err(Error::validation(
                path,
                format!("Kraus completeness violated: |sum K^dag K - I| = {defect:.3e}"),
            ));
        }
        Ok(())
    }

    pub fn identity(d: usize) -> Self {
        QuantumChannel {
            kraus: vec![CMatrix::identity(d)],
        }
    }

    /// `rho -> (1 - p) rho + p I/d`, Kraus operators from the Weyl basis.
    pub fn depolarizing(d: usize, p: f64) -> Self {
        let mut kraus = Vec::with_capacity(d * d);
        let omega = |k: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64);
        for a in 0..d {
            for b in 0..d {
                let weight = if a == 0 && b == 0 {
                    1.0 - p + p / (d * d) as f64
                } else {
                    p / (d * d) as f64
                };
                if weight <= 0.0 {
                    continue;
                }
                // X^a Z^b |j> = omega^{b j} |j + a>
                let mut u = CMatrix::zeros(d, d);
                for j in 0..d {
                    u[((j + a) % d, j)] = omega(b * j % d);
                }
                kraus.push(u.scale(weight.sqrt()));
            }
        }
        QuantumChannel { kraus }
    }

    pub fn fully_depolarizing(d: usize) -> Self {
        Self::depolarizing(d, 1.0)
    }

    pub fn amplitude_damping(gamma: f64) -> Self {
        let mut k0 = CMatrix::identity(2);
        k0[(1, 1)] = C64::new((1.0 - gamma).sqrt(), 0.0);
        let mut k1 = CMatrix::zeros(2, 2);
        k1[(0, 1)] = C64::new(gamma.sqrt(), 0.0);
        QuantumChannel {
            kraus: vec![k0, k1],
        }
    }

    pub fn dephasing(p: f64) -> Self {
        let k0 = CMatrix::identity(2).scale((1.0 - p).sqrt());
        let k1 = CMatrix::diag(&[1.0, -1.0]).scale(p.sqrt());
        QuantumChannel {
            kraus: vec![k0, k1],
        }
    }

    /// Prepares a fixed state regardless of the input.
    pub fn replacer(d_in: usize, output: &DensityMatrix) -> Self {
        let e = output.eig();
        let d_out = output.dim();
        let mut kraus = Vec::new();
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            for i in 0..d_in {
                let m = CMatrix::from_fn(d_out, d_in, |o, j| {
                    if j == i {
                        e.vectors[(o, k)] * lam.sqrt()
                    } else {
                        ZERO
                    }
                });
                kraus.push(m);
            }
        }
        QuantumChannel { kraus }
    }

    /// Measure in the computational basis, then prepare `diag(W(.|x))`.
    pub fn from_classical(w: &ClassicalChannel) -> Self {
        let (a, b) = (w.inputs(), w.outputs());
        let mut kraus = Vec::new();
        for x in 0..a {
            for y in 0..b {
                let p = w.prob(x, y);
                if p > 0.0 {
                    let mut k = CMatrix::zeros(b, a);
                    k[(y, x)] = C64::new(p.sqrt(), 0.0);
                    kraus.push(k);
                }
            }
        }
        QuantumChannel { kraus }
    }

    pub fn input_dim(&self) -> usize {
        self.kraus[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.kraus[0].rows()
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `sum_k K rho K^dagger`
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.input_dim() {
            return Err(Error::validation(
                "rho",
                format!(
                    "state dimension {} does not match channel input {}",
                    rho.dim(),
                    self.input_dim()
                ),
            ));
        }
        Ok(DensityMatrix::from_trusted(self.apply_matrix(rho.matrix())))
    }

    /// Action on an arbitrary operator (linear extension).
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.output_dim(), self.output_dim());
        for k in &self.kraus {
            out = out.add(&k.sandwich(m));
        }
        out
    }

    /// Kraus form of `Phi^{(x) n}`.
    pub fn tensor_power(&self, n: usize) -> Result<QuantumChannel> {
        if n == 0 {
            return Err(Error::validation("n", "need n >= 1"));
        }
        let mut kraus = self.kraus.clone();
        for _ in 1..n {
            let mut next = Vec::with_capacity(kraus.len() * self.kraus.len());
            for a in &kraus {
                for b in &self.kraus {
                    next.push(tensor(a, b)?);
                }
            }
            kraus = next;
        }
        Ok(QuantumChannel { kraus })
    }

    /// Apply `Phi^{(x) n}` one tensor factor at a time.
    pub fn apply_n(&self, rho: &CMatrix, n: usize) -> Result<CMatrix> {
        let (di, dout) = (self.input_dim(), self.output_dim());
        let total_in = di.checked_pow(n as u32).filter(|&x| x == rho.rows());
        if total_in.is_none() {
            return Err(Error::validation(
                "rho",
                format!("dimension {} is not {di}^{n}", rho.rows()),
            ));
        }
        let mut cur = rho.clone();
        for site in 0..n {
            let left = dout.pow(site as u32);
            let right = di.pow((n - site - 1) as u32);
            let il = CMatrix::identity(left);
            let ir = CMatrix::identity(right);
            let mut next: Option<CMatrix> = None;
            for k in &self.kraus {
                let big = tensor_all([&il, k, &ir])?;
                let term = big.sandwich(&cur);
                next = Some(match next {
                    Some(acc) => acc.add(&term),
                    None => term,
                });
            }
            cur = next.expect("at least one Kraus operator");
        }
        Ok(cur)
    }

    /// `(id (x) Phi)(|phi+><phi+|)` with normalized maximally entangled input.
    pub fn choi(&self) -> DensityMatrix {
        let (di, dout) = (self.input_dim(), self.output_dim());
        let norm = 1.0 / (di as f64).sqrt();
        let mut out = CMatrix::zeros(di * dout, di * dout);
        for k in &self.kraus {
            let v: Vec<C64> = (0..di * dout)
                .map(|idx| k[(idx % dout, idx / dout)] * norm)
                .collect();
            out = out.add(&CMatrix::outer(&v));
        }
        DensityMatrix::from_trusted(out)
    }

    /// Linear combination `self - other` acting on operators, as a Choi-like
    /// matrix `(id (x) (Phi - Psi))(|phi+><phi+|)`.
    pub fn choi_difference(&self, other: &QuantumChannel) -> CMatrix {
        self.choi().matrix().sub(other.choi().matrix())
    }

    pub fn tensor(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        let mut kraus = Vec::new();
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(tensor(a, b)?);
            }
        }
        Ok(QuantumChannel { kraus })
    }
}

/// Any of the three channel models.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSpec {
    Classical(ClassicalChannel),
    Cq(CqChannel),
    Quantum(QuantumChannel),
}

impl ChannelSpec {
    /// Size of the classical input alphabet, if the channel has one.
    pub fn input_alphabet(&self) -> Option<usize> {
        match self {
            ChannelSpec::Classical(w) => Some(w.inputs()),
            ChannelSpec::Cq(v) => Some(v.inputs()),
            ChannelSpec::Quantum(_) => None,
        }
    }

    /// Output states of a letter channel (classical rows become diagonal states).
    pub fn as_cq(&self) -> Option<CqChannel> {
        match self {
            ChannelSpec::Classical(w) => Some(classical_embed(w)),
            ChannelSpec::Cq(v) => Some(v.clone()),
            ChannelSpec::Quantum(_) => None,
        }
    }

    pub fn as_classical(&self) -> Option<&ClassicalChannel> {
        match self {
            ChannelSpec::Classical(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_quantum(&self) -> Option<&QuantumChannel> {
        match self {
            ChannelSpec::Quantum(q) => Some(q),
            _ => None,
        }
    }

    /// Same channel preceded by a prefix (auxiliary-variable) channel.
    pub fn compose_prefix(&self, prefix: &[Vec<f64>]) -> Option<ChannelSpec> {
        match self {
            ChannelSpec::Classical(w) => Some(ChannelSpec::Classical(w.compose_prefix(prefix))),
            ChannelSpec::Cq(v) => Some(ChannelSpec::Cq(v.compose_prefix(prefix))),
            ChannelSpec::Quantum(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Classical,
    Cq,
    Quantum,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WiretapPair {
    pub legal: ChannelSpec,
    pub eavesdrop: ChannelSpec,
}

/// One-parameter channel generator on `s in [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelGenerator {
    Fixed(QuantumChannel),
    Depolarizing { dim: usize, min: f64, max: f64 },
    AmplitudeDamping { min: f64, max: f64 },
    Dephasing { min: f64, max: f64 },
}

impl ChannelGenerator {
    pub fn at(&self, s: f64) -> QuantumChannel {
        let lerp = |lo: f64, hi: f64| lo + (hi - lo) * s.clamp(0.0, 1.0);
        match self {
            ChannelGenerator::Fixed(q) => q.clone(),
            ChannelGenerator::Depolarizing { dim, min, max } => {
                QuantumChannel::depolarizing(*dim, lerp(*min, *max))
            }
            ChannelGenerator::AmplitudeDamping { min, max } => {
                QuantumChannel::amplitude_damping(lerp(*min, *max))
            }
            ChannelGenerator::Dephasing { min, max } => QuantumChannel::dephasing(lerp(*min, *max)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ChannelGenerator::Fixed(q) => q.input_dim(),
            ChannelGenerator::Depolarizing { dim, .. } => *dim,
            _ => 2,
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        let check = |lo: f64, hi: f64| {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                Err(Error::validation(path, "parameter range must satisfy 0 <= min <= max <= 1"))
            } else {
                Ok(())
            }
        };
        match self {
            ChannelGenerator::Fixed(q) => QuantumChannel::validate(q.kraus(), path),
            ChannelGenerator::Depolarizing { dim, min, max } => {
                if *dim < 2 {
                    return Err(Error::validation(path, "dimension must be at least 2"));
                }
                check(*min, *max)
            }
            ChannelGenerator::AmplitudeDamping { min, max }
            | ChannelGenerator::Dephasing { min, max } => check(*min, *max),
        }
    }
}

/// Parameterized (possibly infinite) family: both channels are driven by one
/// parameter `s in [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyGenerator {
    pub legal: ChannelGenerator,
    pub eavesdrop: ChannelGenerator,
}

impl FamilyGenerator {
    pub fn member(&self, s: f64) -> (QuantumChannel, QuantumChannel) {
        (self.legal.at(s), self.eavesdrop.at(s))
    }
}

/// Indexed family `{(W_t, V_t)}` of legitimate/eavesdropper channel pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompoundFamily {
    kind: FamilyKind,
    pairs: Vec<WiretapPair>,
    generator: Option<FamilyGenerator>,
}

impl CompoundFamily {
    pub fn new(kind: FamilyKind, pairs: Vec<WiretapPair>) -> Result<Self> {
        Self::with_generator(kind, pairs, None)
    }

    pub fn with_generator(
        kind: FamilyKind,
        pairs: Vec<WiretapPair>,
        generator: Option<FamilyGenerator>,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::validation("states", "family needs at least one state (T >= 1)"));
        }
        let input_of = |c: &ChannelSpec| match c {
            ChannelSpec::Quantum(q) => (true, q.input_dim()),
            other => (false, other.input_alphabet().unwrap_or(0)),
        };
        let reference = input_of(&pairs[0].legal);
        for (t, pair) in pairs.iter().enumerate() {
            for (side, ch) in [("legal", &pair.legal), ("eavesdrop", &pair.eavesdrop)] {
                let path = format!("states[{t}].{side}");
                let ok_kind = match (kind, ch) {
                    (FamilyKind::Classical, ChannelSpec::Classical(_)) => true,
                    (FamilyKind::Cq, ChannelSpec::Classical(_) | ChannelSpec::Cq(_)) => true,
                    (FamilyKind::Quantum, ChannelSpec::Quantum(_)) => true,
                    _ => false,
                };
                if !ok_kind {
                    return Err(Error::validation(
                        path,
                        format!("channel model not allowed in a {kind:?} family"),
                    ));
                }
                if input_of(ch) != reference {
                    return Err(Error::validation(
                        path,
                        format!(
                            "input space of size {} differs from states[0].legal ({})",
                            input_of(ch).1,
                            reference.1
                        ),
                    ));
                }
            }
        }
        if let Some(g) = &generator {
            if kind != FamilyKind::Quantum {
                return Err(Error::validation("generator", "only quantum families can be parameterized"));
            }
            g.legal.validate("generator.legal")?;
            g.eavesdrop.validate("generator.eavesdrop")?;
        }
        Ok(CompoundFamily {
            kind,
            pairs,
            generator,
        })
    }

    /// Classical family from `(legal, eavesdrop)` stochastic matrices.
    pub fn classical(pairs: Vec<(ClassicalChannel, ClassicalChannel)>) -> Result<Self> {
        Self::new(
            FamilyKind::Classical,
            pairs
                .into_iter()
                .map(|(l, e)| WiretapPair {
                    legal: ChannelSpec::Classical(l),
                    eavesdrop: ChannelSpec::Classical(e),
                })
                .collect(),
        )
    }

    /// Family of BSC pairs given as `(legal crossover, eavesdropper crossover)`.
    pub fn bsc_pairs(crossovers: &[(f64, f64)]) -> Self {
        Self::classical(
            crossovers
                .iter()
                .map(|&(l, e)| (ClassicalChannel::bsc(l), ClassicalChannel::bsc(e)))
                .collect(),
        )
        .expect("BSC pairs form a valid family")
    }

    pub fn quantum(pairs: Vec<(QuantumChannel, QuantumChannel)>) -> Result<Self> {
        Self::new(
            FamilyKind::Quantum,
            pairs
                .into_iter()
                .map(|(l, e)| WiretapPair {
                    legal: ChannelSpec::Quantum(l),
                    eavesdrop: ChannelSpec::Quantum(e),
                })
                .collect(),
        )
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn theta_size(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[WiretapPair] {
        &self.pairs
    }

    pub fn pair(&self, t: usize) -> &WiretapPair {
        &self.pairs[t]
    }

    pub fn generator(&self) -> Option<&FamilyGenerator> {
        self.generator.as_ref()
    }

    pub fn input_alphabet(&self) -> Option<usize> {
        self.pairs[0].legal.input_alphabet()
    }

    /// Classical legal/eavesdropper matrices for state `t`, if the family is classical.
    pub fn classical_pair(&self, t: usize) -> Option<(&ClassicalChannel, &ClassicalChannel)> {
        let p = &self.pairs[t];
        Some((p.legal.as_classical()?, p.eavesdrop.as_classical()?))
    }

    /// The same family with every letter channel replaced by its cq embedding.
    pub fn embedded_cq(&self) -> Result<CompoundFamily> {
        if self.kind == FamilyKind::Quantum {
            return Err(Error::validation("kind", "quantum families have no letter embedding"));
        }
        let pairs = self
            .pairs
            .iter()
            .map(|p| WiretapPair {
                legal: ChannelSpec::Cq(p.legal.as_cq().expect("letter channel")),
                eavesdrop: ChannelSpec::Cq(p.eavesdrop.as_cq().expect("letter channel")),
            })
            .collect();
        CompoundFamily::new(FamilyKind::Cq, pairs)
    }

    /// Kraus (measure-and-prepare) version of a classical family.
    pub fn embedded_quantum(&self) -> Result<CompoundFamily> {
        let mut pairs = Vec::new();
        for t in 0..self.theta_size() {
            let (l, e) = self
                .classical_pair(t)
                .ok_or_else(|| Error::validation("kind", "only classical families embed as Kraus channels"))?;
            pairs.push((QuantumChannel::from_classical(l), QuantumChannel::from_classical(e)));
        }
        CompoundFamily::quantum(pairs)
    }
}

/// Single-qubit Pauli matrices, handy for fixtures.
pub fn pauli(which: char) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    match which {
        'x' => {
            m[(0, 1)] = ONE;
            m[(1, 0)] = ONE;
        }
        'y' => {
            m[(0, 1)] = C64::new(0.0, -1.0);
            m[(1, 0)] = C64::new(0.0, 1.0);
        }
        'z' => {
            m[(0, 0)] = ONE;
            m[(1, 1)] = -ONE;
        }
        _ => return CMatrix::identity(2),
    }
    m
}
