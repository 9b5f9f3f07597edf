use serde::Serialize;

use super::{counts, has_type};
use crate::channel::CqChannel;
use crate::error::{Error, Result};
use crate::info::{check_probability, spectrum_entropy};
use crate::linalg::{hermitian_eig, trace_norm, trace_product, CMatrix, DensityMatrix, Eigen, Projector, C64};
use crate::policy::NumericPolicy;

const PASS_SLACK: f64 = 1e-9;

/// Eigen-decomposition with numerically equal eigenvalues merged into classes.
#[derive(Clone, Debug)]
pub struct SpectrumClasses {
    pub eigen: Eigen,
    /// Class index of each eigenvalue.
    pub class_of: Vec<usize>,
    /// Total weight of each class.
    pub q: Vec<f64>,
}

impl SpectrumClasses {
    pub fn new(rho: &CMatrix) -> Result<Self> {
        let eigen = hermitian_eig(rho)?;
        let tol = NumericPolicy::DEFAULT.degeneracy_merge;
        let mut class_of = Vec::with_capacity(eigen.values.len());
        let mut q: Vec<f64> = Vec::new();
        let mut anchor = f64::NAN;
        for &v in &eigen.values {
            if q.is_empty() || (v - anchor).abs() > tol {
                q.push(0.0);
                anchor = v;
            }
            *q.last_mut().unwrap() += v.max(0.0);
            class_of.push(q.len() - 1);
        }
        Ok(SpectrumClasses { eigen, class_of, q })
    }

    pub fn dim(&self) -> usize {
        self.eigen.values.len()
    }

    pub fn entropy(&self) -> f64 {
        spectrum_entropy(&self.eigen.values)
    }

    fn class_counts(&self, idx: impl Iterator<Item = usize>) -> Vec<usize> {
        let mut c = vec![0; self.q.len()];
        for i in idx {
            c[self.class_of[i]] += 1;
        }
        c
    }
}

/// One checked inequality `lhs <= rhs` (or `lhs >= rhs` for lower bounds).
#[derive(Clone, Debug, Serialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Inequality {
    fn at_least(name: &str, lhs: f64, rhs: f64) -> Self {
        Inequality {
            name: name.into(),
            lhs,
            rhs,
            pass: lhs >= rhs - PASS_SLACK,
        }
    }

    fn at_most(name: &str, lhs: f64, rhs: f64) -> Self {
        Inequality {
            name: name.into(),
            lhs,
            rhs,
            pass: lhs <= rhs + PASS_SLACK,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectorCertificate {
    #[serde(skip)]
    pub projector: Projector,
    /// `Pi rho Pi` for the operator the projector was built from.
    #[serde(skip)]
    pub compressed: CMatrix,
    pub dim: usize,
    pub rank: usize,
    pub n: usize,
    pub alpha: f64,
    /// `S(rho)` or the empirical `S(V|P)`, per letter.
    pub entropy: f64,
    /// Smallest constant for which the trace and eigenvalue bounds hold.
    pub k_est: f64,
    pub inequalities: Vec<Inequality>,
}

impl ProjectorCertificate {
    pub fn all_pass(&self) -> bool {
        self.inequalities.iter().all(|i| i.pass)
    }

    pub fn inequality(&self, name: &str) -> Option<&Inequality> {
        self.inequalities.iter().find(|i| i.name == name)
    }
}

struct Selection {
    kept: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

fn total_dim(sites: &[&SpectrumClasses]) -> Result<usize> {
    let cap = NumericPolicy::DEFAULT.dim_cap;
    let mut dim = 1usize;
    for s in sites {
        dim = dim
            .checked_mul(s.dim())
            .filter(|&d| d <= cap)
            .ok_or_else(|| Error::resource(format!("product dimension exceeds cap {cap}")))?;
    }
    Ok(dim)
}

fn select(sites: &[&SpectrumClasses], keep: impl Fn(&[usize]) -> bool) -> Result<Selection> {
    let dim = total_dim(sites)?;
    let mut kept = Vec::new();
    let mut weights = Vec::new();
    let mut tuple = vec![0usize; sites.len()];
    for m in 0..dim {
        let mut r = m;
        for k in (0..sites.len()).rev() {
            tuple[k] = r % sites[k].dim();
            r /= sites[k].dim();
        }
        if keep(&tuple) {
            let w: f64 = tuple
                .iter()
                .zip(sites)
                .map(|(&i, s)| s.eigen.values[i].max(0.0))
                .product();
            kept.push(tuple.clone());
            weights.push(w);
        }
    }
    Ok(Selection { kept, weights })
}

fn product_vector(sites: &[&SpectrumClasses], tuple: &[usize]) -> Vec<C64> {
    let mut v = vec![C64::new(1.0, 0.0)];
    for (s, &i) in sites.iter().zip(tuple) {
        let col = s.eigen.vectors.column(i);
        let mut next = Vec::with_capacity(v.len() * col.len());
        for a in &v {
            for b in &col {
                next.push(a * b);
            }
        }
        v = next;
    }
    v
}

/// `sum_k w_k |v_k><v_k|` over the selected product eigenvectors.
fn assemble(sites: &[&SpectrumClasses], sel: &Selection, weighted: bool) -> (CMatrix, CMatrix) {
    let dim: usize = sites.iter().map(|s| s.dim()).product();
    let r = sel.kept.len();
    let mut w = CMatrix::zeros(dim, r.max(1));
    let mut ws = CMatrix::zeros(dim, r.max(1));
    for (k, tuple) in sel.kept.iter().enumerate() {
        let v = product_vector(sites, tuple);
        let s = sel.weights[k];
        for (i, z) in v.into_iter().enumerate() {
            w[(i, k)] = z;
            ws[(i, k)] = z * s;
        }
    }
    if r == 0 {
        return (CMatrix::zeros(dim, dim), CMatrix::zeros(dim, dim));
    }
    let wa = w.adjoint();
    let proj = w.matmul(&wa).hermitian_part();
    let comp = if weighted {
        ws.matmul(&wa).hermitian_part()
    } else {
        CMatrix::zeros(dim, dim)
    };
    (proj, comp)
}

fn k_from(log2_value: f64, offset: f64, scale: f64) -> f64 {
    if scale <= 0.0 || !log2_value.is_finite() {
        return 0.0;
    }
    ((log2_value + offset) / scale).max(0.0)
}

fn check_alpha(alpha: f64, n: usize) -> Result<()> {
    if !(alpha > 0.0) {
        return Err(Error::validation("alpha", "alpha must be positive"));
    }
    if n == 0 {
        return Err(Error::validation("n", "block length must be at least 1"));
    }
    Ok(())
}

/// Frequency-typical projector of `rho^{(x) n}`.
pub fn typical_projector(rho: &DensityMatrix, n: usize, alpha: f64) -> Result<ProjectorCertificate> {
    check_alpha(alpha, n)?;
    let classes = SpectrumClasses::new(rho.matrix())?;
    let sites = vec![&classes; n];
    let d = classes.dim();
    let sel = select(&sites, |tuple| {
        let c = classes.class_counts(tuple.iter().copied());
        super::within_width(&c, &classes.q, n, alpha)
    })?;
    let (proj, comp) = assemble(&sites, &sel, true);
    let s = classes.entropy();
    let nf = n as f64;
    let mass: f64 = sel.weights.iter().sum();
    let rank = sel.kept.len();
    let max_w = sel.weights.iter().copied().fold(0.0, f64::max);
    let scale = d as f64 * alpha * nf.sqrt();
    let k2 = k_from((rank as f64).log2(), -nf * s, scale);
    let k3 = k_from(max_w.log2(), nf * s, scale);
    let k = k2.max(k3);
    let inequalities = vec![
        Inequality::at_least("te1", mass, 1.0 - d as f64 / (alpha * alpha)),
        Inequality::at_most("te2", rank as f64, (nf * s + k * scale).exp2()),
        Inequality::at_most("te3", max_w, (-nf * s + k * scale).exp2()),
    ];
    Ok(ProjectorCertificate {
        projector: Projector::from_trusted(proj),
        compressed: comp,
        dim: d.pow(n as u32),
        rank,
        n,
        alpha,
        entropy: s,
        k_est: k,
        inequalities,
    })
}

struct Conditional {
    sites: Vec<SpectrumClasses>,
}

impl Conditional {
    fn new(v: &CqChannel) -> Result<Self> {
        Ok(Conditional {
            sites: v
                .states()
                .iter()
                .map(|s| SpectrumClasses::new(s.matrix()))
                .collect::<Result<_>>()?,
        })
    }
}

/// Conditional projector without the exact-type precondition; te7 is omitted
/// when `pv` is `None`.
pub(crate) fn conditional_projector_unchecked(
    v: &CqChannel,
    xn: &[usize],
    alpha: f64,
    pv: Option<&Projector>,
) -> Result<ProjectorCertificate> {
    check_alpha(alpha, xn.len())?;
    let a = v.inputs();
    if let Some(i) = xn.iter().position(|&x| x >= a) {
        return Err(Error::validation(format!("xn[{i}]"), "symbol outside the input alphabet"));
    }
    let cond = Conditional::new(v)?;
    let sites: Vec<&SpectrumClasses> = xn.iter().map(|&x| &cond.sites[x]).collect();
    let n = xn.len();
    let nx = counts(xn, a);
    let sel = select(&sites, |tuple| {
        (0..a).all(|x| {
            if nx[x] == 0 {
                return true;
            }
            let s = &cond.sites[x];
            let c = s.class_counts(
                tuple
                    .iter()
                    .zip(xn)
                    .filter(|(_, &sym)| sym == x)
                    .map(|(&i, _)| i),
            );
            super::within_width(&c, &s.q, nx[x], alpha)
        })
    })?;
    let (proj, comp) = assemble(&sites, &sel, true);
    let d = v.dim();
    let nf = n as f64;
    let total_entropy: f64 = xn.iter().map(|&x| cond.sites[x].entropy()).sum();
    let mass: f64 = sel.weights.iter().sum();
    let rank = sel.kept.len();
    let max_w = sel.weights.iter().copied().fold(0.0, f64::max);
    let scale = (a * d) as f64 * alpha * nf.sqrt();
    let k5 = k_from((rank as f64).log2(), -total_entropy, scale);
    let k6 = k_from(max_w.log2(), total_entropy, scale);
    let k = k5.max(k6);
    let floor = 1.0 - (a * d) as f64 / (alpha * alpha);
    let mut inequalities = vec![
        Inequality::at_least("te4", mass, floor),
        Inequality::at_most("te5", rank as f64, (total_entropy + k * scale).exp2()),
        Inequality::at_most("te6", max_w, (-total_entropy + k * scale).exp2()),
    ];
    if let Some(pv) = pv {
        let vn = v.apply(xn)?;
        inequalities.push(Inequality::at_least("te7", trace_product(vn.matrix(), pv.matrix()), floor));
    }
    Ok(ProjectorCertificate {
        projector: Projector::from_trusted(proj),
        compressed: comp,
        dim: d.pow(n as u32),
        rank,
        n,
        alpha,
        entropy: total_entropy / nf,
        k_est: k,
        inequalities,
    })
}

fn average_projector(v: &CqChannel, p: &[f64], n: usize, alpha: f64) -> Result<ProjectorCertificate> {
    typical_projector(&v.average(p), n, alpha * (v.inputs() as f64).sqrt())
}

fn check_type(v: &CqChannel, p: &[f64], xn: &[usize]) -> Result<()> {
    check_probability(p, "P")?;
    if p.len() != v.inputs() {
        return Err(Error::validation("P", "length differs from the input alphabet"));
    }
    if xn.iter().any(|&x| x >= p.len()) || !has_type(xn, p) {
        return Err(Error::validation("xn", "sequence is not of exact type P"));
    }
    Ok(())
}

/// Conditionally typical projector `Pi_{V,alpha}(x^n)` with te4 to te7.
pub fn conditional_typical_projector(
    v: &CqChannel,
    p: &[f64],
    xn: &[usize],
    alpha: f64,
) -> Result<ProjectorCertificate> {
    check_type(v, p, xn)?;
    let pv = average_projector(v, p, xn.len(), alpha)?;
    conditional_projector_unchecked(v, xn, alpha, Some(&pv.projector))
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothedOperator {
    pub xn: Vec<usize>,
    #[serde(skip)]
    pub q: CMatrix,
    pub alpha: f64,
    /// `|| Q - V^n(x^n) ||_1`
    pub trace_distance: f64,
    /// `sqrt(8 (a d + d)) / alpha`
    pub bound: f64,
    pub pass: bool,
    pub max_eigenvalue: f64,
    /// `2^{-n S(V|P) + K a d alpha sqrt(n)}` with the measured constant.
    pub eigenvalue_bound: f64,
    pub eigenvalue_pass: bool,
    pub k_est: f64,
}

/// `Q` given a precomputed `Pi_{PV, alpha sqrt(a)}`.
pub(crate) fn smoothed_operator_with(
    v: &CqChannel,
    xn: &[usize],
    alpha: f64,
    pv: &Projector,
) -> Result<SmoothedOperator> {
    let cert = conditional_projector_unchecked(v, xn, alpha, None)?;
    let q = pv.matrix().sandwich(&cert.compressed).hermitian_part();
    let vn = v.apply(xn)?;
    let trace_distance = trace_norm(&q.sub(vn.matrix()))?;
    let (a, d) = (v.inputs() as f64, v.dim() as f64);
    let bound = (8.0 * (a * d + d)).sqrt() / alpha;
    let max_eigenvalue = hermitian_eig(&q)?.values[0];
    let nf = xn.len() as f64;
    let eigenvalue_bound = (-nf * cert.entropy + cert.k_est * a * d * alpha * nf.sqrt()).exp2();
    Ok(SmoothedOperator {
        xn: xn.to_vec(),
        q,
        alpha,
        trace_distance,
        bound,
        pass: trace_distance <= bound + PASS_SLACK,
        max_eigenvalue,
        eigenvalue_bound,
        eigenvalue_pass: max_eigenvalue <= eigenvalue_bound * (1.0 + 1e-9) + 1e-15,
        k_est: cert.k_est,
    })
}

/// `Q(x^n) = Pi_PV Pi_V(x^n) V^n(x^n) Pi_V(x^n) Pi_PV`
pub fn smoothed_operator(v: &CqChannel, p: &[f64], xn: &[usize], alpha: f64) -> Result<SmoothedOperator> {
    check_type(v, p, xn)?;
    let pv = average_projector(v, p, xn.len(), alpha)?;
    smoothed_operator_with(v, xn, alpha, &pv.projector)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GentleCheck {
    pub lhs: f64,
    pub lambda: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `|| rho - sqrt(X) rho sqrt(X) ||_1 <= sqrt(8 lambda)` with `lambda = 1 - tr(rho X)`.
pub fn gentle_check(rho: &DensityMatrix, x: &CMatrix) -> Result<GentleCheck> {
    if x.rows() != rho.dim() || !x.is_square() {
        return Err(Error::validation("X", "dimension does not match the state"));
    }
    if !x.is_hermitian(NumericPolicy::DEFAULT.hermitian_tol) {
        return Err(Error::validation("X", "operator is not Hermitian"));
    }
    let e = hermitian_eig(&x.hermitian_part())?;
    let tol = NumericPolicy::DEFAULT.povm_tol;
    let (hi, lo) = (e.values[0], *e.values.last().unwrap());
    if lo < -tol || hi > 1.0 + tol {
        return Err(Error::validation(
            "X",
            format!("eigenvalues must lie in [0, 1], found [{lo:.3e}, {hi:.3e}]"),
        ));
    }
    let root = e.apply_fn(|v| v.clamp(0.0, 1.0).sqrt());
    let lhs = trace_norm(&rho.matrix().sub(&root.sandwich(rho.matrix())))?;
    let lambda = (1.0 - trace_product(rho.matrix(), x)).max(0.0);
    let rhs = (8.0 * lambda).sqrt();
    Ok(GentleCheck {
        lhs,
        lambda,
        rhs,
        pass: lhs <= rhs + PASS_SLACK,
    })
}

/// Matrix of `Q(x^n)` only, for bulk use.
pub(crate) fn smoothed_matrix(v: &CqChannel, xn: &[usize], alpha: f64, pv: &Projector) -> Result<CMatrix> {
    let cert = conditional_projector_unchecked(v, xn, alpha, None)?;
    Ok(pv.matrix().sandwich(&cert.compressed).hermitian_part())
}

/// `Pi_{PV, alpha sqrt(a)}` for the `P`-average of `V`.
pub(crate) fn average_typical_projector(v: &CqChannel, p: &[f64], n: usize, alpha: f64) -> Result<ProjectorCertificate> {
    average_projector(v, p, n, alpha)
}
