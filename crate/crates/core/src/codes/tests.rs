use super::*;
use crate::channel::{classical_embed, ChannelSpec, ClassicalChannel, CqChannel, QuantumChannel};
use crate::info::h2;
use crate::linalg::{DensityMatrix, C64};

fn bsc_family(pairs: &[(f64, f64)]) -> CompoundFamily {
    CompoundFamily::bsc_pairs(pairs)
}

#[test]
fn size_code_constant_eavesdropper() {
    let fam = CompoundFamily::classical(vec![(
        ClassicalChannel::bsc(0.1),
        ClassicalChannel::constant(2, &[0.5, 0.5]).unwrap(),
    )])
    .unwrap();
    let p = vec![vec![0.5, 0.5]];
    let c = size_code(&fam, &p, 10, 0.05, 0.05, 1e-12, true).unwrap();
    assert_eq!(c.l(0), Some(1));
    let expect = (10.0 * (1.0 - h2(0.1) - 0.05)).exp2().floor() as u64;
    assert_eq!(c.j(), Some(expect));
    assert!(!c.rate_infeasible);
}

#[test]
fn size_code_equal_channels_infeasible() {
    let fam = bsc_family(&[(0.2, 0.2)]);
    let c = size_code(&fam, &[vec![0.5, 0.5]], 20, 0.05, 0.05, 0.05, true).unwrap();
    assert_eq!(c.j(), Some(1));
    assert!(c.rate_infeasible);
}

#[test]
fn size_code_formula_oracle() {
    let fam = bsc_family(&[(0.1, 0.3)]);
    let c = size_code(&fam, &[vec![0.5, 0.5]], 10, 0.05, 0.05, 0.05, true).unwrap();
    let i = 1.0 - h2(0.1);
    let chi = 1.0 - h2(0.3);
    let l = (10.0 * (chi + 0.1)).exp2().ceil();
    let j = (10.0 * (i - l.log2() / 10.0 - 0.05)).exp2().floor();
    assert_eq!(c.l(0), Some(l as u64));
    assert_eq!(c.j(), Some(j as u64));
    assert_eq!((l, j), (5.0, 5.0));
}

#[test]
fn size_code_no_csi_uses_worst_eavesdropper() {
    let fam = bsc_family(&[(0.1, 0.3), (0.2, 0.4)]);
    let c = size_code(&fam, &[vec![0.5, 0.5]], 10, 0.05, 0.05, 0.05, false).unwrap();
    assert_eq!(c.log2_l.len(), 1);
    let l = (10.0 * (1.0 - h2(0.3) + 0.1)).exp2().ceil();
    assert_eq!(c.l(0), Some(l as u64));
}

#[test]
fn codebook_trivial_cases() {
    let params = CodeParams::explicit(6, 3, vec![2], true).unwrap();
    let book = sample_codebook(&params, &[vec![1.0, 0.0]], 1.0, 1).unwrap();
    assert!(book.books[0].codewords.iter().all(|x| x == &vec![0; 6]));
    let single = CodeParams::explicit(6, 1, vec![1], true).unwrap();
    let book = sample_codebook(&single, &[vec![0.5, 0.5]], 1.0, 1).unwrap();
    assert_eq!(book.books[0].codewords.len(), 1);
}

#[test]
fn codebook_replay_is_frozen() {
    let params = CodeParams::explicit(8, 2, vec![2], true).unwrap();
    let a = sample_codebook(&params, &[vec![0.5, 0.5]], 1.0, 7).unwrap();
    let b = sample_codebook(&params, &[vec![0.5, 0.5]], 1.0, 7).unwrap();
    assert_eq!(a, b);
    let text = a.to_text();
    assert_eq!(text, FROZEN_SEED7);
}

const FROZEN_SEED7: &str = "# n=8 csi=true seed=7\n0 0 0: 1 0 1 0 0 0 1 0\n0 0 1: 1 1 0 0 0 1 0 1\n0 1 0: 0 0 0 0 1 1 1 0\n0 1 1: 0 1 1 1 0 0 1 1\n";

#[test]
fn codebook_prefix_property() {
    let big = CodeParams::explicit(10, 3, vec![4], true).unwrap();
    let small = CodeParams::explicit(10, 3, vec![1], true).unwrap();
    let a = sample_codebook(&big, &[vec![0.4, 0.6]], 1.0, 3).unwrap();
    let b = sample_codebook(&small, &[vec![0.4, 0.6]], 1.0, 3).unwrap();
    for j in 0..3 {
        assert_eq!(a.books[0].codeword(j, 0), b.books[0].codeword(j, 0));
    }
}

fn explicit_book(words: Vec<Vec<usize>>, j: usize, l: usize) -> WiretapCodebook {
    WiretapCodebook {
        n: words[0].len(),
        csi: true,
        seed: 0,
        books: vec![Book { j, l, codewords: words }],
        sampling: vec![],
    }
}

#[test]
fn noiseless_decoding_is_perfect() {
    let book = explicit_book(vec![vec![0, 0, 1], vec![1, 1, 0], vec![0, 1, 0], vec![1, 0, 1]], 2, 2);
    let w = ClassicalChannel::noiseless(2);
    let dec = build_classical_decoder(&book.books[0], &[w.clone()], 3.0);
    for mode in [EvaluationMode::Exact, EvaluationMode::MonteCarlo] {
        let r = evaluate_error(&book, &[dec.clone()], &[w.clone()], 1000, 1, mode).unwrap();
        assert_eq!(r.max_error, 0.0);
    }
}

#[test]
fn collisions_fall_back() {
    let book = explicit_book(vec![vec![0, 1, 1, 0], vec![0, 1, 1, 0]], 2, 1);
    let w = ClassicalChannel::noiseless(2);
    let dec = build_classical_decoder(&book.books[0], &[w], 3.0);
    assert_eq!(dec.decode(&[0, 1, 1, 0]), None);
    assert_eq!(dec.raw_membership(&[0, 1, 1, 0]), 2);
}

#[test]
fn empty_sets_always_fail() {
    let book = explicit_book(vec![vec![0, 1], vec![1, 0]], 2, 1);
    let dec = ClassicalDecoder::from_sets(2, vec![vec![], vec![]]).unwrap();
    let w = ClassicalChannel::bsc(0.1);
    let r = evaluate_error(&book, &[dec], &[w], 100, 0, EvaluationMode::Exact).unwrap();
    assert_eq!(r.max_error, 1.0);
    assert!(ClassicalDecoder::from_sets(1, vec![vec![vec![0]], vec![vec![0]]]).is_err());
}

#[test]
fn bsc_low_rate_monte_carlo() {
    let params = CodeParams::explicit(200, 4, vec![4], true).unwrap();
    let book = sample_codebook(&params, &[vec![0.5, 0.5]], 1.0, 11).unwrap();
    let w = ClassicalChannel::bsc(0.05);
    let dec = build_classical_decoder(&book.books[0], &[w.clone()], 3.0);
    let r = evaluate_error(&book, &[dec], &[w], 10_000, 11, EvaluationMode::MonteCarlo).unwrap();
    assert!(r.max_error <= 0.05, "{}", r.max_error);
}

#[test]
fn exact_and_monte_carlo_agree() {
    let params = CodeParams::explicit(8, 2, vec![2], true).unwrap();
    let book = sample_codebook(&params, &[vec![0.5, 0.5]], 1.0, 5).unwrap();
    let w = ClassicalChannel::bsc(0.1);
    let dec = build_classical_decoder(&book.books[0], &[w.clone()], 2.0);
    let exact = evaluate_error(&book, &[dec.clone()], &[w.clone()], 0, 0, EvaluationMode::Exact).unwrap();
    let mc = evaluate_error(&book, &[dec], &[w], 20_000, 9, EvaluationMode::MonteCarlo).unwrap();
    let (e, m) = (exact.states[0].avg_error, mc.states[0].avg_error);
    assert!((e - m).abs() <= mc.states[0].ci_half_width * 1.5 + 1e-12, "{e} vs {m}");
    assert_eq!(exact.states[0].disjoint, Some(true));
}

#[test]
fn leakage_trivial_cases() {
    let same = explicit_book(vec![vec![0, 1, 1]; 4], 2, 2);
    let v = ClassicalChannel::bsc(0.2);
    assert!(classical_leakage(&same.books[0], &v).unwrap().abs() < 1e-12);
    let ortho = explicit_book(vec![vec![0, 0], vec![1, 1]], 2, 1);
    let pure = CqChannel::new(vec![DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)]).unwrap();
    assert!((cq_leakage(&ortho.books[0], &pure).unwrap() - 1.0).abs() < 1e-12);
}

fn brute_leakage(book: &Book, p: f64) -> f64 {
    // joint distribution of (j, z) by nested enumeration, then H(J) + H(Z) - H(J, Z)
    let n = book.codewords[0].len();
    let mut joint = vec![vec![0.0; 1 << n]; book.j];
    for j in 0..book.j {
        for x in book.bin(j) {
            for z in 0..(1usize << n) {
                let mut pr = 1.0 / (book.j * book.l) as f64;
                for k in 0..n {
                    let zk = (z >> (n - 1 - k)) & 1;
                    pr *= if zk == x[k] { 1.0 - p } else { p };
                }
                joint[j][z] += pr;
            }
        }
    }
    let ent = |v: &[f64]| -> f64 { v.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum() };
    let flat: Vec<f64> = joint.iter().flatten().copied().collect();
    let pz: Vec<f64> = (0..(1 << n)).map(|z| joint.iter().map(|r| r[z]).sum()).collect();
    let pj: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    ent(&pj) + ent(&pz) - ent(&flat)
}

#[test]
fn leakage_bsc_formula_sized() {
    let fam = bsc_family(&[(0.1, 0.3)]);
    let p = vec![vec![0.5, 0.5]];
    let sized = size_code(&fam, &p, 8, 0.05, 0.05, 0.05, true).unwrap();
    assert_eq!(sized.l(0), Some(4));
    let v = ClassicalChannel::bsc(0.3);
    let leak_at = |l: u64| {
        let params = CodeParams::explicit(8, 2, vec![l], true).unwrap();
        let book = sample_codebook(&params, &p, 1.0, 0).unwrap();
        let leak = classical_leakage(&book.books[0], &v).unwrap();
        assert!((leak - brute_leakage(&book.books[0], 0.3)).abs() < 1e-12);
        let embedded = cq_leakage(&book.books[0], &classical_embed(&v)).unwrap();
        assert!((leak - embedded).abs() < 1e-9);
        let via = evaluate_leakage(&book, &[&ChannelSpec::Classical(v.clone())]).unwrap();
        assert_eq!(via[0], leak);
        leak
    };
    let sized_leak = leak_at(4);
    let plain = leak_at(1);
    assert!(sized_leak < plain, "{sized_leak} vs {plain}");
    assert!((sized_leak - 0.1489).abs() < 5e-4, "{sized_leak}");
}

#[test]
fn pgm_examples() {
    let ortho: Vec<DensityMatrix> = (0..3).map(|i| DensityMatrix::basis(3, i)).collect();
    let code = pgm_decoder(&ortho, &[1.0 / 3.0; 3]).unwrap();
    assert!(code.success.iter().all(|&s| (s - 1.0).abs() < 1e-14));
    assert!(code.completeness_defect() < 1e-9);
    let rho = crate::random::random_density(2, 4);
    let same = pgm_decoder(&[rho.clone(), rho], &[0.5, 0.5]).unwrap();
    assert!(same.success.iter().all(|&s| (s - 0.5).abs() < 1e-12));
    let th = std::f64::consts::FRAC_PI_4;
    let a = DensityMatrix::basis(2, 0);
    let b = DensityMatrix::pure(&[C64::new(th.cos(), 0.0), C64::new(th.sin(), 0.0)]).unwrap();
    let code = pgm_decoder(&[a, b], &[0.5, 0.5]).unwrap();
    let oracle = (1.0 + th.sin()) / 2.0;
    assert!((code.average_success - oracle).abs() < 1e-9);
    assert!((oracle - 0.853553).abs() < 1e-6);
}

#[test]
fn quantum_code_examples() {
    let ortho: Vec<DensityMatrix> = (0..4).map(|i| DensityMatrix::basis(4, i)).collect();
    let code = pgm_decoder(&ortho, &[0.25; 4]).unwrap();
    let id = evaluate_quantum_code(&code, &QuantumChannel::identity(2), Some(0.1)).unwrap();
    assert!((id.average_success - 1.0).abs() < 1e-12);
    assert_eq!(id.meets_lambda, Some(true));
    let dep = evaluate_quantum_code(&code, &QuantumChannel::fully_depolarizing(2), None).unwrap();
    assert!((dep.average_success - 0.25).abs() < 1e-12);
}

#[test]
fn quantum_code_matches_trace_oracle() {
    let phi = crate::random::random_channel(2, 17);
    let signals: Vec<DensityMatrix> = (0..3).map(|s| crate::random::random_density(8, 40 + s)).collect();
    let code = pgm_decoder(&signals, &[1.0 / 3.0; 3]).unwrap();
    let r = evaluate_quantum_code(&code, &phi, None).unwrap();
    let big = phi.tensor_power(3).unwrap();
    for (j, w) in signals.iter().enumerate() {
        let out = big.apply_matrix(w.matrix());
        let direct: f64 = out.matmul(&code.povm[j]).trace().re;
        assert!((direct - r.success[j]).abs() < 1e-12);
    }
    assert!(code.completeness_defect() < 1e-9);
}

#[test]
fn ensemble_matches_codebook_average() {
    // average exact error over sampled codebooks is the ensemble error
    let w = ClassicalChannel::bsc(0.1);
    let p = vec![vec![0.5, 0.5]];
    let params = CodeParams::explicit(8, 2, vec![2], true).unwrap();
    let mut total = 0.0;
    let books = 400;
    for seed in 0..books {
        let book = sample_codebook(&params, &p, 1.0, 1000 + seed).unwrap();
        let dec = build_classical_decoder(&book.books[0], &[w.clone()], 2.0);
        let r = evaluate_error(&book, &[dec], &[w.clone()], 0, 0, EvaluationMode::Exact).unwrap();
        total += r.states[0].avg_error;
    }
    let codebook_avg = total / books as f64;
    let opts = EnsembleOptions {
        trials: 40_000,
        seed: 2,
        delta: 1.0,
        decoder: EnsembleDecoder::JointTypical { delta: 2.0 },
    };
    let r = evaluate_error_random_coding(&[w], &p, &params, &opts).unwrap();
    let ens = r.states[0].avg_error;
    assert!((ens - codebook_avg).abs() < 0.02, "{ens} vs {codebook_avg}");
}

#[test]
fn ensemble_trivial_limits() {
    let w = ClassicalChannel::noiseless(2);
    let p = vec![vec![0.5, 0.5]];
    let params = CodeParams::explicit(10, 1, vec![1], true).unwrap();
    let opts = EnsembleOptions {
        trials: 100,
        seed: 0,
        delta: 1.0,
        decoder: EnsembleDecoder::MaximumLikelihood,
    };
    let r = evaluate_error_random_coding(&[w], &p, &params, &opts).unwrap();
    assert_eq!(r.max_error, 0.0);
}


