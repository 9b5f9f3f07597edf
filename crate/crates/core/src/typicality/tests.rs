use super::*;
use crate::rng::stream;

#[test]
fn degenerate_point_mass() {
    let set = typical_set(&[1.0, 0.0], 5, 0.0).unwrap();
    assert_eq!(set, vec![vec![0; 5]]);
    let t = truncate_to_typical(&[1.0, 0.0], 5, 0.0).unwrap();
    assert_eq!(t.weights, vec![1.0]);
}

#[test]
fn exact_type_class() {
    let set = typical_set(&[0.5, 0.5], 2, 0.0).unwrap();
    assert_eq!(set, vec![vec![0, 1], vec![1, 0]]);
    assert!(matches!(truncate_to_typical(&[0.5, 0.5], 3, 0.0), Err(Error::Degenerate(_))));
}

fn brute_force(p: &[f64], n: usize, delta: f64) -> Vec<(Vec<usize>, f64)> {
    // independent filter: nested loops over all binary words
    let mut out = Vec::new();
    for m in 0..(1usize << n) {
        let xs: Vec<usize> = (0..n).map(|k| (m >> (n - 1 - k)) & 1).collect();
        let ones = xs.iter().filter(|&&x| x == 1).count() as f64;
        let zeros = n as f64 - ones;
        let ok0 = (zeros - n as f64 * p[0]).abs() <= delta * (n as f64 * p[0] * p[1]).sqrt();
        let ok1 = (ones - n as f64 * p[1]).abs() <= delta * (n as f64 * p[0] * p[1]).sqrt();
        if ok0 && ok1 {
            out.push((xs, p[0].powf(zeros) * p[1].powf(ones)));
        }
    }
    let total: f64 = out.iter().map(|(_, w)| w).sum();
    out.into_iter().map(|(x, w)| (x, w / total)).collect()
}

#[test]
fn matches_brute_force_filter() {
    let p = [0.75, 0.25];
    let oracle = brute_force(&p, 4, 1.0);
    let set = typical_set(&p, 4, 1.0).unwrap();
    assert_eq!(set, oracle.iter().map(|(x, _)| x.clone()).collect::<Vec<_>>());
    let t = truncate_to_typical(&p, 4, 1.0).unwrap();
    for (w, (_, o)) in t.weights.iter().zip(&oracle) {
        assert!((w - o).abs() < 1e-15);
    }
}

#[test]
fn wide_delta_keeps_product() {
    let t = truncate_to_typical(&[0.5, 0.5], 6, 100.0).unwrap();
    assert_eq!(t.len(), 64);
    assert!((t.mass - 1.0).abs() < 1e-15);
    assert!(t.weights.iter().all(|&w| (w - 1.0 / 64.0).abs() < 1e-18));
}

#[test]
fn enumeration_cap() {
    assert!(matches!(typical_set(&[0.5, 0.5], 23, 1.0), Err(Error::Resource(_))));
}

#[test]
fn typical_mass_matches_enumeration() {
    let p = [0.6, 0.3, 0.1];
    let t = truncate_to_typical(&p, 7, 1.0).unwrap();
    let m = typical_mass(&p, 7, 1.0).unwrap();
    assert!((t.mass - m).abs() < 1e-12);
}

#[test]
fn sampler_stays_typical() {
    let p = [0.3, 0.7];
    let s = TypicalSampler::new(&p, 50, 1.0).unwrap();
    let mut rng = stream(3, &[0]);
    for _ in 0..100 {
        assert!(is_typical(&s.sample(&mut rng), &p, 1.0));
    }
    assert!(TypicalSampler::new(&[0.5, 0.5], 3, 0.0).is_err());
}

#[test]
fn ln_factorial_values() {
    let lf = ln_factorials(5);
    assert!((lf[5] - 120f64.ln()).abs() < 1e-13);
    let mut n = 0;
    for_each_type(4, 3, |_| n += 1);
    assert_eq!(n, 15);
}

mod quantum {
    use super::super::*;
    use crate::channel::CqChannel;
    use crate::linalg::{trace_product, CMatrix, DensityMatrix, C64};
    use crate::random::{random_cq, random_density};

    fn reference_cq() -> CqChannel {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [C64::new(s, 0.0), C64::new(s, 0.0)];
        let minus = [C64::new(s, 0.0), C64::new(-s, 0.0)];
        let v1 = CMatrix::outer(&plus).scale(0.85).add(&CMatrix::outer(&minus).scale(0.15));
        CqChannel::new(vec![
            DensityMatrix::diagonal(&[0.9, 0.1]).unwrap(),
            DensityMatrix::new(v1).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn flat_spectrum_is_all_typical() {
        for n in [1, 3, 6, 10] {
            let c = typical_projector(&DensityMatrix::maximally_mixed(2), n, 1.0).unwrap();
            assert_eq!(c.rank, 1 << n);
            assert!((c.inequality("te1").unwrap().lhs - 1.0).abs() < 1e-12);
            assert!(c.projector.matrix().sub(&CMatrix::identity(1 << n)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn pure_state_rank_one() {
        let c = typical_projector(&DensityMatrix::diagonal(&[1.0, 0.0]).unwrap(), 3, 2.0).unwrap();
        assert_eq!(c.rank, 1);
        let mut expect = CMatrix::zeros(8, 8);
        expect[(0, 0)] = C64::new(1.0, 0.0);
        assert!(c.projector.matrix().sub(&expect).max_abs() < 1e-15);
    }

    #[test]
    fn te1_matches_enumeration() {
        let c = typical_projector(&DensityMatrix::diagonal(&[0.75, 0.25]).unwrap(), 6, 2.0).unwrap();
        // all 64 eigenvalue products, filtered by the count of 0.25 factors
        let width = 2.0 * (6.0f64 * 0.75 * 0.25).sqrt();
        let mut oracle = 0.0;
        let mut rank = 0;
        for m in 0..64u32 {
            let k = m.count_ones() as f64;
            if (k - 1.5).abs() <= width && ((6.0 - k) - 4.5).abs() <= width {
                oracle += 0.75f64.powf(6.0 - k) * 0.25f64.powf(k);
                rank += 1;
            }
        }
        let te1 = c.inequality("te1").unwrap();
        assert!((te1.lhs - oracle).abs() < 1e-12);
        assert!(te1.lhs >= 0.5);
        assert_eq!(c.rank, rank);
        assert!(c.all_pass());
    }

    #[test]
    fn typical_projector_commutes() {
        let rho = random_density(2, 21);
        let c = typical_projector(&rho, 4, 1.0).unwrap();
        let rn = crate::linalg::tensor_power(rho.matrix(), 4).unwrap();
        let p = c.projector.matrix();
        assert!(p.matmul(&rn).sub(&rn.matmul(p)).max_abs() < 1e-12);
        assert!(p.matmul(p).sub(p).max_abs() < 1e-12);
        let te1 = c.inequality("te1").unwrap().lhs;
        assert!((te1 - trace_product(&rn, p)).abs() < 1e-12);
    }

    #[test]
    fn conditional_trivial_cases() {
        let pure = CqChannel::new(vec![DensityMatrix::basis(2, 1); 2]).unwrap();
        let c = conditional_typical_projector(&pure, &[0.5, 0.5], &[0, 1, 1, 0], 2.0).unwrap();
        assert_eq!(c.rank, 1);
        assert!((c.inequality("te4").unwrap().lhs - 1.0).abs() < 1e-14);
        let flat = CqChannel::new(vec![DensityMatrix::maximally_mixed(2); 2]).unwrap();
        let c = conditional_typical_projector(&flat, &[0.5, 0.5], &[0, 1], 2.0).unwrap();
        assert!(c.projector.matrix().sub(&CMatrix::identity(4)).max_abs() < 1e-14);
    }

    #[test]
    fn conditional_requires_exact_type() {
        let v = random_cq(2, 2, 1);
        assert!(conditional_typical_projector(&v, &[0.5, 0.5], &[0, 0, 0, 1], 2.0).is_err());
    }

    #[test]
    fn conditional_random_qubit() {
        let v = random_cq(2, 2, 31);
        let xn = [0, 1, 1, 0];
        let c = conditional_typical_projector(&v, &[0.5, 0.5], &xn, 2.0).unwrap();
        assert!(c.all_pass(), "{:?}", c.inequalities);
        assert_eq!(c.inequalities.len(), 4);
        // oracle: tr(V^n Pi) from the dense matrices
        let vn = v.apply(&xn).unwrap();
        let te4 = c.inequality("te4").unwrap().lhs;
        assert!((te4 - trace_product(vn.matrix(), c.projector.matrix())).abs() < 1e-12);
        let p = c.projector.matrix();
        assert!(p.matmul(vn.matrix()).sub(&vn.matrix().matmul(p)).max_abs() < 1e-12);
    }

    #[test]
    fn certificates_sweep() {
        let rhos = [DensityMatrix::diagonal(&[0.75, 0.25]).unwrap(), random_density(2, 5)];
        let v = random_cq(2, 2, 6);
        for n in [2, 4, 6, 8] {
            for alpha in [1.0, 2.0, 4.0] {
                for rho in &rhos {
                    let c = typical_projector(rho, n, alpha).unwrap();
                    assert!(c.all_pass() && c.k_est <= 10.0, "n={n} alpha={alpha} {c:?}");
                }
                let xn: Vec<usize> = (0..n).map(|k| k % 2).collect();
                let c = conditional_typical_projector(&v, &[0.5, 0.5], &xn, alpha).unwrap();
                assert!(c.all_pass() && c.k_est <= 10.0, "n={n} alpha={alpha}");
            }
        }
    }

    #[test]
    fn smoothed_trivial_cases() {
        let v = random_cq(2, 2, 8);
        let q = smoothed_operator(&v, &[0.5, 0.5], &[0, 1, 1, 0], 1e6).unwrap();
        assert!(q.trace_distance <= 1e-3);
        let pure = CqChannel::new(vec![DensityMatrix::basis(2, 0); 2]).unwrap();
        let q = smoothed_operator(&pure, &[0.5, 0.5], &[1, 0], 2.0).unwrap();
        let vn = pure.apply(&[1, 0]).unwrap();
        assert!(q.q.sub(vn.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn smoothed_random_qubit() {
        let v = random_cq(2, 2, 9);
        let q = smoothed_operator(&v, &[0.5, 0.5], &[0, 0, 1, 1], 4.0).unwrap();
        assert!((q.bound - 48f64.sqrt() / 4.0).abs() < 1e-15);
        assert!(q.pass && q.trace_distance < q.bound);
        assert!(q.eigenvalue_pass);
    }

    #[test]
    fn gentle_trivial_cases() {
        let rho = random_density(3, 2);
        let g = gentle_check(&rho, &CMatrix::identity(3)).unwrap();
        assert!(g.lhs < 1e-12 && g.pass);
        let pure = DensityMatrix::basis(2, 0);
        let g = gentle_check(&pure, pure.matrix()).unwrap();
        assert!(g.lhs < 1e-14 && g.lambda < 1e-15);
        assert!(gentle_check(&pure, &CMatrix::identity(2).scale(2.0)).is_err());
    }

    #[test]
    fn gentle_random_pairs() {
        for seed in 0..200u64 {
            let d = 2 + (seed as usize % 2);
            let rho = random_density(d, seed);
            let sigma = random_density(d, seed + 500);
            let top = sigma.eig().values[0];
            let x = sigma.matrix().scale(1.0 / top);
            let g = gentle_check(&rho, &x).unwrap();
            assert!(g.pass, "seed {seed}: {g:?}");
        }
    }

    #[test]
    fn concentration_exhaustive_and_constant() {
        let v = reference_cq();
        let mut opts = ConcentrationOptions::new(4, 2.0, vec![1], 1, 0);
        opts.exhaustive = true;
        let r = aw_concentration_trial(&v, &[0.5, 0.5], &opts).unwrap();
        assert!(r.rows[0].max_deviation <= 1e-10);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = DensityMatrix::pure(&[C64::new(s, 0.0), C64::new(0.0, s)]).unwrap();
        let constant = CqChannel::new(vec![psi.clone(), psi]).unwrap();
        let opts = ConcentrationOptions::new(4, 2.0, vec![1, 3], 4, 1);
        let r = aw_concentration_trial(&constant, &[0.5, 0.5], &opts).unwrap();
        assert!(r.rows.iter().all(|row| row.max_deviation < 1e-12));
    }

    #[test]
    fn concentration_decreases() {
        let opts = ConcentrationOptions::new(6, 2.0, vec![16, 64, 256], 32, 42);
        let r = aw_concentration_trial(&reference_cq(), &[0.5, 0.5], &opts).unwrap();
        let m: Vec<f64> = r.rows.iter().map(|row| row.median_deviation).collect();
        assert!(m[0] > m[1] && m[1] > m[2], "{m:?}");
        assert!(m[2] <= 0.1);
    }
}
