use super::*;
use crate::channel::{ChannelGenerator, ClassicalChannel, FamilyGenerator};
use crate::codes::pgm_code_for_channel;
use crate::random::random_channel;

#[test]
fn equal_channels_have_zero_distance() {
    let w = random_channel(2, 4);
    let b = diamond_bounds(&w, &w, 0).unwrap();
    assert!(b.lower.abs() < 1e-12 && b.upper.abs() < 1e-12);
}

#[test]
fn identity_versus_depolarizing() {
    let b = diamond_bounds(&QuantumChannel::identity(2), &QuantumChannel::fully_depolarizing(2), 1).unwrap();
    // phi+ - I/4 has eigenvalues 3/4 and -1/4 (three times)
    let oracle = 0.75 + 3.0 * 0.25;
    assert!((b.lower - oracle).abs() < 1e-9);
    assert!((b.upper - 3.0).abs() < 1e-9);
    assert_eq!(b.witness_kind, WitnessKind::MaximallyEntangled);
}

#[test]
fn bounds_are_ordered_on_random_pairs() {
    for s in 0..100 {
        let w = random_channel(2, 1000 + s);
        let v = random_channel(2, 2000 + s);
        let b = diamond_bounds_with(&w, &v, 16, s).unwrap();
        assert!(0.0 <= b.lower && b.lower <= b.upper + 1e-12 && b.upper <= 4.0 + 1e-12);
    }
}

#[test]
fn more_probes_never_lower_the_bound() {
    let w = QuantumChannel::amplitude_damping(0.3);
    let v = QuantumChannel::dephasing(0.2);
    let mut last = 0.0;
    for probes in [0, 4, 16, 64, 128] {
        let b = diamond_bounds_with(&w, &v, probes, 5).unwrap();
        assert!(b.lower >= last);
        last = b.lower;
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    assert!(diamond_bounds(&QuantumChannel::identity(2), &QuantumChannel::identity(3), 0).is_err());
}

#[test]
fn huge_tau_gives_singleton_net() {
    let net = build_tau_net(2, 4.0, 1, 200).unwrap();
    assert_eq!(net.size, 1);
    assert_eq!(net.coverage_fraction, 1.0);
    assert!(net.warning.is_none());
}

#[test]
fn tiny_tau_warns() {
    let net = build_tau_net(2, 0.01, 1, 20).unwrap();
    assert_eq!(net.size, 20);
    assert!(net.warning.is_some());
    for c in &net.channels {
        assert!(QuantumChannel::validate(c.kraus(), "net").is_ok());
    }
    assert!(build_tau_net(3, 0.5, 1, 10).is_err());
    assert!(build_tau_net(2, 0.0, 1, 10).is_err());
}

#[test]
fn net_is_deterministic() {
    let a = build_tau_net(2, 1.5, 9, 300).unwrap();
    let b = build_tau_net(2, 1.5, 9, 300).unwrap();
    assert_eq!(a, b);
    assert!(a.coverage.iter().all(|c| c.covered == (c.bound <= 1.5)));
}

#[test]
fn tau_formula() {
    assert!((tau_for_xi(0.25).unwrap() - 0.125).abs() < 1e-15);
    assert!(tau_for_xi(1.0).is_err());
}

#[test]
fn fixed_family_discretizes_to_singleton() {
    let fam = CompoundFamily::quantum(vec![(QuantumChannel::amplitude_damping(0.1), QuantumChannel::dephasing(0.3))]).unwrap();
    let d = discretize_family(&fam, 0.25, 3, 0).unwrap();
    assert_eq!(d.theta_prime.len(), 1);
    assert_eq!(d.success_degradation_bound, 0.0);
    assert_eq!(d.leakage_inflation_bound, 0.0);
}

#[test]
fn depolarizing_family_perturbation() {
    let gen = FamilyGenerator {
        legal: ChannelGenerator::Depolarizing { dim: 2, min: 0.0, max: 0.2 },
        eavesdrop: ChannelGenerator::Depolarizing { dim: 2, min: 0.5, max: 0.7 },
    };
    let fam = CompoundFamily::with_generator(
        FamilyKind::Quantum,
        vec![(QuantumChannel::identity(2), QuantumChannel::depolarizing(2, 0.5))]
            .into_iter()
            .map(|(l, e)| crate::channel::WiretapPair {
                legal: crate::channel::ChannelSpec::Quantum(l),
                eavesdrop: crate::channel::ChannelSpec::Quantum(e),
            })
            .collect(),
        Some(gen),
    )
    .unwrap();
    let n = 2;
    let disc = discretize_family(&fam, 0.3, n, 4).unwrap();
    assert!((disc.tau - 0.3 / -(0.3f64).log2()).abs() < 1e-15);
    assert!(disc.members.iter().all(|m| m.within_tau));
    assert!(disc.theta_prime.len() > 1);
    let inputs: Vec<DensityMatrix> = [0usize, 3, 1, 2].iter().map(|&i| DensityMatrix::basis(4, i)).collect();
    for (k, pair) in disc.family.pairs().iter().enumerate() {
        let code = pgm_code_for_channel(&inputs, &[0.25; 4], pair.legal.as_quantum().unwrap(), n).unwrap();
        for m in disc.members.iter().filter(|m| m.nearest == k) {
            let c = check_perturbation(&disc, &fam, &code, m).unwrap();
            assert!(c.pass, "{c:?}");
            assert!(c.success_drop <= n as f64 * disc.tau);
            assert!(c.leakage_pass, "{c:?}");
        }
    }
}

#[test]
fn block_degradation_grows_at_most_linearly() {
    // classical channels: the diamond distance is max_x ||W(x) - W'(x)||_1 exactly
    let (p, q) = (0.1, 0.13);
    let w = QuantumChannel::from_classical(&ClassicalChannel::bsc(p));
    let v = QuantumChannel::from_classical(&ClassicalChannel::bsc(q));
    let single = 2.0 * (q - p);
    for n in 1..=3usize {
        let dim = 1 << n;
        let inputs: Vec<DensityMatrix> = (0..dim).map(|i| DensityMatrix::basis(dim, i)).collect();
        let priors = vec![1.0 / dim as f64; dim];
        let code = pgm_code_for_channel(&inputs, &priors, &w, n).unwrap();
        let sw = crate::codes::evaluate_quantum_code(&code, &w, None).unwrap().average_success;
        let sv = crate::codes::evaluate_quantum_code(&code, &v, None).unwrap().average_success;
        assert!(sw - sv <= n as f64 * single + 1e-9);
    }
}
