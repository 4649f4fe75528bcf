use fermi_cool::harness::{keyed_rng, Purpose};
use fermi_cool::quantum::{gibbs_populations, Beta};
use fermi_cool::thermal::{
    build_coupler_distribution, detailed_balance_check, evolve_rate_equations,
    ground_reset_probability, probabilistic_reset, total_variation,
};
use proptest::prelude::*;

#[test]
fn reset_frequency_within_three_sigma() {
    let (beta, omega): (f64, f64) = (0.7, 1.3);
    let p0 = 1.0 / (1.0 + (-beta * omega).exp());
    let n = 20_000;
    let mut rng = keyed_rng(42, 0, Purpose::FridgeReset);
    let grounds = (0..n)
        .filter(|_| probabilistic_reset(Beta::Finite(beta), omega, &mut rng)[(0, 0)].re == 1.0)
        .count();
    let sigma = (n as f64 * p0 * (1.0 - p0)).sqrt();
    assert!(
        (grounds as f64 - n as f64 * p0).abs() < 3.0 * sigma,
        "{grounds} vs {}",
        n as f64 * p0
    );
}

#[test]
fn reset_probability_ratio_is_boltzmann() {
    for (beta, omega) in [(0.1, 0.5), (1.0, 2.0), (3.0, 0.25)] {
        let p0 = ground_reset_probability(Beta::Finite(beta), omega);
        assert!((p0 / (1.0 - p0) - (beta * omega).exp()).abs() < 1e-12);
    }
    assert_eq!(ground_reset_probability(Beta::Infinite, 0.3), 1.0);
    assert_eq!(ground_reset_probability(Beta::Finite(0.0), 0.3), 0.5);
}

#[test]
fn pair_sampling_matches_distribution() {
    let energies = [-2.0, -1.2, -0.3, 0.4];
    let dist = build_coupler_distribution(&energies, Beta::Finite(0.8), 4).unwrap();
    let mut rng = keyed_rng(7, 3, Purpose::PairSample);
    let n = 30_000;
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..n {
        *counts.entry(dist.sample(&mut rng)).or_insert(0usize) += 1;
    }
    for ((j, k), v) in &dist.pairs {
        let p = v / dist.total();
        let c = *counts.get(&(*j, *k)).unwrap_or(&0) as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (c - n as f64 * p).abs() < 3.5 * sigma,
            "pair ({j},{k}): {c} vs {}",
            n as f64 * p
        );
    }
}

#[test]
fn keyed_streams_independent_of_order() {
    use rand::Rng;
    let a: f64 = keyed_rng(1, 5, Purpose::FridgeReset).random();
    let _: f64 = keyed_rng(1, 4, Purpose::FridgeReset).random();
    let b: f64 = keyed_rng(1, 5, Purpose::FridgeReset).random();
    let c: f64 = keyed_rng(1, 5, Purpose::PairSample).random();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

fn sorted_energies() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 2..7).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

proptest! {
    #[test]
    fn detailed_balance_holds(e in sorted_energies(), beta in 0.0f64..3.0) {
        let dist = build_coupler_distribution(&e, Beta::Finite(beta), e.len()).unwrap();
        let (ok, r) = detailed_balance_check(&dist, &e, Beta::Finite(beta));
        prop_assert!(ok, "residual {r}");
        prop_assert!((dist.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_equations_relax_to_gibbs(e in sorted_energies(), beta in 0.0f64..2.0) {
        let d = e.len();
        let dist = build_coupler_distribution(&e, Beta::Finite(beta), d).unwrap();
        let mut start = vec![0.0; d];
        start[d - 1] = 1.0;
        let p = evolve_rate_equations(&dist, &start, 0.05, 4000);
        let g = gibbs_populations(&e, Beta::Finite(beta));
        prop_assert!(total_variation(&p, &g) < 1e-6);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}
