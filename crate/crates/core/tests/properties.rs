use cogpower::learning::fictitious_play;
use cogpower::sensing::{
    build_sensing_game, classify_2player, correlated_segment, is_correlated_equilibrium,
    pure_equilibria, NeCount,
};
use cogpower::{
    beta_star, gamma_star, nash_powers, stackelberg_powers, EfficiencyFunction, NetworkConfig,
    RolePartition, Sigmoid,
};
use proptest::prelude::*;

fn config(k: usize, n: u32, gains: &[f64], rates: &[f64], sigma2: f64) -> NetworkConfig {
    let mut cfg = NetworkConfig::symmetric(k, n, 0.1);
    cfg.gains = gains[..k].to_vec();
    cfg.rates = rates[..k].to_vec();
    cfg.sigma2 = sigma2;
    cfg
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beta_star_maximizes_bits_per_unit_sinr(c in 0.05f64..20.0, x in 1e-3f64..1e3) {
        let f = EfficiencyFunction::exp_outage(c).unwrap();
        let beta = beta_star(&f).unwrap();
        prop_assert!(f.value(x) / x <= f.value(beta) / beta * (1.0 + 1e-13));
    }

    #[test]
    fn gamma_star_decreases_with_eps(m in 2u32..40, e1 in 1e-4f64..0.5, de in 1e-4f64..0.5) {
        let f = EfficiencyFunction::goodman(m).unwrap();
        let g1 = gamma_star(&f, e1).unwrap();
        let g2 = gamma_star(&f, e1 + de).unwrap();
        prop_assert!(g2 < g1);
        prop_assert!(g1 < beta_star(&f).unwrap());
    }

    #[test]
    fn noise_scales_powers_not_sinrs(
        k in 2usize..6,
        l in 1usize..5,
        gains in prop::collection::vec(0.1f64..10.0, 6),
        rates in prop::collection::vec(0.5f64..4.0, 6),
        s in 0.01f64..100.0,
    ) {
        prop_assume!(l < k);
        let f = EfficiencyFunction::exp_outage(1.0).unwrap();
        let base = config(k, 16, &gains, &rates, 1.0);
        let scaled = config(k, 16, &gains, &rates, s);
        let part = RolePartition::first_leaders(l, k).unwrap();
        let a = stackelberg_powers(&base, &part, &f).unwrap();
        let b = stackelberg_powers(&scaled, &part, &f).unwrap();
        for i in 0..k {
            prop_assert!(close(b.powers[i], s * a.powers[i], 1e-12));
            prop_assert!(close(b.sinrs[i], a.sinrs[i], 1e-12));
            prop_assert!(close(b.utilities[i], a.utilities[i] / s, 1e-12));
        }
    }

    #[test]
    fn gain_scales_power_inversely(
        k in 2usize..6,
        gains in prop::collection::vec(0.1f64..10.0, 6),
        rates in prop::collection::vec(0.5f64..4.0, 6),
        who in 0usize..6,
        s in 0.1f64..10.0,
    ) {
        let who = who % k;
        let f = EfficiencyFunction::goodman(10).unwrap();
        let base = config(k, 32, &gains, &rates, 1.0);
        let mut bumped = base.clone();
        bumped.gains[who] *= s;
        let a = nash_powers(&base, &f).unwrap();
        let b = nash_powers(&bumped, &f).unwrap();
        prop_assert!(close(b.powers[who], a.powers[who] / s, 1e-12));
        prop_assert!(close(b.utilities[who], a.utilities[who] * s, 1e-12));
    }

    #[test]
    fn correlated_segment_is_always_correlated_equilibrium(
        r1 in 0.5f64..4.0,
        r2 in 0.5f64..4.0,
        alpha in 0.0f64..0.6,
        lambda in 0.0f64..=1.0,
    ) {
        let f = EfficiencyFunction::from_spectral_efficiency(0.9).unwrap();
        let mut cfg = NetworkConfig::symmetric(2, 1, alpha);
        cfg.rates = vec![r1, r2];
        let class = classify_2player(&cfg, &f).unwrap();
        prop_assume!(class.count == NeCount::Three);
        let game = build_sensing_game(&cfg, &f).unwrap();
        let point = correlated_segment(&game, lambda).unwrap();
        prop_assert!(is_correlated_equilibrium(&point.distribution, &game).unwrap());
    }

    #[test]
    fn fictitious_play_limits_are_equilibria(
        k in 2usize..4,
        alpha in 0.0f64..1.0,
        priors in prop::collection::vec(0.0f64..=1.0, 3),
    ) {
        let f = EfficiencyFunction::exp_outage(0.5).unwrap();
        let cfg = NetworkConfig::symmetric(k, 4, alpha);
        let game = build_sensing_game(&cfg, &f).unwrap();
        let trace = fictitious_play(&game, 2_000, &priors[..k]).unwrap();
        for step in &trace.iterations {
            prop_assert!(step.ns_freq.iter().all(|x| (0.0..=1.0).contains(x)));
        }
        if let cogpower::learning::LearningLimit::Pure(p) = trace.limit {
            prop_assert!(pure_equilibria(&game).unwrap().contains(&p));
        }
    }
}
