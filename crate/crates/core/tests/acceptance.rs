//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints its own PASS/FAIL line.

mod common;

use std::process::ExitCode;

use cogpower::efficiency::gamma_star_numeric;
use cogpower::hierarchy::best_response_gap;
use cogpower::learning::best_response_dynamics;
use cogpower::sensing::{
    build_sensing_game, classify_2player, correlated_segment, exact_potential_check,
    hybrid_game_check, hybrid_grid, is_correlated_equilibrium, mixed_equilibrium, nash_bargaining,
    pure_equilibria, weighted_potential_check, NeCount,
};
use cogpower::welfare::{load_sweep, optimal_leaders_exact, total_power};
use cogpower::{
    beta_star, gamma_star, nash_powers, pareto_dominance_check, stackelberg_powers,
    CorrelatedDistribution, EfficiencyFunction, NetworkConfig, Profile, Role, RolePartition,
    SensingGame,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn crowded_cell(alpha: f64) -> (NetworkConfig, EfficiencyFunction) {
    (
        NetworkConfig::symmetric(17, 128, alpha),
        EfficiencyFunction::from_spectral_efficiency(3.0).unwrap(),
    )
}

fn two_player() -> (NetworkConfig, EfficiencyFunction) {
    let mut cfg = NetworkConfig::symmetric(2, 1, 0.2);
    cfg.rates = vec![2.0, 2.5];
    (
        cfg,
        EfficiencyFunction::from_spectral_efficiency(0.9).unwrap(),
    )
}

fn calibration() -> Outcome {
    let mut worst_beta: f64 = 0.0;
    let mut worst_gamma: f64 = 0.0;
    for i in 1..=100 {
        let c = i as f64 / 10.0;
        let f = EfficiencyFunction::exp_outage(c).map_err(|e| e.to_string())?;
        let beta = beta_star(&f).map_err(|e| e.to_string())?;
        worst_beta = worst_beta.max((beta - c).abs());
        for eps in [1e-4, 1e-3, 1e-2, 0.1, 1.0] {
            let closed = c / (1.0 + eps * c);
            let api = gamma_star(&f, eps).map_err(|e| e.to_string())?;
            let numeric = gamma_star_numeric(&f, eps, beta).map_err(|e| e.to_string())?;
            worst_gamma = worst_gamma
                .max((api - closed).abs() / closed)
                .max((numeric - closed).abs() / closed);
        }
    }
    check(
        worst_beta <= 1e-12 && worst_gamma <= 1e-9,
        format!("max |β*-c| = {worst_beta:.2e}, max rel γ* error = {worst_gamma:.2e}"),
    )
}

fn optimal_leaders() -> Outcome {
    let (cfg, f) = crowded_cell(0.05);
    let (best, _) = optimal_leaders_exact(&cfg, &f).map_err(|e| e.to_string())?;
    check(
        (4..=6).contains(&best),
        format!("argmax L = {best} (target 5 ± 1)"),
    )
}

fn welfare_gains() -> Outcome {
    let gain = |alpha: f64| -> Result<f64, String> {
        let (cfg, f) = crowded_cell(alpha);
        let (best, rows) = optimal_leaders_exact(&cfg, &f).map_err(|e| e.to_string())?;
        Ok(rows[best - 1].gain_pct)
    };
    let free = gain(0.0)?;
    let costly = gain(0.05)?;
    check(
        (15.0..=18.0).contains(&free) && (11.0..=15.0).contains(&costly),
        format!("max gain {free:.3}% at α = 0, {costly:.3}% at α = 0.05"),
    )
}

fn power_reduction() -> Outcome {
    let (cfg, f) = crowded_cell(0.05);
    let (best, _) = optimal_leaders_exact(&cfg, &f).map_err(|e| e.to_string())?;
    let p_ne = total_power(&cfg, 17, &f).map_err(|e| e.to_string())?;
    let p_se = total_power(&cfg, best, &f).map_err(|e| e.to_string())?;
    let reduction = 100.0 * (p_ne - p_se) / p_ne;
    check(
        reduction > 15.0,
        format!("total power down {reduction:.3}% at L = {best}"),
    )
}

fn load_limit() -> Outcome {
    let f = EfficiencyFunction::from_spectral_efficiency(3.0).unwrap();
    let alphas = [0.0, 0.05, 0.10, 0.15];
    let rows = load_sweep(128, &f, &alphas).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for a in alphas {
        let last = rows
            .iter()
            .filter(|r| r.alpha == a)
            .max_by_key(|r| r.users)
            .ok_or("empty sweep")?;
        ok &= last.max_gain_pct > 100.0;
        parts.push(format!(
            "α={a}: {:.1}% at K/N={:.3}",
            last.max_gain_pct, last.load
        ));
    }
    check(ok, parts.join(", "))
}

fn two_player_game() -> Outcome {
    let (cfg, f) = two_player();
    let class = classify_2player(&cfg, &f).map_err(|e| e.to_string())?;
    let game = build_sensing_game(&cfg, &f).map_err(|e| e.to_string())?;
    let pure = pure_equilibria(&game).map_err(|e| e.to_string())?;
    let mixed = mixed_equilibrium(&cfg, &f).map_err(|e| e.to_string())?;
    let interior = mixed.profile.ns_probs.iter().all(|p| *p > 0.0 && *p < 1.0);
    let mut segment_ok = true;
    for i in 0..=100 {
        let point = correlated_segment(&game, i as f64 / 100.0).map_err(|e| e.to_string())?;
        segment_ok &=
            is_correlated_equilibrium(&point.distribution, &game).map_err(|e| e.to_string())?;
    }
    let product = CorrelatedDistribution::product(&mixed.profile);
    segment_ok &= is_correlated_equilibrium(&product, &game).map_err(|e| e.to_string())?;
    let nbs = nash_bargaining(&game).map_err(|e| e.to_string())?;
    let ok = class.count == NeCount::Three
        && pure == vec![Profile(0b01), Profile(0b10)]
        && interior
        && segment_ok
        && nbs.lambda > 0.0
        && nbs.lambda < 1.0;
    check(
        ok,
        format!(
            "{} equilibria, pure {:?}, mixed NS probs {:.4?}, CE segment ok = {segment_ok}, NBS λ = {:.4}",
            class.count,
            pure.iter().map(|p| p.label(2)).collect::<Vec<_>>(),
            mixed.profile.ns_probs,
            nbs.lambda
        ),
    )
}

fn brute_force_equilibria(game: &SensingGame) -> Vec<Profile> {
    let k = game.num_players();
    let scale = game.scale();
    (0..1u32 << k)
        .map(Profile)
        .filter(|&p| {
            (0..k).all(|i| {
                let q = Profile(p.0 ^ (1 << i));
                game.payoff(q, i) - game.payoff(p, i) <= 1e-12 * scale
            })
        })
        .collect()
}

fn random_partition(rng: &mut StdRng, k: usize) -> RolePartition {
    let l = rng.gen_range(1..k);
    let mut users: Vec<usize> = (0..k).collect();
    for i in (1..k).rev() {
        users.swap(i, rng.gen_range(0..=i));
    }
    RolePartition::new(users[..l].to_vec(), k).unwrap()
}

fn property_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut sinr_err: f64 = 0.0;
    let mut br_gap: f64 = 0.0;
    let mut four_cycle: f64 = 0.0;
    let mut pure_mismatch = 0;
    let mut potential_failures = 0;
    let mut br_failures = 0;
    let mut draws = 0;
    while draws < 100 {
        let k = 2 + draws % 3;
        let alpha = rng.gen_range(0.0..0.5);
        let (cfg, f) = common::random_config(&mut rng, k, alpha);
        let Ok(game) = build_sensing_game(&cfg, &f) else {
            continue;
        };
        if game.require_feasible().is_err() {
            continue;
        }
        draws += 1;

        // (a) SINR identities and (b) best-response gaps
        let part = random_partition(&mut rng, k);
        let se = stackelberg_powers(&cfg, &part, &f).map_err(|e| e.to_string())?;
        let c = se.constants;
        for (i, s) in se.sinrs.iter().enumerate() {
            let target = match se.roles[i] {
                Role::Leader => c.gamma_star_l,
                Role::Follower => c.beta_star,
            };
            sinr_err = sinr_err.max((s - target).abs() / target);
        }
        let ne = nash_powers(&cfg, &f).map_err(|e| e.to_string())?;
        br_gap = br_gap
            .max(best_response_gap(&cfg, &f, &se))
            .max(best_response_gap(&cfg, &f, &ne));

        // (c) weighted four-cycle identity
        let wp = weighted_potential_check(&game).map_err(|e| e.to_string())?;
        let scaled = exact_potential_check(&game.rescaled()).map_err(|e| e.to_string())?;
        four_cycle = four_cycle.max(scaled.max_defect / game.rescaled().scale());
        potential_failures += usize::from(!wp.holds);

        // (d) enumeration
        let pure = pure_equilibria(&game).map_err(|e| e.to_string())?;
        pure_mismatch += usize::from(pure != brute_force_equilibria(&game));

        // (e) BR dynamics climb the potential and stop
        for init in game.profiles() {
            let trace = best_response_dynamics(&game, init, 1000).map_err(|e| e.to_string())?;
            let climbs = trace.iterations.windows(2).all(|w| {
                w[0].profile == w[1].profile
                    || wp.potential[w[1].profile.index()] > wp.potential[w[0].profile.index()]
            });
            let bounded = trace.switches < 1 << k;
            br_failures += usize::from(!(climbs && bounded && trace.converged));
        }
    }

    // (f) hybrid game on the two-player scenario
    let (cfg, f) = two_player();
    let grid = hybrid_grid(&cfg, &f, 400, 10.0).map_err(|e| e.to_string())?;
    let hybrid = hybrid_game_check(&cfg, &f, &grid).map_err(|e| e.to_string())?;

    let ok = sinr_err <= 1e-10
        && br_gap <= 1e-6
        && four_cycle <= 1e-9
        && potential_failures == 0
        && pure_mismatch == 0
        && br_failures == 0
        && hybrid.unique_nash
        && hybrid.braess;
    check(
        ok,
        format!(
            "(a) SINR err {sinr_err:.1e} (b) BR gap {br_gap:.1e} (c) four-cycle {four_cycle:.1e}, \
             {potential_failures} potential failures (d) {pure_mismatch} mismatches \
             (e) {br_failures} BR failures (f) hybrid unique = {}, Braess = {}",
            hybrid.unique_nash, hybrid.braess
        ),
    )
}

fn pareto() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xc0ffee);
    let mut violations = 0;
    let mut worst: f64 = f64::INFINITY;
    for draw in 0..100 {
        let k = 2 + draw % 7;
        let (cfg, f) = common::random_config(&mut rng, k, 0.0);
        let part = random_partition(&mut rng, k);
        let report = pareto_dominance_check(&cfg, &part, &f).map_err(|e| e.to_string())?;
        violations += usize::from(!report.all_dominate);
        worst = report.ratios.iter().cloned().fold(worst, f64::min);
    }
    check(
        violations == 0,
        format!("{violations} violations in 100 draws, min SE/NE ratio {worst:.6}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("calibration", calibration),
        ("optimal leader count", optimal_leaders),
        ("welfare gain", welfare_gains),
        ("power reduction", power_reduction),
        ("load limit gain", load_limit),
        ("two-player sensing game", two_player_game),
        ("property suite", property_suite),
        ("pareto dominance", pareto),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} ({name}): PASS  {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL  {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
