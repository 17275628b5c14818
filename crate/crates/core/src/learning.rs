//! Learning dynamics on the sensing game: round-robin best response and
//! discrete fictitious play.

use crate::error::{Error, Result};
use crate::sensing::{Action, MixedProfile, Profile, SensingGame, DEVIATION_TOL};

/// Largest movement of the empirical frequencies, over the last tenth of the
/// horizon, for fictitious play to count as converged.
pub const FP_CONVERGENCE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct LearningStep {
    pub step: usize,
    pub profile: Profile,
    /// Empirical probability of NS for each player, up to this step.
    pub ns_freq: Vec<f64>,
    pub utilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LearningLimit {
    Pure(Profile),
    Mixed(MixedProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningTrace {
    pub iterations: Vec<LearningStep>,
    pub converged: bool,
    pub limit: LearningLimit,
    /// Number of action switches (best response) or action changes between
    /// consecutive steps (fictitious play).
    pub switches: usize,
}

impl LearningTrace {
    pub fn last(&self) -> &LearningStep {
        self.iterations
            .last()
            .expect("traces always hold the initial step")
    }
}

fn best_action(game: &SensingGame, player: usize, beliefs: &[f64]) -> Action {
    let ns = game.expected_payoff(player, Action::NotSense, beliefs);
    let s = game.expected_payoff(player, Action::Sense, beliefs);
    if s > ns {
        Action::Sense
    } else {
        Action::NotSense
    }
}

/// Round-robin best-response dynamics from `init`. One step is one player's
/// turn; the player switches only when that strictly pays.
pub fn best_response_dynamics(
    game: &SensingGame,
    init: Profile,
    max_steps: usize,
) -> Result<LearningTrace> {
    game.require_feasible()?;
    let k = game.num_players();
    if init.0 >> k != 0 {
        return Err(Error::InvalidParameter(format!(
            "initial profile has bits beyond player {k}"
        )));
    }
    let tol = DEVIATION_TOL * game.scale();
    let mut ns_count: Vec<usize> = (0..k)
        .map(|i| usize::from(init.action(i) == Action::NotSense))
        .collect();
    let record = |step: usize, p: Profile, ns_count: &[usize]| LearningStep {
        step,
        profile: p,
        ns_freq: ns_count
            .iter()
            .map(|&c| c as f64 / (step + 1) as f64)
            .collect(),
        utilities: game.payoffs(p).to_vec(),
    };

    let mut profile = init;
    let mut iterations = vec![record(0, profile, &ns_count)];
    let mut switches = 0;
    let mut quiet_turns = 0;
    let mut step = 0;
    while quiet_turns < k && step < max_steps {
        let i = step % k;
        step += 1;
        let other = profile.flipped(i);
        if game.payoff(other, i) > game.payoff(profile, i) + tol {
            profile = other;
            switches += 1;
            quiet_turns = 0;
        } else {
            quiet_turns += 1;
        }
        for (j, c) in ns_count.iter_mut().enumerate() {
            *c += usize::from(profile.action(j) == Action::NotSense);
        }
        iterations.push(record(step, profile, &ns_count));
    }
    let converged =
        (0..k).all(|i| game.payoff(profile.flipped(i), i) <= game.payoff(profile, i) + tol);
    Ok(LearningTrace {
        iterations,
        converged,
        limit: LearningLimit::Pure(profile),
        switches,
    })
}

/// Discrete fictitious play with one phantom observation per player drawn
/// from `priors` (NS probabilities). Every player best-responds at once to
/// the product of the others' empirical mixtures; ties go to NS.
pub fn fictitious_play(
    game: &SensingGame,
    horizon: usize,
    priors: &[f64],
) -> Result<LearningTrace> {
    game.require_feasible()?;
    let k = game.num_players();
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if priors.len() != k || priors.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidParameter(format!(
            "expected {k} priors in [0, 1]"
        )));
    }

    let mut ns_weight = priors.to_vec();
    let mut beliefs = priors.to_vec();
    let mut iterations = Vec::with_capacity(horizon);
    let mut switches = 0;
    let mut previous: Option<Profile> = None;
    for step in 1..=horizon {
        let profile = (0..k).fold(Profile(0), |p, i| p.with(i, best_action(game, i, &beliefs)));
        if previous.is_some_and(|q| q != profile) {
            switches += 1;
        }
        previous = Some(profile);
        for (i, w) in ns_weight.iter_mut().enumerate() {
            if profile.action(i) == Action::NotSense {
                *w += 1.0;
            }
        }
        beliefs = ns_weight.iter().map(|w| w / (step + 1) as f64).collect();
        iterations.push(LearningStep {
            step,
            profile,
            ns_freq: beliefs.clone(),
            utilities: game.payoffs(profile).to_vec(),
        });
    }

    let window = &iterations[horizon - (horizon / 10).max(1)..];
    let movement = (0..k)
        .map(|i| {
            let (lo, hi) = window
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                    (lo.min(s.ns_freq[i]), hi.max(s.ns_freq[i]))
                });
            hi - lo
        })
        .fold(0.0, f64::max);
    let converged = movement < FP_CONVERGENCE_TOL;
    let settled = window.iter().all(|s| s.profile == window[0].profile);
    let limit = if settled {
        LearningLimit::Pure(window[0].profile)
    } else {
        LearningLimit::Mixed(MixedProfile::new(beliefs)?)
    };
    Ok(LearningTrace {
        iterations,
        converged,
        limit,
        switches,
    })
}
