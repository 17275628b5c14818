//! The sensing game: every transmitter decides whether to sense (`S`,
//! becoming a follower) or not (`NS`, staying a leader) before the power
//! control game is played.
//!
//! Payoffs of a joint profile are the equilibrium utilities of the induced
//! power game: Stackelberg with the senders as followers, the Nash
//! equilibrium when nobody senses, and the Nash equilibrium scaled by
//! `1 - α` when everybody senses.
//!
//! Profiles are bit masks: bit `i` set means player `i` senses.

use std::fmt;

use crate::efficiency::{EfficiencyFunction, Sigmoid};
use crate::error::{Error, Result};
use crate::hierarchy::{
    nash_powers, sinr_of, stackelberg_powers, EquilibriumConstants, NetworkConfig, RolePartition,
};
use crate::roots::golden_section_max;

/// Largest number of players handled by the exhaustive routines.
pub const MAX_PLAYERS: usize = 12;

/// Tolerance of the potential identities, relative to the payoff scale.
pub const POTENTIAL_TOL: f64 = 1e-9;

/// Tolerance of the correlated-equilibrium inequalities after normalizing
/// payoffs by their largest magnitude.
pub const CE_TOL: f64 = 1e-9;

/// Relative margin below which a unilateral deviation is not an improvement.
pub const DEVIATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Sense,
    NotSense,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Sense => "S",
            Action::NotSense => "NS",
        })
    }
}

/// A joint action profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile(pub u32);

impl Profile {
    pub const ALL_NOT_SENSE: Profile = Profile(0);

    pub fn all_sense(k: usize) -> Profile {
        Profile(((1u64 << k) - 1) as u32)
    }

    pub fn from_actions(actions: &[Action]) -> Profile {
        Profile(
            actions
                .iter()
                .enumerate()
                .filter(|(_, a)| **a == Action::Sense)
                .fold(0, |m, (i, _)| m | 1 << i),
        )
    }

    pub fn action(self, i: usize) -> Action {
        if self.0 >> i & 1 == 1 {
            Action::Sense
        } else {
            Action::NotSense
        }
    }

    pub fn with(self, i: usize, a: Action) -> Profile {
        match a {
            Action::Sense => Profile(self.0 | 1 << i),
            Action::NotSense => Profile(self.0 & !(1 << i)),
        }
    }

    pub fn flipped(self, i: usize) -> Profile {
        Profile(self.0 ^ 1 << i)
    }

    pub fn senders(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// `"S,NS,..."` for `k` players.
    pub fn label(self, k: usize) -> String {
        (0..k)
            .map(|i| self.action(i).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse(s: &str) -> Result<Profile> {
        let actions = s
            .split([',', ' '])
            .filter(|t| !t.is_empty())
            .map(|t| match t.trim() {
                "S" | "s" => Ok(Action::Sense),
                "NS" | "ns" => Ok(Action::NotSense),
                other => Err(Error::InvalidParameter(format!("unknown action {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Profile::from_actions(&actions))
    }
}

/// Strategic-form game with two actions per player.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingGame {
    k: usize,
    /// `μ_k = R_k g_k / σ²`.
    weights: Vec<f64>,
    /// `payoffs[profile][player]`; NaN where the profile is infeasible.
    payoffs: Vec<Vec<f64>>,
    feasible: Vec<bool>,
}

impl SensingGame {
    /// A game from an explicit payoff table indexed by profile mask.
    pub fn from_payoffs(weights: Vec<f64>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || k > MAX_PLAYERS {
            return Err(Error::InvalidParameter(format!(
                "player count must lie in 1..={MAX_PLAYERS}, got {k}"
            )));
        }
        if payoffs.len() != 1 << k || payoffs.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidParameter(format!(
                "payoff table must have 2^{k} rows of {k} entries"
            )));
        }
        let feasible = payoffs
            .iter()
            .map(|r| r.iter().all(|u| u.is_finite()))
            .collect();
        Ok(Self {
            k,
            weights,
            payoffs,
            feasible,
        })
    }

    pub fn num_players(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn profiles(&self) -> impl Iterator<Item = Profile> {
        (0..1u32 << self.k).map(Profile)
    }

    pub fn payoff(&self, p: Profile, player: usize) -> f64 {
        self.payoffs[p.index()][player]
    }

    pub fn payoffs(&self, p: Profile) -> &[f64] {
        &self.payoffs[p.index()]
    }

    pub fn is_feasible(&self, p: Profile) -> bool {
        self.feasible[p.index()]
    }

    pub fn require_feasible(&self) -> Result<()> {
        let bad: Vec<String> = self
            .profiles()
            .filter(|p| !self.is_feasible(*p))
            .map(|p| p.label(self.k))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InfeasibleGame(bad.join(" ")))
        }
    }

    /// Largest payoff magnitude over feasible cells.
    pub fn scale(&self) -> f64 {
        self.payoffs
            .iter()
            .flatten()
            .filter(|u| u.is_finite())
            .fold(0.0, |m, u| m.max(u.abs()))
    }

    /// The game with payoffs divided by the player weights.
    pub fn rescaled(&self) -> SensingGame {
        let payoffs = self
            .payoffs
            .iter()
            .map(|row| row.iter().zip(&self.weights).map(|(u, w)| u / w).collect())
            .collect();
        SensingGame {
            k: self.k,
            weights: vec![1.0; self.k],
            payoffs,
            feasible: self.feasible.clone(),
        }
    }

    /// Expected payoff of `player` playing `action` against independent
    /// opponents who play NS with the given probabilities.
    pub fn expected_payoff(&self, player: usize, action: Action, ns_probs: &[f64]) -> f64 {
        let others: Vec<usize> = (0..self.k).filter(|&j| j != player).collect();
        let mut total = 0.0;
        for bits in 0..1u32 << others.len() {
            let mut prob = 1.0;
            let mut profile = Profile(0).with(player, action);
            for (idx, &j) in others.iter().enumerate() {
                if bits >> idx & 1 == 1 {
                    profile = profile.with(j, Action::Sense);
                    prob *= 1.0 - ns_probs[j];
                } else {
                    prob *= ns_probs[j];
                }
            }
            if prob > 0.0 {
                total += prob * self.payoff(profile, player);
            }
        }
        total
    }
}

/// Builds the sensing game from the power-control model.
pub fn build_sensing_game(cfg: &NetworkConfig, f: &EfficiencyFunction) -> Result<SensingGame> {
    cfg.validate()?;
    let k = cfg.num_users();
    if k > MAX_PLAYERS {
        return Err(Error::InvalidParameter(format!(
            "sensing game limited to {MAX_PLAYERS} players, got {k}"
        )));
    }
    let weights = (0..k).map(|i| cfg.weight(i)).collect();
    let nash = nash_powers(cfg, f).ok();
    let mut payoffs = Vec::with_capacity(1 << k);
    for mask in 0..1u32 << k {
        let p = Profile(mask);
        let row = match p.senders() {
            0 => nash.as_ref().map(|ne| ne.utilities.clone()),
            s if s == k => nash
                .as_ref()
                .map(|ne| ne.utilities.iter().map(|u| (1.0 - cfg.alpha) * u).collect()),
            _ => {
                let leaders = (0..k)
                    .filter(|&i| p.action(i) == Action::NotSense)
                    .collect();
                RolePartition::new(leaders, k)
                    .and_then(|part| stackelberg_powers(cfg, &part, f))
                    .ok()
                    .map(|se| se.utilities)
            }
        };
        payoffs.push(row.unwrap_or_else(|| vec![f64::NAN; k]));
    }
    SensingGame::from_payoffs(weights, payoffs)
}

/// A violated four-cycle: players `i`, `j` switching NS→S around `context`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourCycleWitness {
    pub i: usize,
    pub j: usize,
    pub context: Profile,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCheck {
    pub holds: bool,
    pub max_defect: f64,
    pub witness: Option<FourCycleWitness>,
}

/// Four-cycle test for an exact potential: for every pair of players and
/// every context, the payoff changes around the cycle sum to zero.
pub fn exact_potential_check(game: &SensingGame) -> Result<PotentialCheck> {
    game.require_feasible()?;
    let k = game.num_players();
    let tol = POTENTIAL_TOL * game.scale().max(f64::MIN_POSITIVE);
    let mut max_defect: f64 = 0.0;
    let mut witness: Option<FourCycleWitness> = None;
    for i in 0..k {
        for j in i + 1..k {
            for p in game.profiles() {
                if p.action(i) == Action::Sense || p.action(j) == Action::Sense {
                    continue;
                }
                let a = p;
                let b = p.with(i, Action::Sense);
                let c = p.with(j, Action::Sense);
                let d = b.with(j, Action::Sense);
                let ui = |q: Profile| game.payoff(q, i);
                let uj = |q: Profile| game.payoff(q, j);
                let defect = ui(b) - ui(a) + ui(c) - ui(d) + uj(d) - uj(b) + uj(a) - uj(c);
                if defect.abs() > max_defect {
                    max_defect = defect.abs();
                    if defect.abs() > tol {
                        witness = Some(FourCycleWitness {
                            i,
                            j,
                            context: p,
                            defect,
                        });
                    }
                }
            }
        }
    }
    Ok(PotentialCheck {
        holds: witness.is_none(),
        max_defect,
        witness,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPotential {
    pub holds: bool,
    pub check: PotentialCheck,
    /// `V` indexed by profile mask, `V(all NS) = 0`. Empty when the
    /// four-cycle test fails.
    pub potential: Vec<f64>,
}

/// Tests the weights `μ_k = R_k g_k / σ²` and reconstructs the potential.
pub fn weighted_potential_check(game: &SensingGame) -> Result<WeightedPotential> {
    let scaled = game.rescaled();
    let check = exact_potential_check(&scaled)?;
    if !check.holds {
        return Ok(WeightedPotential {
            holds: false,
            check,
            potential: Vec::new(),
        });
    }
    let k = scaled.num_players();
    let mut potential = vec![0.0; 1 << k];
    // build V along the path that switches players on in increasing order
    for mask in 1..1u32 << k {
        let top = 31 - mask.leading_zeros() as usize;
        let prev = Profile(mask).with(top, Action::NotSense);
        potential[mask as usize] =
            potential[prev.index()] + scaled.payoff(Profile(mask), top) - scaled.payoff(prev, top);
    }
    let tol = POTENTIAL_TOL * scaled.scale().max(f64::MIN_POSITIVE);
    let mut holds = true;
    'outer: for p in scaled.profiles() {
        for i in 0..k {
            let q = p.flipped(i);
            let du = scaled.payoff(p, i) - scaled.payoff(q, i);
            let dv = potential[p.index()] - potential[q.index()];
            if (du - dv).abs() > tol {
                holds = false;
                break 'outer;
            }
        }
    }
    Ok(WeightedPotential {
        holds,
        check,
        potential,
    })
}

/// All pure Nash equilibria by exhaustive deviation checks.
pub fn pure_equilibria(game: &SensingGame) -> Result<Vec<Profile>> {
    game.require_feasible()?;
    let k = game.num_players();
    let tol = DEVIATION_TOL * game.scale();
    Ok(game
        .profiles()
        .filter(|&p| (0..k).all(|i| game.payoff(p.flipped(i), i) <= game.payoff(p, i) + tol))
        .collect())
}

/// Pre-cost follower and leader utilities (bit/J) of a symmetric user with
/// `followers` followers overall.
fn role_utilities(
    cfg: &NetworkConfig,
    f: &EfficiencyFunction,
    followers: usize,
) -> Result<(f64, f64)> {
    let k = cfg.num_users();
    let free = cfg.with_alpha(0.0);
    if followers == 0 || followers == k {
        let u = nash_powers(&free, f)?.utilities[0];
        return Ok((u, u));
    }
    let part = RolePartition::first_leaders(k - followers, k)?;
    let se = stackelberg_powers(&free, &part, f)?;
    Ok((se.utilities[k - 1], se.utilities[0]))
}

fn require_symmetric(cfg: &NetworkConfig) -> Result<()> {
    let w0 = cfg.weight(0);
    if (0..cfg.num_users()).all(|i| (cfg.weight(i) - w0).abs() <= 1e-12 * w0) {
        Ok(())
    } else {
        Err(Error::AssumptionViolated(
            "Rosenthal potential needs identical R_k g_k".into(),
        ))
    }
}

/// `Φ(F, L) = (1-α) Σ_{i=1}^{F} U(S, i, K-i) + Σ_{j=1}^{L} U(NS, K-j, j)`,
/// where `U(S, i, K-i)` is a follower's pre-cost utility with `i` followers
/// and `U(NS, K-j, j)` a leader's utility with `j` leaders.
pub fn rosenthal_potential(
    cfg: &NetworkConfig,
    f: &EfficiencyFunction,
    followers: usize,
    leaders: usize,
) -> Result<f64> {
    cfg.validate()?;
    require_symmetric(cfg)?;
    let k = cfg.num_users();
    if followers + leaders != k {
        return Err(Error::InvalidParameter(format!(
            "F + L must equal K = {k}, got {followers} + {leaders}"
        )));
    }
    let mut phi = 0.0;
    for i in 1..=followers {
        phi += (1.0 - cfg.alpha) * role_utilities(cfg, f, i)?.0;
    }
    for j in 1..=leaders {
        phi += role_utilities(cfg, f, k - j)?.1;
    }
    Ok(phi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RosenthalReport {
    /// `Φ(F, K-F)` for `F = 0..=K`.
    pub phi: Vec<f64>,
    pub argmax_followers: usize,
    /// Follower counts of the pure equilibria.
    pub equilibrium_counts: Vec<usize>,
    pub consistent: bool,
}

pub fn rosenthal_argmax(cfg: &NetworkConfig, f: &EfficiencyFunction) -> Result<RosenthalReport> {
    let k = cfg.num_users();
    let phi = (0..=k)
        .map(|fc| rosenthal_potential(cfg, f, fc, k - fc))
        .collect::<Result<Vec<_>>>()?;
    let argmax_followers = phi
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
        .0;
    let game = build_sensing_game(cfg, f)?;
    let mut equilibrium_counts: Vec<usize> = pure_equilibria(&game)?
        .iter()
        .map(|p| p.senders())
        .collect();
    equilibrium_counts.sort_unstable();
    equilibrium_counts.dedup();
    let consistent = equilibrium_counts.contains(&argmax_followers);
    Ok(RosenthalReport {
        phi,
        argmax_followers,
        equilibrium_counts,
        consistent,
    })
}

/// Independent strategies: entry `k` is player `k`'s probability of NS.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile {
    pub ns_probs: Vec<f64>,
}

impl MixedProfile {
    pub fn new(ns_probs: Vec<f64>) -> Result<Self> {
        if ns_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter(
                "probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(Self { ns_probs })
    }

    pub fn expected_utilities(&self, game: &SensingGame) -> Vec<f64> {
        (0..game.num_players())
            .map(|i| {
                let p = self.ns_probs[i];
                p * game.expected_payoff(i, Action::NotSense, &self.ns_probs)
                    + (1.0 - p) * game.expected_payoff(i, Action::Sense, &self.ns_probs)
            })
            .collect()
    }
}

/// A distribution over joint profiles, indexed by profile mask.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatedDistribution {
    k: usize,
    q: Vec<f64>,
}

impl CorrelatedDistribution {
    pub fn new(k: usize, q: Vec<f64>) -> Result<Self> {
        if q.len() != 1 << k {
            return Err(Error::InvalidParameter(format!(
                "expected 2^{k} probabilities"
            )));
        }
        if q.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::InvalidParameter(
                "probabilities must be nonnegative".into(),
            ));
        }
        let total: f64 = q.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { k, q })
    }

    pub fn point_mass(k: usize, p: Profile) -> Self {
        let mut q = vec![0.0; 1 << k];
        q[p.index()] = 1.0;
        Self { k, q }
    }

    pub fn product(m: &MixedProfile) -> Self {
        let k = m.ns_probs.len();
        let q = (0..1u32 << k)
            .map(|mask| {
                (0..k)
                    .map(|i| match Profile(mask).action(i) {
                        Action::NotSense => m.ns_probs[i],
                        Action::Sense => 1.0 - m.ns_probs[i],
                    })
                    .product()
            })
            .collect();
        Self { k, q }
    }

    pub fn prob(&self, p: Profile) -> f64 {
        self.q[p.index()]
    }

    pub fn expected_utilities(&self, game: &SensingGame) -> Vec<f64> {
        (0..self.k)
            .map(|i| {
                game.profiles()
                    .filter(|p| self.prob(*p) > 0.0)
                    .map(|p| self.prob(p) * game.payoff(p, i))
                    .sum()
            })
            .collect()
    }
}

/// Checks the obedience inequalities: for every player and recommended
/// action with positive probability, following the recommendation is at
/// least as good as any deviation.
pub fn is_correlated_equilibrium(q: &CorrelatedDistribution, game: &SensingGame) -> Result<bool> {
    game.require_feasible()?;
    if q.k != game.num_players() {
        return Err(Error::InvalidParameter(
            "distribution and game sizes differ".into(),
        ));
    }
    let scale = game.scale().max(f64::MIN_POSITIVE);
    for i in 0..game.num_players() {
        for rec in [Action::Sense, Action::NotSense] {
            let mut gain = 0.0;
            let mut mass = 0.0;
            for p in game.profiles().filter(|p| p.action(i) == rec) {
                let w = q.prob(p);
                if w > 0.0 {
                    mass += w;
                    gain += w * (game.payoff(p, i) - game.payoff(p.flipped(i), i)) / scale;
                }
            }
            if mass > 0.0 && gain < -CE_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeCount {
    Unique,
    Three,
    Infinite,
}

impl fmt::Display for NeCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NeCount::Unique => "unique",
            NeCount::Three => "three",
            NeCount::Infinite => "infinite",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub count: NeCount,
    /// Sensing cost at which sensing against a non-sensing opponent stops
    /// paying, computed from the payoff table.
    pub threshold: f64,
    /// `(β* - γ*)/(1 - β*γ*)` with `γ* = γ*` of one leader and one follower.
    /// Equal to `threshold` at `N = 1`.
    pub closed_form_threshold: f64,
    pub pure: Vec<Profile>,
    pub constants: EquilibriumConstants,
}

fn require_two_players(cfg: &NetworkConfig) -> Result<()> {
    if cfg.num_users() != 2 {
        return Err(Error::Precondition(format!(
            "two players required, got {}",
            cfg.num_users()
        )));
    }
    Ok(())
}

/// Number of equilibria of the two-player game.
pub fn classify_2player(cfg: &NetworkConfig, f: &EfficiencyFunction) -> Result<Classification> {
    require_two_players(cfg)?;
    let game = build_sensing_game(cfg, f)?;
    let pure = pure_equilibria(&game)?;
    classify_game(cfg, f, &game, pure)
}

fn classify_game(
    cfg: &NetworkConfig,
    f: &EfficiencyFunction,
    game: &SensingGame,
    pure: Vec<Profile>,
) -> Result<Classification> {
    game.require_feasible()?;
    let scaled = game.rescaled();
    // player 0 against NS: NE value vs follower value
    let nash = scaled.payoff(Profile(0), 0);
    let follower = scaled.payoff(Profile(0).with(0, Action::Sense), 0);
    let count = if (follower - nash).abs() <= 1e-9 * nash {
        NeCount::Infinite
    } else if follower > nash {
        NeCount::Three
    } else {
        NeCount::Unique
    };
    let pre_cost = if cfg.alpha < 1.0 {
        follower / (1.0 - cfg.alpha)
    } else {
        role_utilities(cfg, f, 1)?.0 / cfg.weight(0)
    };
    let threshold = 1.0 - nash / pre_cost;
    let constants = EquilibriumConstants::new(f, cfg.spreading, 1, 1)?;
    let (b, g) = (constants.beta_star, constants.gamma_star_l);
    Ok(Classification {
        count,
        threshold,
        closed_form_threshold: (b - g) / (1.0 - b * g),
        pure,
        constants,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedEquilibrium {
    pub profile: MixedProfile,
    pub utilities: Vec<f64>,
    /// The symmetric NS probability from the `N = 1` closed form in terms of
    /// `β*`, `γ*` and `α`.
    pub closed_form: f64,
    /// Largest gap between `closed_form` and the computed probabilities.
    pub discrepancy: f64,
}

/// The strictly mixed equilibrium of a two-player game, from the
/// indifference conditions of the four payoff cells.
pub fn mixed_equilibrium_of(game: &SensingGame) -> Result<MixedProfile> {
    game.require_feasible()?;
    if game.num_players() != 2 {
        return Err(Error::Precondition("two players required".into()));
    }
    let mut probs = [0.0; 2];
    for (i, prob) in probs.iter_mut().enumerate() {
        // player i's mixture makes opponent j indifferent
        let j = 1 - i;
        let at = |ai: Action, aj: Action| game.payoff(Profile(0).with(i, ai).with(j, aj), j);
        let a = at(Action::NotSense, Action::NotSense);
        let b = at(Action::NotSense, Action::Sense);
        let c = at(Action::Sense, Action::NotSense);
        let d = at(Action::Sense, Action::Sense);
        // j: NS pays y·a + (1-y)·c, S pays y·b + (1-y)·d
        let denom = (c - d) + (b - a);
        let y = (c - d) / denom;
        if !(y > 0.0 && y < 1.0) || !denom.is_finite() {
            return Err(Error::Precondition("no strictly mixed equilibrium".into()));
        }
        *prob = y;
    }
    MixedProfile::new(probs.to_vec())
}

pub fn mixed_equilibrium(cfg: &NetworkConfig, f: &EfficiencyFunction) -> Result<MixedEquilibrium> {
    require_two_players(cfg)?;
    let game = build_sensing_game(cfg, f)?;
    let class = classify_game(cfg, f, &game, pure_equilibria(&game)?)?;
    if class.count != NeCount::Three {
        return Err(Error::Precondition(format!(
            "strictly mixed equilibrium needs three equilibria, game has {}",
            class.count
        )));
    }
    let profile = mixed_equilibrium_of(&game)?;
    let utilities = profile.expected_utilities(&game);

    let c = class.constants;
    let (b, g, a) = (c.beta_star, c.gamma_star_l, cfg.alpha);
    let rb = f.value(b) / b;
    let rg = f.value(g) / g;
    let numer = (1.0 - a) * rb * (1.0 - b) - rg * (1.0 - g * b) / (1.0 + b);
    let x = numer + rb * (1.0 - b) - (1.0 - a) * rb * (1.0 - g * b) / (1.0 + g);
    let closed_form = numer / x;
    let discrepancy = profile
        .ns_probs
        .iter()
        .fold(0.0f64, |m, p| m.max((p - closed_form).abs()));
    Ok(MixedEquilibrium {
        profile,
        utilities,
        closed_form,
        discrepancy,
    })
}

fn require_two_pure_equilibria(game: &SensingGame) -> Result<()> {
    if game.num_players() != 2 {
        return Err(Error::Precondition("two players required".into()));
    }
    let pure = pure_equilibria(game)?;
    let expected = [Profile(0b01), Profile(0b10)];
    if pure.len() != 2 || !expected.iter().all(|p| pure.contains(p)) {
        return Err(Error::Precondition(
            "the game must have exactly the two asymmetric pure equilibria".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatedPoint {
    pub lambda: f64,
    pub distribution: CorrelatedDistribution,
    pub utilities: Vec<f64>,
}

/// Mass `λ` on `(S, NS)` and `1 - λ` on `(NS, S)`.
pub fn correlated_segment(game: &SensingGame, lambda: f64) -> Result<CorrelatedPoint> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "λ must lie in [0, 1], got {lambda}"
        )));
    }
    require_two_pure_equilibria(game)?;
    let mut q = vec![0.0; 4];
    q[0b01] = lambda;
    q[0b10] = 1.0 - lambda;
    let distribution = CorrelatedDistribution::new(2, q)?;
    if !is_correlated_equilibrium(&distribution, game)? {
        return Err(Error::NoConvergence { residual: lambda });
    }
    let utilities = distribution.expected_utilities(game);
    Ok(CorrelatedPoint {
        lambda,
        distribution,
        utilities,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bargaining {
    pub lambda: f64,
    pub utilities: Vec<f64>,
    /// Disagreement point: the mixed-equilibrium utilities.
    pub disagreement: Vec<f64>,
}

/// Nash bargaining point on the correlated segment, with the mixed
/// equilibrium as disagreement point.
pub fn nash_bargaining(game: &SensingGame) -> Result<Bargaining> {
    require_two_pure_equilibria(game)?;
    let mixed = mixed_equilibrium_of(game)?;
    let d = mixed.expected_utilities(game);
    let at = |lambda: f64| -> Vec<f64> {
        (0..2)
            .map(|i| {
                lambda * game.payoff(Profile(0b01), i)
                    + (1.0 - lambda) * game.payoff(Profile(0b10), i)
            })
            .collect()
    };
    let nash_product = |lambda: f64| {
        let v = at(lambda);
        (v[0] - d[0]) * (v[1] - d[1])
    };

    // λ range where both players gain over d (each gain is affine in λ)
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for i in 0..2 {
        let g0 = at(0.0)[i] - d[i];
        let g1 = at(1.0)[i] - d[i];
        if g0 < 0.0 && g1 < 0.0 {
            lo = 1.0;
            hi = 0.0;
        } else if g0 < 0.0 {
            lo = lo.max(g0 / (g0 - g1));
        } else if g1 < 0.0 {
            hi = hi.min(g0 / (g0 - g1));
        }
    }
    let lambda = if lo > hi {
        if nash_product(1.0) >= nash_product(0.0) {
            1.0
        } else {
            0.0
        }
    } else {
        // the Nash product is a concave quadratic in λ on this range
        let (a0, a1) = (at(0.0)[0] - d[0], at(1.0)[0] - at(0.0)[0]);
        let (b0, b1) = (at(0.0)[1] - d[1], at(1.0)[1] - at(0.0)[1]);
        if a1 * b1 < 0.0 {
            (-(a0 * b1 + a1 * b0) / (2.0 * a1 * b1)).clamp(lo, hi)
        } else {
            golden_section_max(nash_product, lo, hi, 1e-12).0
        }
    };
    Ok(Bargaining {
        lambda,
        utilities: at(lambda),
        disagreement: d,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    /// Right-hand side of the "nobody else senses" condition.
    pub threshold_none_sense: f64,
    /// Right-hand side of the "somebody else senses" condition.
    pub threshold_some_sense: f64,
    pub none_sense_holds: bool,
    pub some_sense_holds: bool,
    /// The same bounds with the follower count shifted by one in the
    /// denominator and the utility ratio inverted. The second one always
    /// holds; kept for comparison only.
    pub uncorrected_thresholds: (f64, f64),
    /// When both conditions hold and `K` is small enough: whether all-NS is
    /// the unique pure equilibrium by enumeration.
    pub enumeration_confirms: Option<bool>,
}

impl DominanceReport {
    pub fn both_hold(&self) -> bool {
        self.none_sense_holds && self.some_sense_holds
    }
}

/// Sufficient conditions for `(NS, ..., NS)` to be the unique equilibrium,
/// evaluated with `γ*` of `K-1` leaders and one follower.
pub fn dominance_uniqueness_check(
    cfg: &NetworkConfig,
    f: &EfficiencyFunction,
) -> Result<DominanceReport> {
    cfg.validate()?;
    let k = cfg.num_users();
    if k < 2 {
        return Err(Error::Precondition("at least two players required".into()));
    }
    let c = EquilibriumConstants::new(f, cfg.spreading, k - 1, 1)?;
    let (b, g, n, kf) = (c.beta_star, c.gamma_star_l, cfg.n(), k as f64);
    let d = n * n - ((n + b) * (kf - 2.0) + b) * g;
    let threshold_none_sense = 1.0 - (n + g) * (n - (kf - 1.0) * b) / d;
    let ratio = (f.value(g) / g) * (n + g) / ((f.value(b) / b) * (n + b));
    let threshold_some_sense = 1.0 - ratio;

    let d_lit = n * n - n * b - ((n + b) * (kf - 1.0) + 2.0 * b) * g;
    let lit_none = 1.0 - (n + g) * (n - (kf - 1.0) * b) / d_lit;
    let lit_some = 1.0 - 1.0 / ratio;

    let none_sense_holds = cfg.alpha > threshold_none_sense;
    let some_sense_holds = cfg.alpha > threshold_some_sense;
    let enumeration_confirms = if none_sense_holds && some_sense_holds && k <= MAX_PLAYERS {
        let game = build_sensing_game(cfg, f)?;
        Some(pure_equilibria(&game)? == vec![Profile::ALL_NOT_SENSE])
    } else {
        None
    };
    Ok(DominanceReport {
        threshold_none_sense,
        threshold_some_sense,
        none_sense_holds,
        some_sense_holds,
        uncorrected_thresholds: (lit_none, lit_some),
        enumeration_confirms,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridEquilibrium {
    pub actions: [Action; 2],
    pub powers: [f64; 2],
    /// Grid-index distance from the grid point nearest each Nash power.
    pub index_offset: [usize; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridReport {
    /// Every `(S, p)` is weakly dominated by `(NS, p)`.
    pub sensing_dominated: bool,
    /// ...strictly, at every opponent action.
    pub sensing_strictly_dominated: bool,
    pub equilibria: Vec<HybridEquilibrium>,
    /// Allowed grid-index offset for an equilibrium to count as the Nash one.
    pub index_tolerance: usize,
    /// The discretized game's equilibria are all `(NS, ≈p^NE)`.
    pub unique_nash: bool,
    /// Continuous hybrid equilibrium utilities (the Nash ones).
    pub hybrid_utilities: [f64; 2],
    /// Utilities at each pure equilibrium of the two-phase sensing game.
    pub sensing_utilities: Vec<Vec<f64>>,
    /// Hybrid utilities never exceed the two-phase ones.
    pub braess: bool,
    pub braess_strict: bool,
}

/// Two-player game where each player picks sensing and power jointly,
/// discretized on `power_grid`.
pub fn hybrid_game_check(
    cfg: &NetworkConfig,
    f: &EfficiencyFunction,
    power_grid: &[f64],
) -> Result<HybridReport> {
    require_two_players(cfg)?;
    if power_grid.len() < 2
        || power_grid.iter().any(|p| !(*p > 0.0))
        || power_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidParameter(
            "power grid must be positive and strictly increasing".into(),
        ));
    }
    let ne = nash_powers(cfg, f)?;
    let (lo, hi) = (power_grid[0], power_grid[power_grid.len() - 1]);
    let mut nearest = [0usize; 2];
    for k in 0..2 {
        let p = ne.powers[k];
        if p < lo || p > hi {
            return Err(Error::GridTooCoarse { power: p });
        }
        nearest[k] = (0..power_grid.len())
            .min_by(|&a, &b| {
                (power_grid[a] / p)
                    .ln()
                    .abs()
                    .total_cmp(&(power_grid[b] / p).ln().abs())
            })
            .unwrap();
    }

    let m = power_grid.len();
    let utility = |k: usize, a: Action, own: f64, other: f64| {
        let mut powers = [0.0; 2];
        powers[k] = own;
        powers[1 - k] = other;
        let sinr = sinr_of(&powers, cfg)[k];
        let cost = if a == Action::Sense {
            1.0 - cfg.alpha
        } else {
            1.0
        };
        cost * cfg.rates[k] * f.value(sinr) / own
    };
    let actions = [Action::NotSense, Action::Sense];

    // u[k][own_action][own_idx][other_idx]; the opponent's sensing choice
    // does not enter the payoff
    let mut table = vec![vec![vec![vec![0.0; m]; m]; 2]; 2];
    let mut dominated = true;
    let mut strictly = true;
    for k in 0..2 {
        for (ai, &a) in actions.iter().enumerate() {
            for i in 0..m {
                for j in 0..m {
                    table[k][ai][i][j] = utility(k, a, power_grid[i], power_grid[j]);
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                let (ns, s) = (table[k][0][i][j], table[k][1][i][j]);
                dominated &= s <= ns;
                strictly &= s < ns;
            }
        }
    }

    let best: Vec<Vec<f64>> = (0..2)
        .map(|k| {
            (0..m)
                .map(|j| {
                    (0..2)
                        .flat_map(|ai| (0..m).map(move |i| (ai, i)))
                        .map(|(ai, i)| table[k][ai][i][j])
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        })
        .collect();
    let is_best = |k: usize, ai: usize, i: usize, j: usize| {
        table[k][ai][i][j] >= best[k][j] * (1.0 - DEVIATION_TOL)
    };
    let mut equilibria = Vec::new();
    for a0 in 0..2 {
        for i0 in 0..m {
            for a1 in 0..2 {
                for i1 in 0..m {
                    if is_best(0, a0, i0, i1) && is_best(1, a1, i1, i0) {
                        equilibria.push(HybridEquilibrium {
                            actions: [actions[a0], actions[a1]],
                            powers: [power_grid[i0], power_grid[i1]],
                            index_offset: [i0.abs_diff(nearest[0]), i1.abs_diff(nearest[1])],
                        });
                    }
                }
            }
        }
    }

    // log-slope of each best response at the NE is β*/N; discrete rounding
    // can shift the fixed point by about 1/(1 - β*/N) grid steps
    let beta = ne.constants.beta_star;
    let index_tolerance = (1.0 / (1.0 - beta / cfg.n())).ceil() as usize + 1;
    let unique_nash = !equilibria.is_empty()
        && equilibria.iter().all(|e| {
            e.actions == [Action::NotSense; 2]
                && e.index_offset.iter().all(|&o| o <= index_tolerance)
        });

    let hybrid_utilities = [ne.utilities[0], ne.utilities[1]];
    let game = build_sensing_game(cfg, f)?;
    let sensing_utilities: Vec<Vec<f64>> = pure_equilibria(&game)?
        .iter()
        .map(|p| game.payoffs(*p).to_vec())
        .collect();
    let braess = sensing_utilities
        .iter()
        .all(|u| (0..2).all(|k| hybrid_utilities[k] <= u[k] * (1.0 + DEVIATION_TOL)));
    let braess_strict = sensing_utilities
        .iter()
        .all(|u| (0..2).all(|k| hybrid_utilities[k] < u[k]));

    Ok(HybridReport {
        sensing_dominated: dominated,
        sensing_strictly_dominated: strictly,
        equilibria,
        index_tolerance,
        unique_nash,
        hybrid_utilities,
        sensing_utilities,
        braess,
        braess_strict,
    })
}

/// Log-spaced grid of `points` powers spanning `[p / spread, p · spread]`
/// around each Nash power, with the Nash powers inserted exactly.
pub fn hybrid_grid(
    cfg: &NetworkConfig,
    f: &EfficiencyFunction,
    points: usize,
    spread: f64,
) -> Result<Vec<f64>> {
    let ne = nash_powers(cfg, f)?;
    let p_min = ne.powers.iter().cloned().fold(f64::INFINITY, f64::min) / spread;
    let p_max = ne.powers.iter().cloned().fold(0.0, f64::max) * spread;
    let points = points.max(2);
    let mut grid: Vec<f64> = (0..points)
        .map(|i| p_min * (p_max / p_min).powf(i as f64 / (points - 1) as f64))
        .collect();
    grid.extend(ne.powers.iter());
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}
