//! The power-control game: Nash equilibrium without cognition and the
//! two-level Stackelberg equilibrium with `L` leaders and `F` followers.
//!
//! Interference is scaled by `1/N` (random CDMA with spreading factor `N`,
//! single-user decoding). Followers pay a sensing cost: their utility is
//! multiplied by `1 - α`.
//!
//! Powers are often handled in normalized form `q_k = g_k p_k / σ²`; all
//! equilibria in this module depend on the users only through that scaling.

use crate::efficiency::{beta_star, gamma_star, EfficiencyFunction, Sigmoid};
use crate::error::{Error, Result};
use crate::roots::golden_section_max;

/// Relative tolerance on recomputed equilibrium SINRs.
pub const SINR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Spreading factor; interference from user `j` is weighted by `1/N`.
    pub spreading: u32,
    /// Noise variance (W).
    pub sigma2: f64,
    /// Direct channel power gains `g_k`.
    pub gains: Vec<f64>,
    /// Transmission rates `R_k` (bit/s).
    pub rates: Vec<f64>,
    /// Power caps `P_k^max` (W). Reported, never enforced.
    pub p_max: Vec<f64>,
    /// Sensing cost fraction, common to all followers.
    pub alpha: f64,
    /// Block duration `T` (s).
    pub block_duration: f64,
    /// Minimum sensing energy `ξ_min` (J).
    pub xi_min: f64,
    /// `cross_gains[f][l]`: gain from leader `l` to follower `f`. Defaults to
    /// the leader's direct gain when absent.
    pub cross_gains: Option<Vec<Vec<f64>>>,
}

impl NetworkConfig {
    /// `K` identical users with `g = R = σ² = 1`, unbounded power caps,
    /// `T = 1` and `ξ_min = 0`.
    pub fn symmetric(k: usize, spreading: u32, alpha: f64) -> Self {
        Self {
            spreading,
            sigma2: 1.0,
            gains: vec![1.0; k],
            rates: vec![1.0; k],
            p_max: vec![f64::INFINITY; k],
            alpha,
            block_duration: 1.0,
            xi_min: 0.0,
            cross_gains: None,
        }
    }

    pub fn num_users(&self) -> usize {
        self.gains.len()
    }

    pub fn n(&self) -> f64 {
        self.spreading as f64
    }

    /// Weight `μ_k = R_k g_k / σ²` mapping normalized utilities to bit/J.
    pub fn weight(&self, k: usize) -> f64 {
        self.rates[k] * self.gains[k] / self.sigma2
    }

    pub fn cross_gain(&self, follower: usize, leader: usize) -> f64 {
        match &self.cross_gains {
            Some(m) => m[follower][leader],
            None => self.gains[leader],
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.num_users();
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if k == 0 {
            return bad("at least one user is required".into());
        }
        if self.spreading == 0 {
            return bad("N must be positive".into());
        }
        if self.rates.len() != k || self.p_max.len() != k {
            return bad(format!(
                "length mismatch: {k} gains, {} rates, {} power caps",
                self.rates.len(),
                self.p_max.len()
            ));
        }
        let positive = |v: f64| v > 0.0 && !v.is_nan();
        if !(positive(self.sigma2) && self.sigma2.is_finite()) {
            return bad(format!("σ² must be positive, got {}", self.sigma2));
        }
        for (name, v) in [("g", &self.gains), ("R", &self.rates)] {
            if let Some(x) = v.iter().find(|x| !(positive(**x) && x.is_finite())) {
                return bad(format!(
                    "{name} entries must be positive and finite, got {x}"
                ));
            }
        }
        if let Some(x) = self.p_max.iter().find(|x| !positive(**x)) {
            return bad(format!("P_max entries must be positive, got {x}"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("α must lie in [0, 1], got {}", self.alpha));
        }
        if !(positive(self.block_duration) && self.block_duration.is_finite()) {
            return bad(format!("T must be positive, got {}", self.block_duration));
        }
        if !(self.xi_min >= 0.0 && self.xi_min.is_finite()) {
            return bad(format!("ξ_min must be nonnegative, got {}", self.xi_min));
        }
        if let Some(m) = &self.cross_gains {
            if m.len() != k || m.iter().any(|row| row.len() != k) {
                return bad(format!("cross-gain matrix must be {k}×{k}"));
            }
            for (i, row) in m.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    if i != j && !(positive(x) && x.is_finite()) {
                        return bad(format!("cross gain ({i},{j}) must be positive, got {x}"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Leader,
    Follower,
}

/// Split of the users into leaders (non-cognitive) and followers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RolePartition {
    leaders: Vec<usize>,
    followers: Vec<usize>,
}

impl RolePartition {
    /// Leaders are the given indices; every other user of `0..k` follows.
    pub fn new(mut leaders: Vec<usize>, k: usize) -> Result<Self> {
        leaders.sort_unstable();
        leaders.dedup();
        if let Some(&bad) = leaders.iter().find(|&&i| i >= k) {
            return Err(Error::InvalidParameter(format!(
                "leader index {bad} out of range for K = {k}"
            )));
        }
        let followers = (0..k)
            .filter(|i| leaders.binary_search(i).is_err())
            .collect();
        Ok(Self { leaders, followers })
    }

    /// Users `0..l` lead, the rest follow.
    pub fn first_leaders(l: usize, k: usize) -> Result<Self> {
        if l > k {
            return Err(Error::InvalidParameter(format!("L = {l} exceeds K = {k}")));
        }
        Self::new((0..l).collect(), k)
    }

    pub fn leaders(&self) -> &[usize] {
        &self.leaders
    }

    pub fn followers(&self) -> &[usize] {
        &self.followers
    }

    pub fn num_users(&self) -> usize {
        self.leaders.len() + self.followers.len()
    }

    pub fn role(&self, k: usize) -> Role {
        if self.leaders.binary_search(&k).is_ok() {
            Role::Leader
        } else {
            Role::Follower
        }
    }
}

/// Calibration scalars of an equilibrium with `L` leaders and `F` followers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumConstants {
    pub beta_star: f64,
    pub gamma_star_l: f64,
    pub eps_l: f64,
    /// `D / N` where `D` is the common denominator of the equilibrium powers.
    pub a_l: f64,
}

impl EquilibriumConstants {
    /// Constants for `leaders` leaders and `followers` followers. With no
    /// followers this is the Nash equilibrium (`ε = 0`, `γ* = β*`).
    pub fn new(
        f: &EfficiencyFunction,
        spreading: u32,
        leaders: usize,
        followers: usize,
    ) -> Result<Self> {
        let beta = beta_star(f)?;
        Self::with_beta(f, beta, spreading, leaders, followers)
    }

    fn with_beta(
        f: &EfficiencyFunction,
        beta: f64,
        spreading: u32,
        leaders: usize,
        followers: usize,
    ) -> Result<Self> {
        let n = spreading as f64;
        let eps = epsilon_l(spreading, followers, beta).map_err(|e| match e {
            Error::NonpositiveDenominator { denominator, .. } => Error::InfeasibleHierarchy {
                leaders,
                followers,
                reason: format!("ε_L denominator {denominator:e} is not positive"),
            },
            other => other,
        })?;
        let gamma = gamma_star(f, eps).map_err(|e| match e {
            Error::NoGammaRoot { .. } => Error::InfeasibleHierarchy {
                leaders,
                followers,
                reason: format!("no γ* root for ε_L = {eps:e}"),
            },
            other => other,
        })?;
        let d = common_denominator(n, leaders as f64, followers as f64, beta, gamma);
        Ok(Self {
            beta_star: beta,
            gamma_star_l: gamma,
            eps_l: eps,
            a_l: d / n,
        })
    }
}

/// `D = N² - N(F-1)β* - [(N+β*)(L-1) + Fβ*] γ*`.
fn common_denominator(n: f64, l: f64, f: f64, beta: f64, gamma: f64) -> f64 {
    n * n - n * (f - 1.0) * beta - ((n + beta) * (l - 1.0) + f * beta) * gamma
}

/// `ε_L = Fβ* / (N² - N(F-1)β*)`.
pub fn epsilon_l(spreading: u32, followers: usize, beta: f64) -> Result<f64> {
    if followers == 0 {
        return Ok(0.0);
    }
    let n = spreading as f64;
    let f = followers as f64;
    let denominator = n * n - n * (f - 1.0) * beta;
    if !(denominator > 0.0) {
        return Err(Error::NonpositiveDenominator {
            followers,
            denominator,
        });
    }
    Ok(f * beta / denominator)
}

/// `γ_k = g_k p_k / (σ² + (1/N) Σ_{j≠k} g_j p_j)`.
pub fn sinr_of(powers: &[f64], cfg: &NetworkConfig) -> Vec<f64> {
    let received: Vec<f64> = powers.iter().zip(&cfg.gains).map(|(p, g)| p * g).collect();
    let total: f64 = received.iter().sum();
    let n = cfg.n();
    received
        .iter()
        .map(|&r| r / (cfg.sigma2 + (total - r) / n))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Nash,
    Stackelberg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub kind: EquilibriumKind,
    pub roles: Vec<Role>,
    pub powers: Vec<f64>,
    pub sinrs: Vec<f64>,
    /// Utilities in bit/J, followers' already scaled by `1 - α`.
    pub utilities: Vec<f64>,
    /// True when every power respects its cap.
    pub feasible: bool,
    pub power_cap_hit: Vec<bool>,
    pub constants: EquilibriumConstants,
}

impl EquilibriumReport {
    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn welfare(&self) -> f64 {
        self.utilities.iter().sum()
    }

    fn assemble(
        cfg: &NetworkConfig,
        f: &EfficiencyFunction,
        kind: EquilibriumKind,
        roles: Vec<Role>,
        normalized: Vec<f64>,
        targets: Vec<f64>,
        constants: EquilibriumConstants,
    ) -> Result<Self> {
        let powers: Vec<f64> = normalized
            .iter()
            .zip(&cfg.gains)
            .map(|(q, g)| cfg.sigma2 / g * q)
            .collect();
        let sinrs = sinr_of(&powers, cfg);
        for (s, t) in sinrs.iter().zip(&targets) {
            if !((s - t).abs() <= SINR_TOL * t) {
                return Err(Error::NoConvergence {
                    residual: (s - t).abs() / t,
                });
            }
        }
        let utilities = (0..powers.len())
            .map(|k| {
                let cost = match roles[k] {
                    Role::Leader => 1.0,
                    Role::Follower => 1.0 - cfg.alpha,
                };
                cost * cfg.rates[k] * f.value(sinrs[k]) / powers[k]
            })
            .collect();
        let power_cap_hit: Vec<bool> = powers.iter().zip(&cfg.p_max).map(|(p, m)| p > m).collect();
        Ok(Self {
            kind,
            roles,
            feasible: !power_cap_hit.iter().any(|&b| b),
            powers,
            sinrs,
            utilities,
            power_cap_hit,
            constants,
        })
    }
}

/// The unique Nash equilibrium: every user at SINR `β*`,
/// `p_k = (σ²/g_k) β* / (1 - (K-1)β*/N)`.
pub fn nash_powers(cfg: &NetworkConfig, f: &EfficiencyFunction) -> Result<EquilibriumReport> {
    cfg.validate()?;
    let k = cfg.num_users();
    let beta = beta_star(f)?;
    let n = cfg.n();
    let load = (k as f64 - 1.0) * beta / n;
    if !(load < 1.0) {
        return Err(Error::InfeasibleLoad { load });
    }
    let q = beta / (1.0 - load);
    let constants = EquilibriumConstants {
        beta_star: beta,
        gamma_star_l: beta,
        eps_l: 0.0,
        a_l: common_denominator(n, k as f64, 0.0, beta, beta) / n,
    };
    EquilibriumReport::assemble(
        cfg,
        f,
        EquilibriumKind::Nash,
        vec![Role::Leader; k],
        vec![q; k],
        vec![beta; k],
        constants,
    )
}

/// Normalized leader and follower powers `(q_L, q_F)` at the Stackelberg
/// equilibrium.
fn stackelberg_normalized(
    n: f64,
    l: usize,
    fc: usize,
    c: &EquilibriumConstants,
) -> Result<(f64, f64)> {
    let (beta, gamma) = (c.beta_star, c.gamma_star_l);
    let d = common_denominator(n, l as f64, fc as f64, beta, gamma);
    if !(d > 0.0) {
        return Err(Error::InfeasibleHierarchy {
            leaders: l,
            followers: fc,
            reason: format!("common denominator D = {d:e} is not positive"),
        });
    }
    Ok((n * gamma * (n + beta) / d, n * beta * (n + gamma) / d))
}

/// The Stackelberg equilibrium with the given leaders: leaders at SINR
/// `γ*_L`, followers at `β*`.
pub fn stackelberg_powers(
    cfg: &NetworkConfig,
    partition: &RolePartition,
    f: &EfficiencyFunction,
) -> Result<EquilibriumReport> {
    cfg.validate()?;
    let k = cfg.num_users();
    if partition.num_users() != k {
        return Err(Error::InvalidParameter(format!(
            "partition covers {} users, configuration has {k}",
            partition.num_users()
        )));
    }
    let (l, fc) = (partition.leaders().len(), partition.followers().len());
    if l == 0 || fc == 0 {
        return Err(Error::Precondition(format!(
            "a Stackelberg equilibrium needs L ≥ 1 and F ≥ 1 (got L = {l}, F = {fc})"
        )));
    }
    let constants = EquilibriumConstants::new(f, cfg.spreading, l, fc)?;
    let (q_lead, q_follow) = stackelberg_normalized(cfg.n(), l, fc, &constants)?;
    let roles: Vec<Role> = (0..k).map(|i| partition.role(i)).collect();
    let normalized = roles
        .iter()
        .map(|r| match r {
            Role::Leader => q_lead,
            Role::Follower => q_follow,
        })
        .collect();
    let targets = roles
        .iter()
        .map(|r| match r {
            Role::Leader => constants.gamma_star_l,
            Role::Follower => constants.beta_star,
        })
        .collect();
    EquilibriumReport::assemble(
        cfg,
        f,
        EquilibriumKind::Stackelberg,
        roles,
        normalized,
        targets,
        constants,
    )
}

/// Nash equilibrium when the partition has no followers, Stackelberg
/// otherwise.
pub fn equilibrium(
    cfg: &NetworkConfig,
    partition: &RolePartition,
    f: &EfficiencyFunction,
) -> Result<EquilibriumReport> {
    if partition.followers().is_empty() {
        nash_powers(cfg, f)
    } else {
        stackelberg_powers(cfg, partition, f)
    }
}

/// Uniqueness conditions for the Stackelberg equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    /// `lim_{x→0+} f''(x)/f'(x)`.
    pub curvature_limit: f64,
    /// The limit exceeds `2ε`.
    pub curvature_condition: bool,
    /// Sign changes of the `γ*` residual over the scan of `(0, β*)`.
    pub sign_changes: usize,
    pub single_root: bool,
}

impl UniquenessReport {
    pub fn unique(&self) -> bool {
        self.curvature_condition && self.single_root
    }
}

/// Number of geometric scan points on `(10⁻⁶ β*, β*)`.
pub const UNIQUENESS_SCAN_POINTS: usize = 10_000;

pub fn se_uniqueness_check(f: &EfficiencyFunction, eps: f64) -> Result<UniquenessReport> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "ε must be nonnegative, got {eps}"
        )));
    }
    let beta = beta_star(f)?;
    let curvature_limit = f.curvature_limit_at_zero();
    let n = UNIQUENESS_SCAN_POINTS;
    let mut changes = 0;
    let mut last = 0.0;
    for i in 0..n {
        let x = beta * 1e-6f64.powf(1.0 - i as f64 / n as f64);
        let r = crate::efficiency::gamma_residual(f, eps, x);
        if r == 0.0 || r.is_nan() {
            continue;
        }
        if last != 0.0 && r.signum() != last {
            changes += 1;
        }
        last = r.signum();
    }
    // at ε = 0 the only root is β* itself, on the boundary
    let single_root = if eps == 0.0 { true } else { changes == 1 };
    Ok(UniquenessReport {
        curvature_limit,
        curvature_condition: curvature_limit > 2.0 * eps,
        sign_changes: changes,
        single_root,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoReport {
    /// `u_k^SE / u_k^NE` per user.
    pub ratios: Vec<f64>,
    pub roles: Vec<Role>,
    pub leaders_dominate: bool,
    pub all_dominate: bool,
    pub alpha: f64,
}

impl ParetoReport {
    /// Leaders always gain; with free sensing everybody does.
    pub fn holds(&self) -> bool {
        self.leaders_dominate && (self.alpha > 0.0 || self.all_dominate)
    }
}

pub fn pareto_dominance_check(
    cfg: &NetworkConfig,
    partition: &RolePartition,
    f: &EfficiencyFunction,
) -> Result<ParetoReport> {
    let ne = nash_powers(cfg, f)?;
    let se = stackelberg_powers(cfg, partition, f)?;
    let ratios: Vec<f64> = se
        .utilities
        .iter()
        .zip(&ne.utilities)
        .map(|(s, n)| s / n)
        .collect();
    let ok = |r: f64| r >= 1.0 - 1e-12;
    let leaders_dominate = partition.leaders().iter().all(|&i| ok(ratios[i]));
    let all_dominate = ratios.iter().all(|&r| ok(r));
    Ok(ParetoReport {
        ratios,
        roles: se.roles,
        leaders_dominate,
        all_dominate,
        alpha: cfg.alpha,
    })
}

/// Follow-versus-lead bound on the sensing energy threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingThreshold {
    /// Bound using cross gains `g_{fℓ}` (used for the decision).
    pub bound: f64,
    /// Same bound with the follower's direct gain `g_f` in place of `g_{fℓ}`.
    pub bound_direct_gain: f64,
    /// `ξ_min / (T min_ℓ g_{fℓ} p_ℓ)`: the smallest sensing cost meeting the
    /// energy threshold.
    pub min_alpha: f64,
    /// `ξ_min ≤ bound`.
    pub follower_preferred: bool,
}

pub fn sensing_threshold(
    cfg: &NetworkConfig,
    partition: &RolePartition,
    f: &EfficiencyFunction,
    follower: usize,
) -> Result<SensingThreshold> {
    if partition.role(follower) != Role::Follower || follower >= cfg.num_users() {
        return Err(Error::InvalidParameter(format!(
            "user {follower} is not a follower"
        )));
    }
    let se = stackelberg_powers(cfg, partition, f)?;
    let c = se.constants;
    let (beta, gamma, n) = (c.beta_star, c.gamma_star_l, cfg.n());
    let bracket =
        1.0 - (f.value(gamma) / gamma) / (f.value(beta) / beta) * (n + gamma) / (n + beta);
    let min_over_leaders = |gain: &dyn Fn(usize) -> f64| {
        partition
            .leaders()
            .iter()
            .map(|&l| gain(l) * se.powers[l])
            .fold(f64::INFINITY, f64::min)
    };
    let sensed = min_over_leaders(&|l| cfg.cross_gain(follower, l));
    let sensed_direct = min_over_leaders(&|_| cfg.gains[follower]);
    let bound = bracket * cfg.block_duration * sensed;
    Ok(SensingThreshold {
        bound,
        bound_direct_gain: bracket * cfg.block_duration * sensed_direct,
        min_alpha: cfg.xi_min / (cfg.block_duration * sensed),
        follower_preferred: cfg.xi_min <= bound,
    })
}

/// Utility of user `k` when it deviates to power `p`, everything else as in
/// `report` except that, for a leader, followers re-equilibrate (each at
/// SINR `β*`) against the new leader powers.
pub fn deviation_utility(
    cfg: &NetworkConfig,
    f: &EfficiencyFunction,
    report: &EquilibriumReport,
    k: usize,
    p: f64,
) -> f64 {
    let mut powers = report.powers.clone();
    powers[k] = p;
    let followers: Vec<usize> = (0..powers.len())
        .filter(|&i| report.roles[i] == Role::Follower)
        .collect();
    if report.roles[k] == Role::Leader && !followers.is_empty() {
        // followers share normalized power q_F = β(N + I_L)/(N - (F-1)β)
        let n = cfg.n();
        let beta = report.constants.beta_star;
        let leader_interference: f64 = (0..powers.len())
            .filter(|&i| report.roles[i] == Role::Leader)
            .map(|i| cfg.gains[i] * powers[i] / cfg.sigma2)
            .sum();
        let fc = followers.len() as f64;
        let q_f = beta * (n + leader_interference) / (n - (fc - 1.0) * beta);
        for &i in &followers {
            powers[i] = cfg.sigma2 / cfg.gains[i] * q_f;
        }
    }
    if p <= 0.0 {
        return 0.0;
    }
    let sinr = sinr_of(&powers, cfg)[k];
    let cost = match report.roles[k] {
        Role::Leader => 1.0,
        Role::Follower => 1.0 - cfg.alpha,
    };
    cost * cfg.rates[k] * f.value(sinr) / p
}

/// Largest relative utility improvement any user finds by a 1-D
/// golden-section search over its own power on `[0, P_max]` (capped at a
/// large multiple of the equilibrium power when `P_max` is unbounded).
pub fn best_response_gap(
    cfg: &NetworkConfig,
    f: &EfficiencyFunction,
    report: &EquilibriumReport,
) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..report.powers.len() {
        let upper = cfg.p_max[k].min(1e3 * report.powers[k]);
        // search in log-power so the tolerance is relative
        let h = |t: f64| deviation_utility(cfg, f, report, k, t.exp());
        let lo = (report.powers[k] * 1e-6).ln();
        let (_, best) = golden_section_max(h, lo, upper.ln(), 1e-8);
        let u = report.utilities[k];
        worst = worst.max((best - u) / u);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn pair_f() -> EfficiencyFunction {
        EfficiencyFunction::from_spectral_efficiency(0.9).unwrap()
    }

    #[test]
    fn sinr_examples() {
        let cfg = NetworkConfig::symmetric(3, 4, 0.0);
        assert_eq!(sinr_of(&[0.0; 3], &cfg), vec![0.0; 3]);

        let mut one = NetworkConfig::symmetric(1, 7, 0.0);
        one.gains = vec![3.0];
        assert_eq!(sinr_of(&[2.0], &one), vec![6.0]);

        let two = NetworkConfig::symmetric(2, 1, 0.0);
        assert_eq!(sinr_of(&[1.0, 1.0], &two), vec![0.5, 0.5]);
    }

    #[test]
    fn nash_two_users() {
        let f = EfficiencyFunction::exp_outage(0.86607).unwrap();
        let cfg = NetworkConfig::symmetric(2, 1, 0.0);
        let ne = nash_powers(&cfg, &f).unwrap();
        let expected = 0.86607 / (1.0 - 0.86607);
        for p in &ne.powers {
            assert!(rel(*p, expected) < 1e-12);
            assert!((p - 6.4663).abs() < 1e-3);
        }
        // fixed point of myopic best responses: each one targets β* against the other
        let br = |other: f64| 0.86607 * (1.0 + other);
        assert!(rel(br(ne.powers[1]), ne.powers[0]) < 1e-12);
        assert!(best_response_gap(&cfg, &f, &ne) <= 1e-6);
    }

    #[test]
    fn nash_load_limit() {
        let f = EfficiencyFunction::exp_outage(7.0).unwrap();
        assert!(nash_powers(&NetworkConfig::symmetric(18, 128, 0.0), &f).is_ok());
        assert!(nash_powers(&NetworkConfig::symmetric(19, 128, 0.0), &f).is_ok());
        let err = nash_powers(&NetworkConfig::symmetric(20, 128, 0.0), &f).unwrap_err();
        match err {
            Error::InfeasibleLoad { load } => assert!((load - 19.0 * 7.0 / 128.0).abs() < 1e-12),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn nash_sinrs_equal_beta() {
        let f = EfficiencyFunction::goodman(3).unwrap();
        let mut cfg = NetworkConfig::symmetric(4, 16, 0.0);
        cfg.gains = vec![0.5, 1.0, 2.0, 3.0];
        let ne = nash_powers(&cfg, &f).unwrap();
        let beta = beta_star(&f).unwrap();
        for s in sinr_of(&ne.powers, &cfg) {
            assert!(rel(s, beta) < 1e-10);
        }
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon_l(128, 0, 7.0).unwrap(), 0.0);
        assert!(rel(epsilon_l(1, 1, 0.86607).unwrap(), 0.86607) < 1e-15);
        // 12·7 / (128² - 128·11·7)
        let expected = 84.0 / (16384.0 - 9856.0);
        assert!(rel(epsilon_l(128, 12, 7.0).unwrap(), expected) < 1e-15);
        assert!((expected - 0.0128676).abs() < 1e-7);
        assert!(matches!(
            epsilon_l(1, 3, 0.9),
            Err(Error::NonpositiveDenominator { .. })
        ));
    }

    #[test]
    fn stackelberg_two_users() {
        let f = EfficiencyFunction::exp_outage(0.86607).unwrap();
        let cfg = NetworkConfig::symmetric(2, 1, 0.0);
        let part = RolePartition::new(vec![0], 2).unwrap();
        let se = stackelberg_powers(&cfg, &part, &f).unwrap();
        let b = 0.86607;
        let g = b / (1.0 + b * b);
        assert!(rel(se.constants.gamma_star_l, g) < 1e-12);
        assert!(rel(se.powers[0], g * (1.0 + b) / (1.0 - b * g)) < 1e-12);
        assert!(rel(se.powers[1], b * (1.0 + g) / (1.0 - b * g)) < 1e-12);
        let s = sinr_of(&se.powers, &cfg);
        assert!(rel(s[0], g) < 1e-10);
        assert!(rel(s[1], b) < 1e-10);
        assert!(best_response_gap(&cfg, &f, &se) <= 1e-6);
    }

    #[test]
    fn stackelberg_requires_both_roles() {
        let f = EfficiencyFunction::exp_outage(1.0).unwrap();
        let cfg = NetworkConfig::symmetric(3, 8, 0.0);
        for l in [0, 3] {
            let part = RolePartition::first_leaders(l, 3).unwrap();
            assert!(matches!(
                stackelberg_powers(&cfg, &part, &f),
                Err(Error::Precondition(_))
            ));
        }
    }

    #[test]
    fn stackelberg_approaches_nash_for_large_n() {
        let f = EfficiencyFunction::exp_outage(0.86607).unwrap();
        let cfg = NetworkConfig::symmetric(2, 1_000_000, 0.0);
        let part = RolePartition::first_leaders(1, 2).unwrap();
        let se = stackelberg_powers(&cfg, &part, &f).unwrap();
        let ne = nash_powers(&cfg, &f).unwrap();
        for (s, n) in se.powers.iter().zip(&ne.powers) {
            assert!(rel(*s, *n) < 1e-3);
        }
    }

    #[test]
    fn infeasible_hierarchy_reported() {
        let f = EfficiencyFunction::exp_outage(7.0).unwrap();
        let cfg = NetworkConfig::symmetric(40, 128, 0.0);
        let part = RolePartition::first_leaders(1, 40).unwrap();
        assert!(matches!(
            stackelberg_powers(&cfg, &part, &f),
            Err(Error::InfeasibleHierarchy { .. })
        ));
    }

    #[test]
    fn uniqueness_examples() {
        let f = EfficiencyFunction::exp_outage(7.0).unwrap();
        let r = se_uniqueness_check(&f, 0.01).unwrap();
        assert!(r.curvature_condition && r.single_root && r.unique());
        let r = se_uniqueness_check(&f, 0.0).unwrap();
        assert!(r.unique());

        let g = EfficiencyFunction::goodman(2).unwrap();
        assert!(se_uniqueness_check(&g, 0.05).unwrap().unique());
        // the root is pushed below the scanned interval
        let r = se_uniqueness_check(&g, 1e7).unwrap();
        assert_eq!(r.sign_changes, 0);
        assert!(!r.single_root);
    }

    #[test]
    fn pareto_examples() {
        let f = EfficiencyFunction::exp_outage(7.0).unwrap();
        let part = RolePartition::first_leaders(5, 17).unwrap();
        let r = pareto_dominance_check(&NetworkConfig::symmetric(17, 128, 0.0), &part, &f).unwrap();
        assert!(r.all_dominate && r.holds());

        let r = pareto_dominance_check(&NetworkConfig::symmetric(17, 128, 1.0), &part, &f).unwrap();
        assert!(r.leaders_dominate);
        for &i in part.followers() {
            assert_eq!(r.ratios[i], 0.0);
        }
        assert!(r.holds());
    }

    #[test]
    fn sensing_threshold_examples() {
        let f = pair_f();
        let part = RolePartition::first_leaders(1, 2).unwrap();
        let mut cfg = NetworkConfig::symmetric(2, 1, 0.0);
        let t = sensing_threshold(&cfg, &part, &f, 1).unwrap();
        assert!(t.bound > 0.0);
        assert!(t.follower_preferred);
        assert_eq!(t.bound, t.bound_direct_gain);

        // direct comparison: follower utility at the minimal sensing cost
        // against the utility the same user would get as a leader
        let se = stackelberg_powers(&cfg, &part, &f).unwrap();
        let c = se.constants;
        let q_l = c.gamma_star_l * (1.0 + c.beta_star) / (1.0 - c.beta_star * c.gamma_star_l);
        let as_leader = f.value(c.gamma_star_l) / q_l;
        for xi in [0.2 * t.bound, 0.9 * t.bound, 1.1 * t.bound, 3.0 * t.bound] {
            cfg.xi_min = xi;
            let t = sensing_threshold(&cfg, &part, &f, 1).unwrap();
            let as_follower = (1.0 - t.min_alpha) * f.value(c.beta_star) / se.powers[1];
            assert_eq!(t.follower_preferred, as_follower >= as_leader, "ξ = {xi}");
        }

        assert!(sensing_threshold(&cfg, &part, &f, 0).is_err());
    }

    #[test]
    fn sensing_threshold_vanishes_without_hierarchy_effect() {
        // N huge: ε → 0, γ* → β*, bracket → 0
        let f = pair_f();
        let part = RolePartition::first_leaders(1, 2).unwrap();
        let cfg = NetworkConfig::symmetric(2, 1_000_000, 0.0);
        let t = sensing_threshold(&cfg, &part, &f, 1).unwrap();
        assert!(t.bound.abs() < 1e-5);
    }

    #[test]
    fn cross_gains_enter_bound() {
        let f = pair_f();
        let part = RolePartition::first_leaders(1, 2).unwrap();
        let mut cfg = NetworkConfig::symmetric(2, 1, 0.0);
        let base = sensing_threshold(&cfg, &part, &f, 1).unwrap().bound;
        cfg.cross_gains = Some(vec![vec![0.0, 1.0], vec![0.25, 0.0]]);
        let t = sensing_threshold(&cfg, &part, &f, 1).unwrap();
        assert!(rel(t.bound, 0.25 * base) < 1e-12);
        assert!(rel(t.bound_direct_gain, base) < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut cfg = NetworkConfig::symmetric(2, 1, 0.0);
        cfg.alpha = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = NetworkConfig::symmetric(2, 1, 0.0);
        cfg.gains[0] = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = NetworkConfig::symmetric(2, 1, 0.0);
        cfg.rates.pop();
        assert!(cfg.validate().is_err());
        let mut cfg = NetworkConfig::symmetric(2, 1, 0.0);
        cfg.cross_gains = Some(vec![vec![1.0]]);
        assert!(cfg.validate().is_err());
    }
}
