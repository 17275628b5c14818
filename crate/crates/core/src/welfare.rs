//! Sum utility (social welfare) as a function of the number of leaders.
//!
//! Leaders are always the first `L` users; `L = K` is the Nash equilibrium.

use crate::efficiency::{beta_star, EfficiencyFunction, Sigmoid};
use crate::error::{Error, Result};
use crate::hierarchy::{
    equilibrium, nash_powers, EquilibriumConstants, EquilibriumReport, NetworkConfig, RolePartition,
};

/// Default offset of the high-load branch of the leader-count approximation.
pub const DEFAULT_KAPPA: f64 = 0.5;

fn equilibrium_with_leaders(
    cfg: &NetworkConfig,
    l: usize,
    f: &EfficiencyFunction,
) -> Result<EquilibriumReport> {
    let k = cfg.num_users();
    if l == 0 || l > k {
        return Err(Error::InvalidParameter(format!(
            "L must lie in 1..={k}, got {l}"
        )));
    }
    equilibrium(cfg, &RolePartition::first_leaders(l, k)?, f)
}

/// Sum of equilibrium utilities with `l` leaders (`l = K` is the NE).
pub fn social_welfare(cfg: &NetworkConfig, l: usize, f: &EfficiencyFunction) -> Result<f64> {
    Ok(equilibrium_with_leaders(cfg, l, f)?.welfare())
}

/// Total transmit power at the equilibrium with `l` leaders.
pub fn total_power(cfg: &NetworkConfig, l: usize, f: &EfficiencyFunction) -> Result<f64> {
    Ok(equilibrium_with_leaders(cfg, l, f)?.total_power())
}

fn is_symmetric(cfg: &NetworkConfig) -> bool {
    let same = |v: &[f64]| v.iter().all(|x| (x - v[0]).abs() <= 1e-12 * v[0].abs());
    same(&cfg.gains) && same(&cfg.rates)
}

/// Closed-form welfare for identical users:
/// `R g a_L / σ² · [L f(γ*)/(γ*(N+β*)) + (1-α)(K-L) f(β*)/(β*(N+γ*))]`.
pub fn social_welfare_symmetric(
    cfg: &NetworkConfig,
    l: usize,
    f: &EfficiencyFunction,
) -> Result<f64> {
    cfg.validate()?;
    if !is_symmetric(cfg) {
        return Err(Error::AssumptionViolated(
            "closed-form welfare needs identical gains and rates".into(),
        ));
    }
    let k = cfg.num_users();
    if l == 0 || l > k {
        return Err(Error::InvalidParameter(format!(
            "L must lie in 1..={k}, got {l}"
        )));
    }
    if l == k {
        // a_L of the NE must stay positive: same load condition as nash_powers
        nash_powers(cfg, f)?;
    }
    let c = EquilibriumConstants::new(f, cfg.spreading, l, k - l)?;
    if !(c.a_l > 0.0) {
        return Err(Error::InfeasibleHierarchy {
            leaders: l,
            followers: k - l,
            reason: format!("a_L = {:e} is not positive", c.a_l),
        });
    }
    Ok(symmetric_welfare_value(
        cfg.n(),
        k as f64,
        l as f64,
        cfg.alpha,
        cfg.weight(0),
        f,
        &c,
    ))
}

fn symmetric_welfare_value(
    n: f64,
    k: f64,
    l: f64,
    alpha: f64,
    weight: f64,
    f: &EfficiencyFunction,
    c: &EquilibriumConstants,
) -> f64 {
    let (b, g) = (c.beta_star, c.gamma_star_l);
    weight
        * c.a_l
        * (l * f.value(g) / (g * (n + b)) + (1.0 - alpha) * (k - l) * f.value(b) / (b * (n + g)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WelfareSweepRow {
    pub leaders: usize,
    pub followers: usize,
    /// Sum utility `w_L` (bit/J); NaN when infeasible.
    pub welfare: f64,
    pub welfare_ne: f64,
    /// `100 (w_L - w_NE) / w_NE`.
    pub gain_pct: f64,
    pub total_power: f64,
    pub feasible: bool,
}

/// Evaluates every `L` in `1..=K` and returns the welfare-maximizing one.
/// Ties go to the smaller `L`; infeasible rows are kept but never chosen.
pub fn optimal_leaders_exact(
    cfg: &NetworkConfig,
    f: &EfficiencyFunction,
) -> Result<(usize, Vec<WelfareSweepRow>)> {
    let ne = nash_powers(cfg, f)?;
    let w_ne = ne.welfare();
    let k = cfg.num_users();
    let rows: Vec<WelfareSweepRow> = (1..=k)
        .map(|l| match equilibrium_with_leaders(cfg, l, f) {
            Ok(eq) => {
                let w = eq.welfare();
                WelfareSweepRow {
                    leaders: l,
                    followers: k - l,
                    welfare: w,
                    welfare_ne: w_ne,
                    gain_pct: 100.0 * (w - w_ne) / w_ne,
                    total_power: eq.total_power(),
                    feasible: true,
                }
            }
            Err(_) => WelfareSweepRow {
                leaders: l,
                followers: k - l,
                welfare: f64::NAN,
                welfare_ne: w_ne,
                gain_pct: f64::NAN,
                total_power: f64::NAN,
                feasible: false,
            },
        })
        .collect();
    let mut best = k;
    let mut best_w = f64::NEG_INFINITY;
    for row in rows.iter().filter(|r| r.feasible) {
        if row.welfare > best_w {
            best_w = row.welfare;
            best = row.leaders;
        }
    }
    Ok((best, rows))
}

/// Per-role utility change relative to the NE, in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleGainRow {
    pub leaders: usize,
    pub followers: usize,
    /// Gain of the first leader.
    pub leader_gain_pct: f64,
    /// Gain of the first follower; `None` at `L = K`.
    pub follower_gain_pct: Option<f64>,
    pub sum_gain_pct: f64,
    pub feasible: bool,
}

pub fn role_gains(cfg: &NetworkConfig, f: &EfficiencyFunction) -> Result<Vec<RoleGainRow>> {
    let ne = nash_powers(cfg, f)?;
    let k = cfg.num_users();
    let pct = |a: f64, b: f64| 100.0 * (a - b) / b;
    Ok((1..=k)
        .map(|l| match equilibrium_with_leaders(cfg, l, f) {
            Ok(eq) => RoleGainRow {
                leaders: l,
                followers: k - l,
                leader_gain_pct: pct(eq.utilities[0], ne.utilities[0]),
                follower_gain_pct: (l < k).then(|| pct(eq.utilities[l], ne.utilities[l])),
                sum_gain_pct: pct(eq.welfare(), ne.welfare()),
                feasible: true,
            },
            Err(_) => RoleGainRow {
                leaders: l,
                followers: k - l,
                leader_gain_pct: f64::NAN,
                follower_gain_pct: None,
                sum_gain_pct: f64::NAN,
                feasible: false,
            },
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxRegime {
    /// `(K-1)/N ≤ 1/c`: interior square-root formula.
    LowLoad,
    /// `(K-1)/N > 1/c`: `λ̃* = K - κ`.
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxLeaderCount {
    pub lambda_star: f64,
    pub leaders: usize,
    pub kappa: f64,
    pub regime: ApproxRegime,
}

/// Continuous optimizer of the approximate welfare for identical users with
/// exponential-outage efficiency, rounded to the better neighbouring integer.
pub fn optimal_leaders_approx(
    k: usize,
    spreading: u32,
    c: f64,
    kappa: f64,
) -> Result<ApproxLeaderCount> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "K must be at least 2, got {k}"
        )));
    }
    if !(kappa > 0.0) || spreading == 0 {
        return Err(Error::InvalidParameter("κ and N must be positive".into()));
    }
    let f = EfficiencyFunction::exp_outage(c)?;
    let (kf, n) = (k as f64, spreading as f64);
    let (lambda_star, regime) = if (kf - 1.0) / n <= 1.0 / c {
        let radicand = 1.0 - kf / n * c / (c / n + 1.0);
        if radicand < 0.0 {
            return Err(Error::AssumptionViolated(format!(
                "negative radicand {radicand:e} in the leader-count approximation"
            )));
        }
        (
            (1.0 + n / c) * (1.0 - radicand.sqrt()),
            ApproxRegime::LowLoad,
        )
    } else {
        (kf - kappa, ApproxRegime::Boundary)
    };

    let clamp = |x: f64| (x.max(1.0) as usize).clamp(1, k - 1);
    let lo = clamp(lambda_star.floor());
    let hi = clamp(lambda_star.ceil());
    let leaders = if lo == hi {
        lo
    } else {
        let cfg = NetworkConfig::symmetric(k, spreading, 0.0);
        let w = |l| social_welfare_symmetric(&cfg, l, &f).unwrap_or(f64::NEG_INFINITY);
        if w(hi) > w(lo) {
            hi
        } else {
            lo
        }
    };
    Ok(ApproxLeaderCount {
        lambda_star,
        leaders,
        kappa,
        regime,
    })
}

/// Symmetric welfare with a real-valued leader count `λ` (`α = 0`,
/// `g = R = σ² = 1`), for comparison with [`optimal_leaders_approx`].
pub fn symmetric_welfare_real(k: usize, spreading: u32, lambda: f64, c: f64) -> Result<f64> {
    let f = EfficiencyFunction::exp_outage(c)?;
    let beta = beta_star(&f)?;
    let n = spreading as f64;
    let followers = k as f64 - lambda;
    let denominator = n * n - n * (followers - 1.0) * beta;
    if !(denominator > 0.0) {
        return Err(Error::InfeasibleHierarchy {
            leaders: lambda as usize,
            followers: followers as usize,
            reason: "ε_L denominator not positive".into(),
        });
    }
    let eps = followers * beta / denominator;
    let gamma = c / (1.0 + eps * c);
    let d = n * n
        - n * (followers - 1.0) * beta
        - ((n + beta) * (lambda - 1.0) + followers * beta) * gamma;
    let consts = EquilibriumConstants {
        beta_star: beta,
        gamma_star_l: gamma,
        eps_l: eps,
        a_l: d / n,
    };
    Ok(symmetric_welfare_value(
        n, k as f64, lambda, 0.0, 1.0, &f, &consts,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadSweepRow {
    pub alpha: f64,
    pub users: usize,
    pub load: f64,
    pub best_leaders: usize,
    pub max_gain_pct: f64,
}

/// Maximum welfare gain over the NE for every feasible `K` in `2..`, for
/// each sensing cost, with identical users.
pub fn load_sweep(
    spreading: u32,
    f: &EfficiencyFunction,
    alphas: &[f64],
) -> Result<Vec<LoadSweepRow>> {
    let beta = beta_star(f)?;
    let n = spreading as f64;
    // largest K with (K-1)β*/N < 1
    let mut k_max = 1usize;
    while ((k_max as f64) * beta / n) < 1.0 {
        k_max += 1;
    }
    let mut rows = Vec::new();
    for &alpha in alphas {
        for k in 2..=k_max {
            let cfg = NetworkConfig::symmetric(k, spreading, alpha);
            let (best, sweep) = optimal_leaders_exact(&cfg, f)?;
            rows.push(LoadSweepRow {
                alpha,
                users: k,
                load: k as f64 / n,
                best_leaders: best,
                max_gain_pct: sweep[best - 1].gain_pct,
            });
        }
    }
    Ok(rows)
}
