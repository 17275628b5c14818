//! Efficiency functions (block success rate as a function of SINR) and the
//! calibration SINRs derived from them.
//!
//! Two families are provided:
//!
//! - exponential outage, `f(x) = exp(-c/x)`, with `c = 2^r - 1` for a coding
//!   spectral efficiency of `r` bit/s/Hz;
//! - Goodman's `f(x) = (1 - e^{-x})^M`.
//!
//! `β*` maximizes `f(x)/x` and solves `x f'(x) = f(x)`. `γ*(ε)` solves
//! `x (1 - εx) f'(x) = f(x)` and is the SINR a leader settles on when `ε`
//! measures how strongly followers react to it.
//!
//! Residuals are evaluated through the analytic log-derivative `f'/f`, so
//! they stay well defined where `f` itself underflows.

use crate::error::{Error, Result};
use crate::roots::{expand_bracket, solve_bracketed};

/// Relative residual accepted for `β*` and `γ*`.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-12;

/// Tolerance between the closed-form and numeric `γ*` of the
/// exponential-outage family.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// A smooth increasing function of the SINR with analytic derivatives.
///
/// Implemented by [`EfficiencyFunction`]; tests implement it for deliberately
/// broken functions to exercise [`check_sigmoidal`] and the solvers.
pub trait Sigmoid {
    fn value(&self, x: f64) -> f64;
    fn deriv(&self, x: f64) -> f64;
    fn deriv2(&self, x: f64) -> f64;

    /// `f'(x) / f(x)`.
    fn log_deriv(&self, x: f64) -> f64 {
        self.deriv(x) / self.value(x)
    }

    /// `f''(x) / f'(x)`; its sign is the sign of the curvature.
    fn curvature_ratio(&self, x: f64) -> f64 {
        self.deriv2(x) / self.deriv(x)
    }

    /// `lim_{x→0+} f''(x)/f'(x)`.
    fn curvature_limit_at_zero(&self) -> f64 {
        self.curvature_ratio(1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EfficiencyFunction {
    /// `exp(-c/x)`.
    ExpOutage { c: f64 },
    /// `(1 - e^{-x})^m`.
    Goodman { m: u32 },
}

impl EfficiencyFunction {
    pub fn exp_outage(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "c must be positive, got {c}"
            )));
        }
        Ok(Self::ExpOutage { c })
    }

    /// Exponential outage with `c = 2^r - 1`.
    pub fn from_spectral_efficiency(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "r must be positive, got {r}"
            )));
        }
        Self::exp_outage(r.exp2() - 1.0)
    }

    pub fn goodman(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("M must be at least 1".into()));
        }
        Ok(Self::Goodman { m })
    }

    /// Evaluates `f(x)`; `x <= 0` gives 0.
    pub fn eval(&self, x: f64) -> f64 {
        self.value(x)
    }

    /// The unique inflection point on `(0, ∞)`, if the family has one.
    pub fn inflection_point(&self) -> Option<f64> {
        match *self {
            Self::ExpOutage { c } => Some(c / 2.0),
            Self::Goodman { m } if m >= 2 => Some((m as f64).ln()),
            Self::Goodman { .. } => None,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::ExpOutage { .. } => "exponential-outage",
            Self::Goodman { .. } => "goodman",
        }
    }
}

impl Sigmoid for EfficiencyFunction {
    fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::ExpOutage { c } => (-c / x).exp(),
            Self::Goodman { m } => (-(-x).exp_m1()).powi(m as i32),
        }
    }

    fn deriv(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::ExpOutage { c } => c / (x * x) * (-c / x).exp(),
            Self::Goodman { m } => {
                let m = m as f64;
                let s = -(-x).exp_m1();
                m * s.powf(m - 1.0) * (-x).exp()
            }
        }
    }

    fn deriv2(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::ExpOutage { c } => {
                let f = (-c / x).exp();
                f * (c * c / x.powi(4) - 2.0 * c / x.powi(3))
            }
            Self::Goodman { m } => {
                let m = m as f64;
                let e = (-x).exp();
                let s = -(-x).exp_m1();
                m * e * s.powf(m - 2.0) * (m * e - 1.0)
            }
        }
    }

    fn log_deriv(&self, x: f64) -> f64 {
        match *self {
            Self::ExpOutage { c } => c / (x * x),
            Self::Goodman { m } => m as f64 / x.exp_m1(),
        }
    }

    fn curvature_ratio(&self, x: f64) -> f64 {
        match *self {
            Self::ExpOutage { c } => c / (x * x) - 2.0 / x,
            Self::Goodman { m } => {
                let m = m as f64;
                (m * (-x).exp() - 1.0) / (-(-x).exp_m1())
            }
        }
    }

    fn curvature_limit_at_zero(&self) -> f64 {
        match *self {
            Self::ExpOutage { .. } => f64::INFINITY,
            Self::Goodman { m } if m >= 2 => f64::INFINITY,
            Self::Goodman { .. } => -1.0,
        }
    }
}

/// Normalized residual of `x (1 - εx) f'(x) = f(x)`, i.e.
/// `x (1 - εx) f'(x)/f(x) - 1`. Positive left of the root.
pub fn gamma_residual<S: Sigmoid + ?Sized>(f: &S, eps: f64, x: f64) -> f64 {
    x * (1.0 - eps * x) * f.log_deriv(x) - 1.0
}

/// `β*`: the positive root of `x f'(x) = f(x)`.
pub fn beta_star<S: Sigmoid + ?Sized>(f: &S) -> Result<f64> {
    let g = |x: f64| gamma_residual(f, 0.0, x);
    let (lo, hi) = expand_bracket(g, 1.0)?;
    let root = solve_bracketed(g, lo, hi)?;
    let residual = g(root);
    if !(residual.abs() <= ROOT_RESIDUAL_TOL) {
        return Err(Error::NoConvergence { residual });
    }
    Ok(root)
}

/// `γ*(ε)`: the root of `x (1 - εx) f'(x) = f(x)` in `(0, β*]`.
pub fn gamma_star(f: &EfficiencyFunction, eps: f64) -> Result<f64> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "ε must be nonnegative, got {eps}"
        )));
    }
    let beta = beta_star(f)?;
    if eps == 0.0 {
        return Ok(beta);
    }
    let numeric = gamma_star_numeric(f, eps, beta)?;
    match *f {
        EfficiencyFunction::ExpOutage { c } => {
            let closed = c / (1.0 + eps * c);
            let rel = (closed - numeric).abs() / closed;
            if rel > CLOSED_FORM_TOL {
                return Err(Error::NoConvergence { residual: rel });
            }
            Ok(closed)
        }
        EfficiencyFunction::Goodman { .. } => Ok(numeric),
    }
}

/// Numeric `γ*(ε)` for any sigmoid, given its `β*`.
pub fn gamma_star_numeric<S: Sigmoid + ?Sized>(f: &S, eps: f64, beta: f64) -> Result<f64> {
    let g = |x: f64| gamma_residual(f, eps, x);
    // g(β*) = -εβ* < 0; walk down from min(1, β*) until the residual turns positive
    let mut lo = beta.min(1.0);
    while !(g(lo) > 0.0) {
        lo /= 2.0;
        if lo < 1e-300 {
            return Err(Error::NoGammaRoot { eps });
        }
    }
    let hi = if lo < beta {
        (lo * 2.0).min(beta)
    } else {
        beta
    };
    let hi = if g(hi) < 0.0 { hi } else { beta };
    let root = solve_bracketed(g, lo, hi).map_err(|_| Error::NoGammaRoot { eps })?;
    let residual = g(root);
    if !(residual.abs() <= ROOT_RESIDUAL_TOL) {
        return Err(Error::NoConvergence { residual });
    }
    Ok(root)
}

/// Outcome of [`check_sigmoidal`].
#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidReport {
    pub zero_at_origin: bool,
    pub monotone: bool,
    /// `|f(x_big) - 1|` at a point far beyond the grid.
    pub limit_deviation: f64,
    pub limit_ok: bool,
    /// Sign changes of `f''` over the grid (must be exactly one).
    pub curvature_sign_changes: usize,
    /// First grid point where monotonicity failed.
    pub first_monotonicity_violation: Option<f64>,
}

impl SigmoidReport {
    pub fn pass(&self) -> bool {
        self.zero_at_origin && self.monotone && self.limit_ok && self.curvature_sign_changes == 1
    }
}

/// Validates the sigmoid assumptions of `f` on an increasing grid.
pub fn check_sigmoidal<S: Sigmoid + ?Sized>(f: &S, grid: &[f64]) -> Result<SigmoidReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    if grid.iter().any(|x| !(*x > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "grid must be positive and increasing".into(),
        ));
    }

    let zero_at_origin = f.value(0.0) == 0.0;

    // log-derivative positivity detects strict increase even where f
    // underflows; a zero log-derivative is accepted only once f has saturated
    let mut first_violation = None;
    for (i, &x) in grid.iter().enumerate() {
        let ld = f.log_deriv(x);
        let rising = ld > 0.0 || (ld == 0.0 && f.value(x) == 1.0);
        let ordered = i == 0 || f.value(x) >= f.value(grid[i - 1]);
        if !(rising && ordered) {
            first_violation = Some(x);
            break;
        }
    }

    let x_far = 1e9 * grid[grid.len() - 1].max(1.0);
    let limit_deviation = (f.value(x_far) - 1.0).abs();

    let mut changes = 0;
    let mut last_sign = 0.0;
    for &x in grid {
        let r = f.curvature_ratio(x);
        if !r.is_finite() || r == 0.0 {
            continue;
        }
        let s = r.signum();
        if last_sign != 0.0 && s != last_sign {
            changes += 1;
        }
        last_sign = s;
    }

    Ok(SigmoidReport {
        zero_at_origin,
        monotone: first_violation.is_none(),
        limit_deviation,
        limit_ok: limit_deviation <= 1e-6,
        curvature_sign_changes: changes,
        first_monotonicity_violation: first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect()
    }

    struct Constant;
    impl Sigmoid for Constant {
        fn value(&self, _: f64) -> f64 {
            0.5
        }
        fn deriv(&self, _: f64) -> f64 {
            0.0
        }
        fn deriv2(&self, _: f64) -> f64 {
            0.0
        }
    }

    #[test]
    fn eval_examples() {
        let f = EfficiencyFunction::exp_outage(7.0).unwrap();
        assert!((f.eval(1e9) - 1.0).abs() < 1e-8);
        assert!((f.eval(7.0) - (-1f64).exp()).abs() < 1e-15);
        assert!((f.eval(7.0) - 0.367879).abs() < 1e-6);
        assert_eq!(f.eval(0.0), 0.0);
        let g = EfficiencyFunction::goodman(2).unwrap();
        assert_eq!(g.eval(0.0), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let fams = [
            EfficiencyFunction::exp_outage(0.5).unwrap(),
            EfficiencyFunction::exp_outage(7.0).unwrap(),
            EfficiencyFunction::goodman(2).unwrap(),
            EfficiencyFunction::goodman(10).unwrap(),
        ];
        for f in fams {
            for x in geometric(0.2, 50.0, 40) {
                let h = 1e-6 * x.max(1.0);
                let fd1 = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
                let d1 = f.deriv(x);
                assert!(
                    (fd1 - d1).abs() <= 1e-6 * d1.abs() + 1e-9,
                    "{f:?} f' at {x}"
                );
                let fd2 = (f.deriv(x + h) - f.deriv(x - h)) / (2.0 * h);
                let d2 = f.deriv2(x);
                assert!(
                    (fd2 - d2).abs() <= 1e-4 * d2.abs() + 1e-8,
                    "{f:?} f'' at {x}"
                );
            }
        }
    }

    #[test]
    fn beta_star_exp_outage_is_c() {
        let f = EfficiencyFunction::exp_outage(7.0).unwrap();
        assert!((beta_star(&f).unwrap() - 7.0).abs() < 1e-12);
        let c = 0.9f64.exp2() - 1.0;
        let f = EfficiencyFunction::from_spectral_efficiency(0.9).unwrap();
        assert!((beta_star(&f).unwrap() - c).abs() < 1e-12);
        assert!((c - 0.86607).abs() < 1e-5);
    }

    #[test]
    fn beta_star_goodman_matches_bisection_oracle() {
        // plain bisection on 2x e^{-x} - (1 - e^{-x}) over [0.5, 5]
        let h = |x: f64| 2.0 * x * (-x).exp() - (1.0 - (-x).exp());
        let (mut a, mut b) = (0.5f64, 5.0f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if h(m) > 0.0 {
                a = m
            } else {
                b = m
            }
        }
        let oracle = 0.5 * (a + b);
        let f = EfficiencyFunction::goodman(2).unwrap();
        let beta = beta_star(&f).unwrap();
        assert!((beta - oracle).abs() < 1e-12 * oracle);
        let resid = beta * f.deriv(beta) - f.value(beta);
        assert!(resid.abs() <= 1e-12 * f.value(beta));
    }

    #[test]
    fn beta_star_maximizes_ratio() {
        for f in [
            EfficiencyFunction::exp_outage(3.0).unwrap(),
            EfficiencyFunction::goodman(5).unwrap(),
        ] {
            let beta = beta_star(&f).unwrap();
            let best = f.value(beta) / beta;
            for x in geometric(1e-2, 1e3, 500) {
                assert!(f.value(x) / x <= best * (1.0 + 1e-14));
            }
        }
    }

    #[test]
    fn goodman_m1_is_not_sigmoidal() {
        let f = EfficiencyFunction::goodman(1).unwrap();
        assert!(matches!(beta_star(&f), Err(Error::Bracketing { .. })));
        let report = check_sigmoidal(&f, &geometric(1e-3, 1e3, 200)).unwrap();
        assert!(!report.pass());
    }

    #[test]
    fn gamma_star_examples() {
        let f = EfficiencyFunction::exp_outage(7.0).unwrap();
        assert_eq!(gamma_star(&f, 0.0).unwrap(), beta_star(&f).unwrap());
        assert!((gamma_star(&f, 1.0 / 7.0).unwrap() - 3.5).abs() < 1e-12);

        // Goodman M=2, ε=0.05: dense sign scan then bisection, independent of the solver
        let g = EfficiencyFunction::goodman(2).unwrap();
        let res = |x: f64| x * (1.0 - 0.05 * x) * g.deriv(x) - g.value(x);
        let xs = geometric(1e-3, 10.0, 20_000);
        let k = xs
            .windows(2)
            .position(|w| res(w[0]) > 0.0 && res(w[1]) <= 0.0)
            .unwrap();
        let (mut a, mut b) = (xs[k], xs[k + 1]);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if res(m) > 0.0 {
                a = m
            } else {
                b = m
            }
        }
        let oracle = 0.5 * (a + b);
        let gamma = gamma_star(&g, 0.05).unwrap();
        assert!(
            (gamma - oracle).abs() < 1e-10 * oracle,
            "{gamma} vs {oracle}"
        );
        assert!(gamma < beta_star(&g).unwrap());
    }

    #[test]
    fn gamma_closed_form_sweep() {
        for c in [0.5, 1.0, 7.0] {
            let f = EfficiencyFunction::exp_outage(c).unwrap();
            let beta = beta_star(&f).unwrap();
            for eps in [0.0, 0.01, 0.1] {
                let closed = c / (1.0 + eps * c);
                let numeric = if eps == 0.0 {
                    beta
                } else {
                    gamma_star_numeric(&f, eps, beta).unwrap()
                };
                assert!((closed - numeric).abs() <= 1e-9 * closed);
                let gamma = gamma_star(&f, eps).unwrap();
                assert!(gamma <= beta);
                assert_eq!(gamma == beta, eps == 0.0);
            }
        }
    }

    #[test]
    fn negative_eps_rejected() {
        let f = EfficiencyFunction::exp_outage(1.0).unwrap();
        assert!(matches!(
            gamma_star(&f, -0.1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn sigmoid_reports() {
        let grid = geometric(1e-3, 1e3, 300);
        let f = EfficiencyFunction::exp_outage(7.0).unwrap();
        assert!(check_sigmoidal(&f, &grid).unwrap().pass());
        let g = EfficiencyFunction::goodman(100).unwrap();
        assert!(check_sigmoidal(&g, &grid).unwrap().pass());
        let report = check_sigmoidal(&Constant, &grid).unwrap();
        assert!(!report.monotone);
        assert!(!report.pass());
        assert!(check_sigmoidal(&f, &[]).is_err());
        assert!(check_sigmoidal(&f, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn inflection_points() {
        let f = EfficiencyFunction::exp_outage(7.0).unwrap();
        let x = f.inflection_point().unwrap();
        assert!(f.deriv2(x).abs() < 1e-12);
        let g = EfficiencyFunction::goodman(4).unwrap();
        let x = g.inflection_point().unwrap();
        assert!(g.deriv2(x).abs() < 1e-12);
    }
}
