use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes of the solvers.
///
/// The CLI maps these onto exit codes through [`Error::class`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "residual has no sign change on [{lo:e}, {hi:e}]: efficiency function is not sigmoidal"
    )]
    Bracketing { lo: f64, hi: f64 },

    #[error("root solver stalled with residual {residual:e}")]
    NoConvergence { residual: f64 },

    #[error("infeasible load: (K-1)·β*/N = {load} must be < 1")]
    InfeasibleLoad { load: f64 },

    #[error("nonpositive denominator N² - N(F-1)β* = {denominator} for F = {followers}")]
    NonpositiveDenominator { followers: usize, denominator: f64 },

    #[error("infeasible hierarchy with L = {leaders}, F = {followers}: {reason}")]
    InfeasibleHierarchy {
        leaders: usize,
        followers: usize,
        reason: String,
    },

    #[error("no γ* root in (0, β*] for ε = {eps}")]
    NoGammaRoot { eps: f64 },

    #[error("sensing game has infeasible profiles: {0}")]
    InfeasibleGame(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("power grid does not bracket the Nash power {power:e}")]
    GridTooCoarse { power: f64 },
}

/// Coarse grouping used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Infeasible,
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_) | Error::Precondition(_) | Error::GridTooCoarse { .. } => {
                ErrorClass::Input
            }
            Error::InfeasibleLoad { .. }
            | Error::NonpositiveDenominator { .. }
            | Error::InfeasibleHierarchy { .. }
            | Error::NoGammaRoot { .. }
            | Error::InfeasibleGame(_)
            | Error::AssumptionViolated(_) => ErrorClass::Infeasible,
            Error::Bracketing { .. } | Error::NoConvergence { .. } => ErrorClass::Numeric,
        }
    }
}
