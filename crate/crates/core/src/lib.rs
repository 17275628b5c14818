//! Energy-efficient power control in networks mixing cognitive and
//! non-cognitive transmitters.
//!
//! Each transmitter maximizes the number of successfully delivered bits per
//! joule, `R_k f(γ_k) / p_k`, where `f` is a sigmoidal block-success rate of
//! the SINR. Non-cognitive transmitters (leaders) commit first; cognitive
//! ones (followers) sense the leaders' powers, pay a sensing cost `α`, and
//! best-respond. The crate computes:
//!
//! - `efficiency`: the efficiency-function families and the calibration
//!   SINRs `β*` and `γ*`;
//! - `hierarchy`: Nash and Stackelberg power profiles, uniqueness,
//!   dominance and follow-versus-lead checks;
//! - `welfare`: sum-utility sweeps over the number of leaders and the
//!   closed-form leader-count approximation;
//! - `sensing`: the binary sense / don't-sense game, its weighted potential,
//!   pure/mixed/correlated equilibria, bargaining and the hybrid-game check;
//! - `learning`: best-response dynamics and fictitious play on that game.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod efficiency;
pub mod error;
pub mod hierarchy;
pub mod learning;
pub mod roots;
pub mod sensing;
pub mod welfare;

pub use efficiency::{beta_star, check_sigmoidal, gamma_star, EfficiencyFunction, Sigmoid};
pub use error::{Error, Result};
pub use hierarchy::{
    epsilon_l, nash_powers, pareto_dominance_check, se_uniqueness_check, sensing_threshold,
    sinr_of, stackelberg_powers, EquilibriumConstants, EquilibriumKind, EquilibriumReport,
    NetworkConfig, Role, RolePartition,
};
pub use sensing::{Action, CorrelatedDistribution, MixedProfile, Profile, SensingGame};
