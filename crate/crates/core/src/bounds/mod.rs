//! Upper-bound certification and lower-bound estimators.
//!
//! - [`constants`]: Lipschitz and strong-convexity constants of a game
//! - [`flatness`]: flatness of −Φ, stability of minimizers, the `4α ln T` bound
//! - [`rademacher`]: sequential Rademacher averages and the `2√T·Rad` bound
//! - [`gaussian`]: the Gaussian-process lower-bound scale and its checks
//! - [`recursive`]: the per-round divergence terms bounding the regret

pub mod constants;
pub mod flatness;
pub mod gaussian;
pub mod rademacher;
pub mod recursive;

pub use constants::{estimate_constants, ConstantEstimates};
pub use flatness::{flatness_check, log_t_bound, stability_check};
pub use gaussian::{
    experts_covariance, gaussian_lb_estimate, slepian_check, GaussianLbResult, SlepianResult,
};
pub use rademacher::{
    ball_sandwich, rademacher_average, rademacher_upper_bound, BallSandwich, RademacherCheck,
    RademacherSearch,
};
pub use recursive::{recursive_upper_bound_terms, RecursiveBound};

/// Input that violates a bound.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Pair { p: Vec<f64>, q: Vec<f64> },
    Sequence(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheckResult {
    pub bound_value: f64,
    pub observed_value: f64,
    /// Additive slack granted to the observed side.
    pub tolerance: f64,
    pub holds: bool,
    /// First violating input, present iff `holds` is false.
    pub witness: Option<Witness>,
}
