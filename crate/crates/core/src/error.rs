use thiserror::Error;

use crate::dde_sim::Trajectory;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("no real equilibrium: {0}")]
    NoEquilibrium(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("degenerate linearization: need 0 <= a < b, got a = {a}, b = {b}")]
    DegenerateLinearization { a: f64, b: f64 },

    #[error("degenerate epsilon {0}: need 0 <= a/b < 1")]
    DegenerateEpsilon(f64),

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("root search did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("step dt = {dt} exceeds tau/20 = {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("trajectory diverged at t = {t}")]
    Divergence { t: f64, trajectory: Box<Trajectory> },
}

pub type Result<T> = std::result::Result<T, Error>;
