use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("Bessel order {order} outside supported range [0, {max}]")]
    OrderOverflow { order: u32, max: u32 },

    /// A physical parameter violates its invariant.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("no guided-mode root in the open interval (n2 k, n1 k)")]
    NoRoot,

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("propagation constant outside the radiation band: |beta|/k = {ratio}")]
    Band { ratio: f64 },

    /// Hankel functions are singular at the band edge or overflow for
    /// extreme order/argument pairs.
    #[error("degenerate radiation mode (m = {m}, q a = {qa:e}): {reason}")]
    Degenerate { m: i32, qa: f64, reason: &'static str },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("integration step {h:e} exceeds a quarter of the shortest delay {tau_min:e}")]
    StepTooLarge { h: f64, tau_min: f64 },

    #[error("atom at z = {z_nm} nm lies outside the cavity of length {length_m} m")]
    OutsideCavity { z_nm: f64, length_m: f64 },

    #[error("the analytic partition-sum solution requires the atom at the cavity center")]
    OffCenter,

    #[error("fit window [{t1}, {t2}] is not covered by the trace")]
    WindowOutOfRange { t1: f64, t2: f64 },

    #[error("non-positive population {value:e} at t = {t}")]
    NonPositivePopulation { t: f64, value: f64 },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
