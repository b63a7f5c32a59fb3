use crate::simulate::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violates a hard constraint (negative rate, efficacy outside `[0, 1)`, ...).
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A formula was evaluated outside its domain or produced a non-finite value.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two independent evaluations of the same quantity disagree beyond
    /// what rounding can explain. Signals a transcription bug, not bad input.
    #[error("integrity check failed: {0}")]
    Integrity(String),

    /// Malformed integrator, sweep or grid configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The integrator gave up; the samples produced so far are kept.
    #[error("integration failed at t = {time}: {reason}")]
    Integration {
        time: f64,
        reason: String,
        partial: Box<Trajectory>,
    },
}
