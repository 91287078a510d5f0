use thiserror::Error;

/// Errors raised by the engines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or input violates a documented constraint.
    #[error("invalid {what}: {reason}")]
    Validation { what: &'static str, reason: String },

    /// A formula was evaluated outside its mathematical domain.
    #[error("domain error in {what}: {reason}")]
    Domain { what: &'static str, reason: String },

    /// An operation was applied to a qubit that is no longer part of the state.
    #[error("qubit {qubit} has already been removed from the state")]
    QubitRemoved { qubit: usize },

    /// A forced measurement outcome contradicts a deterministic outcome.
    #[error("forced outcome {forced} on qubit {qubit} is impossible (deterministic outcome {actual})")]
    ImpossibleOutcome { qubit: usize, forced: bool, actual: bool },

    /// Bisection bracket without a sign change.
    #[error("no sign change over bracket [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Error {
    Error::Validation { what, reason: reason.into() }
}

pub(crate) fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(what, format!("probability {p} outside [0, 1]")))
    }
}
