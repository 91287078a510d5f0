//! Closed-form effective loss and error rates for the three schemes.
//!
//! Every rate is reported through [`RateReport`]. `effective_error` is the
//! probability that a delivered outcome is wrong, conditioned on the protocol
//! delivering one; `joint_error` is the unconditioned probability of delivering
//! a wrong outcome. They differ only when the protocol can fail (loss).

pub mod binomial;
pub mod duan;
pub mod parity;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, invalid, Result};

pub use binomial::{any_success, majority_vote, odd_parity_closed_form, odd_parity_of, odd_parity_prob, TiePolicy, VoteOutcome};
pub use duan::{
    bond_attempts, bond_success_probability, depolarizing_aggregate, duan_arm_length, duan_bond, duan_effective_xz,
    plus_cluster_gates, single_shot_success, type_b_gates, ArmLength, DuanParams,
};
pub use parity::{parity_reencode_error, ParityParams};
pub use tree::{tree_analysis, tree_general, tree_qubit_count, tree_two_level, TreeAnalysis, TreeParams, VotePolicy};

/// Independent per-qubit loss and Pauli error probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub p_loss: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    /// Probability that a single-qubit measurement outcome is wrong.
    pub p_local: f64,
}

impl ErrorModel {
    pub fn new(p_loss: f64, p_x: f64, p_y: f64, p_z: f64, p_local: f64) -> Result<Self> {
        let m = Self { p_loss, p_x, p_y, p_z, p_local };
        m.validate()?;
        Ok(m)
    }

    /// Depolarizing noise of total strength `p`: each of X, Y, Z with `p/3`,
    /// and a measurement error rate of `p`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        Self::new(0.0, p / 3.0, p / 3.0, p / 3.0, p)
    }

    pub fn with_loss(mut self, p_loss: f64) -> Result<Self> {
        self.p_loss = p_loss;
        self.validate()?;
        Ok(self)
    }

    pub fn with_local(mut self, p_local: f64) -> Result<Self> {
        self.p_local = p_local;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("p_loss", self.p_loss)?;
        check_probability("p_x", self.p_x)?;
        check_probability("p_y", self.p_y)?;
        check_probability("p_z", self.p_z)?;
        check_probability("p_local", self.p_local)?;
        if self.total_pauli() > 1.0 + 1e-12 {
            return Err(invalid("error model", format!("p_x + p_y + p_z = {} exceeds 1", self.total_pauli())));
        }
        Ok(())
    }

    /// Probability of any Pauli error.
    pub fn total_pauli(&self) -> f64 {
        self.p_x + self.p_y + self.p_z
    }

    /// Probability that a Pauli error flips an X-basis measurement (Y or Z).
    pub fn x_flip(&self) -> f64 {
        self.p_y + self.p_z
    }
}

/// Split of an error rate by Pauli class.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PauliRates {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PauliRates {
    pub fn total(&self) -> f64 {
        self.x + self.y + self.z
    }
}

/// Sampling metadata attached to Monte-Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub samples: u64,
    pub seed: u64,
    pub confidence: f64,
    /// Trials behind `effective_error` (samples that delivered an outcome).
    pub error_trials: u64,
    pub loss_ci_half_width: f64,
    pub error_ci_half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub effective_loss: f64,
    pub effective_error: f64,
    pub joint_error: f64,
    pub pauli: Option<PauliRates>,
    pub sampling: Option<SampleStats>,
}

impl RateReport {
    /// Exact report from the loss probability and the joint error probability.
    pub fn exact(effective_loss: f64, joint_error: f64) -> Self {
        let delivered = 1.0 - effective_loss;
        let effective_error = if delivered > 0.0 { (joint_error / delivered).clamp(0.0, 1.0) } else { 0.0 };
        Self {
            effective_loss: effective_loss.clamp(0.0, 1.0),
            effective_error,
            joint_error: joint_error.clamp(0.0, 1.0),
            pauli: None,
            sampling: None,
        }
    }

    /// Exact report from the probability that an outcome is delivered. Prefer
    /// this over [`RateReport::exact`] when loss is close to one, since the
    /// conditional error then divides by the delivered mass directly.
    pub fn from_delivered(delivered: f64, joint_error: f64) -> Self {
        let delivered = delivered.clamp(0.0, 1.0);
        let effective_error = if delivered > 0.0 { (joint_error / delivered).clamp(0.0, 1.0) } else { 0.0 };
        Self {
            effective_loss: 1.0 - delivered,
            effective_error,
            joint_error: joint_error.clamp(0.0, 1.0),
            pauli: None,
            sampling: None,
        }
    }

    pub fn with_pauli(mut self, pauli: PauliRates) -> Self {
        self.pauli = Some(pauli);
        self
    }

    pub fn method(&self) -> Method {
        if self.sampling.is_some() {
            Method::MonteCarlo
        } else {
            Method::Exact
        }
    }

    /// Error-rate CI half-width; present exactly for sampled reports.
    pub fn ci_half_width(&self) -> Option<f64> {
        self.sampling.map(|s| s.error_ci_half_width)
    }

    pub fn seed(&self) -> Option<u64> {
        self.sampling.map(|s| s.seed)
    }
}
