//! Parity-encoding re-encode step: `N = n + q - 1` old qubits are measured out,
//! and a single wrong outcome corrupts the residual state.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityParams {
    /// Parity-encoding length.
    pub n: u64,
    /// Redundancy level.
    pub q: u64,
}

impl ParityParams {
    pub fn new(n: u64, q: u64) -> Result<Self> {
        if n == 0 || q == 0 {
            return Err(invalid("parity params", format!("n = {n}, q = {q}; both must be at least 1")));
        }
        Ok(Self { n, q })
    }

    /// Qubits measured per re-encode.
    pub fn measured(&self) -> u64 {
        self.n + self.q - 1
    }
}

/// `1 - (1 - p)^N`.
pub fn parity_reencode_error(p: f64, params: &ParityParams) -> Result<f64> {
    check_probability("p", p)?;
    Ok(1.0 - (1.0 - p).powf(params.measured() as f64))
}
