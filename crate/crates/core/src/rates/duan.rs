//! Gate-failure-tolerant cluster assembly from +-clusters.
//!
//! Two +-clusters are bonded by repeatedly attempting a probabilistic CPHASE
//! between the ends of facing arms. A failed attempt costs two qubits from each
//! arm; after a success the `r` leftover qubits on each arm are X-measured away.
//!
//! Byproducts are tracked on central node A, taking the whole measured chain of
//! `n_X = 2r` qubits with A as root: outcome flips at odd distance leave `X` on
//! A and flips at even distance leave `Z`, `n_X / 2` of each. The aggregate
//! depolarizing rate of a central node counts the `r` qubits of its own arm and
//! treats the node as depolarized when any of them suffered a Pauli error.

use serde::{Deserialize, Serialize};

use super::binomial::odd_parity_prob;
use super::{ErrorModel, PauliRates, RateReport};
use crate::error::{check_probability, invalid, Error, Result};

/// Arm length from the resource-scaling formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmLength {
    /// `(2 / p_g) ln(2N / epsilon)`.
    pub exact: f64,
    /// Smallest whole arm length covering `exact` (never negative).
    pub protocol: usize,
}

/// Required +-cluster arm length for an `n_target`-qubit cluster built with gates
/// of success probability `p_g`. `epsilon` enters as the raw formula argument.
pub fn duan_arm_length(p_g: f64, n_target: u64, epsilon: f64) -> Result<ArmLength> {
    if !(p_g > 0.0 && p_g <= 1.0) {
        return Err(invalid("p_g", format!("{p_g} outside (0, 1]")));
    }
    if n_target == 0 {
        return Err(invalid("N", "target cluster size must be at least 1"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain { what: "arm length", reason: format!("epsilon = {epsilon} outside (0, 1)") });
    }
    let exact = 2.0 / p_g * (2.0 * n_target as f64 / epsilon).ln();
    let protocol = exact.max(0.0).ceil() as usize;
    Ok(ArmLength { exact, protocol })
}

/// Parameters of one bonding step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuanParams {
    pub p_g: f64,
    pub arm_length: usize,
}

impl DuanParams {
    pub fn new(p_g: f64, arm_length: usize) -> Result<Self> {
        if !(p_g > 0.0 && p_g <= 1.0) {
            return Err(invalid("p_g", format!("{p_g} outside (0, 1]")));
        }
        Ok(Self { p_g, arm_length })
    }

    /// Arm length taken from [`duan_arm_length`].
    pub fn from_target(p_g: f64, n_target: u64, epsilon: f64) -> Result<Self> {
        Self::new(p_g, duan_arm_length(p_g, n_target, epsilon)?.protocol)
    }
}

/// Split effective rates `(p_X', p_Z')` after X-measuring `n_x` chain qubits:
/// each is the odd-parity probability over `n_x / 2` qubits.
pub fn duan_effective_xz(p_x: f64, p_z: f64, n_x: u64) -> Result<(f64, f64)> {
    check_probability("p_X", p_x)?;
    check_probability("p_Z", p_z)?;
    if n_x % 2 == 1 {
        return Err(invalid("n_X", format!("{n_x} is odd; measured chains come in pairs")));
    }
    Ok((odd_parity_prob(n_x / 2, p_x), odd_parity_prob(n_x / 2, p_z)))
}

/// `1 - (1 - p)^measured`: depolarized if any measured qubit was.
pub fn depolarizing_aggregate(p: f64, measured: u64) -> f64 {
    1.0 - (1.0 - p).powf(measured as f64)
}

/// Probability that `gate_count` independent gates all succeed.
pub fn single_shot_success(p_g: f64, gate_count: u64) -> f64 {
    p_g.powf(gate_count as f64)
}

/// CPHASE gates needed for a +-cluster with arms of length `n_l`.
pub fn plus_cluster_gates(n_l: u64) -> u64 {
    4 * n_l
}

/// CPHASE gates needed for two directly bonded +-clusters (six free arms).
pub fn type_b_gates(n_l: u64) -> u64 {
    6 * n_l + 1
}

/// Bonding attempts an arm of length `n_l` allows. Attempt `k` (1-based) uses
/// the qubit at position `n_l - 2(k-1)`, so an odd arm gets a final attempt on
/// the qubit next to the central node.
pub fn bond_attempts(n_l: usize) -> usize {
    n_l.div_ceil(2)
}

pub fn bond_success_probability(p_g: f64, n_l: usize) -> f64 {
    1.0 - (1.0 - p_g).powi(bond_attempts(n_l) as i32)
}

/// Exact bond report: loss is bond failure, `effective_error` the aggregate
/// depolarizing rate of a central node given success, `pauli` the byproduct
/// class distribution on central node A given success.
pub fn duan_bond(params: &DuanParams, model: &ErrorModel) -> RateReport {
    let DuanParams { p_g, arm_length: n_l } = *params;
    let flip = model.x_flip();
    let mut success = 0.0;
    let mut joint = 0.0;
    let mut pauli = PauliRates::default();
    for k in 0..bond_attempts(n_l) {
        let pk = (1.0 - p_g).powi(k as i32) * p_g;
        let r = (n_l - 2 * k) as u64;
        success += pk;
        joint += pk * depolarizing_aggregate(model.total_pauli(), r);
        let (px, pz) = (odd_parity_prob(r, flip), odd_parity_prob(r, flip));
        pauli.x += pk * px * (1.0 - pz);
        pauli.z += pk * pz * (1.0 - px);
        pauli.y += pk * px * pz;
    }
    if success > 0.0 {
        pauli.x /= success;
        pauli.y /= success;
        pauli.z /= success;
    }
    RateReport::from_delivered(success, joint).with_pauli(pauli)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arm_length_worked_example() {
        let a = duan_arm_length(0.99, 100, 0.9).unwrap();
        assert!((a.exact - 10.916520974153).abs() < 1e-9, "{}", a.exact);
        assert_eq!(a.protocol, 11);
    }

    #[test]
    fn arm_length_low_gate_probability() {
        let a = duan_arm_length(0.5, 100, 0.9).unwrap();
        assert!((a.exact - 4.0 * (200.0f64 / 0.9).ln()).abs() < 1e-12);
        assert!((a.exact - 21.6).abs() < 0.05);
    }

    #[test]
    fn arm_length_vanishes_as_log_argument_reaches_one() {
        // N = 1, epsilon -> 1: ln(2) is the floor; with N fixed the value falls with epsilon
        let a = duan_arm_length(1.0, 1, 0.999_999).unwrap();
        assert!((a.exact - 2.0 * 2.0f64.ln()).abs() < 1e-5);
        assert!(duan_arm_length(1.0, 100, 0.5).unwrap().exact > a.exact);
    }

    #[test]
    fn arm_length_domain_errors() {
        assert!(matches!(duan_arm_length(0.9, 10, 0.0), Err(Error::Domain { .. })));
        assert!(duan_arm_length(0.0, 10, 0.5).is_err());
        assert!(duan_arm_length(0.9, 0, 0.5).is_err());
    }

    #[test]
    fn effective_xz_reductions() {
        assert_eq!(duan_effective_xz(0.0, 0.0, 22).unwrap(), (0.0, 0.0));
        let (px, pz) = duan_effective_xz(0.01, 0.02, 2).unwrap();
        assert_eq!(px, 0.01);
        assert_eq!(pz, odd_parity_prob(1, 0.02));
        let (a, b) = duan_effective_xz(0.003, 0.003, 40).unwrap();
        assert_eq!(a, b);
        assert!(duan_effective_xz(0.01, 0.01, 21).is_err());
    }

    #[test]
    fn aggregate_blow_out() {
        let p = depolarizing_aggregate(1e-3, 11);
        assert!((p - 1.0945164670e-2).abs() < 1e-12);
        let (px, _) = duan_effective_xz(1e-3, 1e-3, 22).unwrap();
        assert!((px - 1.1e-2).abs() < 0.05e-2);
    }

    #[test]
    fn single_shot_numbers() {
        assert!((single_shot_success(0.99, plus_cluster_gates(11)) - 0.6426).abs() < 1e-3);
        assert!((single_shot_success(0.99, type_b_gates(11)) - 0.5100).abs() < 1e-3);
        assert_eq!(single_shot_success(1.0, 1234), 1.0);
        assert_eq!(single_shot_success(0.7, 0), 1.0);
    }

    #[test]
    fn bond_success_geometric() {
        assert!((bond_success_probability(0.5, 10) - 0.96875).abs() < 1e-15);
        assert_eq!(bond_attempts(11), 6);
        assert_eq!(bond_attempts(0), 0);
        assert_eq!(bond_success_probability(0.5, 0), 0.0);
    }

    #[test]
    fn deterministic_gate_bond() {
        let model = ErrorModel::depolarizing(3e-3).unwrap();
        let r = duan_bond(&DuanParams::new(1.0, 12).unwrap(), &model);
        assert_eq!(r.effective_loss, 0.0);
        assert!((r.effective_error - depolarizing_aggregate(3e-3, 12)).abs() < 1e-15);
        let (px, pz) = duan_effective_xz(model.x_flip(), model.x_flip(), 24).unwrap();
        let pauli = r.pauli.unwrap();
        assert!((pauli.x + pauli.y - px).abs() < 1e-15);
        assert!((pauli.z + pauli.y - pz).abs() < 1e-15);
    }
}
