//! Bonding two +-clusters with probabilistic CPHASE gates.
//!
//! Each sample retries the gate on successive arm positions; on success the
//! `r` leftover qubits of both arms form a chain `B, b_1..b_r, a_r..a_1, A`
//! whose interior is X-measured. Pauli errors are drawn on every measured
//! qubit and the byproduct on A comes from [`measure_x_chain`]. A sample counts
//! as wrong when any qubit of A's own leftover arm carries an error, the
//! aggregate convention of the analytic rate.

use rand::Rng;
use serde::Serialize;

use super::{replay, report_from_tally, run, sample_pauli, Event, McConfig, Protocol, ProtocolTrace, Recorder, Tally};
use crate::error::Result;
use crate::rates::{bond_attempts, DuanParams, ErrorModel, RateReport};
use crate::stabilizer::{measure_x_chain, GraphSpec, Pauli};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DuanMcReport {
    pub report: RateReport,
    /// Mean number of X-measured qubits per successful bond.
    pub mean_measured: f64,
}

struct DuanSim {
    params: DuanParams,
    model: ErrorModel,
    /// Chain graph for each leftover length `r`.
    chains: Vec<GraphSpec>,
}

impl DuanSim {
    fn new(params: DuanParams, model: ErrorModel) -> Self {
        let chains = (0..=params.arm_length).map(|r| GraphSpec::linear(2 * r + 2)).collect();
        Self { params, model, chains }
    }
}

impl Protocol for DuanSim {
    fn sample<R: Rng + ?Sized, T: Recorder + ?Sized>(&self, rng: &mut R, trace: &mut T, tally: &mut Tally) {
        tally.samples += 1;
        let n_l = self.params.arm_length;
        let mut leftover = None;
        for k in 0..bond_attempts(n_l) {
            let success = rng.gen::<f64>() < self.params.p_g;
            if trace.enabled() {
                trace.record(Event::BondAttempt { attempt: k as u64 + 1, success });
            }
            if success {
                leftover = Some(n_l - 2 * k);
                break;
            }
        }
        let Some(r) = leftover else {
            tally.lost += 1;
            return;
        };
        tally.extra += 2 * r as u64;
        // chain: 0 = B, 1..=r = B's arm, r+1..=2r = A's arm, 2r+1 = A
        let m = &self.model;
        let mut errors = Vec::new();
        let mut own_arm_hit = false;
        for q in 1..=2 * r {
            let p = sample_pauli(rng, m.p_x, m.p_y, m.p_z);
            if p != Pauli::I {
                if trace.enabled() {
                    trace.record(Event::pauli_error(q as u64, p));
                }
                own_arm_hit |= q > r;
                errors.push((q, p));
            }
        }
        if own_arm_hit {
            tally.wrong += 1;
        }
        if errors.is_empty() || r == 0 {
            return;
        }
        let measured: Vec<usize> = (1..=2 * r).collect();
        let by = measure_x_chain(&self.chains[r], &errors, &measured).expect("chain layout is valid");
        let on_a = by.get(2 * r + 1);
        if trace.enabled() && on_a != Pauli::I {
            trace.record(Event::Byproduct { pauli: on_a.symbol() });
        }
        tally.record_pauli(on_a);
    }
}

/// Samples bonding attempts and error propagation onto the central node.
pub fn mc_duan_bond(params: &DuanParams, model: &ErrorModel, cfg: &McConfig) -> Result<DuanMcReport> {
    model.validate()?;
    let sim = DuanSim::new(*params, *model);
    let tally = run(&sim, cfg)?;
    let delivered = tally.delivered();
    let mean_measured = if delivered == 0 { 0.0 } else { tally.extra as f64 / delivered as f64 };
    Ok(DuanMcReport { report: report_from_tally(&tally, cfg, true), mean_measured })
}

/// Event log of sample `index` of a seeded [`mc_duan_bond`] run.
pub fn trace_duan_bond(params: &DuanParams, model: &ErrorModel, seed: u64, index: u64) -> ProtocolTrace {
    replay(&DuanSim::new(*params, *model), "duan", seed, index)
}
