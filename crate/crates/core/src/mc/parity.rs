//! One parity re-encode round: the `n + q - 1` old qubits are measured out and
//! each outcome is wrong with probability `p_local`. Any wrong outcome leaves
//! a wrong byproduct on the residual state.

use rand::Rng;

use super::{replay, report_from_tally, run, Event, McConfig, Protocol, ProtocolTrace, Recorder, Tally};
use crate::error::Result;
use crate::rates::{ErrorModel, ParityParams, RateReport};
use crate::stabilizer::Basis;

struct ParitySim {
    measured: u64,
    p: f64,
}

impl Protocol for ParitySim {
    fn sample<R: Rng + ?Sized, T: Recorder + ?Sized>(&self, rng: &mut R, trace: &mut T, tally: &mut Tally) {
        tally.samples += 1;
        let mut corrupted = false;
        for q in 0..self.measured {
            let wrong = rng.gen::<f64>() < self.p;
            if trace.enabled() {
                trace.record(Event::measured(q, Basis::Z, wrong));
            }
            corrupted |= wrong;
        }
        if corrupted {
            tally.wrong += 1;
        }
    }
}

pub fn mc_parity_reencode(params: &ParityParams, model: &ErrorModel, cfg: &McConfig) -> Result<RateReport> {
    model.validate()?;
    let sim = ParitySim { measured: params.measured(), p: model.p_local };
    Ok(report_from_tally(&run(&sim, cfg)?, cfg, false))
}

/// Event log of sample `index` of a seeded [`mc_parity_reencode`] run.
pub fn trace_parity_reencode(params: &ParityParams, model: &ErrorModel, seed: u64, index: u64) -> ProtocolTrace {
    replay(&ParitySim { measured: params.measured(), p: model.p_local }, "parity", seed, index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::standard_error;
    use crate::rates::parity_reencode_error;

    #[test]
    fn matches_formula() {
        let params = ParityParams::new(4, 3).unwrap();
        let model = ErrorModel::depolarizing(0.0).unwrap().with_local(1e-2).unwrap();
        let r = mc_parity_reencode(&params, &model, &McConfig::new(200_000, 7)).unwrap();
        let p = parity_reencode_error(1e-2, &params).unwrap();
        assert!((r.effective_error - p).abs() < 4.0 * standard_error(p, 200_000));
        assert_eq!(r.effective_loss, 0.0);
    }

    #[test]
    fn trace_lists_every_measurement() {
        let params = ParityParams::new(3, 2).unwrap();
        let model = ErrorModel::depolarizing(0.0).unwrap().with_local(0.5).unwrap();
        let t = trace_parity_reencode(&params, &model, 0, 5);
        assert_eq!(t.events.len(), 4);
    }
}
