//! Monte-Carlo protocol simulators.
//!
//! Samples are split into fixed chunks of [`CHUNK_SAMPLES`]. Chunk `c` draws from
//! its own ChaCha8 stream (`seed`, stream `c`) and produces an integer [`Tally`];
//! tallies are summed, so results are bit-identical for any worker count.

mod differential;
mod duan;
mod parity;
mod trace;
mod tree;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};
use crate::rates::{PauliRates, RateReport, SampleStats};
use crate::stabilizer::Pauli;

pub use differential::{mc_vs_tableau_differential, tableau_vs_dense, DifferentialGraph, DifferentialReport};
pub use duan::{mc_duan_bond, trace_duan_bond, DuanMcReport};
pub use parity::{mc_parity_reencode, trace_parity_reencode};
pub use trace::{Event, NoTrace, ProtocolTrace, Recorder};
pub use tree::{mc_tree_indirect, trace_tree_indirect};

/// Samples per RNG stream.
pub const CHUNK_SAMPLES: u64 = 1024;

/// Sampling settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
    /// Confidence level of the reported Wilson intervals.
    pub confidence: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0, workers: 0, confidence: 0.95 }
    }
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, ..Self::default() }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(invalid("samples", "at least one sample is required"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(invalid("confidence", format!("{} outside (0, 1)", self.confidence)));
        }
        Ok(())
    }
}

/// Integer event counts; merging is exact and order independent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub samples: u64,
    pub lost: u64,
    pub wrong: u64,
    /// Byproduct classes among delivered samples, in X, Y, Z order.
    pub pauli: [u64; 3],
    /// Protocol-specific counter (e.g. measured qubits).
    pub extra: u64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.samples += o.samples;
        self.lost += o.lost;
        self.wrong += o.wrong;
        for (a, b) in self.pauli.iter_mut().zip(o.pauli) {
            *a += b;
        }
        self.extra += o.extra;
        self
    }

    pub fn record_pauli(&mut self, p: Pauli) {
        match p {
            Pauli::I => {}
            Pauli::X => self.pauli[0] += 1,
            Pauli::Y => self.pauli[1] += 1,
            Pauli::Z => self.pauli[2] += 1,
        }
    }

    pub fn delivered(&self) -> u64 {
        self.samples - self.lost
    }
}

/// One sampled run of a protocol.
pub(crate) trait Protocol: Sync {
    fn sample<R: Rng + ?Sized, T: Recorder + ?Sized>(&self, rng: &mut R, trace: &mut T, tally: &mut Tally);
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid("workers", e.to_string()))
}

pub(crate) fn run<P: Protocol>(protocol: &P, cfg: &McConfig) -> Result<Tally> {
    cfg.validate()?;
    let chunks = cfg.samples.div_ceil(CHUNK_SAMPLES);
    let job = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = chunk_rng(cfg.seed, c);
                let len = CHUNK_SAMPLES.min(cfg.samples - c * CHUNK_SAMPLES);
                let mut t = Tally::default();
                for _ in 0..len {
                    protocol.sample(&mut rng, &mut NoTrace, &mut t);
                }
                t
            })
            .reduce(Tally::default, Tally::merge)
    };
    Ok(pool(cfg.workers)?.install(job))
}

/// Re-runs sample `index` of a seeded run with event recording.
pub(crate) fn replay<P: Protocol>(protocol: &P, scheme: &'static str, seed: u64, index: u64) -> ProtocolTrace {
    let mut rng = chunk_rng(seed, index / CHUNK_SAMPLES);
    let mut scratch = Tally::default();
    for _ in 0..index % CHUNK_SAMPLES {
        protocol.sample(&mut rng, &mut NoTrace, &mut scratch);
    }
    let mut trace = ProtocolTrace::new(scheme, seed, index);
    let mut t = Tally::default();
    protocol.sample(&mut rng, &mut trace.events, &mut t);
    trace.lost = t.lost == 1;
    trace.wrong = t.wrong == 1;
    trace
}

/// Two-sided standard normal quantile for `confidence`.
pub fn z_score(confidence: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    normal.inverse_cdf(0.5 + confidence / 2.0)
}

/// Wilson score interval `(centre, half_width)` for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    if n == 0 {
        return (0.5, 0.5);
    }
    let z = z_score(confidence);
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (centre, half)
}

/// Binomial standard error of a proportion estimate.
pub fn standard_error(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Turns a tally into a sampled report. `effective_error` is the wrong fraction
/// of delivered samples; `joint_error` the wrong fraction of all samples.
pub fn report_from_tally(t: &Tally, cfg: &McConfig, with_pauli: bool) -> RateReport {
    let n = t.samples;
    let delivered = t.delivered();
    let frac = |k: u64, d: u64| if d == 0 { 0.0 } else { k as f64 / d as f64 };
    let sampling = SampleStats {
        samples: n,
        seed: cfg.seed,
        confidence: cfg.confidence,
        error_trials: delivered,
        loss_ci_half_width: wilson_interval(t.lost, n, cfg.confidence).1,
        error_ci_half_width: wilson_interval(t.wrong, delivered, cfg.confidence).1,
    };
    RateReport {
        effective_loss: frac(t.lost, n),
        effective_error: frac(t.wrong, delivered),
        joint_error: frac(t.wrong, n),
        pauli: with_pauli.then(|| PauliRates {
            x: frac(t.pauli[0], delivered),
            y: frac(t.pauli[1], delivered),
            z: frac(t.pauli[2], delivered),
        }),
        sampling: Some(sampling),
    }
}

/// Samples one Pauli from the model's X/Y/Z rates.
pub(crate) fn sample_pauli<R: Rng + ?Sized>(rng: &mut R, p_x: f64, p_y: f64, p_z: f64) -> Pauli {
    let u: f64 = rng.gen();
    if u < p_x {
        Pauli::X
    } else if u < p_x + p_y {
        Pauli::Y
    } else if u < p_x + p_y + p_z {
        Pauli::Z
    } else {
        Pauli::I
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Coin(f64);

    impl Protocol for Coin {
        fn sample<R: Rng + ?Sized, T: Recorder + ?Sized>(&self, rng: &mut R, _: &mut T, tally: &mut Tally) {
            tally.samples += 1;
            if rng.gen::<f64>() < self.0 {
                tally.wrong += 1;
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_tallies() {
        let cfg = McConfig::new(50_000, 9);
        let a = run(&Coin(0.3), &cfg.with_workers(1)).unwrap();
        let b = run(&Coin(0.3), &cfg.with_workers(3)).unwrap();
        let c = run(&Coin(0.3), &cfg.with_workers(8)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.samples, 50_000);
        assert_ne!(a, run(&Coin(0.3), &cfg.with_seed(10)).unwrap());
    }

    #[test]
    fn wilson_brackets_estimate() {
        let (c, h) = wilson_interval(30, 100, 0.95);
        assert!((c - 0.3).abs() < 0.01 && h > 0.08 && h < 0.1);
        let (c0, h0) = wilson_interval(0, 1000, 0.95);
        assert!(c0 > 0.0 && c0 - h0 <= 1e-15);
        assert!((z_score(0.95) - 1.959963984540054).abs() < 1e-9);
    }

    #[test]
    fn report_fields() {
        let t = Tally { samples: 1000, lost: 200, wrong: 40, pauli: [10, 20, 10], extra: 0 };
        let r = report_from_tally(&t, &McConfig::new(1000, 5), true);
        assert_eq!(r.effective_loss, 0.2);
        assert_eq!(r.effective_error, 0.05);
        assert_eq!(r.joint_error, 0.04);
        assert_eq!(r.seed(), Some(5));
        assert!(r.ci_half_width().is_some());
        assert_eq!(r.pauli.unwrap().y, 0.025);
    }

    #[test]
    fn rejects_empty_runs() {
        assert!(run(&Coin(0.5), &McConfig::new(0, 1)).is_err());
    }
}
