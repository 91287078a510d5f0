//! Indirect Z measurement of a lost tree root.
//!
//! Losses and measurement errors are drawn lazily as the protocol touches each
//! qubit, which is equivalent to drawing them all up front because every qubit
//! is visited at most once. Qubits are labelled in breadth-first order.

use rand::Rng;

use super::{replay, report_from_tally, run, Event, McConfig, Protocol, ProtocolTrace, Recorder, Tally};
use crate::error::{check_probability, Result};
use crate::rates::{RateReport, TiePolicy, TreeParams, VotePolicy};
use crate::stabilizer::Basis;

struct TreeSim {
    params: TreeParams,
    p_loss: f64,
    p_local: f64,
    policy: VotePolicy,
    /// BFS label of the first node at each depth.
    offsets: Vec<u64>,
}

impl TreeSim {
    fn new(params: &TreeParams, p_loss: f64, p_local: f64, policy: VotePolicy) -> Self {
        let mut offsets = vec![0u64];
        let mut width = 1u64;
        for &b in params.branching() {
            offsets.push(offsets.last().unwrap() + width);
            width *= b as u64;
        }
        Self { params: params.clone(), p_loss, p_local, policy, offsets }
    }

    fn label(&self, depth: usize, index: u64) -> u64 {
        self.offsets[depth] + index
    }

    fn is_lost<R: Rng + ?Sized, T: Recorder + ?Sized>(&self, depth: usize, index: u64, rng: &mut R, tr: &mut T) -> bool {
        let lost = rng.gen::<f64>() < self.p_loss;
        if lost && tr.enabled() {
            tr.record(Event::Lost { qubit: self.label(depth, index) });
        }
        lost
    }

    fn read<R: Rng + ?Sized, T: Recorder + ?Sized>(&self, depth: usize, index: u64, basis: Basis, rng: &mut R, tr: &mut T) -> bool {
        let wrong = rng.gen::<f64>() < self.p_local;
        if tr.enabled() {
            tr.record(Event::measured(self.label(depth, index), basis, wrong));
        }
        wrong
    }

    /// Direct Z read; `None` if the qubit is lost.
    fn direct<R: Rng + ?Sized, T: Recorder + ?Sized>(&self, depth: usize, index: u64, rng: &mut R, tr: &mut T) -> Option<bool> {
        if self.is_lost(depth, index, rng, tr) {
            None
        } else {
            Some(self.read(depth, index, Basis::Z, rng, tr))
        }
    }

    /// Z outcome of the target at (`depth`, `index`): `Some(wrong)` or `None` on failure.
    fn z_target<R: Rng + ?Sized, T: Recorder + ?Sized>(&self, depth: usize, index: u64, rng: &mut R, tr: &mut T) -> Option<bool> {
        if depth == 0 {
            return self.indirect(0, 0, rng, tr);
        }
        if self.params.children_at(depth) == 0 {
            return self.direct(depth, index, rng, tr);
        }
        if self.policy.prefer_indirect {
            self.indirect(depth, index, rng, tr).or_else(|| self.direct(depth, index, rng, tr))
        } else {
            self.direct(depth, index, rng, tr).or_else(|| self.indirect(depth, index, rng, tr))
        }
    }

    fn indirect<R: Rng + ?Sized, T: Recorder + ?Sized>(&self, depth: usize, index: u64, rng: &mut R, tr: &mut T) -> Option<bool> {
        let b = self.params.children_at(depth) as u64;
        if !self.policy.voting {
            return (0..b).find_map(|c| self.branch(depth + 1, index * b + c, rng, tr));
        }
        let (mut votes, mut wrong_votes) = (0u64, 0u64);
        for c in 0..b {
            if let Some(w) = self.branch(depth + 1, index * b + c, rng, tr) {
                votes += 1;
                wrong_votes += w as u64;
            }
        }
        let (result, tag) = match (2 * wrong_votes).cmp(&votes) {
            _ if votes == 0 => (None, "none"),
            std::cmp::Ordering::Greater => (Some(true), "majority"),
            std::cmp::Ordering::Less => (Some(false), "majority"),
            std::cmp::Ordering::Equal => match self.policy.tie {
                TiePolicy::Abstain => (None, "tie_abstain"),
                TiePolicy::CoinFlip => (Some(rng.gen::<bool>()), "tie_coin"),
                TiePolicy::Error => (Some(true), "tie_error"),
            },
        };
        if tr.enabled() {
            tr.record(Event::Vote { votes, wrong_votes, result: tag });
        }
        result
    }

    /// One route through the X-measured node (`depth`, `index`).
    fn branch<R: Rng + ?Sized, T: Recorder + ?Sized>(&self, depth: usize, index: u64, rng: &mut R, tr: &mut T) -> Option<bool> {
        if self.is_lost(depth, index, rng, tr) {
            return None;
        }
        let mut wrong = self.read(depth, index, Basis::X, rng, tr);
        let g = self.params.children_at(depth) as u64;
        for c in 0..g {
            wrong ^= self.z_target(depth + 1, index * g + c, rng, tr)?;
        }
        Some(wrong)
    }
}

impl Protocol for TreeSim {
    fn sample<R: Rng + ?Sized, T: Recorder + ?Sized>(&self, rng: &mut R, trace: &mut T, tally: &mut Tally) {
        tally.samples += 1;
        match self.z_target(0, 0, rng, trace) {
            None => tally.lost += 1,
            Some(true) => tally.wrong += 1,
            Some(false) => {}
        }
    }
}

/// Samples the indirect measurement of a lost tree root.
pub fn mc_tree_indirect(
    params: &TreeParams,
    p_loss: f64,
    p_local: f64,
    policy: &VotePolicy,
    cfg: &McConfig,
) -> Result<RateReport> {
    check_probability("p_loss", p_loss)?;
    check_probability("p_local", p_local)?;
    let tally = run(&TreeSim::new(params, p_loss, p_local, *policy), cfg)?;
    Ok(report_from_tally(&tally, cfg, false))
}

/// Event log of sample `index` of a seeded [`mc_tree_indirect`] run.
pub fn trace_tree_indirect(
    params: &TreeParams,
    p_loss: f64,
    p_local: f64,
    policy: &VotePolicy,
    seed: u64,
    index: u64,
) -> ProtocolTrace {
    replay(&TreeSim::new(params, p_loss, p_local, *policy), "tree", seed, index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::standard_error;
    use crate::rates::{odd_parity_prob, tree_general};

    fn within(mc: &RateReport, exact: &RateReport, k: f64) {
        let s = mc.sampling.unwrap();
        let sl = standard_error(exact.effective_loss, s.samples);
        let se = standard_error(exact.effective_error, s.error_trials);
        assert!((mc.effective_loss - exact.effective_loss).abs() <= k * sl + 1e-12, "loss {mc:?} vs {exact:?}");
        assert!((mc.effective_error - exact.effective_error).abs() <= k * se + 1e-12, "error {mc:?} vs {exact:?}");
    }

    #[test]
    fn lossless_single_branch_parity() {
        let t = TreeParams::new(vec![3, 3]).unwrap();
        let r = mc_tree_indirect(&t, 0.0, 0.05, &VotePolicy::first_success(), &McConfig::new(100_000, 2)).unwrap();
        assert_eq!(r.effective_loss, 0.0);
        let p = odd_parity_prob(4, 0.05);
        assert!((r.effective_error - p).abs() < 4.0 * standard_error(p, 100_000));
    }

    #[test]
    fn agrees_with_recursion_across_shapes_and_policies() {
        let shapes = [vec![3, 3], vec![2, 2, 2], vec![3, 1, 2], vec![2, 3, 2, 2]];
        let policies = [
            VotePolicy::first_success(),
            VotePolicy::voting(),
            VotePolicy::voting().with_tie(TiePolicy::CoinFlip),
            VotePolicy::voting().with_tie(TiePolicy::Error),
            VotePolicy::voting().with_prefer_indirect(true),
            VotePolicy::first_success().with_prefer_indirect(true),
        ];
        let mut seed = 100;
        for shape in shapes {
            let t = TreeParams::new(shape).unwrap();
            for pol in policies {
                seed += 1;
                let mc = mc_tree_indirect(&t, 0.2, 0.03, &pol, &McConfig::new(60_000, seed)).unwrap();
                let exact = tree_general(&t, 0.2, 0.03, &pol).unwrap();
                within(&mc, &exact, 4.5);
            }
        }
    }

    #[test]
    fn trace_labels_are_breadth_first() {
        let t = TreeParams::new(vec![2, 2]).unwrap();
        let tr = trace_tree_indirect(&t, 0.0, 0.0, &VotePolicy::voting(), 1, 0);
        let qubits: Vec<u64> = tr
            .events
            .iter()
            .filter_map(|e| match e {
                Event::Measured { qubit, .. } => Some(*qubit),
                _ => None,
            })
            .collect();
        assert_eq!(qubits, vec![1, 3, 4, 2, 5, 6]);
        assert!(matches!(tr.events.last(), Some(Event::Vote { votes: 2, wrong_votes: 0, .. })));
        assert!(!tr.lost && !tr.wrong);
    }
}
