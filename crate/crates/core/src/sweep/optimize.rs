use serde::{Deserialize, Serialize};

use crate::error::{check_probability, invalid, Result};
use crate::rates::{tree_general, tree_qubit_count, RateReport, TreeParams, VotePolicy};

/// Largest branching considered at any level.
pub const MAX_BRANCH: usize = 16;
/// Deepest tree considered.
pub const MAX_DEPTH: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeQuery {
    /// Maximum qubits per tree, root included.
    pub budget: u64,
    pub p_loss: f64,
    pub p_local: f64,
    /// Largest acceptable effective loss.
    pub loss_target: f64,
    pub min_depth: usize,
    pub max_depth: usize,
    pub policy: VotePolicy,
}

impl OptimizeQuery {
    pub fn new(budget: u64, p_loss: f64, p_local: f64, loss_target: f64) -> Self {
        Self { budget, p_loss, p_local, loss_target, min_depth: 1, max_depth: MAX_DEPTH, policy: VotePolicy::default() }
    }

    fn validate(&self) -> Result<()> {
        check_probability("p_loss", self.p_loss)?;
        check_probability("p_local", self.p_local)?;
        check_probability("loss target", self.loss_target)?;
        if self.min_depth == 0 || self.min_depth > self.max_depth || self.max_depth > MAX_DEPTH {
            return Err(invalid("depth range", format!("{}..={} not within 1..={MAX_DEPTH}", self.min_depth, self.max_depth)));
        }
        if self.budget < 2 {
            return Err(invalid("budget", format!("{} qubits cannot hold a root and a branch", self.budget)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OptimizeOutcome {
    Found { params: TreeParams, qubits: u64, report: RateReport, evaluated: u64 },
    /// No tree within budget meets the loss target; reports the lowest-loss candidate.
    Infeasible { evaluated: u64, lowest_loss: Option<(TreeParams, f64)> },
}

/// Exhaustive search over branching vectors in lexicographic order, pruned by
/// the qubit budget. Minimises effective error subject to the loss target;
/// among equal errors the lexicographically smallest vector wins.
pub fn optimize_branching(q: &OptimizeQuery) -> Result<OptimizeOutcome> {
    q.validate()?;
    let mut best: Option<(TreeParams, RateReport)> = None;
    let mut lowest: Option<(TreeParams, f64)> = None;
    let mut evaluated = 0u64;
    let mut stack = vec![];
    visit(q, &mut stack, 1, 1, &mut |branching: &[usize]| {
        let params = TreeParams::new(branching.to_vec())?;
        let r = tree_general(&params, q.p_loss, q.p_local, &q.policy)?;
        evaluated += 1;
        if lowest.as_ref().is_none_or(|(_, l)| r.effective_loss < *l) {
            lowest = Some((params.clone(), r.effective_loss));
        }
        if r.effective_loss <= q.loss_target && best.as_ref().is_none_or(|(_, b)| r.effective_error < b.effective_error) {
            best = Some((params, r));
        }
        Ok(())
    })?;
    Ok(match best {
        Some((params, report)) => OptimizeOutcome::Found { qubits: tree_qubit_count(&params), params, report, evaluated },
        None => OptimizeOutcome::Infeasible { evaluated, lowest_loss: lowest },
    })
}

/// Pre-order walk: a vector is visited before its extensions, and siblings in
/// increasing order, which is lexicographic order.
fn visit(
    q: &OptimizeQuery,
    stack: &mut Vec<usize>,
    width: u64,
    total: u64,
    f: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if stack.len() == q.max_depth {
        return Ok(());
    }
    for b in 1..=MAX_BRANCH {
        let w = width * b as u64;
        if total + w > q.budget {
            break;
        }
        stack.push(b);
        if stack.len() >= q.min_depth {
            f(stack)?;
        }
        visit(q, stack, w, total + w, f)?;
        stack.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent enumeration: all vectors, filtered and ranked afterwards.
    fn brute(q: &OptimizeQuery) -> Option<Vec<usize>> {
        let mut all: Vec<Vec<usize>> = vec![vec![]];
        let mut found = vec![];
        for _ in 0..q.max_depth {
            let mut next = vec![];
            for v in &all {
                for b in 1..=MAX_BRANCH {
                    let mut w = v.clone();
                    w.push(b);
                    next.push(w);
                }
            }
            found.extend(next.iter().cloned());
            all = next;
        }
        let mut ok: Vec<(f64, Vec<usize>)> = found
            .into_iter()
            .filter(|v| v.len() >= q.min_depth)
            .filter_map(|v| {
                let t = TreeParams::new(v.clone()).ok()?;
                if tree_qubit_count(&t) > q.budget {
                    return None;
                }
                let r = tree_general(&t, q.p_loss, q.p_local, &q.policy).ok()?;
                (r.effective_loss <= q.loss_target).then_some((r.effective_error, v))
            })
            .collect();
        ok.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        ok.into_iter().next().map(|(_, v)| v)
    }

    #[test]
    fn matches_brute_force() {
        for (budget, pl, target, voting) in [(40, 0.1, 0.05, true), (60, 0.2, 0.1, false), (25, 0.05, 1.0, true), (80, 0.3, 0.2, true)] {
            let mut q = OptimizeQuery::new(budget, pl, 1e-3, target);
            q.max_depth = 3;
            q.policy.voting = voting;
            let got = match optimize_branching(&q).unwrap() {
                OptimizeOutcome::Found { params, .. } => Some(params.branching().to_vec()),
                OptimizeOutcome::Infeasible { .. } => None,
            };
            assert_eq!(got, brute(&q), "budget {budget} p_loss {pl}");
        }
    }

    #[test]
    fn tiny_budget_gives_trivial_tree() {
        let q = OptimizeQuery::new(3, 0.1, 1e-3, 1.0);
        match optimize_branching(&q).unwrap() {
            OptimizeOutcome::Found { params, qubits, .. } => {
                assert_eq!(params.branching(), &[1]);
                assert_eq!(qubits, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unreachable_target_is_infeasible() {
        let q = OptimizeQuery::new(10, 0.4, 1e-3, 1e-6);
        match optimize_branching(&q).unwrap() {
            OptimizeOutcome::Infeasible { evaluated, lowest_loss } => {
                assert!(evaluated > 0);
                assert!(lowest_loss.unwrap().1 > 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn budget_is_respected() {
        let q = OptimizeQuery::new(200, 0.15, 1e-3, 0.01);
        if let OptimizeOutcome::Found { qubits, .. } = optimize_branching(&q).unwrap() {
            assert!(qubits <= 200);
        }
        assert!(optimize_branching(&OptimizeQuery { max_depth: 6, ..q.clone() }).is_err());
        assert!(optimize_branching(&OptimizeQuery { budget: 1, ..q }).is_err());
    }
}
