//! Tree-cluster indirect measurement with optional majority voting.
//!
//! A tree with branching `{b_1, .., b_d}` has its root at depth 0 and `b_k`
//! children per node at depth `k - 1`. The root is always lost and must be
//! measured indirectly. An indirect Z measurement of a node at even depth `k`
//! X-measures one child (depth `k + 1`) and Z-measures all of that child's
//! children (depth `k + 2`), each of which may itself be measured indirectly.
//! Nodes at depth `d` can only be measured directly.
//!
//! For every Z target we track `s`, the probability an outcome is produced, and
//! `w`, the probability a wrong outcome is produced. Subtrees are disjoint, so
//! outcomes of distinct targets are independent and a branch is wrong with the
//! odd-parity probability of its X measurement and its children's conditional
//! error rates `w / s`.

use serde::{Deserialize, Serialize};

use super::binomial::{any_success, binomial_pmf, majority_vote, odd_parity_prob, TiePolicy};
use super::RateReport;
use crate::error::{check_probability, invalid, Result};

/// Largest supported tree size.
pub const MAX_TREE_QUBITS: u64 = 1 << 32;

/// Branching vector `{b_1, .., b_d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct TreeParams {
    branching: Vec<usize>,
}

impl TreeParams {
    pub fn new(branching: Vec<usize>) -> Result<Self> {
        if branching.is_empty() {
            return Err(invalid("branching", "depth must be at least 1"));
        }
        if let Some(i) = branching.iter().position(|&b| b == 0) {
            return Err(invalid("branching", format!("b_{} = 0; every level needs a branch", i + 1)));
        }
        let mut level = 1u64;
        let mut total = 1u64;
        for &b in &branching {
            level = level.saturating_mul(b as u64);
            total = total.saturating_add(level);
        }
        if total > MAX_TREE_QUBITS {
            return Err(invalid("branching", format!("tree exceeds {MAX_TREE_QUBITS} qubits")));
        }
        Ok(Self { branching })
    }

    /// `depth` levels of `b` branches each.
    pub fn uniform(b: usize, depth: usize) -> Result<Self> {
        Self::new(vec![b; depth])
    }

    pub fn branching(&self) -> &[usize] {
        &self.branching
    }

    pub fn depth(&self) -> usize {
        self.branching.len()
    }

    /// Children of a node at `depth`; zero at the leaves.
    pub fn children_at(&self, depth: usize) -> usize {
        self.branching.get(depth).copied().unwrap_or(0)
    }
}

impl TryFrom<Vec<usize>> for TreeParams {
    type Error = crate::Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TreeParams> for Vec<usize> {
    fn from(t: TreeParams) -> Self {
        t.branching
    }
}

impl std::str::FromStr for TreeParams {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| invalid("branching", format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(v)
    }
}

impl std::fmt::Display for TreeParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.branching.iter().map(|b| b.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// How a lost qubit's outcome is assembled from its branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VotePolicy {
    /// Attempt every branch and take a majority; otherwise use the first
    /// branch that succeeds.
    pub voting: bool,
    pub tie: TiePolicy,
    /// Measure present qubits indirectly when possible, falling back to a
    /// direct measurement only when every indirect route fails.
    pub prefer_indirect: bool,
}

impl VotePolicy {
    pub fn voting() -> Self {
        Self { voting: true, ..Self::default() }
    }

    pub fn first_success() -> Self {
        Self::default()
    }

    pub fn with_tie(mut self, tie: TiePolicy) -> Self {
        self.tie = tie;
        self
    }

    pub fn with_prefer_indirect(mut self, on: bool) -> Self {
        self.prefer_indirect = on;
        self
    }
}

/// `1 + sum_k prod_{j<=k} b_j`.
pub fn tree_qubit_count(params: &TreeParams) -> u64 {
    let mut level = 1u64;
    let mut total = 1u64;
    for &b in params.branching() {
        level *= b as u64;
        total += level;
    }
    total
}

/// Two-level uniform tree `{b, b}`, evaluated from the closed two-level
/// expressions. With voting the per-count majority error carries the binomial
/// coefficient and the configured tie rule.
pub fn tree_two_level(b: usize, p_loss: f64, p_local: f64, policy: &VotePolicy) -> Result<RateReport> {
    if b == 0 {
        return Err(invalid("b", "branching must be at least 1"));
    }
    check_probability("p_loss", p_loss)?;
    check_probability("p_local", p_local)?;
    let bu = b as u64;
    let p_im_success = (1.0 - p_loss).powi(b as i32 + 1);
    let p_im_error = odd_parity_prob(bu + 1, p_local);
    if !policy.voting {
        let delivered = any_success(bu, p_im_success);
        return Ok(RateReport::from_delivered(delivered, delivered * p_im_error));
    }
    let mut delivered = 0.0;
    let mut joint = 0.0;
    for m in 1..=bu {
        let p_m = binomial_pmf(bu, m, p_im_success);
        let mut wrong = 0.0;
        let mut abstained = 0.0;
        for j in 0..=m {
            let term = binomial_pmf(m, j, p_im_error);
            if 2 * j > m {
                wrong += term;
            } else if 2 * j == m {
                match policy.tie {
                    TiePolicy::Abstain => abstained += term,
                    TiePolicy::CoinFlip => wrong += 0.5 * term,
                    TiePolicy::Error => wrong += term,
                }
            }
        }
        delivered += p_m * (1.0 - abstained);
        joint += p_m * wrong;
    }
    Ok(RateReport::from_delivered(delivered, joint))
}

/// Recursion quantities for the Z targets at one even depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeLevel {
    pub depth: usize,
    /// Probability a target at this depth yields an outcome.
    pub z_success: f64,
    /// Probability it yields a wrong outcome.
    pub z_wrong: f64,
    /// Success probability of one indirect route below this depth (zero at the leaves).
    pub im_success: f64,
    /// Error probability of one successful indirect route.
    pub im_error: f64,
}

impl TreeLevel {
    /// Error rate of a produced outcome.
    pub fn conditional_error(&self) -> f64 {
        if self.z_success > 0.0 {
            self.z_wrong / self.z_success
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeAnalysis {
    /// Levels at depths 0, 2, 4, ..; the first entry is the (lost) root.
    pub levels: Vec<TreeLevel>,
    pub report: RateReport,
}

/// Full recursive analysis. The report's loss is the probability that the root
/// outcome cannot be inferred (including abstaining votes).
pub fn tree_analysis(params: &TreeParams, p_loss: f64, p_local: f64, policy: &VotePolicy) -> Result<TreeAnalysis> {
    check_probability("p_loss", p_loss)?;
    check_probability("p_local", p_local)?;
    let d = params.depth();
    let mut levels = Vec::new();
    // (s, w) of the Z targets two levels below the one being evaluated
    let mut below: Option<(f64, f64)> = None;
    let top = d - d % 2;
    for k in (0..=top).rev().step_by(2) {
        let branches = params.children_at(k);
        let level = if branches == 0 {
            TreeLevel { depth: k, z_success: 1.0 - p_loss, z_wrong: (1.0 - p_loss) * p_local, im_success: 0.0, im_error: 0.0 }
        } else {
            let grand = params.children_at(k + 1);
            let (s2, w2) = below.unwrap_or((1.0, 0.0));
            let c2 = if s2 > 0.0 { w2 / s2 } else { 0.0 };
            let im_success = (1.0 - p_loss) * s2.powi(grand as i32);
            let im_error = (1.0 - (1.0 - 2.0 * p_local) * (1.0 - 2.0 * c2).powi(grand as i32)) / 2.0;
            let (ind_s, ind_w) = indirect(branches as u64, im_success, im_error, policy);
            let (s, w) = if k == 0 {
                (ind_s, ind_w)
            } else if policy.prefer_indirect {
                let fallback = (1.0 - ind_s) * (1.0 - p_loss);
                (ind_s + fallback, ind_w + fallback * p_local)
            } else {
                ((1.0 - p_loss) + p_loss * ind_s, (1.0 - p_loss) * p_local + p_loss * ind_w)
            };
            TreeLevel { depth: k, z_success: s, z_wrong: w, im_success, im_error }
        };
        below = Some((level.z_success, level.z_wrong));
        levels.push(level);
    }
    levels.reverse();
    let root = levels[0];
    let report = RateReport::from_delivered(root.z_success, root.z_wrong);
    Ok(TreeAnalysis { levels, report })
}

/// Combines `b` independent routes, each succeeding with `ims` and then wrong
/// with `pie`, into `(P(outcome), P(wrong outcome))`.
fn indirect(b: u64, ims: f64, pie: f64, policy: &VotePolicy) -> (f64, f64) {
    let any = any_success(b, ims);
    if !policy.voting {
        return (any, any * pie);
    }
    let (mut s, mut w) = (0.0, 0.0);
    for m in 1..=b {
        let p_m = binomial_pmf(b, m, ims);
        let v = majority_vote(m, pie, policy.tie);
        s += p_m * (1.0 - v.abstain);
        w += p_m * v.wrong;
    }
    (s, w)
}

/// Effective loss and error of the root of an arbitrary tree.
pub fn tree_general(params: &TreeParams, p_loss: f64, p_local: f64, policy: &VotePolicy) -> Result<RateReport> {
    Ok(tree_analysis(params, p_loss, p_local, policy)?.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn policies() -> Vec<VotePolicy> {
        let mut v = vec![VotePolicy::first_success()];
        for tie in [TiePolicy::Abstain, TiePolicy::CoinFlip, TiePolicy::Error] {
            v.push(VotePolicy::voting().with_tie(tie));
        }
        v
    }

    #[test]
    fn qubit_counts() {
        assert_eq!(tree_qubit_count(&TreeParams::new(vec![3, 3]).unwrap()), 13);
        assert_eq!(tree_qubit_count(&TreeParams::new(vec![2]).unwrap()), 3);
        assert_eq!(tree_qubit_count(&TreeParams::new(vec![4, 5, 2]).unwrap()), 1 + 4 + 20 + 40);
    }

    #[test]
    fn params_validation_and_parsing() {
        assert!(TreeParams::new(vec![]).is_err());
        assert!(TreeParams::new(vec![3, 0]).is_err());
        assert!(TreeParams::new(vec![1 << 20; 3]).is_err());
        let t: TreeParams = "3, 2,4".parse().unwrap();
        assert_eq!(t.branching(), &[3, 2, 4]);
        assert_eq!(t.to_string(), "3,2,4");
        assert!("3,x".parse::<TreeParams>().is_err());
    }

    #[test]
    fn depth_two_matches_two_level() {
        for b in 1..=8 {
            let t = TreeParams::uniform(b, 2).unwrap();
            for pl in [0.0, 0.05, 0.195, 0.4, 1.0] {
                for pe in [0.0, 1e-3, 0.02, 0.5] {
                    for pol in policies() {
                        let a = tree_general(&t, pl, pe, &pol).unwrap();
                        let r = tree_two_level(b, pl, pe, &pol).unwrap();
                        assert!((a.effective_loss - r.effective_loss).abs() < 1e-12, "b={b} {pl} {pe} {pol:?}");
                        assert!((a.joint_error - r.joint_error).abs() < 1e-12);
                        assert!((a.effective_error - r.effective_error).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn two_level_loss_formula() {
        for b in 1..=6 {
            let pl: f64 = 0.17;
            let r = tree_two_level(b, pl, 1e-3, &VotePolicy::first_success()).unwrap();
            let expect = (1.0 - (1.0 - pl).powi(b as i32 + 1)).powi(b as i32);
            assert!((r.effective_loss - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn star_is_direct() {
        // depth one: each branch is a single X measurement
        let t = TreeParams::new(vec![4]).unwrap();
        let r = tree_general(&t, 0.3, 0.01, &VotePolicy::first_success()).unwrap();
        assert!((r.effective_loss - 0.3f64.powi(4)).abs() < 1e-15);
        assert!((r.effective_error - 0.01).abs() < 1e-15);
    }

    #[test]
    fn no_local_error_no_effective_error() {
        for pol in policies() {
            for t in [vec![3, 3], vec![2, 2, 2], vec![4, 1, 3, 2]] {
                let t = TreeParams::new(t).unwrap();
                for pl in [0.0, 0.1, 0.3, 0.6] {
                    assert_eq!(tree_general(&t, pl, 0.0, &pol).unwrap().joint_error, 0.0);
                }
            }
        }
    }

    #[test]
    fn lossless_without_voting_is_single_branch_parity() {
        for t in [vec![3, 3], vec![2, 5, 2], vec![3, 2, 2, 2]] {
            let t = TreeParams::new(t).unwrap();
            let r = tree_general(&t, 0.0, 2e-3, &VotePolicy::first_success()).unwrap();
            assert_eq!(r.effective_loss, 0.0);
            let expect = odd_parity_prob(t.children_at(1) as u64 + 1, 2e-3);
            assert!((r.effective_error - expect).abs() < 1e-15);
            // every non-root target is read directly at the local rate
            let a = tree_analysis(&t, 0.0, 2e-3, &VotePolicy::first_success()).unwrap();
            for level in &a.levels[1..] {
                assert!((level.conditional_error() - 2e-3).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn headline_operating_point() {
        let off = tree_two_level(3, 0.195, 1e-3, &VotePolicy::first_success()).unwrap();
        let on = tree_two_level(3, 0.195, 1e-3, &VotePolicy::voting()).unwrap();
        assert!((off.effective_error - 3.988e-3).abs() < 1e-6);
        assert!((on.joint_error - 1.699e-3).abs() < 1e-6, "{}", on.joint_error);
        assert!(on.effective_error < off.effective_error);
    }

    #[test]
    fn voting_break_even_near_one_tenth() {
        let at = |pl| tree_two_level(3, pl, 1e-3, &VotePolicy::voting()).unwrap().effective_error;
        assert!(at(0.09) < 1e-3);
        assert!(at(0.11) > 1e-3);
    }

    #[test]
    fn prefer_indirect_never_hurts_deep_trees() {
        let t = TreeParams::new(vec![3, 3, 3, 3]).unwrap();
        let pol = VotePolicy::voting();
        let plain = tree_general(&t, 0.05, 1e-2, &pol).unwrap();
        let pref = tree_general(&t, 0.05, 1e-2, &pol.with_prefer_indirect(true)).unwrap();
        assert!(pref.effective_error < plain.effective_error);
        assert!(pref.effective_loss <= plain.effective_loss + 1e-15);
    }

    #[test]
    fn error_need_not_grow_with_loss() {
        // heavy loss removes the noisier indirect routes, so surviving outcomes
        // are mostly direct reads
        let t = TreeParams::new(vec![1, 1, 1, 3]).unwrap();
        let pol = VotePolicy::first_success();
        let mid = tree_general(&t, 0.18, 1e-3, &pol).unwrap().effective_error;
        let high = tree_general(&t, 0.37, 1e-3, &pol).unwrap().effective_error;
        assert!(high < mid);
    }

    proptest! {
        #[test]
        fn outputs_are_probabilities(
            br in proptest::collection::vec(1usize..5, 1..5),
            pl in 0.0f64..=1.0, pe in 0.0f64..=1.0, voting: bool, pref: bool, tie in 0u8..3,
        ) {
            let tie = [TiePolicy::Abstain, TiePolicy::CoinFlip, TiePolicy::Error][tie as usize];
            let pol = VotePolicy { voting, tie, prefer_indirect: pref };
            let r = tree_general(&TreeParams::new(br).unwrap(), pl, pe, &pol).unwrap();
            for v in [r.effective_loss, r.effective_error, r.joint_error] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(r.joint_error <= 1.0 - r.effective_loss + 1e-12);
        }

        #[test]
        fn loss_monotone_in_p_loss(
            br in proptest::collection::vec(1usize..5, 1..5),
            a in 0.0f64..0.5, b in 0.0f64..0.5, voting: bool,
        ) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let t = TreeParams::new(br).unwrap();
            let pol = VotePolicy { voting, ..VotePolicy::default() };
            let r_lo = tree_general(&t, lo, 1e-3, &pol).unwrap();
            let r_hi = tree_general(&t, hi, 1e-3, &pol).unwrap();
            prop_assert!(r_lo.effective_loss <= r_hi.effective_loss + 1e-12);
        }

        #[test]
        fn error_monotone_in_p_local(
            br in proptest::collection::vec(1usize..5, 1..5),
            pl in 0.0f64..0.5, a in 0.0f64..0.5, b in 0.0f64..0.5, voting: bool, pref: bool,
        ) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let t = TreeParams::new(br).unwrap();
            let pol = VotePolicy { voting, tie: TiePolicy::CoinFlip, prefer_indirect: pref };
            let e_lo = tree_general(&t, pl, lo, &pol).unwrap().effective_error;
            let e_hi = tree_general(&t, pl, hi, &pol).unwrap().effective_error;
            prop_assert!(e_lo <= e_hi + 1e-12);
        }
    }
}
