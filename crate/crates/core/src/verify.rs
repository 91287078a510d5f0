//! Cross-engine self-check: closed forms against each other, analytic rates
//! against Monte-Carlo, propagation rules against the tableau, and the tableau
//! against a state vector.
//!
//! Output is a function of mode and seed only, never of timing or worker count.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::mc::{
    mc_duan_bond, mc_parity_reencode, mc_tree_indirect, mc_vs_tableau_differential, standard_error, tableau_vs_dense,
    DifferentialGraph, DifferentialReport, McConfig,
};
use crate::rates::{
    duan_bond, odd_parity_closed_form, odd_parity_prob, parity_reencode_error, tree_general, tree_two_level, DuanParams,
    ErrorModel, ParityParams, RateReport, TiePolicy, TreeParams, VotePolicy,
};

/// Sigma multiple for analytic-versus-sampled checks. Wider than the per-point
/// sweep threshold so that a few dozen checks together rarely trip by chance.
pub const VERIFY_SIGMAS: f64 = 4.0;
/// Absolute tolerance for identities between closed forms.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    /// Reduced grid and sample counts.
    Quick,
    #[default]
    Full,
}

impl FromStr for VerifyMode {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(VerifyMode::Quick),
            "full" => Ok(VerifyMode::Full),
            _ => Err(invalid("verify mode", format!("{s:?} (expected quick or full)"))),
        }
    }
}

impl fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerifyMode::Quick => "quick",
            VerifyMode::Full => "full",
        })
    }
}

/// Analytic formulas under test. Swapping one out shows whether the suite
/// notices a wrong formula.
#[derive(Clone, Copy)]
pub struct Formulas {
    pub parity: fn(f64, &ParityParams) -> Result<f64>,
    pub tree: fn(&TreeParams, f64, f64, &VotePolicy) -> Result<RateReport>,
    pub duan: fn(&DuanParams, &ErrorModel) -> RateReport,
}

impl Default for Formulas {
    fn default() -> Self {
        Self { parity: parity_reencode_error, tree: tree_general, duan: duan_bond }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub group: &'static str,
    pub name: String,
    pub passed: bool,
    /// Sigmas for sampled checks, absolute deviation for identities, mismatch
    /// count for differential checks.
    pub value: f64,
    pub limit: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub mode: VerifyMode,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let failed = self.failures().count();
        writeln!(f, "verify mode={} seed={} checks={} failed={}", self.mode, self.seed, self.checks.len(), failed)?;
        for c in &self.checks {
            writeln!(
                f,
                "{} group={} check={} value={:.6e} limit={:.6e} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.group,
                c.name,
                c.value,
                c.limit,
                c.detail
            )?;
        }
        Ok(())
    }
}

struct Plan {
    mc_samples: u64,
    tree_samples: u64,
    linear: Vec<usize>,
    complete: Vec<usize>,
    patterns: u64,
    dense_qubits: usize,
    dense_sequences: u64,
}

impl Plan {
    fn for_mode(mode: VerifyMode) -> Plan {
        match mode {
            VerifyMode::Quick => Plan {
                mc_samples: 50_000,
                tree_samples: 20_000,
                linear: vec![3, 6],
                complete: vec![3, 5],
                patterns: 2_000,
                dense_qubits: 8,
                dense_sequences: 100,
            },
            VerifyMode::Full => Plan {
                mc_samples: 500_000,
                tree_samples: 500_000,
                linear: (2..=10).collect(),
                complete: (2..=8).collect(),
                patterns: 100_000,
                dense_qubits: 12,
                dense_sequences: 1_000,
            },
        }
    }
}

pub fn verify(mode: VerifyMode, seed: u64, workers: usize) -> Result<VerifyReport> {
    verify_with(mode, seed, workers, &Formulas::default())
}

/// Runs the suite against `formulas`. Each sampled check uses its own seed,
/// derived from `seed` and the check's position.
pub fn verify_with(mode: VerifyMode, seed: u64, workers: usize, formulas: &Formulas) -> Result<VerifyReport> {
    let plan = Plan::for_mode(mode);
    let mut checks = vec![];
    let mut next_seed = seed;
    let mut cfg = |samples: u64| {
        let c = McConfig::new(samples, next_seed).with_workers(workers);
        next_seed = next_seed.wrapping_add(1);
        c
    };

    checks.push(odd_parity_identity());
    checks.push(tree_identity(formulas)?);

    for (n, q, p) in [(4, 3, 0.01), (1, 1, 0.05), (10, 10, 0.1), (6, 2, 0.003)] {
        let params = ParityParams::new(n, q)?;
        let exact = RateReport::exact(0.0, (formulas.parity)(p, &params)?);
        let mc = mc_parity_reencode(&params, &ErrorModel::new(0.0, 0.0, 0.0, 0.0, p)?, &cfg(plan.mc_samples))?;
        checks.push(sampled("parity", format!("n={n};q={q};p={p}"), &exact, &mc));
    }

    let trees: [(&[usize], f64, f64, VotePolicy); 6] = [
        (&[3, 3], 0.1, 1e-3, VotePolicy::voting()),
        (&[3, 3], 0.195, 1e-3, VotePolicy::voting()),
        (&[3, 3], 0.195, 1e-3, VotePolicy::first_success()),
        (&[2, 2, 2], 0.15, 5e-3, VotePolicy::voting()),
        (&[4, 2], 0.2, 0.02, VotePolicy::voting().with_tie(TiePolicy::CoinFlip)),
        (&[2, 3, 2], 0.1, 0.01, VotePolicy::voting().with_prefer_indirect(true)),
    ];
    for (b, p_loss, p_local, policy) in trees {
        let params = TreeParams::new(b.to_vec())?;
        let exact = (formulas.tree)(&params, p_loss, p_local, &policy)?;
        let mc = mc_tree_indirect(&params, p_loss, p_local, &policy, &cfg(plan.tree_samples))?;
        let name = format!("b={params};p_loss={p_loss};p_local={p_local};voting={};tie={}", policy.voting, policy.tie);
        checks.push(sampled("tree", name, &exact, &mc));
    }

    for (p_g, n_l, p) in [(0.99, 11, 1e-3), (0.9, 4, 0.01), (1.0, 6, 0.02)] {
        let params = DuanParams::new(p_g, n_l)?;
        let model = ErrorModel::depolarizing(p)?;
        let exact = (formulas.duan)(&params, &model);
        let mc = mc_duan_bond(&params, &model, &cfg(plan.mc_samples))?.report;
        checks.push(sampled("duan", format!("p_g={p_g};n_l={n_l};p={p}"), &exact, &mc));
    }

    let graphs = plan.linear.iter().map(|&n| DifferentialGraph::Linear(n));
    for g in graphs.chain(plan.complete.iter().map(|&n| DifferentialGraph::Complete(n))) {
        checks.push(differential("propagation", mc_vs_tableau_differential(g, plan.patterns, cfg(0).seed)?));
    }
    checks.push(differential("dense", tableau_vs_dense(plan.dense_qubits, plan.dense_sequences, cfg(0).seed)?));

    Ok(VerifyReport { mode, seed, checks })
}

fn odd_parity_identity() -> Check {
    let mut worst = 0.0f64;
    for n in [1, 2, 3, 5, 10, 50, 100, 500, 1000, 5000] {
        for p in [0.0, 1e-4, 1e-3, 0.01, 0.1, 0.3, 0.5] {
            worst = worst.max((odd_parity_prob(n, p) - odd_parity_closed_form(n, p)).abs());
        }
    }
    Check {
        group: "identity",
        name: "odd-parity-sum-vs-closed-form".into(),
        passed: worst <= IDENTITY_TOL,
        value: worst,
        limit: IDENTITY_TOL,
        detail: "grid=10x7".into(),
    }
}

fn tree_identity(formulas: &Formulas) -> Result<Check> {
    let mut worst = 0.0f64;
    let policies = [
        VotePolicy::voting(),
        VotePolicy::first_success(),
        VotePolicy::voting().with_tie(TiePolicy::CoinFlip),
        VotePolicy::voting().with_tie(TiePolicy::Error),
    ];
    for b in 1..=6 {
        for p_loss in [0.0, 0.05, 0.1, 0.2, 0.4, 0.9] {
            for p_local in [0.0, 1e-3, 0.01, 0.1] {
                for policy in &policies {
                    let general = (formulas.tree)(&TreeParams::uniform(b, 2)?, p_loss, p_local, policy)?;
                    let direct = tree_two_level(b, p_loss, p_local, policy)?;
                    worst = worst
                        .max((general.effective_loss - direct.effective_loss).abs())
                        .max((general.effective_error - direct.effective_error).abs());
                }
            }
        }
    }
    Ok(Check {
        group: "identity",
        name: "tree-recursion-vs-two-level".into(),
        passed: worst <= IDENTITY_TOL,
        value: worst,
        limit: IDENTITY_TOL,
        detail: "b=1..6".into(),
    })
}

fn sigmas(sampled: f64, exact: f64, trials: u64) -> f64 {
    let diff = (sampled - exact).abs();
    if diff <= 1e-12 {
        return 0.0;
    }
    let se = standard_error(exact, trials);
    if se > 0.0 {
        diff / se
    } else {
        f64::INFINITY
    }
}

fn sampled(group: &'static str, name: String, exact: &RateReport, mc: &RateReport) -> Check {
    let s = mc.sampling.expect("sampled report");
    let loss = sigmas(mc.effective_loss, exact.effective_loss, s.samples);
    let error = sigmas(mc.effective_error, exact.effective_error, s.error_trials);
    let worst = loss.max(error);
    Check {
        group,
        name,
        passed: worst <= VERIFY_SIGMAS,
        value: worst,
        limit: VERIFY_SIGMAS,
        detail: format!(
            "loss={:.6e}/{:.6e} error={:.6e}/{:.6e} samples={} seed={}",
            exact.effective_loss, mc.effective_loss, exact.effective_error, mc.effective_error, s.samples, s.seed
        ),
    }
}

fn differential(group: &'static str, r: DifferentialReport) -> Check {
    let mut detail = format!("cases={}", r.cases);
    if let Some(m) = &r.first_mismatch {
        detail.push_str(&format!(" first_mismatch=\"{m}\""));
    }
    Check { group, name: r.label.clone(), passed: r.passed(), value: r.mismatches as f64, limit: 0.0, detail }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes_and_is_reproducible() {
        let a = verify(VerifyMode::Quick, 11, 2).unwrap();
        assert!(a.passed(), "{a}");
        let b = verify(VerifyMode::Quick, 11, 5).unwrap();
        assert_eq!(a.to_string(), b.to_string());
    }

    fn parity_off_by_one(p: f64, params: &ParityParams) -> Result<f64> {
        // one extra measured qubit
        Ok((1.0 - (1.0 - 2.0 * p).powi((params.n + params.q) as i32)) / 2.0)
    }

    fn tree_without_local_errors(params: &TreeParams, p_loss: f64, _: f64, policy: &VotePolicy) -> Result<RateReport> {
        tree_general(params, p_loss, 0.0, policy)
    }

    #[test]
    fn perturbed_formulas_are_caught() {
        let parity = Formulas { parity: parity_off_by_one, ..Formulas::default() };
        let r = verify_with(VerifyMode::Quick, 11, 0, &parity).unwrap();
        assert!(r.failures().any(|c| c.group == "parity"), "{r}");

        let tree = Formulas { tree: tree_without_local_errors, ..Formulas::default() };
        let r = verify_with(VerifyMode::Quick, 11, 0, &tree).unwrap();
        assert!(r.failures().any(|c| c.group == "tree"));
        assert!(r.failures().any(|c| c.name == "tree-recursion-vs-two-level"));
    }
}
