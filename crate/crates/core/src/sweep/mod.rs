//! Parameter sweeps, break-even search and tree-shape optimisation.

mod break_even;
mod optimize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mc::{
    mc_duan_bond, mc_parity_reencode, mc_tree_indirect, standard_error, trace_duan_bond, trace_parity_reencode,
    trace_tree_indirect, McConfig, ProtocolTrace,
};
use crate::rates::{
    duan_arm_length, duan_bond, parity_reencode_error, tree_general, DuanParams, ErrorModel, ParityParams, RateReport,
    TreeParams, VotePolicy,
};

pub use break_even::{bisect, find_break_even, BreakEven, BreakEvenKind, BreakEvenQuery};
pub use optimize::{optimize_branching, OptimizeOutcome, OptimizeQuery, MAX_BRANCH, MAX_DEPTH};

/// Sigma multiple used by agreement checks between engines.
pub const AGREEMENT_SIGMAS: f64 = 3.0;

/// Target cluster size and failure tolerance from which the bonding arm length
/// is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmTarget {
    pub n_target: u64,
    pub epsilon: f64,
}

/// A fully specified scheme instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Scenario {
    Duan {
        params: DuanParams,
        model: ErrorModel,
        /// When set, the arm length follows `p_g` through the sizing formula.
        #[serde(default)]
        target: Option<ArmTarget>,
    },
    Tree { params: TreeParams, p_loss: f64, p_local: f64, policy: VotePolicy },
    Parity { params: ParityParams, p: f64 },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Duan { .. } => "duan",
            Scenario::Tree { .. } => "tree",
            Scenario::Parity { .. } => "parity",
        }
    }

    pub fn analytic(&self) -> Result<RateReport> {
        match self {
            Scenario::Duan { params, model, .. } => {
                model.validate()?;
                Ok(duan_bond(params, model))
            }
            Scenario::Tree { params, p_loss, p_local, policy } => tree_general(params, *p_loss, *p_local, policy),
            Scenario::Parity { params, p } => Ok(RateReport::exact(0.0, parity_reencode_error(*p, params)?)),
        }
    }

    pub fn monte_carlo(&self, cfg: &McConfig) -> Result<RateReport> {
        match self {
            Scenario::Duan { params, model, .. } => Ok(mc_duan_bond(params, model, cfg)?.report),
            Scenario::Tree { params, p_loss, p_local, policy } => mc_tree_indirect(params, *p_loss, *p_local, policy, cfg),
            Scenario::Parity { params, p } => {
                let model = ErrorModel::new(0.0, 0.0, 0.0, 0.0, *p)?;
                mc_parity_reencode(params, &model, cfg)
            }
        }
    }

    /// Event log of sample `index` of a Monte-Carlo run seeded with `seed`.
    pub fn trace(&self, seed: u64, index: u64) -> Result<ProtocolTrace> {
        Ok(match self {
            Scenario::Duan { params, model, .. } => trace_duan_bond(params, model, seed, index),
            Scenario::Tree { params, p_loss, p_local, policy } => {
                trace_tree_indirect(params, *p_loss, *p_local, policy, seed, index)
            }
            Scenario::Parity { params, p } => {
                trace_parity_reencode(params, &ErrorModel::new(0.0, 0.0, 0.0, 0.0, *p)?, seed, index)
            }
        })
    }

    /// Unrounded arm length for a bonding scenario sized from a target.
    pub fn arm_length_exact(&self) -> Option<f64> {
        match self {
            Scenario::Duan { params, target: Some(t), .. } => {
                duan_arm_length(params.p_g, t.n_target, t.epsilon).ok().map(|a| a.exact)
            }
            Scenario::Duan { params, .. } => Some(params.arm_length as f64),
            _ => None,
        }
    }

    /// Copy with one parameter replaced.
    pub fn with(&self, param: SweepParam, value: f64) -> Result<Scenario> {
        let count = || -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(invalid("sweep value", format!("{param} needs a whole number, got {value}")))
            }
        };
        let mismatch = || invalid("sweep parameter", format!("{param} does not apply to the {} scheme", self.name()));
        let mut next = self.clone();
        match (&mut next, param) {
            (Scenario::Duan { model, .. }, SweepParam::PError) => {
                *model = ErrorModel::new(model.p_loss, value / 3.0, value / 3.0, value / 3.0, model.p_local)?;
            }
            (Scenario::Duan { params, target, .. }, SweepParam::PGate) => {
                *params = match target {
                    Some(t) => DuanParams::from_target(value, t.n_target, t.epsilon)?,
                    None => DuanParams::new(value, params.arm_length)?,
                }
            }
            (Scenario::Duan { params, target, .. }, SweepParam::ArmLength) => {
                *params = DuanParams::new(params.p_g, count()?)?;
                *target = None;
            }
            (Scenario::Tree { p_loss, .. }, SweepParam::PLoss) => *p_loss = value,
            (Scenario::Tree { p_local, .. }, SweepParam::PLocal | SweepParam::PError) => *p_local = value,
            (Scenario::Tree { params, .. }, SweepParam::Branching) => *params = TreeParams::uniform(count()?, params.depth())?,
            (Scenario::Parity { p, .. }, SweepParam::PLocal | SweepParam::PError) => *p = value,
            (Scenario::Parity { params, .. }, SweepParam::ParityN) => *params = ParityParams::new(count()? as u64, params.q)?,
            (Scenario::Parity { params, .. }, SweepParam::ParityQ) => *params = ParityParams::new(params.n, count()? as u64)?,
            _ => return Err(mismatch()),
        }
        Ok(next)
    }
}

/// Sweepable parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    PLoss,
    PLocal,
    /// Total depolarizing rate (split evenly over X, Y, Z for the bonding scheme).
    PError,
    PGate,
    ArmLength,
    /// Uniform branching at fixed depth.
    Branching,
    ParityN,
    ParityQ,
}

impl SweepParam {
    pub const ALL: [SweepParam; 8] = [
        SweepParam::PLoss,
        SweepParam::PLocal,
        SweepParam::PError,
        SweepParam::PGate,
        SweepParam::ArmLength,
        SweepParam::Branching,
        SweepParam::ParityN,
        SweepParam::ParityQ,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::PLoss => "p_loss",
            SweepParam::PLocal => "p_local",
            SweepParam::PError => "p_error",
            SweepParam::PGate => "p_g",
            SweepParam::ArmLength => "n_l",
            SweepParam::Branching => "b",
            SweepParam::ParityN => "n",
            SweepParam::ParityQ => "q",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace('-', "_");
        let alias = match s.as_str() {
            "p" => Some(SweepParam::PError),
            "pg" => Some(SweepParam::PGate),
            "branching" => Some(SweepParam::Branching),
            _ => None,
        };
        alias.or_else(|| Self::ALL.into_iter().find(|p| p.as_str() == s)).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|p| p.as_str()).collect();
            invalid("sweep parameter", format!("{s:?} (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Analytic,
    Mc,
    Both,
}

impl FromStr for Engine {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "mc" => Ok(Engine::Mc),
            "both" => Ok(Engine::Both),
            _ => Err(invalid("engine", format!("{s:?} (expected analytic, mc or both)"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Analytic => "analytic",
            Engine::Mc => "mc",
            Engine::Both => "both",
        })
    }
}

/// Distance between a sampled and an exact report in binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub loss_sigmas: f64,
    pub error_sigmas: f64,
    pub agree: bool,
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

/// Compares `mc` with `exact` at [`AGREEMENT_SIGMAS`].
pub fn agreement(exact: &RateReport, mc: &RateReport) -> Agreement {
    let s = mc.sampling.expect("sampled report");
    let loss_sigmas = sigmas(mc.effective_loss, exact.effective_loss, s.samples);
    let error_sigmas = sigmas(mc.effective_error, exact.effective_error, s.error_trials);
    Agreement { loss_sigmas, error_sigmas, agree: loss_sigmas <= AGREEMENT_SIGMAS && error_sigmas <= AGREEMENT_SIGMAS }
}

/// Results of the requested engines at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub analytic: Option<RateReport>,
    pub mc: Option<RateReport>,
    pub agreement: Option<Agreement>,
}

pub fn evaluate(scenario: &Scenario, engine: Engine, cfg: &McConfig) -> Result<Evaluation> {
    let analytic = match engine {
        Engine::Analytic | Engine::Both => Some(scenario.analytic()?),
        Engine::Mc => None,
    };
    let mc = match engine {
        Engine::Mc | Engine::Both => Some(scenario.monte_carlo(cfg)?),
        Engine::Analytic => None,
    };
    let agreement = match (&analytic, &mc) {
        (Some(a), Some(m)) => Some(agreement(a, m)),
        _ => None,
    };
    Ok(Evaluation { analytic, mc, agreement })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub engine: Engine,
    pub mc: McConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    /// Seed used for this point's sampling (base seed plus index).
    pub seed: Option<u64>,
    pub eval: Evaluation,
}

/// Evaluates every point; point `i` samples with seed `mc.seed + i`. Rows
/// follow the order of `values`; an empty list yields no rows.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.engine != Engine::Analytic {
        spec.mc.validate()?;
    }
    spec.values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            let scenario = spec.scenario.with(spec.param, value)?;
            let cfg = spec.mc.with_seed(spec.mc.seed.wrapping_add(index as u64));
            let eval = evaluate(&scenario, spec.engine, &cfg)?;
            let seed = (spec.engine != Engine::Analytic).then_some(cfg.seed);
            Ok(SweepRow { index, value, seed, eval })
        })
        .collect()
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree_scenario(voting: bool) -> Scenario {
        Scenario::Tree {
            params: TreeParams::new(vec![3, 3]).unwrap(),
            p_loss: 0.1,
            p_local: 1e-3,
            policy: VotePolicy { voting, ..VotePolicy::default() },
        }
    }

    #[test]
    fn loss_column_is_monotone() {
        let spec = SweepSpec {
            scenario: tree_scenario(true),
            param: SweepParam::PLoss,
            values: linspace(0.0, 0.3, 31),
            engine: Engine::Analytic,
            mc: McConfig::default(),
        };
        let rows = run_sweep(&spec).unwrap();
        let loss: Vec<f64> = rows.iter().map(|r| r.eval.analytic.unwrap().effective_loss).collect();
        assert!(loss.windows(2).all(|w| w[0] <= w[1]));
        assert!(rows.iter().all(|r| r.seed.is_none()));
    }

    #[test]
    fn more_branches_trade_loss_against_error() {
        // at fixed loss, wider trees lose less; without voting their indirect
        // reads also touch more qubits
        let spec = SweepSpec {
            scenario: tree_scenario(false),
            param: SweepParam::Branching,
            values: (1..=6).map(f64::from).collect(),
            engine: Engine::Analytic,
            mc: McConfig::default(),
        };
        let rows = run_sweep(&spec).unwrap();
        let a: Vec<RateReport> = rows.iter().map(|r| r.eval.analytic.unwrap()).collect();
        for w in a.windows(2) {
            assert!(w[1].effective_error > w[0].effective_error);
        }
        assert!(a[2].effective_loss < a[0].effective_loss);
    }

    #[test]
    fn mc_points_use_offset_seeds() {
        let spec = SweepSpec {
            scenario: Scenario::Parity { params: ParityParams::new(3, 2).unwrap(), p: 0.01 },
            param: SweepParam::PLocal,
            values: vec![0.01, 0.02],
            engine: Engine::Both,
            mc: McConfig::new(20_000, 40),
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows[0].seed, Some(40));
        assert_eq!(rows[1].seed, Some(41));
        assert!(rows.iter().all(|r| r.eval.agreement.unwrap().agree));
    }

    #[test]
    fn parameters_must_fit_the_scheme() {
        let s = Scenario::Parity { params: ParityParams::new(3, 2).unwrap(), p: 0.01 };
        assert!(s.with(SweepParam::PGate, 0.5).is_err());
        assert!(s.with(SweepParam::ParityN, 2.5).is_err());
        assert!("p-loss".parse::<SweepParam>().is_ok());
        assert_eq!("p".parse::<SweepParam>().unwrap(), SweepParam::PError);
        assert!("nope".parse::<SweepParam>().is_err());
    }

    #[test]
    fn arm_length_follows_gate_probability() {
        let s = Scenario::Duan {
            params: DuanParams::from_target(0.5, 100, 0.9).unwrap(),
            model: ErrorModel::depolarizing(1e-3).unwrap(),
            target: Some(ArmTarget { n_target: 100, epsilon: 0.9 }),
        };
        let spec = SweepSpec {
            scenario: s,
            param: SweepParam::PGate,
            values: linspace(0.5, 1.0, 51),
            engine: Engine::Analytic,
            mc: McConfig::default(),
        };
        let rows = run_sweep(&spec).unwrap();
        let at = rows.iter().find(|r| (r.value - 0.99).abs() < 1e-9).unwrap();
        let exact = spec.scenario.with(SweepParam::PGate, at.value).unwrap().arm_length_exact().unwrap();
        assert!((exact - 10.9165).abs() < 1e-3);
        let loss: Vec<f64> = rows.iter().map(|r| r.eval.analytic.unwrap().effective_loss).collect();
        assert!(loss[0] > loss[50]);
        assert_eq!(loss[50], 0.0);
    }

    #[test]
    fn empty_grid_has_no_rows() {
        let spec = SweepSpec {
            scenario: tree_scenario(true),
            param: SweepParam::PLoss,
            values: vec![],
            engine: Engine::Mc,
            mc: McConfig::default(),
        };
        assert!(run_sweep(&spec).unwrap().is_empty());
    }
}
