use std::collections::hash_map::RandomState;
use std::fs::File;
use std::hash::{BuildHasher, Hasher};
use std::io::{self, BufWriter, Write};

use lossprop::mc::McConfig;
use lossprop::rates::{
    DuanParams, ErrorModel, ParityParams, RateReport, TiePolicy, TreeParams, VotePolicy,
};
use lossprop::sweep::{
    evaluate, find_break_even, linspace, optimize_branching, run_sweep, ArmTarget, BreakEvenKind, BreakEvenQuery,
    Engine, Evaluation, OptimizeOutcome, OptimizeQuery, Scenario, SweepParam, SweepSpec,
};
use lossprop::verify::{verify_with, Formulas, VerifyMode};

use crate::args::{
    BreakEvenArgs, Common, EngineArg, Fault, KindArg, OptimizeArgs, PolicyArgs, RatesArgs, Sampling, Scheme,
    SchemeArgs, SweepArgs, TieArg, VerifyArgs,
};
use crate::output::{Cell, Table};

/// Process exit status with the messages that explain it.
#[derive(Debug)]
pub enum Exit {
    Validation(Vec<String>),
    Disagreement(String),
    Infeasible(String),
    Io(io::Error),
}

impl Exit {
    pub fn code(&self) -> i32 {
        match self {
            Exit::Validation(_) => 2,
            Exit::Disagreement(_) => 3,
            Exit::Infeasible(_) => 4,
            Exit::Io(_) => 1,
        }
    }

    pub fn messages(&self) -> Vec<String> {
        match self {
            Exit::Validation(m) => m.iter().map(|l| format!("error: {l}")).collect(),
            Exit::Disagreement(m) => vec![format!("disagreement: {m}")],
            Exit::Infeasible(m) => vec![format!("infeasible: {m}")],
            Exit::Io(e) => vec![format!("error: {e}")],
        }
    }
}

impl From<lossprop::Error> for Exit {
    fn from(e: lossprop::Error) -> Self {
        Exit::Validation(vec![e.to_string()])
    }
}

impl From<io::Error> for Exit {
    fn from(e: io::Error) -> Self {
        Exit::Io(e)
    }
}

type Outcome = Result<(), Exit>;

/// Collects every violation before giving up.
#[derive(Default)]
struct Violations(Vec<String>);

impl Violations {
    fn check<T>(&mut self, r: lossprop::Result<T>) -> Option<T> {
        r.map_err(|e| self.0.push(e.to_string())).ok()
    }

    fn need<T: Copy>(&mut self, key: &str, v: Option<T>, scheme: &str) -> Option<T> {
        if v.is_none() {
            self.0.push(format!("--{key} is required for scheme {scheme}"));
        }
        v
    }

    fn forbid<T>(&mut self, key: &str, v: &Option<T>, scheme: &str) {
        if v.is_some() {
            self.0.push(format!("--{key} does not apply to scheme {scheme}"));
        }
    }

    fn finish<T>(self, value: Option<T>) -> Result<T, Exit> {
        match value {
            Some(v) if self.0.is_empty() => Ok(v),
            _ => Err(Exit::Validation(self.0)),
        }
    }
}

fn policy(p: &PolicyArgs) -> VotePolicy {
    let tie = match p.tie {
        TieArg::Abstain => TiePolicy::Abstain,
        TieArg::CoinFlip => TiePolicy::CoinFlip,
        TieArg::Error => TiePolicy::Error,
    };
    VotePolicy { voting: p.voting, tie, prefer_indirect: p.prefer_indirect }
}

fn probability(v: &mut Violations, key: &str, p: Option<f64>) -> Option<f64> {
    let p = p?;
    if (0.0..=1.0).contains(&p) {
        Some(p)
    } else {
        v.0.push(format!("--{key} = {p} is not a probability"));
        None
    }
}

fn scenario(a: &SchemeArgs) -> Result<Scenario, Exit> {
    let mut v = Violations::default();
    let tree_flags_set = a.policy.voting || a.policy.prefer_indirect || a.policy.tie != TieArg::Abstain;
    let s = match a.scheme {
        Scheme::Duan => {
            let name = "duan";
            v.forbid("branching", &a.branching, name);
            v.forbid("p-loss", &a.p_loss, name);
            v.forbid("p-local", &a.p_local, name);
            v.forbid("n", &a.n, name);
            v.forbid("q", &a.q, name);
            v.forbid("p", &a.p, name);
            if tree_flags_set {
                v.0.push(format!("vote options do not apply to scheme {name}"));
            }
            let pg = v.need("pg", a.pg, name);
            let target = match (a.n_l, a.n_target, a.epsilon) {
                (Some(_), None, None) => None,
                (None, Some(n_target), Some(epsilon)) => Some(ArmTarget { n_target, epsilon }),
                _ => {
                    v.0.push("give either --n-l or both --n-target and --epsilon".into());
                    None
                }
            };
            let split = [a.p_x, a.p_y, a.p_z];
            let model = match (a.p_error, split.iter().any(Option::is_some)) {
                (Some(_), true) => {
                    v.0.push("give either --p-error or --p-x/--p-y/--p-z".into());
                    None
                }
                (p_error, false) => {
                    let p = probability(&mut v, "p-error", Some(p_error.unwrap_or(0.0)));
                    p.and_then(|p| v.check(ErrorModel::new(0.0, p / 3.0, p / 3.0, p / 3.0, 0.0)))
                }
                (None, true) => {
                    let [x, y, z] = split.map(|p| p.unwrap_or(0.0));
                    v.check(ErrorModel::new(0.0, x, y, z, 0.0))
                }
            };
            let params = pg.and_then(|pg| match (target, a.n_l) {
                (Some(t), _) => v.check(DuanParams::from_target(pg, t.n_target, t.epsilon)),
                (None, Some(n_l)) => v.check(DuanParams::new(pg, n_l)),
                _ => None,
            });
            match (params, model) {
                (Some(params), Some(model)) => Some(Scenario::Duan { params, model, target }),
                _ => None,
            }
        }
        Scheme::Tree => {
            let name = "tree";
            for (key, set) in [
                ("pg", a.pg.is_some()),
                ("n-l", a.n_l.is_some()),
                ("n-target", a.n_target.is_some()),
                ("epsilon", a.epsilon.is_some()),
                ("p-error", a.p_error.is_some()),
                ("p-x", a.p_x.is_some()),
                ("p-y", a.p_y.is_some()),
                ("p-z", a.p_z.is_some()),
                ("n", a.n.is_some()),
                ("q", a.q.is_some()),
                ("p", a.p.is_some()),
            ] {
                if set {
                    v.0.push(format!("--{key} does not apply to scheme {name}"));
                }
            }
            let params = match &a.branching {
                Some(b) => v.check(b.parse::<TreeParams>()),
                None => {
                    v.0.push("--branching is required for scheme tree".into());
                    None
                }
            };
            let p_loss = v.need("p-loss", a.p_loss, name);
            let p_local = v.need("p-local", a.p_local, name);
            let p_loss = probability(&mut v, "p-loss", p_loss);
            let p_local = probability(&mut v, "p-local", p_local);
            match (params, p_loss, p_local) {
                (Some(params), Some(p_loss), Some(p_local)) => {
                    Some(Scenario::Tree { params, p_loss, p_local, policy: policy(&a.policy) })
                }
                _ => None,
            }
        }
        Scheme::Parity => {
            let name = "parity";
            for (key, set) in [
                ("pg", a.pg.is_some()),
                ("n-l", a.n_l.is_some()),
                ("n-target", a.n_target.is_some()),
                ("epsilon", a.epsilon.is_some()),
                ("p-error", a.p_error.is_some()),
                ("p-x", a.p_x.is_some()),
                ("p-y", a.p_y.is_some()),
                ("p-z", a.p_z.is_some()),
                ("branching", a.branching.is_some()),
                ("p-loss", a.p_loss.is_some()),
                ("p-local", a.p_local.is_some()),
            ] {
                if set {
                    v.0.push(format!("--{key} does not apply to scheme {name}"));
                }
            }
            if tree_flags_set {
                v.0.push(format!("vote options do not apply to scheme {name}"));
            }
            let n = v.need("n", a.n, name);
            let q = v.need("q", a.q, name);
            let p = v.need("p", a.p, name);
            let p = probability(&mut v, "p", p);
            let params = match (n, q) {
                (Some(n), Some(q)) => v.check(ParityParams::new(n, q)),
                _ => None,
            };
            match (params, p) {
                (Some(params), Some(p)) => Some(Scenario::Parity { params, p }),
                _ => None,
            }
        }
    };
    v.finish(s)
}

fn describe(s: &Scenario) -> String {
    match s {
        Scenario::Duan { params, model, target } => {
            let mut d = format!(
                "p_g={};n_l={};p_x={};p_y={};p_z={}",
                params.p_g, params.arm_length, model.p_x, model.p_y, model.p_z
            );
            if let Some(t) = target {
                d.push_str(&format!(";n_target={};epsilon={}", t.n_target, t.epsilon));
            }
            d
        }
        Scenario::Tree { params, p_loss, p_local, policy } => format!(
            "b={params};p_loss={p_loss};p_local={p_local};voting={};tie={};prefer_indirect={}",
            policy.voting, policy.tie, policy.prefer_indirect
        ),
        Scenario::Parity { params, p } => format!("n={};q={};p={p}", params.n, params.q),
    }
}

fn engine(e: EngineArg) -> Engine {
    match e {
        EngineArg::Analytic => Engine::Analytic,
        EngineArg::Mc => Engine::Mc,
        EngineArg::Both => Engine::Both,
    }
}

fn fresh_seed() -> u64 {
    RandomState::new().build_hasher().finish()
}

fn mc_config(s: &Sampling, c: &Common) -> McConfig {
    let seed = s.seed.unwrap_or_else(|| {
        let seed = fresh_seed();
        eprintln!("note: no --seed given, using seed={seed}");
        seed
    });
    McConfig { samples: s.samples, seed, workers: c.workers, confidence: s.confidence }
}

fn sink(c: &Common) -> Result<Box<dyn Write>, Exit> {
    Ok(match &c.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(table: &Table, c: &Common) -> Outcome {
    let mut out = sink(c)?;
    table.write(c.format, &mut *out)?;
    out.flush()?;
    Ok(())
}

/// `|analytic - mc|` in units of the sampled interval half-width.
fn ci_distance(exact: f64, sampled: f64, half: f64) -> f64 {
    let d = (exact - sampled).abs();
    if d <= 1e-12 {
        0.0
    } else if half > 0.0 {
        d / half
    } else {
        f64::INFINITY
    }
}

fn agreement_cells(e: &Evaluation) -> [Cell; 3] {
    match (&e.analytic, &e.mc, &e.agreement) {
        (Some(a), Some(m), Some(g)) => {
            let s = m.sampling.expect("sampled");
            [
                ci_distance(a.effective_loss, m.effective_loss, s.loss_ci_half_width).into(),
                ci_distance(a.effective_error, m.effective_error, s.error_ci_half_width).into(),
                g.agree.into(),
            ]
        }
        _ => [Cell::Empty, Cell::Empty, Cell::Empty],
    }
}

fn disagreement(label: &str, e: &Evaluation) -> Option<String> {
    let g = e.agreement?;
    (!g.agree).then(|| {
        format!("{label}: loss {:.2} sigma, error {:.2} sigma apart", g.loss_sigmas, g.error_sigmas)
    })
}

const RATES_COLUMNS: &[&str] = &[
    "scheme",
    "params",
    "engine",
    "effective_loss",
    "effective_error",
    "joint_error",
    "pauli_x",
    "pauli_y",
    "pauli_z",
    "samples",
    "seed",
    "confidence",
    "loss_ci_half_width",
    "error_ci_half_width",
    "agreement_loss",
    "agreement_error",
    "agree",
];

fn report_cells(r: &RateReport) -> Vec<Cell> {
    let s = r.sampling;
    vec![
        r.effective_loss.into(),
        r.effective_error.into(),
        r.joint_error.into(),
        r.pauli.map(|p| p.x).into(),
        r.pauli.map(|p| p.y).into(),
        r.pauli.map(|p| p.z).into(),
        s.map(|s| s.samples).into(),
        s.map(|s| s.seed).into(),
        s.map(|s| s.confidence).into(),
        s.map(|s| s.loss_ci_half_width).into(),
        s.map(|s| s.error_ci_half_width).into(),
    ]
}

pub fn rates(a: &RatesArgs) -> Outcome {
    let s = scenario(&a.scheme)?;
    let eng = engine(a.sampling.engine);
    let cfg = mc_config_if(eng, &a.sampling, &a.common);
    if a.trace.is_some() && eng == Engine::Analytic {
        return Err(Exit::Validation(vec!["--trace needs --engine mc or both".into()]));
    }
    let e = evaluate(&s, eng, &cfg)?;
    let mut t = Table::new("rates", RATES_COLUMNS);
    let desc = describe(&s);
    for (name, r) in [("analytic", &e.analytic), ("mc", &e.mc)] {
        let Some(r) = r else { continue };
        let mut row: Vec<Cell> = vec![s.name().into(), desc.clone().into(), name.into()];
        row.extend(report_cells(r));
        if name == "mc" {
            row.extend(agreement_cells(&e));
        } else {
            row.extend([Cell::Empty, Cell::Empty, Cell::Empty]);
        }
        t.push(row);
    }
    emit(&t, &a.common)?;
    if let Some(index) = a.trace {
        if index >= cfg.samples {
            return Err(Exit::Validation(vec![format!("--trace {index} is beyond the {} samples", cfg.samples)]));
        }
        eprint!("{}", s.trace(cfg.seed, index)?);
    }
    match disagreement(s.name(), &e) {
        Some(m) => Err(Exit::Disagreement(m)),
        None => Ok(()),
    }
}

fn mc_config_if(eng: Engine, s: &Sampling, c: &Common) -> McConfig {
    if eng == Engine::Analytic {
        McConfig { samples: s.samples, seed: s.seed.unwrap_or(0), workers: c.workers, confidence: s.confidence }
    } else {
        mc_config(s, c)
    }
}

const SWEEP_COLUMNS: &[&str] = &[
    "scheme",
    "param",
    "index",
    "value",
    "n_l",
    "qubits",
    "engine",
    "effective_loss",
    "effective_error",
    "joint_error",
    "mc_effective_loss",
    "mc_effective_error",
    "mc_joint_error",
    "loss_ci_half_width",
    "error_ci_half_width",
    "samples",
    "seed",
    "agreement_loss",
    "agreement_error",
    "agree",
];

fn sweep_values(a: &SweepArgs) -> Result<Vec<f64>, Exit> {
    if let Some(list) = &a.values {
        let mut bad = vec![];
        let values: Vec<f64> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .filter_map(|s| s.parse().map_err(|_| bad.push(format!("--values: {s:?} is not a number"))).ok())
            .collect();
        return if bad.is_empty() { Ok(values) } else { Err(Exit::Validation(bad)) };
    }
    match (a.from, a.to, a.steps) {
        (Some(from), Some(to), Some(steps)) => {
            let mut bad = vec![];
            if from > to {
                bad.push(format!("--from {from} exceeds --to {to}"));
            }
            if steps == 0 {
                bad.push("--steps must be at least 1".into());
            }
            if bad.is_empty() {
                Ok(linspace(from, to, steps))
            } else {
                Err(Exit::Validation(bad))
            }
        }
        _ => Err(Exit::Validation(vec!["give --values or --from, --to and --steps".into()])),
    }
}

/// The swept flag may be omitted; a placeholder stands in until each point
/// overwrites it.
fn with_swept_placeholder(a: &SchemeArgs, param: SweepParam) -> SchemeArgs {
    let mut a = a.clone();
    match (a.scheme, param) {
        (Scheme::Tree, SweepParam::PLoss) => a.p_loss = a.p_loss.or(Some(0.0)),
        (Scheme::Tree, SweepParam::PLocal | SweepParam::PError) => a.p_local = a.p_local.or(Some(0.0)),
        (Scheme::Parity, SweepParam::PLocal | SweepParam::PError) => a.p = a.p.or(Some(0.0)),
        (Scheme::Parity, SweepParam::ParityN) => a.n = a.n.or(Some(1)),
        (Scheme::Parity, SweepParam::ParityQ) => a.q = a.q.or(Some(1)),
        (Scheme::Duan, SweepParam::PGate) => a.pg = a.pg.or(Some(1.0)),
        (Scheme::Duan, SweepParam::ArmLength) if a.n_target.is_none() && a.epsilon.is_none() => {
            a.n_l = a.n_l.or(Some(1))
        }
        _ => {}
    }
    a
}

pub fn sweep(a: &SweepArgs) -> Outcome {
    let param: SweepParam = a.param.parse()?;
    let values = sweep_values(a)?;
    let s = scenario(&with_swept_placeholder(&a.scheme, param))?;
    let eng = engine(a.sampling.engine);
    let cfg = mc_config_if(eng, &a.sampling, &a.common);
    let spec = SweepSpec { scenario: s.clone(), param, values, engine: eng, mc: cfg };
    let rows = run_sweep(&spec)?;
    let mut t = Table::new("sweep", SWEEP_COLUMNS);
    let mut problems = vec![];
    for r in &rows {
        let point = s.with(param, r.value)?;
        let qubits = match &point {
            Scenario::Tree { params, .. } => Some(lossprop::rates::tree_qubit_count(params)),
            _ => None,
        };
        let an = r.eval.analytic.as_ref();
        let mc = r.eval.mc.as_ref();
        let samp = mc.and_then(|m| m.sampling);
        let mut row: Vec<Cell> = vec![
            s.name().into(),
            param.as_str().into(),
            (r.index as u64).into(),
            r.value.into(),
            point.arm_length_exact().into(),
            qubits.into(),
            eng.to_string().into(),
            an.map(|x| x.effective_loss).into(),
            an.map(|x| x.effective_error).into(),
            an.map(|x| x.joint_error).into(),
            mc.map(|x| x.effective_loss).into(),
            mc.map(|x| x.effective_error).into(),
            mc.map(|x| x.joint_error).into(),
            samp.map(|x| x.loss_ci_half_width).into(),
            samp.map(|x| x.error_ci_half_width).into(),
            samp.map(|x| x.samples).into(),
            r.seed.into(),
        ];
        row.extend(agreement_cells(&r.eval));
        t.push(row);
        if let Some(m) = disagreement(&format!("{}={}", param, r.value), &r.eval) {
            problems.push(m);
        }
    }
    emit(&t, &a.common)?;
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Exit::Disagreement(problems.join("; ")))
    }
}

const BREAK_EVEN_COLUMNS: &[&str] =
    &["kind", "branching", "p_local", "voting", "tie", "prefer_indirect", "root", "iterations", "width"];

pub fn break_even(a: &BreakEvenArgs) -> Outcome {
    let mut v = Violations::default();
    let params = v.check(a.branching.parse::<TreeParams>());
    let kind = match a.kind {
        KindArg::Loss => BreakEvenKind::LossThreshold,
        KindArg::Error => BreakEvenKind::ErrorBreakEven,
        KindArg::Both => BreakEvenKind::Combined,
    };
    let params = v.finish(params)?;
    let pol = policy(&a.policy);
    let q = BreakEvenQuery { lo: a.lo, hi: a.hi, tol: a.tol, ..BreakEvenQuery::new(params.clone(), a.p_local, pol, kind) };
    let r = find_break_even(&q)?;
    let mut t = Table::new("break-even", BREAK_EVEN_COLUMNS);
    t.push(vec![
        match kind {
            BreakEvenKind::LossThreshold => "loss",
            BreakEvenKind::ErrorBreakEven => "error",
            BreakEvenKind::Combined => "both",
        }
        .into(),
        params.to_string().into(),
        a.p_local.into(),
        pol.voting.into(),
        pol.tie.to_string().into(),
        pol.prefer_indirect.into(),
        r.root.into(),
        u64::from(r.iterations).into(),
        r.width.into(),
    ]);
    emit(&t, &a.common)
}

const OPTIMIZE_COLUMNS: &[&str] = &[
    "status",
    "budget",
    "p_loss",
    "p_local",
    "loss_target",
    "branching",
    "qubits",
    "effective_loss",
    "effective_error",
    "joint_error",
    "evaluated",
];

pub fn optimize_tree(a: &OptimizeArgs) -> Outcome {
    let q = OptimizeQuery {
        budget: a.budget,
        p_loss: a.p_loss,
        p_local: a.p_local,
        loss_target: a.loss_target,
        min_depth: a.min_depth,
        max_depth: a.max_depth,
        policy: policy(&a.policy),
    };
    if a.budget < 3 {
        return Err(Exit::Validation(vec![format!("--budget {} is below the minimum of 3", a.budget)]));
    }
    let outcome = optimize_branching(&q)?;
    let mut t = Table::new("optimize-tree", OPTIMIZE_COLUMNS);
    let head: Vec<Cell> = vec![a.budget.into(), a.p_loss.into(), a.p_local.into(), a.loss_target.into()];
    let result = match &outcome {
        OptimizeOutcome::Found { params, qubits, report, evaluated } => {
            let mut row: Vec<Cell> = vec!["found".into()];
            row.extend(head);
            row.extend([
                params.to_string().into(),
                (*qubits).into(),
                report.effective_loss.into(),
                report.effective_error.into(),
                report.joint_error.into(),
                (*evaluated).into(),
            ]);
            t.push(row);
            Ok(())
        }
        OptimizeOutcome::Infeasible { evaluated, lowest_loss } => {
            let mut row: Vec<Cell> = vec!["infeasible".into()];
            row.extend(head);
            let (b, loss) = match lowest_loss {
                Some((p, l)) => (Cell::from(p.to_string()), Cell::from(*l)),
                None => (Cell::Empty, Cell::Empty),
            };
            row.extend([b, Cell::Empty, loss, Cell::Empty, Cell::Empty, (*evaluated).into()]);
            t.push(row);
            Err(Exit::Infeasible(format!(
                "no tree within {} qubits reaches effective loss {}; branching column shows the lowest-loss shape",
                a.budget, a.loss_target
            )))
        }
    };
    emit(&t, &a.common)?;
    result
}

const VERIFY_COLUMNS: &[&str] = &["mode", "seed", "group", "check", "status", "value", "limit", "detail"];

fn parity_off_by_one(p: f64, params: &ParityParams) -> lossprop::Result<f64> {
    Ok(1.0 - (1.0 - p).powf((params.measured() + 1) as f64))
}

fn tree_without_local_errors(
    params: &TreeParams,
    p_loss: f64,
    _: f64,
    policy: &VotePolicy,
) -> lossprop::Result<RateReport> {
    lossprop::rates::tree_general(params, p_loss, 0.0, policy)
}

fn duan_without_loss(params: &DuanParams, model: &ErrorModel) -> RateReport {
    let mut r = lossprop::rates::duan_bond(params, model);
    r.effective_loss = 0.0;
    r
}

pub fn verify(a: &VerifyArgs) -> Outcome {
    let mode = if a.quick { VerifyMode::Quick } else { VerifyMode::Full };
    let formulas = match a.inject_fault {
        None => Formulas::default(),
        Some(Fault::Parity) => Formulas { parity: parity_off_by_one, ..Formulas::default() },
        Some(Fault::Tree) => Formulas { tree: tree_without_local_errors, ..Formulas::default() },
        Some(Fault::Duan) => Formulas { duan: duan_without_loss, ..Formulas::default() },
    };
    let report = verify_with(mode, a.seed, a.common.workers, &formulas)?;
    let mut t = Table::new("verify", VERIFY_COLUMNS);
    for c in &report.checks {
        t.push(vec![
            mode.to_string().into(),
            a.seed.into(),
            c.group.into(),
            c.name.clone().into(),
            if c.passed { "pass" } else { "fail" }.into(),
            c.value.into(),
            c.limit.into(),
            c.detail.clone().into(),
        ]);
    }
    emit(&t, &a.common)?;
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Exit::Disagreement(format!("{} of {} checks failed: {}", failed.len(), report.checks.len(), failed.join(", "))))
    }
}
