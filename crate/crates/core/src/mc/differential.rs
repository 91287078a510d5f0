//! Differential checks between the engines.
//!
//! [`mc_vs_tableau_differential`] samples error patterns and compares the
//! closed-form propagation rules used by the simulators against explicit
//! tableau evolution. [`tableau_vs_dense`] compares the tableau itself with a
//! state vector on random Clifford and measurement sequences.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{chunk_rng, CHUNK_SAMPLES};
use crate::error::{invalid, Result};
use crate::stabilizer::{
    measure_x_chain, measure_z_complete, Basis, DenseState, GraphSpec, Pauli, PauliString, StabilizerTableau,
};

/// Graph family under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DifferentialGraph {
    /// X-measured runs of a chain.
    Linear(usize),
    /// Z-measured subsets of a complete graph.
    Complete(usize),
}

impl fmt::Display for DifferentialGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DifferentialGraph::Linear(n) => write!(f, "linear:{n}"),
            DifferentialGraph::Complete(n) => write!(f, "complete:{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DifferentialReport {
    pub label: String,
    pub cases: u64,
    pub mismatches: u64,
    /// Lowest-index failing case, if any.
    pub first_mismatch: Option<String>,
}

impl DifferentialReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Runs `cases` independent checks in seeded chunks; `check` returns a
/// description of the failure, if any.
fn run_cases<F>(label: String, cases: u64, seed: u64, check: F) -> DifferentialReport
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Option<String> + Sync,
{
    let chunks = cases.div_ceil(CHUNK_SAMPLES);
    let (mismatches, first) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK_SAMPLES.min(cases - c * CHUNK_SAMPLES);
            let mut count = 0u64;
            let mut first = None;
            for i in 0..len {
                if let Some(msg) = check(&mut rng) {
                    count += 1;
                    first.get_or_insert((c * CHUNK_SAMPLES + i, msg));
                }
            }
            (count, first)
        })
        .reduce(
            || (0, None),
            |(a, fa), (b, fb)| {
                let first = match (fa, fb) {
                    (Some(x), Some(y)) => Some(if x.0 <= y.0 { x } else { y }),
                    (x, y) => x.or(y),
                };
                (a + b, first)
            },
        );
    DifferentialReport { label, cases, mismatches, first_mismatch: first.map(|(i, m)| format!("case {i}: {m}")) }
}

fn random_pauli<R: Rng + ?Sized>(rng: &mut R) -> Pauli {
    [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)]
}

fn linear_case<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Option<String> {
    let spec = GraphSpec::linear(n);
    let start = rng.gen_range(0..n - 1);
    let last = rng.gen_range(start..n - 1);
    let measured: Vec<usize> = (start..=last).collect();
    let mut errors = vec![];
    for &q in &measured {
        if rng.gen_bool(0.5) {
            errors.push((q, random_pauli(rng)));
        }
    }
    let byproduct = measure_x_chain(&spec, &errors, &measured).ok()?;
    let mut ideal = StabilizerTableau::graph_state(&spec).ok()?;
    let mut noisy = ideal.clone();
    noisy.apply_pauli(&PauliString::from_sites(n, &errors).ok()?).ok()?;
    for &q in &measured {
        let a = ideal.measure_mut(q, Basis::X, Some(false), rng);
        let b = noisy.measure_mut(q, Basis::X, Some(false), rng);
        if a.is_err() || b.is_err() {
            return Some(format!("run {start}..={last} errors {errors:?}: X outcome on {q} unexpectedly fixed"));
        }
    }
    ideal.apply_pauli_unchecked(&byproduct);
    (!noisy.same_state(&ideal)).then(|| format!("run {start}..={last} errors {errors:?}: rule gave {byproduct}"))
}

fn complete_case<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Option<String> {
    let spec = GraphSpec::complete(n);
    let m = rng.gen_range(1..n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let (measured, rest) = order.split_at(m);
    let errors: Vec<(usize, Pauli)> = measured.iter().filter(|_| rng.gen_bool(0.5)).map(|&q| (q, Pauli::X)).collect();
    let class = measure_z_complete(n, errors.len(), m).ok()?;
    let mut ideal = StabilizerTableau::graph_state(&spec).ok()?;
    let mut noisy = ideal.clone();
    noisy.apply_pauli(&PauliString::from_sites(n, &errors).ok()?).ok()?;
    for &q in measured {
        let a = ideal.measure_mut(q, Basis::Z, Some(false), rng);
        let b = noisy.measure_mut(q, Basis::Z, Some(false), rng);
        if a.is_err() || b.is_err() {
            return Some(format!("measured {measured:?} errors {errors:?}: Z outcome on {q} unexpectedly fixed"));
        }
    }
    // the class may sit on any one survivor
    let target = rest[rng.gen_range(0..rest.len())];
    ideal.apply_pauli_unchecked(&PauliString::single(n, target, class));
    (!noisy.same_state(&ideal))
        .then(|| format!("measured {measured:?} errors {errors:?}: rule gave {} on {target}", class.symbol()))
}

/// Compares the closed-form byproduct rules with tableau evolution on
/// `patterns` random error patterns.
pub fn mc_vs_tableau_differential(graph: DifferentialGraph, patterns: u64, seed: u64) -> Result<DifferentialReport> {
    let label = graph.to_string();
    match graph {
        DifferentialGraph::Linear(n) if n >= 2 => Ok(run_cases(label, patterns, seed, |rng| linear_case(n, rng))),
        DifferentialGraph::Complete(n) if n >= 2 => Ok(run_cases(label, patterns, seed, |rng| complete_case(n, rng))),
        _ => Err(invalid("differential graph", format!("{label} needs at least 2 qubits"))),
    }
}

fn random_graph<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GraphSpec {
    match rng.gen_range(0..4) {
        0 => GraphSpec::linear(n),
        1 => GraphSpec::complete(n),
        2 => {
            // random tree on n vertices
            let edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
            GraphSpec::custom(n, edges).expect("tree edges are valid")
        }
        _ => {
            let mut edges = vec![];
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.35) {
                        edges.push((a, b));
                    }
                }
            }
            GraphSpec::custom(n, edges).expect("edges are valid")
        }
    }
}

const STEPS: usize = 24;
const TOL: f64 = 1e-9;

fn dense_case<R: Rng + ?Sized>(max_qubits: usize, rng: &mut R) -> Option<String> {
    let n = rng.gen_range(1..=max_qubits);
    let spec = random_graph(n, rng);
    let mut tab = StabilizerTableau::graph_state(&spec).ok()?;
    let mut psi = DenseState::graph_state(&spec).ok()?;
    let mut active: Vec<usize> = (0..n).collect();
    let mut log = vec![];
    for _ in 0..STEPS {
        if active.is_empty() {
            break;
        }
        let q = active[rng.gen_range(0..active.len())];
        let other = active.iter().copied().filter(|&u| u != q).collect::<Vec<_>>();
        match rng.gen_range(0..7) {
            0 => {
                tab.hadamard(q).ok()?;
                psi.hadamard(q);
                log.push(format!("H{q}"));
            }
            1 => {
                tab.phase_gate(q).ok()?;
                psi.phase_gate(q);
                log.push(format!("S{q}"));
            }
            2 | 3 if !other.is_empty() => {
                let t = other[rng.gen_range(0..other.len())];
                if rng.gen_bool(0.5) {
                    tab.cnot(q, t).ok()?;
                    psi.cnot(q, t);
                    log.push(format!("CX{q},{t}"));
                } else {
                    tab.cz(q, t).ok()?;
                    psi.cz(q, t);
                    log.push(format!("CZ{q},{t}"));
                }
            }
            4 => {
                let p = PauliString::single(n, q, random_pauli(rng));
                tab.apply_pauli(&p).ok()?;
                psi.apply_pauli(&p);
                log.push(format!("P{p}"));
            }
            _ => {
                let basis = [Basis::X, Basis::Y, Basis::Z][rng.gen_range(0..3)];
                let p_minus = psi.prob_minus(q, basis);
                let m = match tab.measure_mut(q, basis, None, rng) {
                    Ok(m) => m,
                    Err(e) => return Some(format!("{} on {spec}: {e}", log.join(" "))),
                };
                log.push(format!("M{basis:?}{q}={}", m.outcome as u8));
                let dense_fixed = !(TOL..=1.0 - TOL).contains(&p_minus);
                if m.deterministic != dense_fixed || (m.deterministic && (p_minus > 0.5) != m.outcome) {
                    return Some(format!("{} on {spec}: dense P(-1) = {p_minus}", log.join(" ")));
                }
                if !m.deterministic && (p_minus - 0.5).abs() > TOL {
                    return Some(format!("{} on {spec}: random outcome but dense P(-1) = {p_minus}", log.join(" ")));
                }
                psi.measure(q, basis, m.outcome).ok()?;
                active.retain(|&u| u != q);
            }
        }
    }
    for s in tab.stabilizers() {
        let e = psi.expectation(s);
        if (e.re - 1.0).abs() > TOL || e.im.abs() > TOL {
            return Some(format!("{} on {spec}: <{s}> = {e}", log.join(" ")));
        }
    }
    None
}

/// Compares the tableau with a dense state vector on `sequences` random
/// Clifford-plus-measurement sequences over graph states of up to
/// `max_qubits` qubits.
pub fn tableau_vs_dense(max_qubits: usize, sequences: u64, seed: u64) -> Result<DifferentialReport> {
    if max_qubits == 0 || max_qubits > crate::stabilizer::dense::MAX_DENSE_QUBITS {
        return Err(invalid("max_qubits", format!("{max_qubits} outside 1..=16")));
    }
    let label = format!("dense:<= {max_qubits}");
    Ok(run_cases(label, sequences, seed, |rng| dense_case(max_qubits, rng)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass() {
        for n in 2..=6 {
            let r = mc_vs_tableau_differential(DifferentialGraph::Linear(n), 500, 1).unwrap();
            assert!(r.passed(), "{r:?}");
            let r = mc_vs_tableau_differential(DifferentialGraph::Complete(n), 500, 2).unwrap();
            assert!(r.passed(), "{r:?}");
        }
        let r = tableau_vs_dense(6, 200, 3).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn a_wrong_rule_is_caught() {
        // flip the distance parity of the chain rule: every single Z error must mismatch
        let spec = GraphSpec::linear(4);
        let errors = [(1usize, Pauli::Z)];
        let mut ideal = StabilizerTableau::graph_state(&spec).unwrap();
        let mut noisy = ideal.clone();
        noisy.apply_pauli(&PauliString::from_sites(4, &errors).unwrap()).unwrap();
        let mut rng = chunk_rng(0, 0);
        for q in [1, 2] {
            ideal.measure_mut(q, Basis::X, Some(false), &mut rng).unwrap();
            noisy.measure_mut(q, Basis::X, Some(false), &mut rng).unwrap();
        }
        // distance 2: the true byproduct is Z on the root; X would be wrong
        ideal.apply_pauli_unchecked(&PauliString::single(4, 3, Pauli::X));
        assert!(!noisy.same_state(&ideal));
    }

    #[test]
    fn too_small_graphs_are_rejected() {
        assert!(mc_vs_tableau_differential(DifferentialGraph::Linear(1), 10, 0).is_err());
        assert!(tableau_vs_dense(17, 10, 0).is_err());
    }
}
