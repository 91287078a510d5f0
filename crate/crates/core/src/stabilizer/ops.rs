//! Closed-form error propagation rules and graph surgery on graph states.
//!
//! The rules here are the fast path used by the Monte-Carlo engine. Each one is
//! checked against the tableau in this module's tests and in the differential
//! harness of `mc::differential`.

use rand::Rng;

use super::graph::{GraphKind, GraphSpec, LossMask};
use super::pauli::{Pauli, PauliString};
use super::tableau::{Basis, StabilizerTableau};
use crate::error::{invalid, Error, Result};

/// The `Z` string on `v(qubit)` that acts on the graph state exactly as `X_qubit`
/// (obtained by multiplying with the stabilizer of `qubit`).
pub fn rewrite_x_error(spec: &GraphSpec, qubit: usize) -> Result<PauliString> {
    spec.check_qubit(qubit)?;
    let mut out = PauliString::identity(spec.n());
    for j in spec.neighbors(qubit) {
        out.set(j, Pauli::Z);
    }
    Ok(out)
}

/// Z-measures `qubit`, returning the outcome and the post-measurement tableau.
///
/// On a graph state the residual is the graph with the vertex deleted, with a
/// `Z` byproduct on each former neighbour when the outcome is `-1`.
pub fn measure_z<R: Rng + ?Sized>(
    tableau: &StabilizerTableau,
    qubit: usize,
    forced_outcome: Option<bool>,
    rng: &mut R,
) -> Result<(bool, StabilizerTableau)> {
    let (m, next) = tableau.measure(qubit, Basis::Z, forced_outcome, rng)?;
    Ok((m.outcome, next))
}

/// Byproduct on the root of a linear chain from a flip of the X-measurement
/// outcome on a qubit `distance` sites away: `X` for odd distance, `Z` for even.
pub fn chain_flip_byproduct(distance: usize) -> Pauli {
    debug_assert!(distance > 0);
    if distance % 2 == 1 {
        Pauli::X
    } else {
        Pauli::Z
    }
}

/// Accumulated root byproduct for a set of flipped X-measurements at the given
/// distances from the root.
pub fn x_chain_root_byproduct(flip_distances: impl IntoIterator<Item = usize>) -> Pauli {
    flip_distances.into_iter().fold(Pauli::I, |acc, d| acc.times(chain_flip_byproduct(d)))
}

/// Pauli byproduct left after X-measuring a contiguous run of a linear graph.
///
/// `measured` must be an ascending run of consecutive qubits; the root is the
/// qubit right after the run. Errors may only sit on measured qubits. The
/// result is supported on the root, plus `Z` on the root's far neighbour for
/// odd-distance flips and `Z` on the qubit preceding the run when an `X`
/// error sits on its first qubit. Global phase is dropped.
pub fn measure_x_chain(spec: &GraphSpec, errors: &[(usize, Pauli)], measured: &[usize]) -> Result<PauliString> {
    if !matches!(spec.kind(), GraphKind::Linear) {
        return Err(invalid("X-chain measurement", format!("graph {spec} is not linear")));
    }
    let (&start, &last) = match (measured.first(), measured.last()) {
        (Some(s), Some(l)) => (s, l),
        _ => return Err(invalid("X-chain measurement", "empty measured range")),
    };
    if measured.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(invalid("X-chain measurement", format!("measured qubits {measured:?} are not contiguous")));
    }
    let root = last + 1;
    let n = spec.n();
    if root >= n {
        return Err(invalid("X-chain measurement", format!("measured run ends at {last}, leaving no root")));
    }
    let mut out = PauliString::identity(n);
    let mut mul = |q: usize, p: Pauli| {
        let cur = out.get(q);
        out.set(q, cur.times(p));
    };
    // Z on a measured qubit at distance d
    let push_z = |d: usize, mul: &mut dyn FnMut(usize, Pauli)| {
        let p = chain_flip_byproduct(d);
        mul(root, p);
        if p == Pauli::X && root + 1 < n {
            mul(root + 1, Pauli::Z);
        }
    };
    for &(q, p) in errors {
        if q < start || q > last {
            return Err(invalid("X-chain measurement", format!("error on qubit {q} outside the measured run")));
        }
        let d = root - q;
        if p.z_bit() {
            push_z(d, &mut mul);
        }
        if p.x_bit() {
            // X_q = Z_{q-1} Z_{q+1} on the state
            if d == 1 {
                mul(root, Pauli::Z);
            } else {
                push_z(d - 1, &mut mul);
            }
            if q > start {
                push_z(d + 1, &mut mul);
            } else if q > 0 {
                mul(q - 1, Pauli::Z);
            }
        }
    }
    Ok(out)
}

/// Byproduct class on the residual `K_{n-measured}` after Z-measuring `measured`
/// qubits of `K_n`, `error_count` of which carried X errors: the correlated
/// `Z` string they propagate is equivalent to a single `Y`, and pairs cancel.
pub fn measure_z_complete(n: usize, error_count: usize, measured: usize) -> Result<Pauli> {
    if measured >= n {
        return Err(invalid("complete-graph Z measurement", format!("measured {measured} >= n = {n}")));
    }
    if error_count > measured {
        return Err(invalid(
            "complete-graph Z measurement",
            format!("{error_count} errors among only {measured} measured qubits"),
        ));
    }
    Ok(if error_count % 2 == 1 { Pauli::Y } else { Pauli::I })
}

/// Outcome of recovering a graph state from located qubit loss.
#[derive(Debug, Clone)]
pub struct LossRecovery {
    /// Remaining graph, relabelled to `0..kept.len()`.
    pub residual: GraphSpec,
    /// Original index of each residual vertex.
    pub kept: Vec<usize>,
    /// Neighbours that were Z-measured, with their outcomes.
    pub measured: Vec<(usize, bool)>,
    /// Post-recovery state on the original qubit labels.
    pub tableau: StabilizerTableau,
}

/// Deletes the lost vertices and Z-measures every surviving neighbour.
pub fn recover_from_loss<R: Rng + ?Sized>(
    spec: &GraphSpec,
    tableau: &StabilizerTableau,
    lost: &LossMask,
    rng: &mut R,
) -> Result<LossRecovery> {
    if tableau.n() != spec.n() {
        return Err(invalid("loss recovery", "tableau and graph sizes differ"));
    }
    let n = spec.n();
    let adj = spec.adjacency();
    let mut to_measure = vec![false; n];
    for v in lost.iter() {
        if v >= n {
            return Err(invalid("loss recovery", format!("lost qubit {v} out of range")));
        }
        if !tableau.is_active(v) {
            return Err(Error::QubitRemoved { qubit: v });
        }
        for &u in &adj[v] {
            if !lost.contains(u) {
                to_measure[u] = true;
            }
        }
    }
    let mut t = tableau.clone();
    let mut measured = vec![];
    for u in (0..n).filter(|&u| to_measure[u]) {
        let m = t.measure_mut(u, Basis::Z, None, rng)?;
        measured.push((u, m.outcome));
    }
    for v in lost.iter() {
        t.discard(v);
    }
    let kept: Vec<usize> = (0..n).filter(|&v| !to_measure[v] && !lost.contains(v)).collect();
    let residual = spec.induced(&kept);
    Ok(LossRecovery { residual, kept, measured, tableau: t })
}
