//! Dense state-vector simulator used as an independent oracle for the tableau.
//!
//! Basis index bit `q` is the computational value of qubit `q`. Intended for
//! at most a dozen or so qubits.

use num_complex::Complex64;

use super::graph::GraphSpec;
use super::pauli::{Pauli, PauliString};
use super::tableau::Basis;
use crate::error::{invalid, Result};

pub const MAX_DENSE_QUBITS: usize = 16;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn zero_state(n: usize) -> Result<Self> {
        if n > MAX_DENSE_QUBITS {
            return Err(invalid("dense state", format!("{n} qubits exceeds {MAX_DENSE_QUBITS}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Graph state: uniform superposition with sign `(-1)^{sum over edges x_a x_b}`.
    pub fn graph_state(spec: &GraphSpec) -> Result<Self> {
        let n = spec.n();
        let mut s = Self::zero_state(n)?;
        let norm = 1.0 / ((1u64 << n) as f64).sqrt();
        let edges: Vec<_> = spec.edges().collect();
        for (idx, a) in s.amps.iter_mut().enumerate() {
            let parity = edges.iter().filter(|&&(u, v)| (idx >> u) & 1 == 1 && (idx >> v) & 1 == 1).count();
            *a = Complex64::new(if parity % 2 == 0 { norm } else { -norm }, 0.0);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn hadamard(&mut self, q: usize) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = (a + b) * h;
                self.amps[i | bit] = (a - b) * h;
            }
        }
    }

    pub fn phase_gate(&mut self, q: usize) {
        let bit = 1 << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= Complex64::i();
            }
        }
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        let (c, t) = (1 << control, 1 << target);
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        let mask = (1 << a) | (1 << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// `P|psi>` including the phase of `P`.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            let (j, c) = pauli_action(p, i);
            out[j] += c * a;
        }
        self.amps = out;
    }

    /// `<psi|P|psi>`.
    pub fn expectation(&self, p: &PauliString) -> Complex64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let (j, c) = pauli_action(p, i);
                self.amps[j].conj() * c * a
            })
            .sum()
    }

    /// Probability of the `-1` outcome when measuring `basis` on `q`.
    pub fn prob_minus(&self, q: usize, basis: Basis) -> f64 {
        let p = PauliString::single(self.n, q, basis.pauli());
        (1.0 - self.expectation(&p).re) / 2.0
    }

    /// Projects onto the given outcome; returns its prior probability.
    pub fn measure(&mut self, q: usize, basis: Basis, outcome: bool) -> Result<f64> {
        let prob = if outcome { self.prob_minus(q, basis) } else { 1.0 - self.prob_minus(q, basis) };
        if prob < TOL {
            return Err(invalid("dense measurement", format!("outcome {outcome} on qubit {q} has zero probability")));
        }
        // (I +- P)/2 |psi>, renormalised
        let p = PauliString::single(self.n, q, basis.pauli());
        let mut flipped = self.clone();
        flipped.apply_pauli(&p);
        let sign = if outcome { -1.0 } else { 1.0 };
        let scale = 1.0 / (2.0 * prob.sqrt());
        for (a, b) in self.amps.iter_mut().zip(&flipped.amps) {
            *a = (*a + b * sign) * scale;
        }
        Ok(prob)
    }

    /// Overlap magnitude `|<self|other>|`.
    pub fn fidelity_amplitude(&self, other: &DenseState) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm()
    }
}

/// Image of basis state `i` under `P`: returns `(j, c)` with `P|i> = c|j>`.
fn pauli_action(p: &PauliString, i: usize) -> (usize, Complex64) {
    let mut j = i;
    let mut c = match p.phase().exponent() {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::i(),
        2 => Complex64::new(-1.0, 0.0),
        _ => -Complex64::i(),
    };
    for (q, op) in p.support() {
        let bit = (i >> q) & 1 == 1;
        match op {
            Pauli::I => {}
            Pauli::X => j ^= 1 << q,
            Pauli::Z => {
                if bit {
                    c = -c;
                }
            }
            Pauli::Y => {
                // Y|0> = i|1>, Y|1> = -i|0>
                j ^= 1 << q;
                c *= if bit { -Complex64::i() } else { Complex64::i() };
            }
        }
    }
    (j, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_state_is_stabilized() {
        for spec in [GraphSpec::linear(4), GraphSpec::complete(4), GraphSpec::tree(&[2, 2]).unwrap()] {
            let psi = DenseState::graph_state(&spec).unwrap();
            for v in 0..spec.n() {
                let mut s = PauliString::single(spec.n(), v, Pauli::X);
                for u in spec.neighbors(v) {
                    s.set(u, Pauli::Z);
                }
                let e = psi.expectation(&s);
                assert!((e.re - 1.0).abs() < 1e-12 && e.im.abs() < 1e-12, "{spec} vertex {v}");
            }
        }
    }

    #[test]
    fn linear_two_z_measurement_leaves_x_eigenstate() {
        let mut psi = DenseState::graph_state(&GraphSpec::linear(2)).unwrap();
        let p = psi.measure(0, Basis::Z, false).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let x1 = PauliString::single(2, 1, Pauli::X);
        assert!((psi.expectation(&x1).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn impossible_projection_is_rejected() {
        let mut psi = DenseState::zero_state(1).unwrap();
        assert!(psi.measure(0, Basis::Z, true).is_err());
    }

    #[test]
    fn y_action_matches_definition() {
        let mut psi = DenseState::zero_state(1).unwrap();
        psi.apply_pauli(&PauliString::from_paulis(&[Pauli::Y]));
        assert!((psi.amplitudes()[1] - Complex64::i()).norm() < 1e-15);
    }
}
