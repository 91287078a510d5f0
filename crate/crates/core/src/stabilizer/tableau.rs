//! Aaronson–Gottesman stabilizer tableau with destabilizers.
//!
//! Rows `0..n` are destabilizers, rows `n..2n` stabilizers. Every row is a
//! Hermitian [`PauliString`], so stabilizer phases are always `+1` or `-1`.
//! Destabilizer signs carry no meaning and are kept real only for tidiness.
//!
//! A measured qubit is left in the corresponding eigenstate and marked as
//! removed; measuring it again is an error.

use rand::Rng;

use super::graph::GraphSpec;
use super::pauli::{Pauli, PauliString, Phase};
use crate::error::{invalid, Error, Result};

/// Measurement basis for single-qubit Pauli measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub fn pauli(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Y => Pauli::Y,
            Basis::Z => Pauli::Z,
        }
    }
}

/// Result of a single measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    /// `false` for the +1 eigenvalue, `true` for -1.
    pub outcome: bool,
    /// Whether the outcome was fixed by the state.
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    rows: Vec<PauliString>,
    active: Vec<bool>,
}

impl StabilizerTableau {
    /// `|0...0>`: destabilizers `X_i`, stabilizers `Z_i`.
    pub fn zero_state(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        rows.extend((0..n).map(|i| PauliString::single(n, i, Pauli::X)));
        rows.extend((0..n).map(|i| PauliString::single(n, i, Pauli::Z)));
        Self { n, rows, active: vec![true; n] }
    }

    /// `|+...+>`.
    pub fn plus_state(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        rows.extend((0..n).map(|i| PauliString::single(n, i, Pauli::Z)));
        rows.extend((0..n).map(|i| PauliString::single(n, i, Pauli::X)));
        Self { n, rows, active: vec![true; n] }
    }

    /// Graph state of `spec`: stabilizer `i` is `X_i` times `Z` on every neighbour,
    /// destabilizer `i` is `Z_i`.
    pub fn graph_state(spec: &GraphSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n();
        let mut t = Self::plus_state(n);
        for (a, b) in spec.edges() {
            t.rows[n + a].flip_z(b);
            t.rows[n + b].flip_z(a);
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stabilizer(&self, i: usize) -> &PauliString {
        &self.rows[self.n + i]
    }

    pub fn destabilizer(&self, i: usize) -> &PauliString {
        &self.rows[i]
    }

    pub fn stabilizers(&self) -> impl Iterator<Item = &PauliString> {
        self.rows[self.n..].iter()
    }

    pub fn is_active(&self, q: usize) -> bool {
        self.active[q]
    }

    /// Marks a qubit as gone without measuring it.
    pub(crate) fn discard(&mut self, q: usize) {
        self.active[q] = false;
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(invalid("qubit index", format!("{q} out of range for {} qubits", self.n)));
        }
        if !self.active[q] {
            return Err(Error::QubitRemoved { qubit: q });
        }
        Ok(())
    }

    pub fn hadamard(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        for row in &mut self.rows {
            let (x, z) = (row.x_bit(q), row.z_bit(q));
            if x && z {
                row.negate();
            }
            if x != z {
                row.flip_x(q);
                row.flip_z(q);
            }
        }
        Ok(())
    }

    /// Phase gate `S = diag(1, i)`.
    pub fn phase_gate(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        for row in &mut self.rows {
            if row.x_bit(q) {
                if row.z_bit(q) {
                    row.negate();
                }
                row.flip_z(q);
            }
        }
        Ok(())
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check(control)?;
        self.check(target)?;
        if control == target {
            return Err(invalid("CNOT", "control equals target"));
        }
        for row in &mut self.rows {
            let (xa, za, xb, zb) = (row.x_bit(control), row.z_bit(control), row.x_bit(target), row.z_bit(target));
            if xa && zb && (xb == za) {
                row.negate();
            }
            if xa {
                row.flip_x(target);
            }
            if zb {
                row.flip_z(control);
            }
        }
        Ok(())
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.hadamard(b)?;
        self.cnot(a, b)?;
        self.hadamard(b)
    }

    /// Applies a Pauli operator as a gate (global phase dropped).
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        if p.len() != self.n {
            return Err(invalid("Pauli gate", format!("length {} != {}", p.len(), self.n)));
        }
        for (q, _) in p.support() {
            self.check(q)?;
        }
        for row in &mut self.rows[self.n..] {
            if !row.commutes_with(p) {
                row.negate();
            }
        }
        Ok(())
    }

    /// Pauli on qubits that may already be removed: affects only signs.
    pub(crate) fn apply_pauli_unchecked(&mut self, p: &PauliString) {
        for row in &mut self.rows[self.n..] {
            if !row.commutes_with(p) {
                row.negate();
            }
        }
    }

    /// Measures `basis` on qubit `q`. `forced` selects the branch when the outcome is
    /// random; forcing a value that contradicts a deterministic outcome is an error.
    pub fn measure_mut<R: Rng + ?Sized>(
        &mut self,
        q: usize,
        basis: Basis,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<Measurement> {
        self.check(q)?;
        // rotate the basis onto Z and back
        match basis {
            Basis::Z => {}
            Basis::X => self.hadamard(q)?,
            Basis::Y => {
                // S^dagger then H maps Y to Z
                self.phase_gate(q)?;
                self.phase_gate(q)?;
                self.phase_gate(q)?;
                self.hadamard(q)?;
            }
        }
        let result = self.measure_z_inner(q, forced, rng);
        match basis {
            Basis::Z => {}
            Basis::X => self.hadamard(q)?,
            Basis::Y => {
                self.hadamard(q)?;
                self.phase_gate(q)?;
            }
        }
        let m = result?;
        self.active[q] = false;
        Ok(m)
    }

    fn measure_z_inner<R: Rng + ?Sized>(&mut self, q: usize, forced: Option<bool>, rng: &mut R) -> Result<Measurement> {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&i| self.rows[i].x_bit(q)) {
            for i in 0..2 * n {
                if i != p && self.rows[i].x_bit(q) {
                    let pivot = self.rows[p].clone();
                    self.rows[i].mul_assign_right(&pivot);
                    if i < n {
                        let ph = self.rows[i].phase();
                        if !ph.is_real() {
                            self.rows[i].set_phase(ph * Phase::I);
                        }
                    }
                }
            }
            let outcome = forced.unwrap_or_else(|| rng.gen::<bool>());
            self.rows[p - n] = self.rows[p].clone();
            let mut z = PauliString::single(n, q, Pauli::Z);
            if outcome {
                z.negate();
            }
            self.rows[p] = z;
            Ok(Measurement { outcome, deterministic: false })
        } else {
            let mut acc = PauliString::identity(n);
            for i in 0..n {
                if self.rows[i].x_bit(q) {
                    acc.mul_assign_right(&self.rows[n + i]);
                }
            }
            let outcome = acc.phase().is_negative();
            if let Some(f) = forced {
                if f != outcome {
                    return Err(Error::ImpossibleOutcome { qubit: q, forced: f, actual: outcome });
                }
            }
            Ok(Measurement { outcome, deterministic: true })
        }
    }

    /// Functional form: returns the outcome and the post-measurement tableau.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        q: usize,
        basis: Basis,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<(Measurement, StabilizerTableau)> {
        let mut next = self.clone();
        let m = next.measure_mut(q, basis, forced, rng)?;
        Ok((m, next))
    }

    /// Outcome of measuring `p` if it is determined by the state: `Some(false)` when
    /// `+p` stabilises the state, `Some(true)` for `-p`, `None` otherwise.
    pub fn stabilizer_sign(&self, p: &PauliString) -> Option<bool> {
        assert_eq!(p.len(), self.n, "length mismatch");
        if !p.phase().is_real() {
            return None;
        }
        if self.stabilizers().any(|s| !s.commutes_with(p)) {
            return None;
        }
        let mut acc = PauliString::identity(self.n);
        for i in 0..self.n {
            if !self.rows[i].commutes_with(p) {
                acc.mul_assign_right(&self.rows[self.n + i]);
            }
        }
        debug_assert!(acc.eq_up_to_phase(p));
        Some((acc.phase().exponent() + p.phase().exponent()) % 4 == 2)
    }

    /// Whether `+p` is in the stabilizer group.
    pub fn stabilizes(&self, p: &PauliString) -> bool {
        self.stabilizer_sign(p) == Some(false)
    }

    /// Same quantum state: every stabilizer of `other` stabilizes `self` with the same sign.
    pub fn same_state(&self, other: &StabilizerTableau) -> bool {
        self.n == other.n && other.stabilizers().all(|s| self.stabilizes(s))
    }

    /// Same stabilizer group up to signs.
    pub fn same_group_up_to_signs(&self, other: &StabilizerTableau) -> bool {
        self.n == other.n && other.stabilizers().all(|s| self.stabilizer_sign(s).is_some())
    }

    /// Generators pairwise commute, are independent, and pair with destabilizers
    /// in the symplectic sense.
    pub fn is_valid(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            if !self.rows[n + i].phase().is_real() {
                return false;
            }
            for j in 0..n {
                if !self.rows[n + i].commutes_with(&self.rows[n + j]) {
                    return false;
                }
                // destabilizer i anticommutes exactly with stabilizer i
                if self.rows[i].commutes_with(&self.rows[n + j]) == (i == j) {
                    return false;
                }
            }
        }
        symplectic_rank(self.stabilizers()) == n
    }
}

/// Rank over GF(2) of the binary symplectic vectors of `rows`.
pub fn symplectic_rank<'a>(rows: impl Iterator<Item = &'a PauliString>) -> usize {
    let mut vecs: Vec<Vec<bool>> = rows
        .map(|r| (0..r.len()).map(|q| r.x_bit(q)).chain((0..r.len()).map(|q| r.z_bit(q))).collect())
        .collect();
    let cols = vecs.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..vecs.len()).find(|&r| vecs[r][c]) else { continue };
        vecs.swap(rank, p);
        for r in 0..vecs.len() {
            if r != rank && vecs[r][c] {
                let pivot = vecs[rank].clone();
                for (a, b) in vecs[r].iter_mut().zip(pivot) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn graph_state_generators() {
        let t = StabilizerTableau::graph_state(&GraphSpec::linear(3)).unwrap();
        let want = ["+XZI", "+ZXZ", "+IZX"];
        for (i, w) in want.iter().enumerate() {
            assert_eq!(t.stabilizer(i).to_string(), *w);
        }
        assert!(t.is_valid());
    }

    #[test]
    fn zero_state_measures_zero() {
        let mut t = StabilizerTableau::zero_state(2);
        let m = t.measure_mut(0, Basis::Z, None, &mut rng()).unwrap();
        assert_eq!(m, Measurement { outcome: false, deterministic: true });
    }

    #[test]
    fn plus_state_x_deterministic_z_random() {
        let t = StabilizerTableau::plus_state(1);
        let (m, _) = t.measure(0, Basis::X, None, &mut rng()).unwrap();
        assert!(m.deterministic && !m.outcome);
        let (m, after) = t.measure(0, Basis::Z, Some(true), &mut rng()).unwrap();
        assert!(!m.deterministic && m.outcome);
        assert!(after.stabilizes(&PauliString::single(1, 0, Pauli::Z).with_phase(Phase::MINUS_ONE)));
    }

    #[test]
    fn forced_outcome_must_be_possible() {
        let t = StabilizerTableau::zero_state(1);
        assert!(matches!(
            t.measure(0, Basis::Z, Some(true), &mut rng()),
            Err(Error::ImpossibleOutcome { .. })
        ));
    }

    #[test]
    fn measuring_removed_qubit_fails() {
        let t = StabilizerTableau::plus_state(2);
        let (_, t) = t.measure(1, Basis::Z, None, &mut rng()).unwrap();
        assert_eq!(t.measure(1, Basis::Z, None, &mut rng()).unwrap_err(), Error::QubitRemoved { qubit: 1 });
    }

    #[test]
    fn y_measurement_on_y_eigenstate() {
        let mut t = StabilizerTableau::plus_state(1);
        t.phase_gate(0).unwrap();
        let (m, _) = t.measure(0, Basis::Y, None, &mut rng()).unwrap();
        assert!(m.deterministic && !m.outcome);
    }

    #[test]
    fn bell_pair_correlations() {
        let mut t = StabilizerTableau::zero_state(2);
        t.hadamard(0).unwrap();
        t.cnot(0, 1).unwrap();
        assert!(t.stabilizes(&PauliString::from_paulis(&[Pauli::X, Pauli::X])));
        assert!(t.stabilizes(&PauliString::from_paulis(&[Pauli::Z, Pauli::Z])));
        assert_eq!(
            t.stabilizer_sign(&PauliString::from_paulis(&[Pauli::Y, Pauli::Y])),
            Some(true)
        );
        let mut r = rng();
        let a = t.measure_mut(0, Basis::Z, None, &mut r).unwrap();
        let b = t.measure_mut(1, Basis::Z, None, &mut r).unwrap();
        assert!(b.deterministic);
        assert_eq!(a.outcome, b.outcome);
    }

    #[test]
    fn cz_builds_the_same_graph_state() {
        let spec = GraphSpec::complete(4);
        let mut t = StabilizerTableau::plus_state(4);
        for (a, b) in spec.edges() {
            t.cz(a, b).unwrap();
        }
        assert!(t.same_state(&StabilizerTableau::graph_state(&spec).unwrap()));
    }

    #[test]
    fn validity_survives_measurements() {
        let spec = GraphSpec::tree(&[2, 2]).unwrap();
        let mut t = StabilizerTableau::graph_state(&spec).unwrap();
        let mut r = rng();
        for (q, b) in [(1, Basis::X), (0, Basis::Z), (4, Basis::Y), (6, Basis::Z)] {
            t.measure_mut(q, b, None, &mut r).unwrap();
            assert!(t.is_valid());
        }
    }
}
