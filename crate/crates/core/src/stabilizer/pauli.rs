//! Pauli operators and phased Pauli strings in the binary symplectic form.
//!
//! A single-qubit Pauli is stored as an `(x, z)` bit pair with `Y = (1, 1)`.
//! A [`PauliString`] is `i^phase` times a tensor product of such Paulis, with
//! the x and z components packed into 64-bit words.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Pauli {
    #[default]
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn x_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn z_bit(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn is_identity(self) -> bool {
        self == Pauli::I
    }

    /// Product ignoring phase.
    pub fn times(self, other: Pauli) -> Pauli {
        Pauli::from_bits(self.x_bit() ^ other.x_bit(), self.z_bit() ^ other.z_bit())
    }

    pub fn commutes_with(self, other: Pauli) -> bool {
        !((self.x_bit() & other.z_bit()) ^ (self.z_bit() & other.x_bit()))
    }

    /// Whether this error flips the outcome of a measurement in `basis`.
    pub fn flips(self, basis: Pauli) -> bool {
        !self.commutes_with(basis)
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Global phase `i^k`, `k` in `0..4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn is_negative(self) -> bool {
        self.0 == 2
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })
    }
}

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// A phased tensor product of single-qubit Paulis over a fixed number of qubits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: Phase,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self { n, x: vec![0; w], z: vec![0; w], phase: Phase::ONE }
    }

    /// `P` acting on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(qubit, p);
        s
    }

    pub fn from_paulis(ops: &[Pauli]) -> Self {
        let mut s = Self::identity(ops.len());
        for (q, &p) in ops.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    /// Builds a string from sparse `(qubit, Pauli)` sites. Repeated sites multiply,
    /// phases ignored.
    pub fn from_sites(n: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n);
        for &(q, p) in sites {
            if q >= n {
                return Err(invalid("Pauli site", format!("qubit {q} out of range for {n} qubits")));
            }
            let cur = s.get(q);
            s.set(q, cur.times(p));
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        assert!(qubit < self.n, "qubit {qubit} out of range");
        let (w, b) = (qubit / WORD, qubit % WORD);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        assert!(qubit < self.n, "qubit {qubit} out of range");
        let (w, b) = (qubit / WORD, qubit % WORD);
        let mask = 1u64 << b;
        self.x[w] = (self.x[w] & !mask) | (u64::from(p.x_bit()) << b);
        self.z[w] = (self.z[w] & !mask) | (u64::from(p.z_bit()) << b);
    }

    pub fn x_bit(&self, qubit: usize) -> bool {
        (self.x[qubit / WORD] >> (qubit % WORD)) & 1 == 1
    }

    pub fn z_bit(&self, qubit: usize) -> bool {
        (self.z[qubit / WORD] >> (qubit % WORD)) & 1 == 1
    }

    pub(crate) fn flip_x(&mut self, qubit: usize) {
        self.x[qubit / WORD] ^= 1 << (qubit % WORD);
    }

    pub(crate) fn flip_z(&mut self, qubit: usize) {
        self.z[qubit / WORD] ^= 1 << (qubit % WORD);
    }

    pub(crate) fn negate(&mut self) {
        self.phase = self.phase * Phase::MINUS_ONE;
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.weight() == 0
    }

    /// Non-identity sites in ascending qubit order.
    pub fn support(&self) -> Vec<(usize, Pauli)> {
        (0..self.n).map(|q| (q, self.get(q))).filter(|(_, p)| !p.is_identity()).collect()
    }

    /// Equality of the operator parts, ignoring the global phase.
    pub fn eq_up_to_phase(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        assert_eq!(self.n, other.n, "length mismatch");
        let odd = self
            .x
            .iter()
            .zip(&self.z)
            .zip(other.x.iter().zip(&other.z))
            .map(|((x1, z1), (x2, z2))| ((x1 & z2) ^ (z1 & x2)).count_ones())
            .sum::<u32>();
        odd % 2 == 0
    }

    /// In-place right multiplication: `self <- self * rhs`.
    pub fn mul_assign_right(&mut self, rhs: &Self) {
        assert_eq!(self.n, rhs.n, "length mismatch");
        let mut exponent: i64 = i64::from(self.phase.0) + i64::from(rhs.phase.0);
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], rhs.x[w], rhs.z[w]);
            // cyclic products XY, YZ, ZX pick up +i; anticyclic ones -i
            let plus = (x1 & !z1 & x2 & z2) | (x1 & z1 & !x2 & z2) | (!x1 & z1 & x2 & !z2);
            let minus = (x1 & !z1 & !x2 & z2) | (x1 & z1 & x2 & !z2) | (!x1 & z1 & x2 & z2);
            exponent += i64::from(plus.count_ones()) - i64::from(minus.count_ones());
            self.x[w] = x1 ^ x2;
            self.z[w] = z1 ^ z2;
        }
        self.phase = Phase::from_exponent(exponent);
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::identity(self.n + other.n);
        for q in 0..self.n {
            out.set(q, self.get(q));
        }
        for q in 0..other.n {
            out.set(self.n + q, other.get(q));
        }
        out.phase = self.phase * other.phase;
        out
    }
}

impl Mul for &PauliString {
    type Output = PauliString;
    fn mul(self, rhs: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.mul_assign_right(rhs);
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phase)?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_strings(n: usize) -> Vec<PauliString> {
        let mut out = vec![];
        for code in 0..4usize.pow(n as u32) {
            for phase in 0..4 {
                let ops: Vec<Pauli> = (0..n).map(|q| Pauli::ALL[(code >> (2 * q)) & 3]).collect();
                out.push(PauliString::from_paulis(&ops).with_phase(Phase(phase)));
            }
        }
        out
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let x = PauliString::from_paulis(&[Pauli::X]);
        let z = PauliString::from_paulis(&[Pauli::Z]);
        let y = PauliString::from_paulis(&[Pauli::Y]);
        assert_eq!(&x * &z, y.clone().with_phase(Phase::MINUS_I));
        assert_eq!(&z * &x, y.with_phase(Phase::I));
    }

    #[test]
    fn single_qubit_table() {
        use Pauli::*;
        let cases = [
            (X, Y, Z, Phase::I),
            (Y, Z, X, Phase::I),
            (Z, X, Y, Phase::I),
            (Y, X, Z, Phase::MINUS_I),
            (Z, Y, X, Phase::MINUS_I),
            (X, X, I, Phase::ONE),
        ];
        for (a, b, c, ph) in cases {
            let lhs = &PauliString::from_paulis(&[a]) * &PauliString::from_paulis(&[b]);
            assert_eq!(lhs, PauliString::from_paulis(&[c]).with_phase(ph), "{a}{b}");
        }
    }

    #[test]
    fn associativity_exhaustive_on_one_and_two_qubits() {
        for n in 1..=2 {
            let all = all_strings(n);
            // phases factor out of products, so fix phase on the middle and right factors
            let unphased: Vec<_> = all.iter().filter(|p| p.phase() == Phase::ONE).cloned().collect();
            for p in &all {
                for q in &unphased {
                    for r in &unphased {
                        assert_eq!(&(p * q) * r, p * &(q * r), "{p} {q} {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn commutation_matches_product_order() {
        let all = all_strings(2);
        for p in all.iter().step_by(4) {
            for q in all.iter().step_by(4) {
                let pq = p * q;
                let qp = q * p;
                assert_eq!(p.commutes_with(q), pq == qp);
            }
        }
    }

    #[test]
    fn words_beyond_64_qubits() {
        let mut s = PauliString::identity(130);
        s.set(0, Pauli::X);
        s.set(64, Pauli::Y);
        s.set(129, Pauli::Z);
        assert_eq!(s.weight(), 3);
        assert_eq!(s.support(), vec![(0, Pauli::X), (64, Pauli::Y), (129, Pauli::Z)]);
        let t = PauliString::single(130, 64, Pauli::X);
        assert!(!s.commutes_with(&t));
        let st = &s * &t;
        assert_eq!(st.get(64), Pauli::Z);
    }

    #[test]
    fn flips_measurement_basis() {
        assert!(Pauli::Z.flips(Pauli::X));
        assert!(Pauli::Y.flips(Pauli::X));
        assert!(!Pauli::X.flips(Pauli::X));
        assert!(Pauli::X.flips(Pauli::Z));
    }
}
