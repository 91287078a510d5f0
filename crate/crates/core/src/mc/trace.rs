use std::fmt;

use serde::Serialize;

use crate::stabilizer::{Basis, Pauli};

/// One step of a sampled protocol run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Lost { qubit: u64 },
    PauliError { qubit: u64, pauli: char },
    BondAttempt { attempt: u64, success: bool },
    Measured { qubit: u64, basis: char, wrong: bool },
    Vote { votes: u64, wrong_votes: u64, result: &'static str },
    Byproduct { pauli: char },
}

impl Event {
    pub(crate) fn pauli_error(qubit: u64, p: Pauli) -> Self {
        Event::PauliError { qubit, pauli: p.symbol() }
    }

    pub(crate) fn measured(qubit: u64, basis: Basis, wrong: bool) -> Self {
        let basis = match basis {
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        };
        Event::Measured { qubit, basis, wrong }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Lost { qubit } => write!(f, "event=lost qubit={qubit}"),
            Event::PauliError { qubit, pauli } => write!(f, "event=pauli_error qubit={qubit} pauli={pauli}"),
            Event::BondAttempt { attempt, success } => write!(f, "event=bond_attempt attempt={attempt} success={success}"),
            Event::Measured { qubit, basis, wrong } => {
                write!(f, "event=measured qubit={qubit} basis={basis} wrong={wrong}")
            }
            Event::Vote { votes, wrong_votes, result } => {
                write!(f, "event=vote votes={votes} wrong_votes={wrong_votes} result={result}")
            }
            Event::Byproduct { pauli } => write!(f, "event=byproduct pauli={pauli}"),
        }
    }
}

/// Sink for protocol events. [`NoTrace`] compiles away.
pub trait Recorder {
    fn enabled(&self) -> bool;
    fn record(&mut self, event: Event);
}

pub struct NoTrace;

impl Recorder for NoTrace {
    #[inline]
    fn enabled(&self) -> bool {
        false
    }

    #[inline]
    fn record(&mut self, _: Event) {}
}

impl Recorder for Vec<Event> {
    fn enabled(&self) -> bool {
        true
    }

    fn record(&mut self, event: Event) {
        self.push(event);
    }
}

/// Event log of one replayed sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolTrace {
    pub scheme: &'static str,
    pub seed: u64,
    pub sample: u64,
    pub events: Vec<Event>,
    pub lost: bool,
    pub wrong: bool,
}

impl ProtocolTrace {
    pub(crate) fn new(scheme: &'static str, seed: u64, sample: u64) -> Self {
        Self { scheme, seed, sample, events: Vec::new(), lost: false, wrong: false }
    }
}

/// One line per event, then a summary line.
impl fmt::Display for ProtocolTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = format!("scheme={} seed={} sample={}", self.scheme, self.seed, self.sample);
        for e in &self.events {
            writeln!(f, "{head} {e}")?;
        }
        writeln!(f, "{head} event=result lost={} wrong={}", self.lost, self.wrong)
    }
}
