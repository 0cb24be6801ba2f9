//! Per-initiator protocol rings.
//!
//! Each party prepares `n` entangled pairs, keeps the first qubit of each
//! pair (the retained halves) and circulates the second qubits through every
//! other party. Each recipient encodes its key on the traveling halves, so
//! after the full circuit the joint states carry the XOR of all the other
//! parties' symbols.

use crate::error::QkaError;
use crate::protocol::key::SecretKey;
use crate::qcore::{apply_pauli, make_bell, BellLabel, QubitIndex, TwoQubitState};

/// Identifies a party (0-based). Protocol text that numbers parties from 1
/// with "(j+1) mod N" arithmetic maps to `(id + 1) % parties` here.
pub type PartyId = usize;

/// Where a ring currently is in its circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingPhase {
    /// Pairs prepared, nothing sent yet.
    Preparing,
    /// `hops_done` transmissions completed, sequence with an intermediate party.
    InTransit { hops_done: usize },
    /// Sequence returned to the initiator and checked; waiting on the
    /// measurement barrier.
    AwaitingCheck,
    /// Finished; eligible for final measurement once the barrier opens.
    Complete,
}

/// One initiator's ring: retained halves plus the traveling sequence state.
#[derive(Clone, Debug)]
pub struct RingState {
    pub initiator: PartyId,
    /// Joint state of (retained half, traveling half) for each position.
    pairs: Vec<TwoQubitState>,
    /// Number of encodings applied to the traveling sequence.
    pub encodings_applied: usize,
    pub phase: RingPhase,
    pub restarts: u32,
}

impl RingState {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[TwoQubitState] {
        &self.pairs
    }

    pub fn pairs_mut(&mut self) -> &mut [TwoQubitState] {
        &mut self.pairs
    }

    /// Index of the next transmission to perform, or `None` once the
    /// sequence is back with the initiator.
    pub fn next_hop(&self) -> Option<usize> {
        match self.phase {
            RingPhase::Preparing => Some(0),
            RingPhase::InTransit { hops_done } => Some(hops_done),
            RingPhase::AwaitingCheck | RingPhase::Complete => None,
        }
    }

    /// Discard all qubits and start over with fresh pairs.
    pub fn restart(&mut self) {
        let n = self.pairs.len();
        self.pairs = fresh_pairs(n);
        self.encodings_applied = 0;
        self.phase = RingPhase::Preparing;
        self.restarts += 1;
    }
}

fn fresh_pairs(n: usize) -> Vec<TwoQubitState> {
    vec![make_bell(BellLabel::PhiPlus); n]
}

/// Prepare a ring of `n` Φ⁺ pairs for the given initiator.
pub fn prepare_ring(initiator: PartyId, n: usize) -> Result<RingState, QkaError> {
    if n == 0 {
        return Err(QkaError::InvalidConfig(
            "a ring needs at least one key symbol".into(),
        ));
    }
    Ok(RingState {
        initiator,
        pairs: fresh_pairs(n),
        encodings_applied: 0,
        phase: RingPhase::Preparing,
        restarts: 0,
    })
}

/// Encode a key on the traveling halves: position `i` gets the operation for
/// `key.symbols()[i]`.
pub fn encode_key(pairs: &mut [TwoQubitState], key: &SecretKey) -> Result<(), QkaError> {
    if pairs.len() != key.len() {
        return Err(QkaError::LengthMismatch(format!(
            "{} traveling qubits vs {} key symbols",
            pairs.len(),
            key.len()
        )));
    }
    for (pair, symbol) in pairs.iter_mut().zip(key.symbols()) {
        *pair = apply_pauli(symbol.pauli(), QubitIndex::Second, pair);
    }
    Ok(())
}
