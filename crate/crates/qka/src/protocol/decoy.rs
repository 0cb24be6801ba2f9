//! Decoy photons, in-transit frames, and channel checking.
//!
//! A sender inserts `n` decoy single photons at secret positions among the
//! `n` traveling message qubits. Positions and preparation bases are
//! disclosed only after the receiver acknowledges receipt, so an adversary
//! acting on the channel cannot tell decoys from message qubits.

use crate::error::QkaError;
use crate::qcore::{measure_basis, Basis, SingleQubitState};
use crate::rng::RandomSource;

/// The four decoy preparation states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecoyState {
    Zero,
    One,
    Plus,
    Minus,
}

impl DecoyState {
    pub const ALL: [DecoyState; 4] = [
        DecoyState::Zero,
        DecoyState::One,
        DecoyState::Plus,
        DecoyState::Minus,
    ];

    /// The basis this state was prepared in.
    pub fn basis(self) -> Basis {
        match self {
            DecoyState::Zero | DecoyState::One => Basis::Z,
            DecoyState::Plus | DecoyState::Minus => Basis::X,
        }
    }

    /// Index of the state within its own basis (0↦|0⟩/|+⟩, 1↦|1⟩/|−⟩).
    pub fn bit(self) -> u8 {
        match self {
            DecoyState::Zero | DecoyState::Plus => 0,
            DecoyState::One | DecoyState::Minus => 1,
        }
    }

    pub fn state(self) -> SingleQubitState {
        match self {
            DecoyState::Zero => SingleQubitState::zero(),
            DecoyState::One => SingleQubitState::one(),
            DecoyState::Plus => SingleQubitState::plus(),
            DecoyState::Minus => SingleQubitState::minus(),
        }
    }

    pub fn random(rng: &mut RandomSource) -> Self {
        Self::ALL[rng.gen_range(4)]
    }
}

impl std::fmt::Display for DecoyState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DecoyState::Zero => "|0>",
            DecoyState::One => "|1>",
            DecoyState::Plus => "|+>",
            DecoyState::Minus => "|->",
        };
        write!(f, "{s}")
    }
}

/// One decoy's bookkeeping: its frame position and the prepared state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecoyEntry {
    pub position: usize,
    pub prepared: DecoyState,
}

/// The sender's private record of where its decoys sit in a frame, held back
/// until the receiver acknowledges receipt.
#[derive(Clone, Debug)]
pub struct DecoyRecord {
    pub ring: usize,
    pub hop: usize,
    entries: Vec<DecoyEntry>,
}

impl DecoyRecord {
    pub(crate) fn new(ring: usize, hop: usize, entries: Vec<DecoyEntry>) -> Self {
        Self { ring, hop, entries }
    }

    pub fn entries(&self) -> &[DecoyEntry] {
        &self.entries
    }

    pub fn positions(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.position).collect()
    }

    pub fn bases(&self) -> Vec<Basis> {
        self.entries.iter().map(|e| e.prepared.basis()).collect()
    }
}

/// One slot of an in-transit qubit sequence.
#[derive(Clone, Debug)]
pub enum FrameSlot {
    /// A decoy photon, carried by value.
    Decoy(SingleQubitState),
    /// The traveling half of the sending ring's pair `index`; the joint
    /// state stays with the ring.
    Message(usize),
}

/// An in-transit sequence of message qubits with hidden decoys.
#[derive(Clone, Debug)]
pub struct Frame {
    pub ring: usize,
    pub hop: usize,
    pub sender: usize,
    pub receiver: usize,
    pub slots: Vec<FrameSlot>,
}

impl Frame {
    pub fn message_count(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| matches!(s, FrameSlot::Message(_)))
            .count()
    }

    pub fn decoy_count(&self) -> usize {
        self.slots.len() - self.message_count()
    }

    /// Message pair indices in frame order.
    pub fn message_order(&self) -> Vec<usize> {
        self.slots
            .iter()
            .filter_map(|s| match s {
                FrameSlot::Message(i) => Some(*i),
                FrameSlot::Decoy(_) => None,
            })
            .collect()
    }
}

/// Build the slot sequence for a hop: the `message_count` traveling qubits in
/// order, with `message_count` fresh decoys at uniformly random positions.
pub fn insert_decoys(
    message_count: usize,
    rng: &mut RandomSource,
) -> (Vec<FrameSlot>, Vec<DecoyEntry>) {
    let total = 2 * message_count;
    // Uniform choice of decoy positions: shuffle slot kinds, then fill
    // message slots in traveling order.
    let mut is_decoy: Vec<bool> = (0..total).map(|i| i < message_count).collect();
    rng.shuffle(&mut is_decoy);

    let mut slots = Vec::with_capacity(total);
    let mut entries = Vec::with_capacity(message_count);
    let mut next_message = 0;
    for (position, decoy) in is_decoy.into_iter().enumerate() {
        if decoy {
            let prepared = DecoyState::random(rng);
            slots.push(FrameSlot::Decoy(prepared.state()));
            entries.push(DecoyEntry { position, prepared });
        } else {
            slots.push(FrameSlot::Message(next_message));
            next_message += 1;
        }
    }
    (slots, entries)
}

/// Result of a channel check on one frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOutcome {
    pub error_rate: f64,
    pub pass: bool,
    pub mismatches: usize,
    pub checked: usize,
}

/// Measure each decoy in its preparation basis and compare with the record.
///
/// `error_rate` is mismatches over decoy count; the check passes iff it does
/// not exceed `threshold`.
pub fn check_decoys(
    frame: &mut Frame,
    record: &DecoyRecord,
    threshold: f64,
    rng: &mut RandomSource,
) -> Result<CheckOutcome, QkaError> {
    if record.ring != frame.ring || record.hop != frame.hop {
        return Err(QkaError::RecordMismatch(format!(
            "record is for ring {} hop {}, frame is ring {} hop {}",
            record.ring, record.hop, frame.ring, frame.hop
        )));
    }
    let mut mismatches = 0;
    for entry in &record.entries {
        let slot = frame.slots.get_mut(entry.position).ok_or_else(|| {
            QkaError::RecordMismatch(format!("decoy position {} out of range", entry.position))
        })?;
        let qubit = match slot {
            FrameSlot::Decoy(q) => q,
            FrameSlot::Message(_) => {
                return Err(QkaError::RecordMismatch(format!(
                    "position {} holds a message qubit",
                    entry.position
                )))
            }
        };
        let outcome = measure_basis(qubit, entry.prepared.basis(), rng);
        *qubit = outcome.post_state;
        if outcome.value != entry.prepared.bit() {
            mismatches += 1;
        }
    }
    let checked = record.entries.len();
    let error_rate = if checked == 0 {
        0.0
    } else {
        mismatches as f64 / checked as f64
    };
    Ok(CheckOutcome {
        error_rate,
        pass: error_rate <= threshold,
        mismatches,
        checked,
    })
}
