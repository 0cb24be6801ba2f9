//! The N-party key agreement protocol: ring preparation, decoy insertion and
//! channel checking, per-symbol encoding, hop-by-hop transmission, the
//! post-measurement barrier, and final key derivation.

mod decoy;
mod engine;
mod key;
mod ring;

pub use decoy::{
    check_decoys, insert_decoys, CheckOutcome, DecoyEntry, DecoyRecord, DecoyState, Frame,
    FrameSlot,
};
pub use engine::{
    final_measure, measurement_barrier, run_hop, run_protocol, Announcement, BroadcastLog,
    DetectionEvent, HopReport, KeySource, MeasurePermit, ProtocolConfig, RunOutcome,
    SharedKeyResult,
};
pub use key::{BitString, KeySymbol, SecretKey};
pub use ring::{encode_key, prepare_ring, PartyId, RingPhase, RingState};
