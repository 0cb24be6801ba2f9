//! Exact simulation of one- and two-qubit states: the four encoding
//! operations, Bell states, and measurements in the Z, X, and Bell bases.
//!
//! All types are immutable values; operations are pure given an explicit
//! [`crate::rng::RandomSource`], so independent trials can run on concurrent
//! workers with independent sources.

mod bell;
mod measure;
mod pauli;
mod state;

pub use bell::{make_bell, BellLabel};
pub use measure::{
    bell_measure, bell_probabilities, measure_basis, measure_qubit, Basis, MeasurementOutcome,
};
pub use pauli::{apply_pauli, apply_pauli_single, PauliOp, QubitIndex};
pub use state::{equal_up_to_global_phase, Amplitude, SingleQubitState, TwoQubitState, EPSILON};
