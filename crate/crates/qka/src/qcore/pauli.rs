//! The four encoding operations I, Z, X, Y and their action on states.
//!
//! Y uses the real-matrix convention [[0,1],[-1,0]], which equals Z·X. With
//! this convention every product of the four operations is again one of the
//! four up to a ±1 global phase, and the two-bit codes compose by XOR.

use super::state::{Amplitude, SingleQubitState, TwoQubitState};

/// One of the four single-qubit encoding operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PauliOp {
    I,
    Z,
    X,
    Y,
}

impl PauliOp {
    pub const ALL: [PauliOp; 4] = [PauliOp::I, PauliOp::Z, PauliOp::X, PauliOp::Y];

    /// Two-bit code from the key table: I=00, Z=01, X=10, Y=11.
    pub fn code(self) -> u8 {
        match self {
            PauliOp::I => 0b00,
            PauliOp::Z => 0b01,
            PauliOp::X => 0b10,
            PauliOp::Y => 0b11,
        }
    }

    /// Inverse of [`PauliOp::code`]; only the low two bits are used.
    pub fn from_code(code: u8) -> Self {
        match code & 0b11 {
            0b00 => PauliOp::I,
            0b01 => PauliOp::Z,
            0b10 => PauliOp::X,
            _ => PauliOp::Y,
        }
    }

    /// 2×2 matrix, row-major: `matrix()[row][col]`.
    pub fn matrix(self) -> [[Amplitude; 2]; 2] {
        let r = |x: f64| Amplitude::new(x, 0.0);
        match self {
            PauliOp::I => [[r(1.0), r(0.0)], [r(0.0), r(1.0)]],
            PauliOp::Z => [[r(1.0), r(0.0)], [r(0.0), r(-1.0)]],
            PauliOp::X => [[r(0.0), r(1.0)], [r(1.0), r(0.0)]],
            PauliOp::Y => [[r(0.0), r(1.0)], [r(-1.0), r(0.0)]],
        }
    }
}

impl std::fmt::Display for PauliOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PauliOp::I => "I",
            PauliOp::Z => "Z",
            PauliOp::X => "X",
            PauliOp::Y => "Y",
        };
        write!(f, "{s}")
    }
}

/// Which qubit of a pair an operation targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitIndex {
    First,
    Second,
}

/// Apply `op` to a lone qubit.
pub fn apply_pauli_single(op: PauliOp, state: &SingleQubitState) -> SingleQubitState {
    let SingleQubitState { amp0, amp1 } = *state;
    match op {
        PauliOp::I => *state,
        PauliOp::Z => SingleQubitState { amp0, amp1: -amp1 },
        PauliOp::X => SingleQubitState {
            amp0: amp1,
            amp1: amp0,
        },
        PauliOp::Y => SingleQubitState {
            amp0: amp1,
            amp1: -amp0,
        },
    }
}

/// Apply `op` to one qubit of a pair, i.e. (U⊗I) or (I⊗U) on the joint state.
///
/// Implemented by direct index manipulation on the amplitude vector; the
/// acceptance suite cross-checks this path against full 4×4 matrix products.
pub fn apply_pauli(op: PauliOp, target: QubitIndex, state: &TwoQubitState) -> TwoQubitState {
    let a = state.amps;
    let amps = match (op, target) {
        (PauliOp::I, _) => a,
        // Second qubit: 2×2 blocks are (a0,a1) and (a2,a3).
        (PauliOp::Z, QubitIndex::Second) => [a[0], -a[1], a[2], -a[3]],
        (PauliOp::X, QubitIndex::Second) => [a[1], a[0], a[3], a[2]],
        (PauliOp::Y, QubitIndex::Second) => [a[1], -a[0], a[3], -a[2]],
        // First qubit: blocks are (a0,a2) and (a1,a3).
        (PauliOp::Z, QubitIndex::First) => [a[0], a[1], -a[2], -a[3]],
        (PauliOp::X, QubitIndex::First) => [a[2], a[3], a[0], a[1]],
        (PauliOp::Y, QubitIndex::First) => [a[2], a[3], -a[0], -a[1]],
    };
    TwoQubitState { amps }
}
