//! The Bell basis and its two-bit labeling.

use super::state::TwoQubitState;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Label of a Bell basis state.
///
/// The two-bit code is (parity bit, phase bit): the parity bit says whether
/// the qubits are anti-correlated (Ψ) and the phase bit carries the relative
/// sign. This is exactly the XOR value recovered by the key-agreement
/// measurement: Φ⁺=00, Φ⁻=01, Ψ⁺=10, Ψ⁻=11.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellLabel {
    /// (|00⟩ + |11⟩)/√2
    PhiPlus,
    /// (|00⟩ − |11⟩)/√2
    PhiMinus,
    /// (|01⟩ + |10⟩)/√2
    PsiPlus,
    /// (|01⟩ − |10⟩)/√2
    PsiMinus,
}

impl BellLabel {
    /// In code order 00, 01, 10, 11.
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    pub fn code(self) -> u8 {
        match self {
            BellLabel::PhiPlus => 0b00,
            BellLabel::PhiMinus => 0b01,
            BellLabel::PsiPlus => 0b10,
            BellLabel::PsiMinus => 0b11,
        }
    }

    pub fn from_code(code: u8) -> Self {
        Self::ALL[(code & 0b11) as usize]
    }

    /// 1 when the qubits are anti-correlated (Ψ states).
    pub fn parity_bit(self) -> u8 {
        (self.code() >> 1) & 1
    }

    /// 1 when the relative sign is negative (minus states).
    pub fn phase_bit(self) -> u8 {
        self.code() & 1
    }
}

impl std::fmt::Display for BellLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        };
        write!(f, "{s}")
    }
}

/// Exact amplitude vector of the labeled Bell state.
pub fn make_bell(label: BellLabel) -> TwoQubitState {
    let h = FRAC_1_SQRT_2;
    match label {
        BellLabel::PhiPlus => TwoQubitState::from_real([h, 0.0, 0.0, h]),
        BellLabel::PhiMinus => TwoQubitState::from_real([h, 0.0, 0.0, -h]),
        BellLabel::PsiPlus => TwoQubitState::from_real([0.0, h, h, 0.0]),
        BellLabel::PsiMinus => TwoQubitState::from_real([0.0, h, -h, 0.0]),
    }
}
