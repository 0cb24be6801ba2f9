//! Born-rule measurements in the Z, X, and Bell bases.

use super::bell::{make_bell, BellLabel};
use super::pauli::QubitIndex;
use super::state::{Amplitude, SingleQubitState, TwoQubitState};
use crate::rng::RandomSource;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A measurement basis for single qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Computational basis {|0⟩, |1⟩}.
    Z,
    /// Diagonal basis {|+⟩, |−⟩}.
    X,
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Basis::Z => write!(f, "Z"),
            Basis::X => write!(f, "X"),
        }
    }
}

/// Outcome of a projective measurement: the observed value and the
/// post-measurement (collapsed) state.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome<V, S> {
    pub value: V,
    pub post_state: S,
}

/// Draw an index from an explicit probability vector with a single uniform
/// sample. Probabilities must sum to 1 within tolerance.
fn sample_index(probs: &[f64], rng: &mut RandomSource) -> usize {
    let draw = rng.next_f64();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Measure a lone qubit in the given basis.
///
/// The outcome value is the basis index: in Z, 0↦|0⟩ and 1↦|1⟩; in X,
/// 0↦|+⟩ and 1↦|−⟩.
pub fn measure_basis(
    state: &SingleQubitState,
    basis: Basis,
    rng: &mut RandomSource,
) -> MeasurementOutcome<u8, SingleQubitState> {
    let (p0, states) = match basis {
        Basis::Z => (
            state.amp0.norm_sqr(),
            [SingleQubitState::zero(), SingleQubitState::one()],
        ),
        Basis::X => {
            let plus_amp = (state.amp0 + state.amp1) * FRAC_1_SQRT_2;
            (
                plus_amp.norm_sqr(),
                [SingleQubitState::plus(), SingleQubitState::minus()],
            )
        }
    };
    let value = sample_index(&[p0, 1.0 - p0], rng) as u8;
    MeasurementOutcome {
        value,
        post_state: states[value as usize],
    }
}

/// Probability of each Bell outcome, in [`BellLabel::ALL`] order.
pub fn bell_probabilities(state: &TwoQubitState) -> [f64; 4] {
    let mut probs = [0.0; 4];
    for (i, label) in BellLabel::ALL.iter().enumerate() {
        let basis = make_bell(*label);
        let overlap: Amplitude = basis
            .amps
            .iter()
            .zip(state.amps.iter())
            .map(|(b, s)| b.conj() * s)
            .sum();
        probs[i] = overlap.norm_sqr();
    }
    probs
}

/// Measure a qubit pair in the Bell basis.
pub fn bell_measure(
    state: &TwoQubitState,
    rng: &mut RandomSource,
) -> MeasurementOutcome<BellLabel, TwoQubitState> {
    let probs = bell_probabilities(state);
    let idx = sample_index(&probs, rng);
    let label = BellLabel::ALL[idx];
    MeasurementOutcome {
        value: label,
        post_state: make_bell(label),
    }
}

/// Measure one qubit of a pair in the given basis, collapsing the joint state.
///
/// After the collapse the measured qubit is exactly the observed basis state
/// and the pair is a product state, which is what an intercept-and-resend
/// adversary leaves on the channel.
pub fn measure_qubit(
    state: &TwoQubitState,
    target: QubitIndex,
    basis: Basis,
    rng: &mut RandomSource,
) -> MeasurementOutcome<u8, TwoQubitState> {
    let a = state.amps;
    // Partner amplitudes conditioned on outcome 0 / 1 of the target qubit,
    // expressed in the measurement basis.
    let (cond0, cond1): ([Amplitude; 2], [Amplitude; 2]) = match (target, basis) {
        (QubitIndex::Second, Basis::Z) => ([a[0], a[2]], [a[1], a[3]]),
        (QubitIndex::Second, Basis::X) => (
            [(a[0] + a[1]) * FRAC_1_SQRT_2, (a[2] + a[3]) * FRAC_1_SQRT_2],
            [(a[0] - a[1]) * FRAC_1_SQRT_2, (a[2] - a[3]) * FRAC_1_SQRT_2],
        ),
        (QubitIndex::First, Basis::Z) => ([a[0], a[1]], [a[2], a[3]]),
        (QubitIndex::First, Basis::X) => (
            [(a[0] + a[2]) * FRAC_1_SQRT_2, (a[1] + a[3]) * FRAC_1_SQRT_2],
            [(a[0] - a[2]) * FRAC_1_SQRT_2, (a[1] - a[3]) * FRAC_1_SQRT_2],
        ),
    };
    let p0 = cond0[0].norm_sqr() + cond0[1].norm_sqr();
    let value = sample_index(&[p0, 1.0 - p0], rng) as u8;

    let (partner, prob) = if value == 0 {
        (cond0, p0)
    } else {
        (cond1, 1.0 - p0)
    };
    let scale = 1.0 / prob.sqrt();
    let partner = SingleQubitState {
        amp0: partner[0] * scale,
        amp1: partner[1] * scale,
    };
    let observed = match (basis, value) {
        (Basis::Z, 0) => SingleQubitState::zero(),
        (Basis::Z, _) => SingleQubitState::one(),
        (Basis::X, 0) => SingleQubitState::plus(),
        (Basis::X, _) => SingleQubitState::minus(),
    };
    let post_state = match target {
        QubitIndex::First => TwoQubitState::product(&observed, &partner),
        QubitIndex::Second => TwoQubitState::product(&partner, &observed),
    };
    MeasurementOutcome { value, post_state }
}
