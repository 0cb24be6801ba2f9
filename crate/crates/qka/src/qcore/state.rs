//! One- and two-qubit state vectors with exact complex amplitudes.
//!
//! Every state appearing in the simulated protocols has amplitudes drawn from
//! {0, ±1/2, ±1/√2, ±1}, so double precision with a fixed comparison
//! tolerance is exact for all practical purposes.

use num_complex::Complex64;

use crate::error::QkaError;

/// Complex amplitude of a basis component.
pub type Amplitude = Complex64;

/// Comparison tolerance for amplitudes and probabilities.
pub const EPSILON: f64 = 1e-12;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn re(x: f64) -> Amplitude {
    Amplitude::new(x, 0.0)
}

/// State of a single qubit: `amp0·|0⟩ + amp1·|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleQubitState {
    pub amp0: Amplitude,
    pub amp1: Amplitude,
}

impl SingleQubitState {
    /// |0⟩
    pub fn zero() -> Self {
        Self {
            amp0: re(1.0),
            amp1: re(0.0),
        }
    }

    /// |1⟩
    pub fn one() -> Self {
        Self {
            amp0: re(0.0),
            amp1: re(1.0),
        }
    }

    /// |+⟩ = (|0⟩ + |1⟩)/√2
    pub fn plus() -> Self {
        Self {
            amp0: re(FRAC_1_SQRT_2),
            amp1: re(FRAC_1_SQRT_2),
        }
    }

    /// |−⟩ = (|0⟩ − |1⟩)/√2
    pub fn minus() -> Self {
        Self {
            amp0: re(FRAC_1_SQRT_2),
            amp1: re(-FRAC_1_SQRT_2),
        }
    }

    /// Validating constructor: amplitudes must be finite and normalized.
    pub fn from_amplitudes(amp0: Amplitude, amp1: Amplitude) -> Result<Self, QkaError> {
        let state = Self { amp0, amp1 };
        if !state.is_finite() {
            return Err(QkaError::NonFiniteAmplitude);
        }
        let norm_sq = state.norm_sq();
        if (norm_sq - 1.0).abs() > EPSILON {
            return Err(QkaError::NotNormalized { norm_sq });
        }
        Ok(state)
    }

    pub fn norm_sq(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    fn is_finite(&self) -> bool {
        [self.amp0, self.amp1]
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= EPSILON
    }

    /// Componentwise equality within [`EPSILON`].
    pub fn approx_eq(&self, other: &Self) -> bool {
        (self.amp0 - other.amp0).norm() <= EPSILON && (self.amp1 - other.amp1).norm() <= EPSILON
    }

    /// True iff `self = e^{iθ}·other` for some phase θ.
    pub fn equal_up_to_global_phase(&self, other: &Self) -> bool {
        equal_up_to_phase(&[self.amp0, self.amp1], &[other.amp0, other.amp1])
    }
}

/// State of an ordered qubit pair; amplitudes indexed by |00⟩, |01⟩, |10⟩, |11⟩
/// with the first qubit as the most significant bit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitState {
    pub amps: [Amplitude; 4],
}

impl TwoQubitState {
    /// Validating constructor: amplitudes must be finite and normalized.
    pub fn from_amplitudes(amps: [Amplitude; 4]) -> Result<Self, QkaError> {
        let state = Self { amps };
        if !state
            .amps
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
        {
            return Err(QkaError::NonFiniteAmplitude);
        }
        let norm_sq = state.norm_sq();
        if (norm_sq - 1.0).abs() > EPSILON {
            return Err(QkaError::NotNormalized { norm_sq });
        }
        Ok(state)
    }

    /// Real amplitudes shorthand, unvalidated (crate-internal construction).
    pub(crate) fn from_real(amps: [f64; 4]) -> Self {
        Self {
            amps: [re(amps[0]), re(amps[1]), re(amps[2]), re(amps[3])],
        }
    }

    /// Product state `first ⊗ second`.
    pub fn product(first: &SingleQubitState, second: &SingleQubitState) -> Self {
        Self {
            amps: [
                first.amp0 * second.amp0,
                first.amp0 * second.amp1,
                first.amp1 * second.amp0,
                first.amp1 * second.amp1,
            ],
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= EPSILON
    }

    /// Componentwise equality within [`EPSILON`].
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .all(|(a, b)| (a - b).norm() <= EPSILON)
    }
}

/// True iff `a = e^{iθ}·b` within [`EPSILON`] for some θ.
///
/// The encoding algebra uses the real-matrix Y = Z·X, so composed operations
/// differ from Bell basis states by ±1 factors; this is the comparison that
/// treats those as the same physical state.
pub fn equal_up_to_global_phase(a: &TwoQubitState, b: &TwoQubitState) -> bool {
    equal_up_to_phase(&a.amps, &b.amps)
}

fn equal_up_to_phase(a: &[Amplitude], b: &[Amplitude]) -> bool {
    // Anchor the phase on b's largest component.
    let (anchor, largest) = b
        .iter()
        .enumerate()
        .max_by(|(_, x), (_, y)| x.norm().total_cmp(&y.norm()))
        .expect("states are non-empty");
    if largest.norm() <= EPSILON {
        // b ≈ 0: only the zero vector matches.
        return a.iter().all(|x| x.norm() <= EPSILON);
    }
    let phase = a[anchor] / largest;
    if (phase.norm() - 1.0).abs() > 1e-9 {
        return false;
    }
    a.iter()
        .zip(b.iter())
        .all(|(x, y)| (x - phase * y).norm() <= EPSILON)
}
