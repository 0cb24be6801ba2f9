//! Key material: two-bit symbols, per-party secret keys, and classical
//! bit strings.

use crate::error::QkaError;
use crate::qcore::PauliOp;
use crate::rng::RandomSource;

/// One two-bit key symbol in {00, 01, 10, 11}.
///
/// Symbols are in bijection with the encoding operations: 00↔I, 01↔Z,
/// 10↔X, 11↔Y.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KeySymbol(u8);

impl KeySymbol {
    pub const ALL: [KeySymbol; 4] = [KeySymbol(0), KeySymbol(1), KeySymbol(2), KeySymbol(3)];

    /// Only the low two bits are kept.
    pub fn new(bits: u8) -> Self {
        Self(bits & 0b11)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn pauli(self) -> PauliOp {
        PauliOp::from_code(self.0)
    }

    pub fn from_pauli(op: PauliOp) -> Self {
        Self(op.code())
    }

    pub fn xor(self, other: Self) -> Self {
        Self(self.0 ^ other.0)
    }

    pub fn high_bit(self) -> u8 {
        (self.0 >> 1) & 1
    }

    pub fn low_bit(self) -> u8 {
        self.0 & 1
    }

    pub fn random(rng: &mut RandomSource) -> Self {
        Self(rng.gen_range(4) as u8)
    }
}

impl std::fmt::Display for KeySymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:02b}", self.0)
    }
}

/// A party's secret key: an ordered list of `n` two-bit symbols (2n bits).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    symbols: Vec<KeySymbol>,
}

impl SecretKey {
    pub fn new(symbols: Vec<KeySymbol>) -> Result<Self, QkaError> {
        if symbols.is_empty() {
            return Err(QkaError::InvalidConfig(
                "secret key must be non-empty".into(),
            ));
        }
        Ok(Self { symbols })
    }

    pub fn random(n: usize, rng: &mut RandomSource) -> Result<Self, QkaError> {
        Self::new((0..n).map(|_| KeySymbol::random(rng)).collect())
    }

    pub fn symbols(&self) -> &[KeySymbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbolwise XOR. Lengths must match.
    pub fn xor(&self, other: &Self) -> Result<Self, QkaError> {
        if self.len() != other.len() {
            return Err(QkaError::LengthMismatch(format!(
                "key lengths {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Self {
            symbols: self
                .symbols
                .iter()
                .zip(other.symbols.iter())
                .map(|(a, b)| a.xor(*b))
                .collect(),
        })
    }

    /// The 2n classical bits, high bit of each symbol first.
    pub fn to_bits(&self) -> BitString {
        BitString::from_bits(
            self.symbols
                .iter()
                .flat_map(|s| [s.high_bit(), s.low_bit()])
                .collect(),
        )
    }
}

/// A classical bit string.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    /// Values are reduced mod 2.
    pub fn from_bits(bits: Vec<u8>) -> Self {
        Self(bits.into_iter().map(|b| b & 1).collect())
    }

    pub fn random(len: usize, rng: &mut RandomSource) -> Self {
        Self((0..len).map(|_| (rng.next_u64() & 1) as u8).collect())
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn xor(&self, other: &Self) -> Result<Self, QkaError> {
        if self.len() != other.len() {
            return Err(QkaError::LengthMismatch(format!(
                "bit string lengths {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Self(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a ^ b)
                .collect(),
        ))
    }

    /// Complement of every bit.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|b| b ^ 1).collect())
    }

    /// Positions where the two strings differ.
    pub fn diff_positions(&self, other: &Self) -> Vec<usize> {
        self.0
            .iter()
            .zip(other.0.iter())
            .enumerate()
            .filter_map(|(i, (a, b))| (a != b).then_some(i))
            .collect()
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}
