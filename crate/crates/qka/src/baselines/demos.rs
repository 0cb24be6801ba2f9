//! Executable demonstrations of the three baseline flaws: the undetectable
//! flip attack, the privacy leak, and the collusion attack.

use crate::adversary::AttackModel;
use crate::baselines::sap::{
    run_sap1_with_plan, run_sap2_with_plan, AttackPlan, SapEncoding, SapProtocol, SapRecovery,
};
use crate::error::QkaError;
use crate::protocol::BitString;
use crate::qcore::{
    apply_pauli, bell_measure, make_bell, BellLabel, PauliOp, QubitIndex, TwoQubitState,
};
use crate::rng::RandomSource;

/// Per-position prediction of which final-key bits a single-transmission
/// flip corrupts.
///
/// The flip shifts every Bell label by the operation's two-bit code. The
/// two-party baseline decodes only the parity bit, so Z leaves its key
/// intact; the three-party baseline folds parity and phase into the final
/// key, so X and Z both flip every position.
pub fn predicted_flip_positions(protocol: SapProtocol, op: PauliOp, n: usize) -> Vec<usize> {
    let shift = op.code();
    let flips = match protocol {
        SapProtocol::Sap1 => (shift >> 1) & 1 == 1,
        SapProtocol::Sap2 => ((shift >> 1) ^ (shift & 1)) & 1 == 1,
    };
    if flips {
        (0..n).collect()
    } else {
        Vec::new()
    }
}

/// Outcome of the flip-attack demonstration.
#[derive(Clone, Debug)]
pub struct FlipDemo {
    pub protocol: SapProtocol,
    pub op: PauliOp,
    /// True iff any decoy check failed (never, for X and Z).
    pub detected: bool,
    /// The key an honest run would have produced.
    pub honest_key: BitString,
    /// The key the attacked initiator actually derived.
    pub derived_key: BitString,
    pub flipped_positions: Vec<usize>,
    pub predicted_positions: Vec<usize>,
    pub matches_prediction: bool,
}

/// Apply one Pauli to every qubit of the first transmission of a baseline
/// run and compare the derived key against the honest key.
pub fn demo_flip_undetected(
    protocol: SapProtocol,
    op: PauliOp,
    n: usize,
    rng: &mut RandomSource,
) -> Result<FlipDemo, QkaError> {
    if !matches!(op, PauliOp::X | PauliOp::Z) {
        return Err(QkaError::InvalidConfig(
            "the blind flip demonstration covers X and Z".into(),
        ));
    }
    let attack = AttackModel::Flip(op);
    let plan = AttackPlan::Single(0);

    let (honest_key, derived_key, detected) = match protocol {
        SapProtocol::Sap1 => {
            let key_a = BitString::random(n, rng);
            let key_b = BitString::random(n, rng);
            let run = run_sap1_with_plan(n, &key_a, &key_b, &attack, plan, rng)?;
            let honest = key_a.xor(&key_b)?;
            let derived = match &run.result {
                Some(result) => result.final_keys[0].clone(),
                None => honest.clone(),
            };
            (honest, derived, run.detected)
        }
        SapProtocol::Sap2 => {
            let keys: Vec<BitString> = (0..3).map(|_| BitString::random(n, rng)).collect();
            let run = run_sap2_with_plan(n, &keys, &attack, plan, rng)?;
            let honest = keys[0].xor(&keys[1])?.xor(&keys[2])?;
            let derived = match &run.result {
                Some(result) => result.final_keys[0].clone(),
                None => honest.clone(),
            };
            (honest, derived, run.detected)
        }
    };

    let flipped_positions = honest_key.diff_positions(&derived_key);
    let predicted_positions = predicted_flip_positions(protocol, op, n);
    let matches_prediction = flipped_positions == predicted_positions;
    Ok(FlipDemo {
        protocol,
        op,
        detected,
        honest_key,
        derived_key,
        flipped_positions,
        predicted_positions,
        matches_prediction,
    })
}

/// Outcome of the privacy-leak demonstration.
#[derive(Clone, Debug)]
pub struct PrivacyLeakDemo {
    pub true_keys: Vec<BitString>,
    pub recoveries: Vec<SapRecovery>,
    /// True iff every initiator reconstructed both foreign keys exactly.
    pub exact_recovery: bool,
}

/// Honest three-party baseline run in which each initiator inverts the
/// ({I,X}, {I,Z}) stage structure to read both other parties' individual
/// keys, not just their XOR.
pub fn demo_privacy_leak(n: usize, rng: &mut RandomSource) -> Result<PrivacyLeakDemo, QkaError> {
    let keys: Vec<BitString> = (0..3).map(|_| BitString::random(n, rng)).collect();
    let run = run_sap2_with_plan(
        n,
        &keys,
        &AttackModel::Honest,
        AttackPlan::AllTransmissions,
        rng,
    )?;
    let exact_recovery = run.recoveries.iter().all(|r| {
        r.encoders
            .iter()
            .all(|(encoder, bits)| bits == &keys[*encoder])
    });
    Ok(PrivacyLeakDemo {
        true_keys: keys,
        recoveries: run.recoveries,
        exact_recovery,
    })
}

/// Outcome of the baseline collusion demonstration.
#[derive(Clone, Debug)]
pub struct SapCollusionDemo {
    pub colluder_keys: (BitString, BitString),
    /// The two target keys tried, all else fixed.
    pub target_keys: (BitString, BitString),
    /// The target's derived final key under each target key.
    pub target_finals: (BitString, BitString),
    /// XOR of the colluders' keys, the value the attack forces.
    pub forced_key: BitString,
    /// True iff the target's final key ignored its own contribution.
    pub independent_of_target: bool,
}

/// The sequential-round collusion against the three-party baseline: the
/// colluders read the target's {I,X} bits from a mid-round joint Bell
/// measurement, then the second colluder encodes its key XOR the target's
/// key in the target's own round, canceling the target out of the final key.
pub fn demo_collusion_sap2(n: usize, rng: &mut RandomSource) -> Result<SapCollusionDemo, QkaError> {
    let key_a = BitString::random(n, rng);
    let key_b = BitString::random(n, rng);
    let target_original = BitString::random(n, rng);
    let target_altered = target_original.flipped();

    let final_original = colluded_target_final(n, &key_a, &key_b, &target_original, rng)?;
    let final_altered = colluded_target_final(n, &key_a, &key_b, &target_altered, rng)?;

    let forced_key = key_a.xor(&key_b)?;
    let independent_of_target = final_original == final_altered && final_original == forced_key;
    Ok(SapCollusionDemo {
        colluder_keys: (key_a, key_b),
        target_keys: (target_original, target_altered),
        target_finals: (final_original, final_altered),
        forced_key,
        independent_of_target,
    })
}

/// One colluded three-party baseline run; returns the target's derived key.
///
/// Parties: 0 and 1 collude, 2 is the target. Rounds run sequentially. In
/// round 1 (initiator 1) the colluders jointly Bell-measure after the
/// target's {I,X} stage and read the target's key off the parity bits. In
/// round 2 (initiator 2, the target's own ring) party 1 encodes its key XOR
/// the deduced target key in the {I,Z} stage.
fn colluded_target_final(
    n: usize,
    key_a: &BitString,
    key_b: &BitString,
    key_target: &BitString,
    rng: &mut RandomSource,
) -> Result<BitString, QkaError> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(QkaError::InvalidConfig(format!(
            "baseline runs need an even message length ≥ 2, got {n}"
        )));
    }

    // Round starting at party 1: target encodes {I,X} first; the colluders
    // then hold both halves of every pair and measure.
    let mut probe_pairs = vec![make_bell(BellLabel::PhiPlus); n];
    for (pair, bit) in probe_pairs.iter_mut().zip(key_target.bits()) {
        *pair = apply_pauli(SapEncoding::BitFlip.op(*bit), QubitIndex::Second, pair);
    }
    let deduced: BitString = BitString::from_bits(
        probe_pairs
            .iter()
            .map(|pair| bell_measure(pair, rng).value.parity_bit())
            .collect(),
    );

    // The target's own round: party 0 encodes {I,X} honestly, party 1
    // encodes {I,Z} with key_b XOR the deduced target key.
    let offset_key = key_b.xor(&deduced)?;
    let mut pairs: Vec<TwoQubitState> = vec![make_bell(BellLabel::PhiPlus); n];
    for (pair, bit) in pairs.iter_mut().zip(key_a.bits()) {
        *pair = apply_pauli(SapEncoding::BitFlip.op(*bit), QubitIndex::Second, pair);
    }
    for (pair, bit) in pairs.iter_mut().zip(offset_key.bits()) {
        *pair = apply_pauli(SapEncoding::PhaseFlip.op(*bit), QubitIndex::Second, pair);
    }

    let mut first_bits = Vec::with_capacity(n);
    let mut second_bits = Vec::with_capacity(n);
    for pair in &pairs {
        let label = bell_measure(pair, rng).value;
        first_bits.push(label.parity_bit());
        second_bits.push(label.phase_bit());
    }
    let recovered = BitString::from_bits(first_bits).xor(&BitString::from_bits(second_bits))?;
    key_target.xor(&recovered)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_x_on_sap2_is_blind_and_flips_every_bit() {
        let mut rng = RandomSource::new(1);
        let demo = demo_flip_undetected(SapProtocol::Sap2, PauliOp::X, 8, &mut rng).unwrap();
        assert!(!demo.detected);
        assert_eq!(demo.flipped_positions, (0..8).collect::<Vec<_>>());
        assert!(demo.matches_prediction);
    }

    #[test]
    fn flip_z_on_sap2_is_blind_and_flips_every_bit() {
        let mut rng = RandomSource::new(2);
        let demo = demo_flip_undetected(SapProtocol::Sap2, PauliOp::Z, 8, &mut rng).unwrap();
        assert!(!demo.detected);
        assert_eq!(demo.flipped_positions, (0..8).collect::<Vec<_>>());
        assert!(demo.matches_prediction);
    }

    #[test]
    fn flip_x_on_sap1_is_blind_and_flips_every_bit() {
        let mut rng = RandomSource::new(3);
        let demo = demo_flip_undetected(SapProtocol::Sap1, PauliOp::X, 6, &mut rng).unwrap();
        assert!(!demo.detected);
        assert_eq!(demo.flipped_positions, (0..6).collect::<Vec<_>>());
        assert!(demo.matches_prediction);
    }

    #[test]
    fn flip_z_on_sap1_is_blind_but_the_parity_decode_ignores_it() {
        let mut rng = RandomSource::new(4);
        let demo = demo_flip_undetected(SapProtocol::Sap1, PauliOp::Z, 6, &mut rng).unwrap();
        assert!(!demo.detected);
        assert!(demo.flipped_positions.is_empty());
        assert!(demo.matches_prediction);
    }

    #[test]
    fn flip_demo_rejects_y() {
        let mut rng = RandomSource::new(5);
        assert!(demo_flip_undetected(SapProtocol::Sap1, PauliOp::Y, 4, &mut rng).is_err());
    }

    #[test]
    fn privacy_leak_recovers_both_foreign_keys_exactly() {
        let mut rng = RandomSource::new(6);
        for _ in 0..50 {
            let demo = demo_privacy_leak(8, &mut rng).unwrap();
            assert!(demo.exact_recovery);
        }
    }

    #[test]
    fn stage_structure_identifies_operations_uniquely() {
        // All four (first, second) bit pairs land on distinct Bell labels.
        let mut seen = Vec::new();
        for first in 0..2u8 {
            for second in 0..2u8 {
                let mut pair = make_bell(BellLabel::PhiPlus);
                pair = apply_pauli(SapEncoding::BitFlip.op(first), QubitIndex::Second, &pair);
                pair = apply_pauli(SapEncoding::PhaseFlip.op(second), QubitIndex::Second, &pair);
                let mut rng = RandomSource::new(7);
                let label = bell_measure(&pair, &mut rng).value;
                assert_eq!(label.parity_bit(), first);
                assert_eq!(label.phase_bit(), second);
                seen.push(label);
            }
        }
        seen.sort_by_key(|l| l.code());
        seen.dedup();
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn collusion_demo_cancels_the_target() {
        let mut rng = RandomSource::new(8);
        for _ in 0..20 {
            let demo = demo_collusion_sap2(8, &mut rng).unwrap();
            assert!(demo.independent_of_target);
            assert_eq!(demo.target_finals.0, demo.forced_key);
        }
    }

    #[test]
    fn honest_baseline_key_depends_on_the_target() {
        let mut rng = RandomSource::new(9);
        let key_a = BitString::random(8, &mut rng);
        let key_b = BitString::random(8, &mut rng);
        let target_1 = BitString::random(8, &mut rng);
        let target_2 = target_1.flipped();
        let honest_1 = key_a.xor(&key_b).unwrap().xor(&target_1).unwrap();
        let honest_2 = key_a.xor(&key_b).unwrap().xor(&target_2).unwrap();
        assert_ne!(honest_1, honest_2);
    }
}
