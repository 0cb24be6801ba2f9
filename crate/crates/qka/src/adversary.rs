//! Attack models: channel attackers that act on frames in transit, and the
//! two-colluder strategy against a three-party run.
//!
//! Channel attackers act before the receipt acknowledgment, so they see a
//! frame of indistinguishable qubits: decoys and traveling message halves
//! get identical treatment.

use crate::error::QkaError;
use crate::protocol::{
    final_measure, measurement_barrier, prepare_ring, run_hop, BitString, BroadcastLog,
    DetectionEvent, Frame, FrameSlot, KeySource, PartyId, ProtocolConfig, RingPhase, RingState,
    SecretKey, SharedKeyResult,
};
use crate::qcore::{
    apply_pauli, apply_pauli_single, measure_qubit, Basis, PauliOp, QubitIndex, TwoQubitState,
};
use crate::rng::RandomSource;

/// Basis choice policy of an intercept-and-resend attacker.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterceptPolicy {
    AllZ,
    AllX,
    /// Fresh uniform basis per qubit.
    RandomZX,
}

impl InterceptPolicy {
    fn pick(self, rng: &mut RandomSource) -> Basis {
        match self {
            InterceptPolicy::AllZ => Basis::Z,
            InterceptPolicy::AllX => Basis::X,
            InterceptPolicy::RandomZX => {
                if rng.next_u64() & 1 == 0 {
                    Basis::Z
                } else {
                    Basis::X
                }
            }
        }
    }
}

/// The adversary's strategy for one run.
#[derive(Clone, Debug, PartialEq)]
pub enum AttackModel {
    Honest,
    /// Apply a fixed operation to every qubit of every frame in transit.
    Flip(PauliOp),
    /// Measure every qubit in transit and resend the observed basis state.
    InterceptResend(InterceptPolicy),
    /// Inner collusion: `colluders` pool their keys and try to fix the final
    /// key against `target`. Replayed by [`run_collusion`].
    Collusion {
        colluders: Vec<PartyId>,
        target: PartyId,
        respect_barrier: bool,
    },
}

impl AttackModel {
    pub fn validate(&self, parties: usize) -> Result<(), QkaError> {
        match self {
            AttackModel::Honest | AttackModel::InterceptResend(_) => Ok(()),
            AttackModel::Flip(op) => {
                if *op == PauliOp::I {
                    return Err(QkaError::InvalidConfig(
                        "flip attack with the identity is no attack".into(),
                    ));
                }
                Ok(())
            }
            AttackModel::Collusion {
                colluders, target, ..
            } => {
                if colluders.contains(target) {
                    return Err(QkaError::InvalidConfig(
                        "collusion target cannot also collude".into(),
                    ));
                }
                if colluders.iter().any(|c| *c >= parties) || *target >= parties {
                    return Err(QkaError::InvalidConfig(
                        "collusion party id out of range".into(),
                    ));
                }
                let mut unique = colluders.clone();
                unique.sort_unstable();
                unique.dedup();
                if unique.len() != colluders.len() {
                    return Err(QkaError::InvalidConfig("duplicate colluder ids".into()));
                }
                Ok(())
            }
        }
    }

    /// True for models that disturb qubits on the channel.
    pub fn touches_channel(&self) -> bool {
        matches!(self, AttackModel::Flip(_) | AttackModel::InterceptResend(_))
    }
}

/// Act on a frame in transit. Returns true when the frame was touched.
///
/// Message slots refer into `pairs`, the sending ring's joint states, so
/// disturbing a traveling half updates the entangled pair.
pub fn intercept(
    frame: &mut Frame,
    pairs: &mut [TwoQubitState],
    model: &AttackModel,
    rng: &mut RandomSource,
) -> bool {
    match model {
        AttackModel::Honest | AttackModel::Collusion { .. } => false,
        AttackModel::Flip(op) => {
            for slot in &mut frame.slots {
                match slot {
                    FrameSlot::Decoy(q) => *q = apply_pauli_single(*op, q),
                    FrameSlot::Message(i) => {
                        pairs[*i] = apply_pauli(*op, QubitIndex::Second, &pairs[*i]);
                    }
                }
            }
            true
        }
        AttackModel::InterceptResend(policy) => {
            for slot in &mut frame.slots {
                let basis = policy.pick(rng);
                match slot {
                    FrameSlot::Decoy(q) => {
                        let outcome = crate::qcore::measure_basis(q, basis, rng);
                        *q = outcome.post_state;
                    }
                    FrameSlot::Message(i) => {
                        let outcome = measure_qubit(&pairs[*i], QubitIndex::Second, basis, rng);
                        pairs[*i] = outcome.post_state;
                    }
                }
            }
            true
        }
    }
}

/// The two-bit code shift an undetected single-hop flip induces on every
/// recovered XOR symbol: X→10, Z→01, Y→11.
pub fn flip_key_influence(
    parties: usize,
    op: PauliOp,
) -> Result<crate::protocol::KeySymbol, QkaError> {
    if parties < 2 {
        return Err(QkaError::InvalidConfig("need at least 2 parties".into()));
    }
    if op == PauliOp::I {
        return Err(QkaError::InvalidConfig("identity flips nothing".into()));
    }
    Ok(crate::protocol::KeySymbol::new(op.code()))
}

/// Empirical per-hop detection rate of a channel attack against the
/// single-photon decoy check: `trials` independent single-hop experiments,
/// each with `symbols` message qubits and `symbols` fresh decoys.
pub fn estimate_hop_detection(
    attack: &AttackModel,
    symbols: usize,
    trials: u32,
    seed: u64,
) -> Result<f64, QkaError> {
    if !attack.touches_channel() {
        return Err(QkaError::InvalidConfig(
            "per-hop detection applies to channel attacks".into(),
        ));
    }
    if trials == 0 {
        return Err(QkaError::InvalidConfig("need at least one trial".into()));
    }
    let config = ProtocolConfig::new(2, symbols, seed);
    let mut detected = 0u32;
    for trial in 0..trials {
        let mut rng = RandomSource::for_trial(seed, u64::from(trial));
        let keys = vec![
            SecretKey::random(symbols, &mut rng)?,
            SecretKey::random(symbols, &mut rng)?,
        ];
        let mut ring = prepare_ring(0, symbols)?;
        let mut log = BroadcastLog::new();
        let report = run_hop(&mut ring, &keys, attack, &config, &mut log, &mut rng)?;
        if report.detected {
            detected += 1;
        }
    }
    Ok(f64::from(detected) / f64::from(trials))
}

/// How an attack shaped the final key.
#[derive(Clone, Debug, PartialEq)]
pub enum KeyInfluence {
    None,
    /// Bit positions of the derived key that differ from the honest key.
    BitsFlipped {
        positions: Vec<usize>,
    },
    /// The colluders fixed the final key to this value.
    DeterminedByColluders {
        key: BitString,
    },
}

/// Result of an attack replay.
#[derive(Clone, Debug)]
pub struct AttackOutcome {
    /// True iff at least one decoy mismatch was recorded.
    pub detected: bool,
    pub hop_detection_events: Vec<DetectionEvent>,
    /// Channel checks performed during the replay.
    pub hops_checked: u64,
    /// True when the measurement barrier refused an early measurement.
    pub thwarted_by_barrier: bool,
    pub key_influence: KeyInfluence,
    pub result: SharedKeyResult,
}

/// Drive one ring through its whole circuit with per-encoder effective keys.
/// Returns the number of hops checked.
fn run_ring(
    ring: &mut RingState,
    effective_keys: &[SecretKey],
    config: &ProtocolConfig,
    log: &mut BroadcastLog,
    rng: &mut RandomSource,
) -> Result<u64, QkaError> {
    let mut hops = 0;
    while ring.next_hop().is_some() {
        let report = run_hop(ring, effective_keys, &AttackModel::Honest, config, log, rng)?;
        hops += 1;
        if report.detected {
            return Err(QkaError::Unsupported(
                "honest channel unexpectedly failed a check".into(),
            ));
        }
    }
    ring.phase = RingPhase::Complete;
    Ok(hops)
}

fn xor_keys(a: &SecretKey, b: &SecretKey) -> Result<SecretKey, QkaError> {
    a.xor(b)
}

/// Replay the collusion strategy against a three-party run.
///
/// The rounds run sequentially, each initiator's ring completing before the
/// next starts; this is the schedule the attack needs. With the barrier
/// respected, the lead colluder's early measurement is rejected and every
/// encoding stays honest, so the final key keeps the target's contribution.
/// With the barrier disabled, the lead measures its own ring early, the
/// colluders deduce the target's key, and they offset it in the remaining
/// rounds: the final key becomes the XOR of the colluders' keys alone.
pub fn run_collusion(
    config: &ProtocolConfig,
    keys: &[SecretKey],
    colluders: &[PartyId],
    target: PartyId,
    respect_barrier: bool,
) -> Result<AttackOutcome, QkaError> {
    config.validate()?;
    if colluders.is_empty() {
        // No colluders: plain honest run.
        let honest = crate::protocol::run_protocol(
            &ProtocolConfig {
                barrier_enforced: respect_barrier,
                ..config.clone()
            },
            &KeySource::Fixed(keys.to_vec()),
            &AttackModel::Honest,
        )?;
        return Ok(AttackOutcome {
            detected: false,
            hop_detection_events: honest.detections,
            hops_checked: honest.hops_checked,
            thwarted_by_barrier: false,
            key_influence: KeyInfluence::None,
            result: honest.result.expect("honest run completes"),
        });
    }
    if config.parties != 3 || colluders.len() != 2 {
        return Err(QkaError::Unsupported(
            "collusion replay covers the two-colluder three-party scenario".into(),
        ));
    }
    let model = AttackModel::Collusion {
        colluders: colluders.to_vec(),
        target,
        respect_barrier,
    };
    model.validate(config.parties)?;
    if keys.len() != config.parties {
        return Err(QkaError::LengthMismatch(format!(
            "{} keys for {} parties",
            keys.len(),
            config.parties
        )));
    }

    let lead = colluders[0];
    let partner = colluders[1];
    let mut rng = RandomSource::new(config.seed);
    let mut log = BroadcastLog::new();
    let mut rings: Vec<RingState> = (0..config.parties)
        .map(|j| prepare_ring(j, config.symbols))
        .collect::<Result<_, _>>()?;

    // Round 1: the lead colluder's ring, honest encodings throughout.
    let mut hops_checked = run_ring(&mut rings[lead], keys, config, &mut log, &mut rng)?;

    // The lead now wants to measure its ring before the other rounds run.
    let early = measurement_barrier(&rings, respect_barrier);

    match early {
        Err(QkaError::EarlyMeasureRejected { .. }) => {
            // Attack thwarted: nothing learned, remaining rounds stay honest.
            for (j, ring) in rings.iter_mut().enumerate() {
                if j != lead {
                    hops_checked += run_ring(ring, keys, config, &mut log, &mut rng)?;
                }
            }
            let permit = measurement_barrier(&rings, true)?;
            let mut recovered = Vec::new();
            let mut finals = Vec::new();
            for (party, ring) in rings.iter().enumerate() {
                let symbols = final_measure(&permit, ring, &mut rng);
                let xor_key = SecretKey::new(symbols)?;
                finals.push(keys[party].to_bits().xor(&xor_key.to_bits())?);
                recovered.push(xor_key.to_bits());
            }
            Ok(AttackOutcome {
                detected: false,
                hop_detection_events: Vec::new(),
                hops_checked,
                thwarted_by_barrier: true,
                key_influence: KeyInfluence::None,
                result: SharedKeyResult::from_parts(recovered, finals),
            })
        }
        Err(other) => Err(other),
        Ok(permit) => {
            // Early measurement of the lead's ring: XOR of the two honest
            // encodings, partner's key XOR target's key.
            let symbols = final_measure(&permit, &rings[lead], &mut rng);
            let measured = SecretKey::new(symbols)?;
            let deduced_target_key = xor_keys(&measured, &keys[partner])?;

            // Remaining rounds with offset encodings: in each ring, the last
            // colluder to encode substitutes key ⊕ deduced target key.
            let mut recovered = vec![BitString::zeros(0); config.parties];
            let mut finals = vec![BitString::zeros(0); config.parties];
            recovered[lead] = measured.to_bits();

            for initiator in 0..config.parties {
                if initiator == lead {
                    continue;
                }
                // Encoding order around the ring: initiator+1, initiator+2.
                let encoders = [
                    (initiator + 1) % config.parties,
                    (initiator + 2) % config.parties,
                ];
                let substituting = *encoders
                    .iter()
                    .rev()
                    .find(|e| colluders.contains(e))
                    .expect("two colluders among three parties");
                let mut effective = keys.to_vec();
                effective[substituting] = xor_keys(&keys[substituting], &deduced_target_key)?;

                hops_checked += run_ring(
                    &mut rings[initiator],
                    &effective,
                    config,
                    &mut log,
                    &mut rng,
                )?;

                let permit = measurement_barrier(std::slice::from_ref(&rings[initiator]), true)?;
                let symbols = final_measure(&permit, &rings[initiator], &mut rng);
                let xor_key = SecretKey::new(symbols)?;
                recovered[initiator] = xor_key.to_bits();
                finals[initiator] = keys[initiator].to_bits().xor(&xor_key.to_bits())?;
            }

            // The colluders adopt the key they forced.
            let forced = keys[lead].to_bits().xor(&keys[partner].to_bits())?;
            finals[lead] = forced.clone();

            Ok(AttackOutcome {
                detected: false,
                hop_detection_events: Vec::new(),
                hops_checked,
                thwarted_by_barrier: false,
                key_influence: KeyInfluence::DeterminedByColluders { key: forced },
                result: SharedKeyResult::from_parts(recovered, finals),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{insert_decoys, DecoyState, KeySymbol};
    use crate::qcore::{make_bell, measure_basis, BellLabel, SingleQubitState};

    fn key_of(symbols: &[u8]) -> SecretKey {
        SecretKey::new(symbols.iter().map(|b| KeySymbol::new(*b)).collect()).unwrap()
    }

    fn test_frame(slots: Vec<FrameSlot>) -> Frame {
        Frame {
            ring: 0,
            hop: 0,
            sender: 0,
            receiver: 1,
            slots,
        }
    }

    #[test]
    fn honest_model_leaves_frame_untouched() {
        let mut rng = RandomSource::new(1);
        let (slots, _) = insert_decoys(3, &mut rng);
        let mut frame = test_frame(slots);
        let mut pairs = vec![make_bell(BellLabel::PhiPlus); 3];
        let touched = intercept(&mut frame, &mut pairs, &AttackModel::Honest, &mut rng);
        assert!(!touched);
        for pair in &pairs {
            assert!(pair.approx_eq(&make_bell(BellLabel::PhiPlus)));
        }
    }

    #[test]
    fn flip_x_turns_zero_decoy_into_one() {
        let mut rng = RandomSource::new(2);
        let mut frame = test_frame(vec![FrameSlot::Decoy(DecoyState::Zero.state())]);
        let mut pairs = vec![];
        intercept(
            &mut frame,
            &mut pairs,
            &AttackModel::Flip(PauliOp::X),
            &mut rng,
        );
        match &frame.slots[0] {
            FrameSlot::Decoy(q) => assert!(q.approx_eq(&SingleQubitState::one())),
            FrameSlot::Message(_) => unreachable!(),
        }
    }

    #[test]
    fn intercept_resend_per_decoy_detection_is_one_quarter() {
        // Exact enumeration over prepared state × attacker basis: when the
        // attacker guesses the preparation basis the decoy is untouched;
        // otherwise the checker errs with probability 1/2.
        let mut total = 0.0f64;
        for prepared in DecoyState::ALL {
            for attacker_basis in [Basis::Z, Basis::X] {
                let p_err = if attacker_basis == prepared.basis() {
                    0.0
                } else {
                    0.5
                };
                total += p_err / 8.0;
            }
        }
        assert!((total - 0.25).abs() < 1e-15);

        // Monte-Carlo cross-check through the real code path.
        let mut rng = RandomSource::new(3);
        let trials = 20_000;
        let mut mismatches = 0;
        for _ in 0..trials {
            let prepared = DecoyState::random(&mut rng);
            let mut frame = test_frame(vec![FrameSlot::Decoy(prepared.state())]);
            let mut pairs = vec![];
            intercept(
                &mut frame,
                &mut pairs,
                &AttackModel::InterceptResend(InterceptPolicy::RandomZX),
                &mut rng,
            );
            let q = match &frame.slots[0] {
                FrameSlot::Decoy(q) => *q,
                FrameSlot::Message(_) => unreachable!(),
            };
            if measure_basis(&q, prepared.basis(), &mut rng).value != prepared.bit() {
                mismatches += 1;
            }
        }
        let rate = f64::from(mismatches) / f64::from(trials);
        let sigma = (0.25 * 0.75 / f64::from(trials)).sqrt();
        assert!((rate - 0.25).abs() <= 3.0 * sigma, "rate {rate}");
    }

    #[test]
    fn intercept_resend_breaks_entanglement() {
        let mut rng = RandomSource::new(4);
        let mut frame = test_frame(vec![FrameSlot::Message(0)]);
        let mut pairs = vec![make_bell(BellLabel::PhiPlus)];
        intercept(
            &mut frame,
            &mut pairs,
            &AttackModel::InterceptResend(InterceptPolicy::AllZ),
            &mut rng,
        );
        // Post-attack the pair is |00⟩ or |11⟩.
        let zero_zero = crate::qcore::TwoQubitState::product(
            &SingleQubitState::zero(),
            &SingleQubitState::zero(),
        );
        let one_one = crate::qcore::TwoQubitState::product(
            &SingleQubitState::one(),
            &SingleQubitState::one(),
        );
        assert!(pairs[0].approx_eq(&zero_zero) || pairs[0].approx_eq(&one_one));
    }

    #[test]
    fn flip_influence_codes() {
        assert_eq!(
            flip_key_influence(3, PauliOp::X).unwrap(),
            KeySymbol::new(0b10)
        );
        assert_eq!(
            flip_key_influence(3, PauliOp::Z).unwrap(),
            KeySymbol::new(0b01)
        );
        assert_eq!(
            flip_key_influence(5, PauliOp::Y).unwrap(),
            KeySymbol::new(0b11)
        );
        assert!(flip_key_influence(3, PauliOp::I).is_err());
        assert!(flip_key_influence(1, PauliOp::X).is_err());
    }

    #[test]
    fn double_flip_cancels() {
        for op in [PauliOp::X, PauliOp::Z, PauliOp::Y] {
            let shift = flip_key_influence(3, op).unwrap();
            assert_eq!(shift.xor(shift), KeySymbol::new(0));
        }
    }

    #[test]
    fn undetected_single_hop_flip_shifts_every_symbol_by_the_influence_code() {
        // Brute force over all honest symbol pairs for each flip operation.
        for op in [PauliOp::X, PauliOp::Z, PauliOp::Y] {
            let shift = flip_key_influence(3, op).unwrap();
            for s1 in KeySymbol::ALL {
                for s2 in KeySymbol::ALL {
                    let mut pair = make_bell(BellLabel::PhiPlus);
                    pair = apply_pauli(s1.pauli(), QubitIndex::Second, &pair);
                    // The flip lands on the traveling half between encoders.
                    pair = apply_pauli(op, QubitIndex::Second, &pair);
                    pair = apply_pauli(s2.pauli(), QubitIndex::Second, &pair);
                    let mut rng = RandomSource::new(5);
                    let label = crate::qcore::bell_measure(&pair, &mut rng).value;
                    assert_eq!(
                        KeySymbol::new(label.code()),
                        s1.xor(s2).xor(shift),
                        "{op} on {s1},{s2}"
                    );
                }
            }
        }
    }

    #[test]
    fn collusion_with_barrier_disabled_determines_the_key() {
        let keys = vec![
            key_of(&[1, 2, 3, 0]),
            key_of(&[2, 2, 0, 1]),
            key_of(&[3, 1, 1, 2]),
        ];
        let config = ProtocolConfig::new(3, 4, 42);
        let out = run_collusion(&config, &keys, &[0, 1], 2, false).unwrap();
        assert!(!out.detected);
        assert!(!out.thwarted_by_barrier);
        let forced = keys[0].to_bits().xor(&keys[1].to_bits()).unwrap();
        assert_eq!(
            out.key_influence,
            KeyInfluence::DeterminedByColluders {
                key: forced.clone()
            }
        );
        // Every party, including the honest target, lands on the forced key.
        assert!(out.result.agreement);
        assert_eq!(out.result.final_keys[2], forced);
    }

    #[test]
    fn collusion_key_is_invariant_under_target_key_changes_without_barrier() {
        let config = ProtocolConfig::new(3, 4, 43);
        let base = vec![
            key_of(&[1, 2, 3, 0]),
            key_of(&[2, 2, 0, 1]),
            key_of(&[3, 1, 1, 2]),
        ];
        let mut altered = base.clone();
        altered[2] = key_of(&[0, 0, 0, 0]);
        let out_a = run_collusion(&config, &base, &[0, 1], 2, false).unwrap();
        let out_b = run_collusion(&config, &altered, &[0, 1], 2, false).unwrap();
        assert_eq!(out_a.result.final_keys[2], out_b.result.final_keys[2]);
    }

    #[test]
    fn collusion_with_barrier_enforced_is_thwarted() {
        let keys = vec![
            key_of(&[1, 2, 3, 0]),
            key_of(&[2, 2, 0, 1]),
            key_of(&[3, 1, 1, 2]),
        ];
        let config = ProtocolConfig::new(3, 4, 44);
        let out = run_collusion(&config, &keys, &[0, 1], 2, true).unwrap();
        assert!(out.thwarted_by_barrier);
        assert_eq!(out.key_influence, KeyInfluence::None);
        let honest = keys[0]
            .xor(&keys[1])
            .unwrap()
            .xor(&keys[2])
            .unwrap()
            .to_bits();
        assert!(out.result.agreement);
        assert_eq!(out.result.final_keys[0], honest);
    }

    #[test]
    fn collusion_with_barrier_enforced_depends_on_target_key() {
        let config = ProtocolConfig::new(3, 4, 45);
        let base = vec![
            key_of(&[1, 2, 3, 0]),
            key_of(&[2, 2, 0, 1]),
            key_of(&[3, 1, 1, 2]),
        ];
        let mut altered = base.clone();
        altered[2] = key_of(&[0, 3, 2, 1]);
        let out_a = run_collusion(&config, &base, &[0, 1], 2, true).unwrap();
        let out_b = run_collusion(&config, &altered, &[0, 1], 2, true).unwrap();
        assert_ne!(out_a.result.final_keys[2], out_b.result.final_keys[2]);
    }

    #[test]
    fn empty_colluder_set_is_an_honest_run() {
        let keys = vec![key_of(&[1, 2]), key_of(&[2, 2]), key_of(&[3, 1])];
        let config = ProtocolConfig::new(3, 2, 46);
        let out = run_collusion(&config, &keys, &[], 2, true).unwrap();
        assert_eq!(out.key_influence, KeyInfluence::None);
        assert!(out.result.agreement);
        let honest = keys[0]
            .xor(&keys[1])
            .unwrap()
            .xor(&keys[2])
            .unwrap()
            .to_bits();
        assert_eq!(out.result.final_keys[0], honest);
    }

    #[test]
    fn collusion_works_for_any_colluder_pair() {
        let config = ProtocolConfig::new(3, 3, 47);
        let keys = vec![key_of(&[1, 2, 3]), key_of(&[2, 0, 1]), key_of(&[3, 3, 0])];
        for (colluders, target) in [([0usize, 1], 2usize), ([1, 2], 0), ([0, 2], 1)] {
            let out = run_collusion(&config, &keys, &colluders, target, false).unwrap();
            let forced = keys[colluders[0]]
                .to_bits()
                .xor(&keys[colluders[1]].to_bits())
                .unwrap();
            assert_eq!(
                out.result.final_keys[target], forced,
                "{colluders:?}->{target}"
            );
        }
    }

    #[test]
    fn attack_model_validation() {
        assert!(AttackModel::Flip(PauliOp::I).validate(3).is_err());
        assert!(AttackModel::Flip(PauliOp::X).validate(3).is_ok());
        let bad = AttackModel::Collusion {
            colluders: vec![0, 1],
            target: 1,
            respect_barrier: true,
        };
        assert!(bad.validate(3).is_err());
        let oob = AttackModel::Collusion {
            colluders: vec![0, 5],
            target: 2,
            respect_barrier: true,
        };
        assert!(oob.validate(3).is_err());
    }
}
