//! Protocol orchestration: synchronized hop rounds, the post-measurement
//! barrier, and final key derivation.
//!
//! A full run is a deterministic single-threaded event simulation: the
//! outcome is a pure function of (config, keys, attack, seed). All N rings
//! advance in lockstep rounds; a failed channel check restarts only the
//! affected ring with fresh pairs.

use crate::adversary::{intercept, AttackModel};
use crate::error::QkaError;
use crate::protocol::decoy::{check_decoys, insert_decoys, DecoyRecord, Frame};
use crate::protocol::key::{BitString, KeySymbol, SecretKey};
use crate::protocol::ring::{encode_key, prepare_ring, PartyId, RingPhase, RingState};
use crate::qcore::{bell_measure, Basis};
use crate::rng::RandomSource;

/// Parameters of one protocol execution.
#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    /// Number of parties N ≥ 2.
    pub parties: usize,
    /// Key symbols per party n ≥ 1 (each symbol is two bits).
    pub symbols: usize,
    /// Tolerated decoy error rate; 0 in the noiseless channel model.
    pub error_threshold: f64,
    pub seed: u64,
    /// When true, no final measurement can happen before every ring is back.
    pub barrier_enforced: bool,
    /// Per-ring restart budget before the run is reported as failed.
    pub restart_cap: u32,
}

impl ProtocolConfig {
    pub fn new(parties: usize, symbols: usize, seed: u64) -> Self {
        Self {
            parties,
            symbols,
            error_threshold: 0.0,
            seed,
            barrier_enforced: true,
            restart_cap: 10,
        }
    }

    pub fn validate(&self) -> Result<(), QkaError> {
        if self.parties < 2 {
            return Err(QkaError::InvalidConfig(format!(
                "need at least 2 parties, got {}",
                self.parties
            )));
        }
        if self.symbols == 0 {
            return Err(QkaError::InvalidConfig(
                "need at least 1 key symbol per party".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.error_threshold) {
            return Err(QkaError::InvalidConfig(format!(
                "error threshold {} outside [0,1]",
                self.error_threshold
            )));
        }
        Ok(())
    }
}

/// Where the per-party keys come from.
#[derive(Clone, Debug)]
pub enum KeySource {
    /// Draw each party's key from the run's seeded randomness.
    Random,
    Fixed(Vec<SecretKey>),
}

/// One classical announcement on the authenticated public channel.
///
/// This is everything the protocol ever broadcasts; an adversary reads it
/// all and learns nothing about key material.
#[derive(Clone, Debug, PartialEq)]
pub enum Announcement {
    ReceiptAck {
        ring: usize,
        hop: usize,
        from: PartyId,
    },
    DecoyDisclosure {
        ring: usize,
        hop: usize,
        positions: Vec<usize>,
        bases: Vec<Basis>,
    },
}

/// Append-only public broadcast log.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BroadcastLog {
    entries: Vec<Announcement>,
}

impl BroadcastLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, a: Announcement) {
        self.entries.push(a);
    }

    pub fn entries(&self) -> &[Announcement] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Token proving the measurement barrier was passed. Only
/// [`measurement_barrier`] can mint one.
#[derive(Debug)]
pub struct MeasurePermit {
    _private: (),
}

/// Grant a measurement permit iff every ring has completed its circuit.
///
/// With `enforced` false the permit is granted unconditionally; that switch
/// exists to replay the collusion attack against a barrier-less run.
pub fn measurement_barrier(rings: &[RingState], enforced: bool) -> Result<MeasurePermit, QkaError> {
    if enforced {
        let incomplete = rings
            .iter()
            .filter(|r| r.phase != RingPhase::Complete)
            .count();
        if incomplete > 0 {
            return Err(QkaError::EarlyMeasureRejected {
                incomplete,
                total: rings.len(),
            });
        }
    }
    Ok(MeasurePermit { _private: () })
}

/// Bell-measure every (retained, traveling) pair of a ring.
///
/// Each outcome label's two-bit code is the XOR of all the encoders'
/// symbols at that position.
pub fn final_measure(
    _permit: &MeasurePermit,
    ring: &RingState,
    rng: &mut RandomSource,
) -> Vec<KeySymbol> {
    ring.pairs()
        .iter()
        .map(|pair| KeySymbol::new(bell_measure(pair, rng).value.code()))
        .collect()
}

/// What happened on one hop.
#[derive(Clone, Copy, Debug)]
pub struct HopReport {
    pub ring: usize,
    pub hop: usize,
    pub error_rate: f64,
    pub detected: bool,
    pub attacked: bool,
}

/// Execute the ring's next transmission: build the frame with fresh decoys,
/// pass it through the attack model, have the receiver check the channel,
/// then encode (unless the sequence is back at the initiator).
///
/// A failed check restarts the ring; that is a normal protocol outcome, not
/// an error.
pub fn run_hop(
    ring: &mut RingState,
    keys: &[SecretKey],
    attack: &AttackModel,
    config: &ProtocolConfig,
    log: &mut BroadcastLog,
    rng: &mut RandomSource,
) -> Result<HopReport, QkaError> {
    let hop = ring
        .next_hop()
        .ok_or_else(|| QkaError::InvalidConfig("ring already completed its circuit".into()))?;
    let parties = config.parties;
    let sender = (ring.initiator + hop) % parties;
    let receiver = (ring.initiator + hop + 1) % parties;

    let (slots, entries) = insert_decoys(ring.len(), rng);
    let mut frame = Frame {
        ring: ring.initiator,
        hop,
        sender,
        receiver,
        slots,
    };
    let record = DecoyRecord::new(ring.initiator, hop, entries);

    // The frame is attacked in transit, before the receipt acknowledgment
    // and the decoy disclosure, so the adversary acts blind to positions.
    let attacked = intercept(&mut frame, ring.pairs_mut(), attack, rng);

    log.push(Announcement::ReceiptAck {
        ring: ring.initiator,
        hop,
        from: receiver,
    });
    log.push(Announcement::DecoyDisclosure {
        ring: ring.initiator,
        hop,
        positions: record.positions(),
        bases: record.bases(),
    });

    let check = check_decoys(&mut frame, &record, config.error_threshold, rng)?;
    if !check.pass {
        ring.restart();
        return Ok(HopReport {
            ring: ring.initiator,
            hop,
            error_rate: check.error_rate,
            detected: true,
            attacked,
        });
    }

    if receiver == ring.initiator {
        ring.phase = RingPhase::AwaitingCheck;
    } else {
        encode_key(ring.pairs_mut(), &keys[receiver])?;
        ring.encodings_applied += 1;
        ring.phase = RingPhase::InTransit { hops_done: hop + 1 };
    }
    Ok(HopReport {
        ring: ring.initiator,
        hop,
        error_rate: check.error_rate,
        detected: false,
        attacked,
    })
}

/// A channel-check failure observed during a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionEvent {
    pub ring: usize,
    pub hop: usize,
    pub error_rate: f64,
}

/// Final keys derived by every party.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedKeyResult {
    /// Per party: the XOR of the other N−1 keys read off the Bell outcomes.
    pub recovered_xor: Vec<BitString>,
    /// Per party: own key XORed with the recovered value.
    pub final_keys: Vec<BitString>,
    /// True iff every party derived an identical key.
    pub agreement: bool,
}

impl SharedKeyResult {
    pub fn from_parts(recovered_xor: Vec<BitString>, final_keys: Vec<BitString>) -> Self {
        let agreement = final_keys.windows(2).all(|w| w[0] == w[1]);
        Self {
            recovered_xor,
            final_keys,
            agreement,
        }
    }

    /// The agreed key, when there is one.
    pub fn final_key(&self) -> Option<&BitString> {
        self.agreement.then(|| &self.final_keys[0])
    }
}

/// Everything observable from one protocol run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    /// `None` when the run aborted (restart budget exhausted).
    pub result: Option<SharedKeyResult>,
    pub aborted: bool,
    pub keys: Vec<SecretKey>,
    pub detections: Vec<DetectionEvent>,
    pub total_restarts: u32,
    pub hops_checked: u64,
    pub hops_attacked: u64,
    /// Mean decoy error rate over all checked hops.
    pub mean_error_rate: f64,
    pub log: BroadcastLog,
}

/// Run the full N-party agreement: N rings in synchronized hop rounds, the
/// measurement barrier, then per-party key derivation.
pub fn run_protocol(
    config: &ProtocolConfig,
    key_source: &KeySource,
    attack: &AttackModel,
) -> Result<RunOutcome, QkaError> {
    config.validate()?;
    attack.validate(config.parties)?;
    let mut rng = RandomSource::new(config.seed);

    let keys: Vec<SecretKey> = match key_source {
        KeySource::Random => (0..config.parties)
            .map(|_| SecretKey::random(config.symbols, &mut rng))
            .collect::<Result<_, _>>()?,
        KeySource::Fixed(keys) => {
            if keys.len() != config.parties {
                return Err(QkaError::LengthMismatch(format!(
                    "{} keys for {} parties",
                    keys.len(),
                    config.parties
                )));
            }
            for key in keys {
                if key.len() != config.symbols {
                    return Err(QkaError::LengthMismatch(format!(
                        "key has {} symbols, config says {}",
                        key.len(),
                        config.symbols
                    )));
                }
            }
            keys.clone()
        }
    };

    let mut rings: Vec<RingState> = (0..config.parties)
        .map(|j| prepare_ring(j, config.symbols))
        .collect::<Result<_, _>>()?;

    let mut log = BroadcastLog::new();
    let mut detections = Vec::new();
    let mut hops_checked = 0u64;
    let mut hops_attacked = 0u64;
    let mut error_sum = 0.0;
    let mut aborted = false;

    'rounds: while rings.iter().any(|r| r.phase != RingPhase::Complete) {
        for ring in &mut rings {
            if ring.phase == RingPhase::Complete {
                continue;
            }
            let report = run_hop(ring, &keys, attack, config, &mut log, &mut rng)?;
            hops_checked += 1;
            error_sum += report.error_rate;
            if report.attacked {
                hops_attacked += 1;
            }
            if report.detected {
                detections.push(DetectionEvent {
                    ring: report.ring,
                    hop: report.hop,
                    error_rate: report.error_rate,
                });
                if ring.restarts > config.restart_cap {
                    aborted = true;
                    break 'rounds;
                }
            }
        }
        // Round boundary: rings whose sequence came home this round are done.
        for ring in &mut rings {
            if ring.phase == RingPhase::AwaitingCheck {
                ring.phase = RingPhase::Complete;
            }
        }
    }

    let total_restarts: u32 = rings.iter().map(|r| r.restarts).sum();
    let mean_error_rate = if hops_checked == 0 {
        0.0
    } else {
        error_sum / hops_checked as f64
    };

    let result = if aborted {
        None
    } else {
        let permit = measurement_barrier(&rings, config.barrier_enforced)?;
        let mut recovered = Vec::with_capacity(config.parties);
        let mut finals = Vec::with_capacity(config.parties);
        for (party, ring) in rings.iter().enumerate() {
            let symbols = final_measure(&permit, ring, &mut rng);
            let xor_key = SecretKey::new(symbols)?;
            let final_key = keys[party].to_bits().xor(&xor_key.to_bits())?;
            recovered.push(xor_key.to_bits());
            finals.push(final_key);
        }
        Some(SharedKeyResult::from_parts(recovered, finals))
    };

    Ok(RunOutcome {
        result,
        aborted,
        keys,
        detections,
        total_restarts,
        hops_checked,
        hops_attacked,
        mean_error_rate,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::key::KeySymbol;
    use crate::qcore::PauliOp;

    fn fixed_keys(symbol_lists: &[&[u8]]) -> Vec<SecretKey> {
        symbol_lists
            .iter()
            .map(|list| SecretKey::new(list.iter().map(|b| KeySymbol::new(*b)).collect()).unwrap())
            .collect()
    }

    fn xor_of(keys: &[SecretKey]) -> BitString {
        let mut acc = keys[0].clone();
        for key in &keys[1..] {
            acc = acc.xor(key).unwrap();
        }
        acc.to_bits()
    }

    #[test]
    fn honest_three_party_run_agrees_on_the_xor_key() {
        let config = ProtocolConfig::new(3, 8, 7);
        let out = run_protocol(&config, &KeySource::Random, &AttackModel::Honest).unwrap();
        assert!(!out.aborted);
        assert_eq!(out.total_restarts, 0);
        assert_eq!(out.mean_error_rate, 0.0);
        let result = out.result.unwrap();
        assert!(result.agreement);
        assert_eq!(result.final_keys[0], xor_of(&out.keys));
    }

    #[test]
    fn honest_two_party_run_agrees() {
        let config = ProtocolConfig::new(2, 8, 21);
        let out = run_protocol(&config, &KeySource::Random, &AttackModel::Honest).unwrap();
        let result = out.result.unwrap();
        assert!(result.agreement);
        assert_eq!(result.final_keys[0], xor_of(&out.keys));
    }

    #[test]
    fn two_party_recovery_is_direct() {
        // With N=2 the measured XOR at each party is exactly the other
        // party's key.
        let keys = fixed_keys(&[&[0b01, 0b10, 0b11], &[0b11, 0b00, 0b10]]);
        let config = ProtocolConfig::new(2, 3, 3);
        let out = run_protocol(
            &config,
            &KeySource::Fixed(keys.clone()),
            &AttackModel::Honest,
        )
        .unwrap();
        let result = out.result.unwrap();
        assert_eq!(result.recovered_xor[0], keys[1].to_bits());
        assert_eq!(result.recovered_xor[1], keys[0].to_bits());
    }

    #[test]
    fn honest_runs_agree_across_sizes_and_seeds() {
        for parties in 2..=5 {
            for symbols in [1usize, 5] {
                for seed in 0..20 {
                    let config = ProtocolConfig::new(parties, symbols, seed);
                    let out =
                        run_protocol(&config, &KeySource::Random, &AttackModel::Honest).unwrap();
                    let result = out.result.unwrap();
                    assert!(result.agreement, "N={parties} n={symbols} seed={seed}");
                    assert_eq!(result.final_keys[0], xor_of(&out.keys));
                }
            }
        }
    }

    #[test]
    fn persistent_y_flip_always_aborts() {
        let config = ProtocolConfig::new(3, 4, 11);
        let out =
            run_protocol(&config, &KeySource::Random, &AttackModel::Flip(PauliOp::Y)).unwrap();
        assert!(out.aborted);
        assert!(out.result.is_none());
        assert!(out.detections.iter().all(|d| d.error_rate == 1.0));
    }

    #[test]
    fn barrier_rejects_while_rings_in_transit() {
        let mut rings: Vec<RingState> = (0..3).map(|j| prepare_ring(j, 2).unwrap()).collect();
        rings[0].phase = RingPhase::Complete;
        let err = measurement_barrier(&rings, true).unwrap_err();
        assert_eq!(
            err,
            QkaError::EarlyMeasureRejected {
                incomplete: 2,
                total: 3
            }
        );
    }

    #[test]
    fn barrier_grants_when_all_complete() {
        let mut rings: Vec<RingState> = (0..3).map(|j| prepare_ring(j, 2).unwrap()).collect();
        for ring in &mut rings {
            ring.phase = RingPhase::Complete;
        }
        assert!(measurement_barrier(&rings, true).is_ok());
    }

    #[test]
    fn disabled_barrier_grants_early() {
        let rings: Vec<RingState> = (0..3).map(|j| prepare_ring(j, 2).unwrap()).collect();
        assert!(measurement_barrier(&rings, false).is_ok());
    }

    #[test]
    fn barrier_rejects_under_every_completion_order() {
        // Whatever order rings finish in, no prefix short of all three
        // yields a permit.
        let orders = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for order in orders {
            let mut rings: Vec<RingState> = (0..3).map(|j| prepare_ring(j, 2).unwrap()).collect();
            for (done, idx) in order.iter().enumerate() {
                assert!(
                    measurement_barrier(&rings, true).is_err(),
                    "permit granted with only {done} rings complete (order {order:?})"
                );
                rings[*idx].phase = RingPhase::Complete;
            }
            assert!(measurement_barrier(&rings, true).is_ok());
        }
    }

    #[test]
    fn final_measure_reads_xor_of_two_encodings() {
        let mut ring = prepare_ring(0, 1).unwrap();
        let k1 = SecretKey::new(vec![KeySymbol::new(0b01)]).unwrap();
        let k2 = SecretKey::new(vec![KeySymbol::new(0b10)]).unwrap();
        encode_key(ring.pairs_mut(), &k1).unwrap();
        encode_key(ring.pairs_mut(), &k2).unwrap();
        ring.phase = RingPhase::Complete;
        let permit = measurement_barrier(std::slice::from_ref(&ring), true).unwrap();
        let mut rng = RandomSource::new(0);
        let symbols = final_measure(&permit, &ring, &mut rng);
        assert_eq!(symbols, vec![KeySymbol::new(0b11)]);
    }

    #[test]
    fn final_measure_reads_identity_when_all_symbols_zero() {
        let mut ring = prepare_ring(0, 2).unwrap();
        let zero = SecretKey::new(vec![KeySymbol::new(0); 2]).unwrap();
        encode_key(ring.pairs_mut(), &zero).unwrap();
        encode_key(ring.pairs_mut(), &zero).unwrap();
        ring.phase = RingPhase::Complete;
        let permit = measurement_barrier(std::slice::from_ref(&ring), true).unwrap();
        let mut rng = RandomSource::new(1);
        let symbols = final_measure(&permit, &ring, &mut rng);
        assert_eq!(symbols, vec![KeySymbol::new(0); 2]);
    }

    #[test]
    fn run_hop_advances_and_checks_clean_when_honest() {
        let config = ProtocolConfig::new(3, 4, 5);
        let keys: Vec<SecretKey> = {
            let mut rng = RandomSource::new(2);
            (0..3)
                .map(|_| SecretKey::random(4, &mut rng).unwrap())
                .collect()
        };
        let mut ring = prepare_ring(0, 4).unwrap();
        let mut log = BroadcastLog::new();
        let mut rng = RandomSource::new(3);
        let report = run_hop(
            &mut ring,
            &keys,
            &AttackModel::Honest,
            &config,
            &mut log,
            &mut rng,
        )
        .unwrap();
        assert!(!report.detected);
        assert_eq!(report.error_rate, 0.0);
        assert_eq!(ring.encodings_applied, 1);
        assert_eq!(ring.phase, RingPhase::InTransit { hops_done: 1 });
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn final_hop_back_to_initiator_does_not_encode() {
        let config = ProtocolConfig::new(2, 2, 6);
        let keys: Vec<SecretKey> = {
            let mut rng = RandomSource::new(4);
            (0..2)
                .map(|_| SecretKey::random(2, &mut rng).unwrap())
                .collect()
        };
        let mut ring = prepare_ring(0, 2).unwrap();
        let mut log = BroadcastLog::new();
        let mut rng = RandomSource::new(5);
        run_hop(
            &mut ring,
            &keys,
            &AttackModel::Honest,
            &config,
            &mut log,
            &mut rng,
        )
        .unwrap();
        assert_eq!(ring.encodings_applied, 1);
        run_hop(
            &mut ring,
            &keys,
            &AttackModel::Honest,
            &config,
            &mut log,
            &mut rng,
        )
        .unwrap();
        assert_eq!(ring.encodings_applied, 1);
        assert_eq!(ring.phase, RingPhase::AwaitingCheck);
    }

    #[test]
    fn flip_attacked_hop_aborts_with_expected_probability() {
        // Per-hop detection probability 1 - (1/2)^n for an X flip.
        let n = 4;
        let config = ProtocolConfig::new(3, n, 0);
        let trials = 2_000;
        let mut detected = 0;
        for seed in 0..trials {
            let keys: Vec<SecretKey> = {
                let mut rng = RandomSource::new(seed);
                (0..3)
                    .map(|_| SecretKey::random(n, &mut rng).unwrap())
                    .collect()
            };
            let mut ring = prepare_ring(0, n).unwrap();
            let mut log = BroadcastLog::new();
            let mut rng = RandomSource::new(seed ^ 0xABCD);
            let report = run_hop(
                &mut ring,
                &keys,
                &AttackModel::Flip(PauliOp::X),
                &config,
                &mut log,
                &mut rng,
            )
            .unwrap();
            if report.detected {
                detected += 1;
                assert_eq!(ring.phase, RingPhase::Preparing);
                assert_eq!(ring.restarts, 1);
            }
        }
        let p = 1.0 - 0.5f64.powi(n as i32);
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let rate = f64::from(detected) / trials as f64;
        assert!((rate - p).abs() <= 3.0 * sigma, "rate {rate} vs {p}");
    }

    #[test]
    fn restarted_ring_contributes_no_stale_key_material() {
        // Fail the first attempt with a sure-detect flip, then finish
        // honestly; the measured XOR must match the fresh encodings only.
        let config = ProtocolConfig::new(3, 3, 9);
        let keys = fixed_keys(&[&[0, 0, 0], &[0b01, 0b10, 0b11], &[0b11, 0b11, 0b00]]);
        let mut ring = prepare_ring(0, 3).unwrap();
        let mut log = BroadcastLog::new();
        let mut rng = RandomSource::new(10);

        let report = run_hop(
            &mut ring,
            &keys,
            &AttackModel::Flip(PauliOp::Y),
            &config,
            &mut log,
            &mut rng,
        )
        .unwrap();
        assert!(report.detected);
        assert_eq!(ring.restarts, 1);

        while ring.next_hop().is_some() {
            let report = run_hop(
                &mut ring,
                &keys,
                &AttackModel::Honest,
                &config,
                &mut log,
                &mut rng,
            )
            .unwrap();
            assert!(!report.detected);
        }
        ring.phase = RingPhase::Complete;
        let permit = measurement_barrier(std::slice::from_ref(&ring), true).unwrap();
        let symbols = final_measure(&permit, &ring, &mut rng);
        let expected: Vec<KeySymbol> = keys[1]
            .symbols()
            .iter()
            .zip(keys[2].symbols())
            .map(|(a, b)| a.xor(*b))
            .collect();
        assert_eq!(symbols, expected);
    }

    #[test]
    fn broadcast_log_is_independent_of_keys() {
        // Two runs with the same seed but different fixed keys must produce
        // byte-identical logs: announcements carry no key material.
        let config = ProtocolConfig::new(3, 4, 77);
        let keys_a = fixed_keys(&[&[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0]]);
        let keys_b = fixed_keys(&[&[3, 2, 1, 0], &[1, 1, 1, 1], &[2, 0, 2, 0]]);
        let out_a = run_protocol(&config, &KeySource::Fixed(keys_a), &AttackModel::Honest).unwrap();
        let out_b = run_protocol(&config, &KeySource::Fixed(keys_b), &AttackModel::Honest).unwrap();
        assert_eq!(out_a.log, out_b.log);
        assert!(!out_a.log.is_empty());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ProtocolConfig::new(1, 4, 0).validate().is_err());
        assert!(ProtocolConfig::new(3, 0, 0).validate().is_err());
        let mut config = ProtocolConfig::new(3, 4, 0);
        config.error_threshold = 1.5;
        assert!(config.validate().is_err());
    }

    #[test]
    fn fixed_keys_must_match_config() {
        let config = ProtocolConfig::new(3, 4, 0);
        let short = fixed_keys(&[&[0, 0, 0, 0], &[0, 0, 0, 0]]);
        assert!(run_protocol(&config, &KeySource::Fixed(short), &AttackModel::Honest).is_err());
        let wrong_len = fixed_keys(&[&[0, 0], &[0, 0], &[0, 0]]);
        assert!(run_protocol(&config, &KeySource::Fixed(wrong_len), &AttackModel::Honest).is_err());
    }
}
