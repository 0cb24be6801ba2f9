//! The two- and three-party baseline protocols with Bell-pair decoys.
//!
//! Both baselines transmit each sequence as `n` message qubits concatenated
//! with `n/2` decoy Bell pairs (both halves in the same sequence), randomly
//! reordered by a permutation that is announced after receipt. Encoding is
//! one classical bit per qubit: the first encoder uses {I, X}, the second
//! (three-party only) uses {I, Z}. The receiver Bell-measures decoy pairs
//! against the expected Φ⁺.

use crate::adversary::AttackModel;
use crate::baselines::permutation::Permutation;
use crate::error::QkaError;
use crate::protocol::{BitString, DetectionEvent, PartyId, SharedKeyResult};
use crate::qcore::{
    apply_pauli, bell_measure, make_bell, measure_qubit, BellLabel, PauliOp, QubitIndex,
    TwoQubitState,
};
use crate::rng::RandomSource;

/// Which baseline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SapProtocol {
    /// Two-party.
    Sap1,
    /// Three-party.
    Sap2,
}

/// Stage-dependent one-bit encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SapEncoding {
    /// First encoder: 0↦I, 1↦X.
    BitFlip,
    /// Second encoder: 0↦I, 1↦Z.
    PhaseFlip,
}

impl SapEncoding {
    pub fn op(self, bit: u8) -> PauliOp {
        match (self, bit) {
            (_, 0) => PauliOp::I,
            (SapEncoding::BitFlip, _) => PauliOp::X,
            (SapEncoding::PhaseFlip, _) => PauliOp::Z,
        }
    }
}

/// Positions of each decoy pair's two halves inside a permuted sequence.
#[derive(Clone, Debug)]
pub struct BellDecoyRecord {
    pairs: Vec<(usize, usize)>,
}

impl BellDecoyRecord {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// Which transmissions an attack touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackPlan {
    /// Every transmission of every ring.
    AllTransmissions,
    /// A single transmission, by global index in run order.
    Single(usize),
}

#[derive(Clone, Copy, Debug)]
enum SapSlot {
    Message(usize),
    DecoyHalf { pair: usize, half: QubitIndex },
}

struct Transmission {
    slots: Vec<SapSlot>,
    decoys: Vec<TwoQubitState>,
    record: BellDecoyRecord,
}

fn build_transmission(message_count: usize, rng: &mut RandomSource) -> Transmission {
    let pair_count = message_count / 2;
    let mut original: Vec<SapSlot> = (0..message_count).map(SapSlot::Message).collect();
    for pair in 0..pair_count {
        original.push(SapSlot::DecoyHalf {
            pair,
            half: QubitIndex::First,
        });
        original.push(SapSlot::DecoyHalf {
            pair,
            half: QubitIndex::Second,
        });
    }
    let permutation = Permutation::random(original.len(), rng);
    let slots = permutation.apply(&original);
    let pairs = (0..pair_count)
        .map(|d| {
            (
                permutation.forward(message_count + 2 * d),
                permutation.forward(message_count + 2 * d + 1),
            )
        })
        .collect();
    Transmission {
        slots,
        decoys: vec![make_bell(BellLabel::PhiPlus); pair_count],
        record: BellDecoyRecord { pairs },
    }
}

fn attack_transmission(
    t: &mut Transmission,
    message_pairs: &mut [TwoQubitState],
    model: &AttackModel,
    rng: &mut RandomSource,
) -> bool {
    match model {
        AttackModel::Honest | AttackModel::Collusion { .. } => false,
        AttackModel::Flip(op) => {
            for slot in &t.slots {
                match slot {
                    SapSlot::Message(i) => {
                        message_pairs[*i] =
                            apply_pauli(*op, QubitIndex::Second, &message_pairs[*i]);
                    }
                    SapSlot::DecoyHalf { pair, half } => {
                        t.decoys[*pair] = apply_pauli(*op, *half, &t.decoys[*pair]);
                    }
                }
            }
            true
        }
        AttackModel::InterceptResend(policy) => {
            for slot in &t.slots {
                let basis = policy_basis(*policy, rng);
                match slot {
                    SapSlot::Message(i) => {
                        message_pairs[*i] =
                            measure_qubit(&message_pairs[*i], QubitIndex::Second, basis, rng)
                                .post_state;
                    }
                    SapSlot::DecoyHalf { pair, half } => {
                        t.decoys[*pair] =
                            measure_qubit(&t.decoys[*pair], *half, basis, rng).post_state;
                    }
                }
            }
            true
        }
    }
}

fn policy_basis(
    policy: crate::adversary::InterceptPolicy,
    rng: &mut RandomSource,
) -> crate::qcore::Basis {
    use crate::adversary::InterceptPolicy;
    use crate::qcore::Basis;
    match policy {
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

/// Rearrange per the announced pairing and Bell-measure every decoy pair;
/// an outcome other than Φ⁺ is an error.
fn check_bell_decoys(t: &Transmission, rng: &mut RandomSource) -> (f64, bool) {
    let mut mismatches = 0usize;
    for (pair_idx, (pos_a, pos_b)) in t.record.pairs().iter().enumerate() {
        debug_assert!(matches!(
            t.slots[*pos_a],
            SapSlot::DecoyHalf { pair, .. } if pair == pair_idx
        ));
        debug_assert!(matches!(
            t.slots[*pos_b],
            SapSlot::DecoyHalf { pair, .. } if pair == pair_idx
        ));
        if bell_measure(&t.decoys[pair_idx], rng).value != BellLabel::PhiPlus {
            mismatches += 1;
        }
    }
    let checked = t.record.pairs().len();
    let error_rate = if checked == 0 {
        0.0
    } else {
        mismatches as f64 / checked as f64
    };
    (error_rate, mismatches == 0)
}

/// Individual encoder bits one initiator reads off its Bell outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct SapRecovery {
    pub initiator: PartyId,
    /// (encoder, bits read for that encoder) in stage order.
    pub encoders: Vec<(PartyId, BitString)>,
}

/// Outcome of a baseline run.
#[derive(Clone, Debug)]
pub struct SapRun {
    /// `None` when a channel check failed and the run aborted.
    pub result: Option<SharedKeyResult>,
    pub detected: bool,
    pub detection_events: Vec<DetectionEvent>,
    pub transmissions_checked: u32,
    pub transmissions_attacked: u32,
    pub keys: Vec<BitString>,
    /// The per-encoder bits each initiator can reconstruct: the privacy
    /// leak surface of the baselines.
    pub recoveries: Vec<SapRecovery>,
}

struct ChannelStats {
    next_global_index: usize,
    attacked: u32,
    checked: u32,
    events: Vec<DetectionEvent>,
}

impl ChannelStats {
    fn new() -> Self {
        Self {
            next_global_index: 0,
            attacked: 0,
            checked: 0,
            events: Vec::new(),
        }
    }

    fn covers(&mut self, plan: AttackPlan) -> bool {
        let idx = self.next_global_index;
        self.next_global_index += 1;
        match plan {
            AttackPlan::AllTransmissions => true,
            AttackPlan::Single(target) => idx == target,
        }
    }
}

fn run_transmission(
    message_pairs: &mut [TwoQubitState],
    attack: &AttackModel,
    plan: AttackPlan,
    stats: &mut ChannelStats,
    ring: usize,
    hop: usize,
    rng: &mut RandomSource,
) -> bool {
    let mut t = build_transmission(message_pairs.len(), rng);
    if stats.covers(plan) && attack_transmission(&mut t, message_pairs, attack, rng) {
        stats.attacked += 1;
    }
    stats.checked += 1;
    let (error_rate, pass) = check_bell_decoys(&t, rng);
    if !pass {
        stats.events.push(DetectionEvent {
            ring,
            hop,
            error_rate,
        });
    }
    pass
}

fn validate_sap_args(n: usize, keys: &[&BitString]) -> Result<(), QkaError> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(QkaError::InvalidConfig(format!(
            "baseline runs need an even message length ≥ 2, got {n}"
        )));
    }
    for key in keys {
        if key.len() != n {
            return Err(QkaError::LengthMismatch(format!(
                "key length {} vs message length {n}",
                key.len()
            )));
        }
    }
    Ok(())
}

fn encode_bits(message_pairs: &mut [TwoQubitState], key: &BitString, encoding: SapEncoding) {
    for (pair, bit) in message_pairs.iter_mut().zip(key.bits()) {
        *pair = apply_pauli(encoding.op(*bit), QubitIndex::Second, pair);
    }
}

/// Run the two-party baseline with `attack` applied per `plan`.
pub fn run_sap1_with_plan(
    n: usize,
    key_a: &BitString,
    key_b: &BitString,
    attack: &AttackModel,
    plan: AttackPlan,
    rng: &mut RandomSource,
) -> Result<SapRun, QkaError> {
    validate_sap_args(n, &[key_a, key_b])?;
    let mut stats = ChannelStats::new();
    let mut message_pairs = vec![make_bell(BellLabel::PhiPlus); n];

    let abort = |stats: ChannelStats| SapRun {
        result: None,
        detected: true,
        detection_events: stats.events,
        transmissions_checked: stats.checked,
        transmissions_attacked: stats.attacked,
        keys: vec![key_a.clone(), key_b.clone()],
        recoveries: Vec::new(),
    };

    // Outbound: message halves travel to the second party.
    if !run_transmission(&mut message_pairs, attack, plan, &mut stats, 0, 0, rng) {
        return Ok(abort(stats));
    }
    encode_bits(&mut message_pairs, key_b, SapEncoding::BitFlip);
    // Return leg.
    if !run_transmission(&mut message_pairs, attack, plan, &mut stats, 0, 1, rng) {
        return Ok(abort(stats));
    }

    // First party announces its key; second party combines directly.
    let bob_final = key_a.xor(key_b)?;

    // First party Bell-measures and reads the encoder bits off the parity.
    let measured_b = BitString::from_bits(
        message_pairs
            .iter()
            .map(|pair| bell_measure(pair, rng).value.parity_bit())
            .collect(),
    );
    let alice_final = key_a.xor(&measured_b)?;

    let result = SharedKeyResult::from_parts(
        vec![measured_b.clone(), key_a.clone()],
        vec![alice_final, bob_final],
    );
    Ok(SapRun {
        result: Some(result),
        detected: false,
        detection_events: stats.events,
        transmissions_checked: stats.checked,
        transmissions_attacked: stats.attacked,
        keys: vec![key_a.clone(), key_b.clone()],
        recoveries: vec![SapRecovery {
            initiator: 0,
            encoders: vec![(1, measured_b)],
        }],
    })
}

/// Two-party baseline, attack on every transmission.
pub fn run_sap1(
    n: usize,
    key_a: &BitString,
    key_b: &BitString,
    attack: &AttackModel,
    rng: &mut RandomSource,
) -> Result<SapRun, QkaError> {
    run_sap1_with_plan(n, key_a, key_b, attack, AttackPlan::AllTransmissions, rng)
}

/// Run the three-party baseline with `attack` applied per `plan`.
///
/// The three rings run sequentially: ring `j` starts at party `j`, collects a
/// {I,X} encoding from `j+1` and a {I,Z} encoding from `j+2`, and returns.
pub fn run_sap2_with_plan(
    n: usize,
    keys: &[BitString],
    attack: &AttackModel,
    plan: AttackPlan,
    rng: &mut RandomSource,
) -> Result<SapRun, QkaError> {
    if keys.len() != 3 {
        return Err(QkaError::LengthMismatch(format!(
            "three-party baseline needs 3 keys, got {}",
            keys.len()
        )));
    }
    validate_sap_args(n, &[&keys[0], &keys[1], &keys[2]])?;
    let mut stats = ChannelStats::new();
    let mut recoveries = Vec::with_capacity(3);
    let mut finals = Vec::with_capacity(3);
    let mut recovered_xor = Vec::with_capacity(3);

    for initiator in 0..3usize {
        let first_encoder = (initiator + 1) % 3;
        let second_encoder = (initiator + 2) % 3;
        let mut message_pairs = vec![make_bell(BellLabel::PhiPlus); n];

        let mut hop_pass = true;
        for hop in 0..3usize {
            if !run_transmission(
                &mut message_pairs,
                attack,
                plan,
                &mut stats,
                initiator,
                hop,
                rng,
            ) {
                hop_pass = false;
                break;
            }
            match hop {
                0 => encode_bits(
                    &mut message_pairs,
                    &keys[first_encoder],
                    SapEncoding::BitFlip,
                ),
                1 => encode_bits(
                    &mut message_pairs,
                    &keys[second_encoder],
                    SapEncoding::PhaseFlip,
                ),
                _ => {}
            }
        }
        if !hop_pass {
            return Ok(SapRun {
                result: None,
                detected: true,
                detection_events: stats.events,
                transmissions_checked: stats.checked,
                transmissions_attacked: stats.attacked,
                keys: keys.to_vec(),
                recoveries,
            });
        }

        // The initiator reads both encoders' bits off each Bell label:
        // parity is the {I,X} stage, phase the {I,Z} stage.
        let mut first_bits = Vec::with_capacity(n);
        let mut second_bits = Vec::with_capacity(n);
        for pair in &message_pairs {
            let label = bell_measure(pair, rng).value;
            first_bits.push(label.parity_bit());
            second_bits.push(label.phase_bit());
        }
        let first_bits = BitString::from_bits(first_bits);
        let second_bits = BitString::from_bits(second_bits);
        let xor = first_bits.xor(&second_bits)?;
        finals.push(keys[initiator].xor(&xor)?);
        recovered_xor.push(xor);
        recoveries.push(SapRecovery {
            initiator,
            encoders: vec![(first_encoder, first_bits), (second_encoder, second_bits)],
        });
    }

    Ok(SapRun {
        result: Some(SharedKeyResult::from_parts(recovered_xor, finals)),
        detected: false,
        detection_events: stats.events,
        transmissions_checked: stats.checked,
        transmissions_attacked: stats.attacked,
        keys: keys.to_vec(),
        recoveries,
    })
}

/// Three-party baseline, attack on every transmission.
pub fn run_sap2(
    n: usize,
    keys: &[BitString],
    attack: &AttackModel,
    rng: &mut RandomSource,
) -> Result<SapRun, QkaError> {
    run_sap2_with_plan(n, keys, attack, AttackPlan::AllTransmissions, rng)
}
