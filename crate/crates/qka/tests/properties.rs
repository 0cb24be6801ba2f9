//! Property tests for the protocol invariants.

use proptest::prelude::*;

use qka::adversary::AttackModel;
use qka::protocol::{
    encode_key, final_measure, measurement_barrier, prepare_ring, run_protocol, KeySource,
    KeySymbol, ProtocolConfig, RingPhase, SecretKey,
};
use qka::qcore::{
    apply_pauli, equal_up_to_global_phase, make_bell, BellLabel, PauliOp, QubitIndex, TwoQubitState,
};
use qka::rng::RandomSource;

fn symbol_strategy() -> impl Strategy<Value = KeySymbol> {
    (0u8..4).prop_map(KeySymbol::new)
}

fn key_strategy(n: usize) -> impl Strategy<Value = SecretKey> {
    proptest::collection::vec(symbol_strategy(), n)
        .prop_map(|symbols| SecretKey::new(symbols).expect("non-empty"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Honest execution always agrees on the XOR of all keys, for any
    /// party count, key length, and seed.
    #[test]
    fn honest_execution_agrees_on_the_xor_key(
        parties in 2usize..=6,
        symbols in 1usize..=32,
        seed in any::<u64>(),
    ) {
        let config = ProtocolConfig::new(parties, symbols, seed);
        let out = run_protocol(&config, &KeySource::Random, &AttackModel::Honest).unwrap();
        prop_assert!(!out.aborted);
        let result = out.result.unwrap();
        prop_assert!(result.agreement);
        let mut expected = out.keys[0].clone();
        for key in &out.keys[1..] {
            expected = expected.xor(key).unwrap();
        }
        for final_key in &result.final_keys {
            prop_assert_eq!(final_key, &expected.to_bits());
        }
        prop_assert_eq!(out.mean_error_rate, 0.0);
    }

    /// The Bell label measured at each position is the XOR of the encoders'
    /// symbols, whatever the number of encoders and their order.
    #[test]
    fn measured_label_is_the_xor_of_all_encodings(
        symbols in proptest::collection::vec(symbol_strategy(), 1..8),
        seed in any::<u64>(),
    ) {
        let mut pair = make_bell(BellLabel::PhiPlus);
        let mut expected = KeySymbol::new(0);
        for s in &symbols {
            pair = apply_pauli(s.pauli(), QubitIndex::Second, &pair);
            expected = expected.xor(*s);
        }
        let mut rng = RandomSource::new(seed);
        let label = qka::qcore::bell_measure(&pair, &mut rng).value;
        prop_assert_eq!(label.code(), expected.bits());
    }

    /// Every encoding operation keeps states normalized and inside the Bell
    /// basis (up to global phase).
    #[test]
    fn encodings_preserve_normalization_and_bell_closure(
        ops in proptest::collection::vec((0u8..4, proptest::bool::ANY), 1..12),
        start in 0u8..4,
    ) {
        let mut state: TwoQubitState = make_bell(BellLabel::from_code(start));
        for (code, on_first) in ops {
            let target = if on_first { QubitIndex::First } else { QubitIndex::Second };
            state = apply_pauli(PauliOp::from_code(code), target, &state);
            prop_assert!(state.is_normalized());
            prop_assert!(BellLabel::ALL
                .iter()
                .any(|l| equal_up_to_global_phase(&state, &make_bell(*l))));
        }
    }

    /// A ring driven by hand gives each party's decoded XOR independent of
    /// the order the encoders act in.
    #[test]
    fn encoder_order_does_not_change_the_decoded_xor(
        keys in proptest::collection::vec(key_strategy(4), 3..5),
        seed in any::<u64>(),
    ) {
        let n = 4;
        // Apply in given order.
        let mut ring_a = prepare_ring(0, n).unwrap();
        for key in &keys {
            encode_key(ring_a.pairs_mut(), key).unwrap();
        }
        // Apply in reverse order.
        let mut ring_b = prepare_ring(0, n).unwrap();
        for key in keys.iter().rev() {
            encode_key(ring_b.pairs_mut(), key).unwrap();
        }
        ring_a.phase = RingPhase::Complete;
        ring_b.phase = RingPhase::Complete;
        let permit = measurement_barrier(std::slice::from_ref(&ring_a), true).unwrap();
        let mut rng = RandomSource::new(seed);
        let xor_a = final_measure(&permit, &ring_a, &mut rng);
        let xor_b = final_measure(&permit, &ring_b, &mut rng);
        prop_assert_eq!(xor_a, xor_b);
    }

    /// Baseline permutation hiding survives any random permutation.
    #[test]
    fn permutation_round_trip(len in 1usize..64, seed in any::<u64>()) {
        let mut rng = RandomSource::new(seed);
        let perm = qka::baselines::Permutation::random(len, &mut rng);
        let items: Vec<usize> = (0..len).collect();
        prop_assert_eq!(perm.unapply(&perm.apply(&items)), items);
    }
}

/// Identical config and seed must reproduce the identical outcome.
#[test]
fn runs_are_reproducible_from_the_seed() {
    let config = ProtocolConfig::new(4, 6, 123);
    let a = run_protocol(&config, &KeySource::Random, &AttackModel::Honest).unwrap();
    let b = run_protocol(&config, &KeySource::Random, &AttackModel::Honest).unwrap();
    assert_eq!(a.keys, b.keys);
    assert_eq!(a.result.unwrap().final_keys, b.result.unwrap().final_keys);
    assert_eq!(a.log, b.log);
}
