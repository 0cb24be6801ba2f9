//! Simulation and analysis of Bell-state quantum key agreement.
//!
//! The crate models an arbitrary N-party key agreement built on Φ⁺ pairs:
//! every party circulates the traveling halves of its pairs through the
//! other parties, each of which encodes a two-bit key symbol with one of
//! {I, Z, X, Y}; decoy single photons police the channel and a
//! post-measurement barrier forces all rings to finish before anyone
//! measures. The two- and three-party baselines it improves on (Bell-pair
//! decoys, permutation hiding, one-bit encodings) are implemented alongside,
//! with executable demonstrations of their flaws, pluggable attack models,
//! and resource/efficiency analytics.
//!
//! Everything probabilistic goes through a seeded [`rng::RandomSource`], so
//! any run is reproducible from its seed.

mod error;

pub mod adversary;
pub mod analysis;
pub mod baselines;
pub mod protocol;
pub mod qcore;
pub mod rng;

pub use error::QkaError;
