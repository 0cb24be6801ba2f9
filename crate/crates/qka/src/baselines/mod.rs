//! The SAP baseline protocols (two- and three-party) with Bell-pair decoys
//! and permutation hiding, plus demonstrations of the flaws the main
//! protocol fixes.

mod demos;
mod permutation;
mod sap;

pub use demos::{
    demo_collusion_sap2, demo_flip_undetected, demo_privacy_leak, predicted_flip_positions,
    FlipDemo, PrivacyLeakDemo, SapCollusionDemo,
};
pub use permutation::Permutation;
pub use sap::{
    run_sap1, run_sap1_with_plan, run_sap2, run_sap2_with_plan, AttackPlan, BellDecoyRecord,
    SapEncoding, SapProtocol, SapRecovery, SapRun,
};
