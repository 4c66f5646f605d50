//! Simulation and analysis toolkit for device-independent quantum key
//! distribution over lossy fibers with a heralded qubit amplifier.
//!
//! The crate models photon-pair and single-photon sources in a
//! truncated Fock space, propagates them through coupling and channel
//! losses and the amplifier's linear-optical circuit, extracts CHSH and
//! QBER statistics with imperfect number-resolving detectors, and
//! composes collective-attack key-rate bounds for untrusted and trusted
//! detectors. An optimizer maximizes the rate over the source and
//! beamsplitter parameters per distance.
//!
//! Start with the `examples/` directory: each example exercises one
//! capability end to end. A thin `diqkd` binary exposes the same
//! pipeline as subcommands for scripted sweeps.

pub mod amplifier;
pub mod cli;
pub mod error;
pub mod fock;
pub mod measurement;
pub mod optimizer;
pub mod security;
pub mod sources;

pub use amplifier::{run_amplifier, AmplifierParams, HeraldedState};
pub use error::{Error, Result};
pub use fock::{Ensemble, FockKet, ModeId, Occupation, Pol, Spatial};
pub use measurement::{apply_visibility, click_statistics, closed_form_mu, closed_form_qs};
pub use optimizer::{evaluate_keyrate, max_distance, optimize, sweep_distance, Scenario};
pub use security::{
    binary_entropy, chsh_chi, eve_info_trusted, eve_info_untrusted, fiber_transmission, key_rate,
    KeyRateInput, KeyRateResult, TrustMode,
};
pub use sources::{PairSourceParams, SingleSourceKind, SingleSourceParams};
