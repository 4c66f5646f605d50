use thiserror::Error;

/// Errors produced by the simulation and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("fock-space truncation overflow: {photons} photons exceeds N_max = {n_max}")]
    TruncationOverflow { photons: u32, n_max: u32 },

    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("relabel target mode {0} is occupied")]
    RelabelOccupied(String),

    #[error("binary entropy argument {0} outside [0, 1]")]
    EntropyDomain(f64),

    #[error("CHSH value {0} exceeds the quantum bound 2*sqrt(2)")]
    ChshOutOfRange(f64),

    #[error("inconsistent statistics: eta_d^2 * mu~_cc = {scaled} exceeds mu_cc = {mu_cc}")]
    InconsistentStatistics { scaled: f64, mu_cc: f64 },

    #[error("no finite distance limit: key rate still positive at {0} km")]
    UnboundedDistance(f64),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
