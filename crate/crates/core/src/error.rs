use thiserror::Error;

/// Errors raised by the library. Variant names are part of the CLI's
/// machine-readable error records.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no open channel at E = {energy} (lowest cutoff {lowest_cutoff})")]
    NoOpenChannel { energy: f64, lowest_cutoff: f64 },

    #[error("E = {energy} lies within {epsilon:e} of the cutoff {cutoff} of TM{m}{n}")]
    CutoffSingularity {
        energy: f64,
        cutoff: f64,
        m: u32,
        n: u32,
        epsilon: f64,
    },

    #[error("TM{m}{n} is evanescent at E = {energy} (cutoff {cutoff})")]
    Evanescent {
        energy: f64,
        cutoff: f64,
        m: u32,
        n: u32,
    },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("pole {pole} is not strictly inside ({lo}, {hi})")]
    PoleOutsideDomain { pole: f64, lo: f64, hi: f64 },

    #[error("Lamb-shift truncation {requested} is below the open channel count {open}")]
    TruncationTooSmall { requested: usize, open: usize },

    #[error("Lamb-shift truncation {requested} exceeds the {available} modes of the ordering")]
    TruncationExceedsOrdering { requested: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("E = {energy} is outside the single-channel window ({lo}, {hi})")]
    OutOfSingleChannelWindow { energy: f64, lo: f64, hi: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable variant name used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NoOpenChannel { .. } => "NoOpenChannel",
            Error::CutoffSingularity { .. } => "CutoffSingularity",
            Error::Evanescent { .. } => "Evanescent",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::PoleOutsideDomain { .. } => "PoleOutsideDomain",
            Error::TruncationTooSmall { .. } => "TruncationTooSmall",
            Error::TruncationExceedsOrdering { .. } => "TruncationExceedsOrdering",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::OutOfSingleChannelWindow { .. } => "OutOfSingleChannelWindow",
            Error::UnknownPreset(_) => "UnknownPreset",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
