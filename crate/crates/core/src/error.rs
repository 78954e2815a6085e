use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("catalog contains no line records")]
    EmptyCatalog,

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: &'static str, message: String },

    #[error("frequency grid {lo_ghz:.3}..{hi_ghz:.3} GHz is outside coverage {cov_lo_ghz:.3}..{cov_hi_ghz:.3} GHz")]
    Coverage {
        lo_ghz: f64,
        hi_ghz: f64,
        cov_lo_ghz: f64,
        cov_hi_ghz: f64,
    },

    #[error("frequency grids do not match: {0}")]
    GridMismatch(String),

    #[error("channel is not invertible: |h| = {magnitude:.3e} at {freq_ghz:.3} GHz")]
    NonInvertible { freq_ghz: f64, magnitude: f64 },

    #[error("phase undefined: |h| below amplitude floor at {freq_ghz:.3} GHz")]
    MaskedPhase { freq_ghz: f64 },

    #[error("band {lo_ghz:.3}..{hi_ghz:.3} GHz contains fewer than {needed} usable points")]
    EmptyBand { lo_ghz: f64, hi_ghz: f64, needed: usize },

    #[error("trellis needs {states} states (2^{log2_states:.1}), budget is {budget}")]
    StateBudget {
        states: f64,
        log2_states: f64,
        budget: usize,
    },

    #[error("sequence enumeration of {count} patterns exceeds budget {budget}; use Monte Carlo")]
    EnumerationBudget { count: f64, budget: usize },

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("at Eb/N0 = {ebn0_db} dB: {source}")]
    AtSnrPoint {
        ebn0_db: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::Validation {
            field,
            message: message.into(),
        }
    }

    /// Machine-readable category used by the command-line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::EmptyCatalog => "empty-catalog",
            Error::Validation { .. } => "validation",
            Error::Coverage { .. } => "coverage",
            Error::GridMismatch(_) => "grid-mismatch",
            Error::NonInvertible { .. } => "non-invertible",
            Error::MaskedPhase { .. } => "masked-phase",
            Error::EmptyBand { .. } => "empty-band",
            Error::StateBudget { .. } => "state-budget",
            Error::EnumerationBudget { .. } => "enumeration-budget",
            Error::ConfigMismatch(_) => "config-mismatch",
            Error::AtSnrPoint { source, .. } => source.category(),
        }
    }
}
