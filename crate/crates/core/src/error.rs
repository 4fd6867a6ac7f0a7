use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode count {0} out of range, expected 1..=8")]
    ModeCount(usize),

    #[error("mode {mode} out of range for a {mode_count}-mode space")]
    ModeOutOfRange { mode: usize, mode_count: usize },

    #[error("bosonic creation on occupied mode {0} leaves the single-excitation regime")]
    UnsupportedOccupancy(usize),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("unitary must act on two distinct modes, got ({0}, {0})")]
    DegeneratePair(usize),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("source amplitudes not normalized: |s0|^2 + |s1|^2 = {0}")]
    NotNormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("angle {name} = {value} outside {range}")]
    AngleOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error(
        "parity superselection rule forbids measuring superpositions of vacuum and one \
         fermion; the vacuum/one-particle scheme cannot run for fermions"
    )]
    SuperselectionViolation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trial log is empty")]
    EmptyLog,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
