use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {outcomes} outcomes but {forecasts} forecasts")]
    LengthMismatch { outcomes: usize, forecasts: usize },

    #[error("forecast {value} at step {step} is outside [0, 1]")]
    ForecastOutOfRange { step: usize, value: f64 },

    #[error("outcome {value} at step {step} is not binary")]
    NonBinaryOutcome { step: usize, value: u8 },

    #[error("run is empty")]
    EmptyRun,

    #[error("{name} = {value} is not a probability")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("urn counts must be positive (red = {red}, green = {green})")]
    EmptyUrn { red: u64, green: u64 },

    #[error("pattern is empty")]
    EmptyPattern,

    #[error("expected {expected} category rates, got {got}")]
    RateCount { expected: usize, got: usize },

    #[error("weighted average of deep rates is {average}, coarse value is {coarse}")]
    WeightMismatch { average: f64, coarse: f64 },

    #[error("forecaster state has seen {seen} outcomes but history has only {history}")]
    StateAhead { seen: u64, history: usize },

    #[error("covariate `{name}` missing or invalid at step {step}")]
    MissingCovariate { name: String, step: usize },

    #[error("information base does not match the run outcomes")]
    InformationMismatch,

    #[error("the oracle forecaster reads the current outcome; {0}")]
    Oracle(&'static str),

    #[error("forecasts are not H-based; information-based calibration is inapplicable")]
    NotHBased,

    #[error("rule `{0}` is history-dependent; subset calibration accepts static rules only")]
    NonStaticRule(String),

    #[error("rule `{0}` reads an outcome at or after the current step")]
    LookaheadRule(String),

    #[error("rule `{rule}` is malformed: {reason}")]
    InvalidRule { rule: String, reason: String },

    #[error("invalid bin specification: {0}")]
    InvalidBins(String),

    #[error("number of trials must be at least 1")]
    ZeroTrials,

    #[error("confidence level {0} is not in (0, 1)")]
    InvalidConfidence(f64),

    #[error("selected subsequence is empty")]
    EmptySubsequence,

    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("artifact has no seed; it cannot be replayed")]
    MissingSeed,

    #[error("artifact has no forecasts")]
    MissingForecasts,

    #[error("replay mismatch in {what} at step {step}")]
    ReplayMismatch { what: &'static str, step: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}
