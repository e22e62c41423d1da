//! Outcome and forecast sequences, and the validated pairing of the two.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A binary outcome, `0` or `1`.
pub type Outcome = u8;

/// Ordered binary outcomes `e_1..e_N` together with their provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSequence {
    pub outcomes: Vec<Outcome>,
    pub process_id: String,
    pub seed: u64,
}

impl OutcomeSequence {
    pub fn new(outcomes: Vec<Outcome>, process_id: impl Into<String>, seed: u64) -> Result<Self> {
        check_outcomes(&outcomes)?;
        Ok(Self { outcomes, process_id: process_id.into(), seed })
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn successes(&self) -> usize {
        self.outcomes.iter().filter(|&&e| e == 1).count()
    }

    /// Relative frequency of ones.
    pub fn frequency(&self) -> f64 {
        if self.outcomes.is_empty() {
            return 0.0;
        }
        self.successes() as f64 / self.outcomes.len() as f64
    }
}

/// Forecasts `p_1..p_N`, one per outcome step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSeries {
    pub forecasts: Vec<f64>,
    pub forecaster_id: String,
    /// Whether the forecaster used only information-record content.
    pub h_based: bool,
}

impl ForecastSeries {
    pub fn new(forecasts: Vec<f64>, forecaster_id: impl Into<String>, h_based: bool) -> Result<Self> {
        check_forecasts(&forecasts)?;
        Ok(Self { forecasts, forecaster_id: forecaster_id.into(), h_based })
    }

    pub fn len(&self) -> usize {
        self.forecasts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forecasts.is_empty()
    }
}

fn check_outcomes(outcomes: &[Outcome]) -> Result<()> {
    match outcomes.iter().position(|&e| e > 1) {
        Some(i) => Err(Error::NonBinaryOutcome { step: i + 1, value: outcomes[i] }),
        None => Ok(()),
    }
}

fn check_forecasts(forecasts: &[f64]) -> Result<()> {
    match forecasts.iter().position(|p| !(0.0..=1.0).contains(p)) {
        Some(i) => Err(Error::ForecastOutOfRange { step: i + 1, value: forecasts[i] }),
        None => Ok(()),
    }
}

/// A forecast run whose outcomes and forecasts have been checked against
/// each other. Only [`align_run`] constructs one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedRun {
    outcomes: OutcomeSequence,
    forecasts: ForecastSeries,
}

/// Pairs outcomes with forecasts, rejecting empty input, a length mismatch,
/// forecasts outside `[0, 1]` and non-binary outcomes.
pub fn align_run(outcomes: OutcomeSequence, forecasts: ForecastSeries) -> Result<ValidatedRun> {
    if outcomes.is_empty() || forecasts.is_empty() {
        return Err(Error::EmptyRun);
    }
    if outcomes.len() != forecasts.len() {
        return Err(Error::LengthMismatch { outcomes: outcomes.len(), forecasts: forecasts.len() });
    }
    check_outcomes(&outcomes.outcomes)?;
    check_forecasts(&forecasts.forecasts)?;
    Ok(ValidatedRun { outcomes, forecasts })
}

impl ValidatedRun {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes.outcomes
    }

    pub fn forecasts(&self) -> &[f64] {
        &self.forecasts.forecasts
    }

    pub fn outcome_sequence(&self) -> &OutcomeSequence {
        &self.outcomes
    }

    pub fn forecast_series(&self) -> &ForecastSeries {
        &self.forecasts
    }

    pub fn is_h_based(&self) -> bool {
        self.forecasts.h_based
    }

    /// `(step, e_k, p_k)` with 1-based steps.
    pub fn steps(&self) -> impl Iterator<Item = (usize, Outcome, f64)> + '_ {
        self.outcomes()
            .iter()
            .zip(self.forecasts())
            .enumerate()
            .map(|(i, (&e, &p))| (i + 1, e, p))
    }

    pub fn into_parts(self) -> (OutcomeSequence, ForecastSeries) {
        (self.outcomes, self.forecasts)
    }
}
