//! Sequential probability forecasters.
//!
//! A forecaster maps the information record of step `k` to a probability
//! `p_k`. Every kind except [`ForecasterSpec::Oracle`] is H-based: its forecast
//! is a function of the record alone. The explicit [`ForecasterState`] only
//! caches success counts over the history already seen, so that a sequential
//! run costs O(1) per step; it never carries information the record lacks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::info::{InformationBase, InformationRecord};
use crate::processes::{Prior, CATEGORY_COUNT, CATEGORY_COVARIATE};
use crate::run::{ForecastSeries, Outcome, OutcomeSequence};

/// Forecast issued on an empty history by frequency-based forecasters.
pub const NEUTRAL_FORECAST: f64 = 0.5;

fn default_category_covariate() -> String {
    CATEGORY_COVARIATE.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForecasterSpec {
    /// Always announces `c`.
    Constant { c: f64 },
    /// Observed frequency shrunk toward 0.5 by `prior_weight` pseudo-trials:
    /// `(s + w/2) / (t + w)`.
    Climatology { prior_weight: f64 },
    /// Rule of succession `(s + 1) / (t + 2)`.
    Laplace,
    /// Current urn proportion `(r0 + s) / (r0 + b0 + t)`.
    PolyaPredictive { r0: u64, b0: u64 },
    /// Announces the realized outcome. Not H-based.
    Oracle,
    /// Looks up the rate of the step's category (1-based) in `rates`.
    Category {
        rates: Vec<f64>,
        #[serde(default = "default_category_covariate")]
        covariate: String,
    },
    /// Posterior predictive under a conjugate prior.
    BayesMixture { prior: Prior },
}

/// Success count `s` and trial count `t` over the history seen so far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForecasterState {
    pub successes: u64,
    pub trials: u64,
}

impl ForecasterState {
    /// Absorbs the part of `history` not yet counted.
    fn catch_up(mut self, history: &[Outcome]) -> Result<Self> {
        let seen = self.trials as usize;
        if seen > history.len() {
            return Err(Error::StateAhead { seen: self.trials, history: history.len() });
        }
        for &e in &history[seen..] {
            self.successes += u64::from(e);
            self.trials += 1;
        }
        Ok(self)
    }
}

impl ForecasterSpec {
    pub fn category(rates: Vec<f64>) -> Self {
        ForecasterSpec::Category { rates, covariate: default_category_covariate() }
    }

    pub fn h_based(&self) -> bool {
        !matches!(self, ForecasterSpec::Oracle)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ForecasterSpec::Constant { c } => check_probability("c", *c),
            ForecasterSpec::Climatology { prior_weight } if !(*prior_weight >= 0.0 && prior_weight.is_finite()) => {
                Err(Error::InvalidParameter(format!("prior weight {prior_weight} must be non-negative")))
            }
            ForecasterSpec::PolyaPredictive { r0, b0 } => {
                if *r0 == 0 || *b0 == 0 {
                    Err(Error::EmptyUrn { red: *r0, green: *b0 })
                } else {
                    Ok(())
                }
            }
            ForecasterSpec::Category { rates, .. } => {
                if rates.is_empty() {
                    return Err(Error::RateCount { expected: CATEGORY_COUNT, got: 0 });
                }
                rates.iter().try_for_each(|&r| check_probability("category rate", r))
            }
            ForecasterSpec::BayesMixture { prior } => prior.validate(),
            _ => Ok(()),
        }
    }

    /// Forecast for the step described by `record`.
    ///
    /// `state` may lag behind the record's history (it is brought up to date)
    /// but must not have counted more outcomes than the history holds. The
    /// oracle cannot forecast from a record; use [`oracle_forecast`].
    pub fn forecast_next(
        &self,
        record: &InformationRecord<'_>,
        state: ForecasterState,
    ) -> Result<(f64, ForecasterState)> {
        let state = state.catch_up(record.outcome_history())?;
        let s = state.successes as f64;
        let t = state.trials as f64;
        let p = match self {
            ForecasterSpec::Constant { c } => *c,
            ForecasterSpec::Climatology { prior_weight } => {
                if state.trials == 0 {
                    NEUTRAL_FORECAST
                } else {
                    (s + prior_weight * NEUTRAL_FORECAST) / (t + prior_weight)
                }
            }
            ForecasterSpec::Laplace => (s + 1.0) / (t + 2.0),
            ForecasterSpec::PolyaPredictive { r0, b0 } => (*r0 as f64 + s) / ((r0 + b0) as f64 + t),
            ForecasterSpec::Oracle => return Err(Error::Oracle("it has no record-based forecast")),
            ForecasterSpec::Category { rates, covariate } => {
                let missing = || Error::MissingCovariate { name: covariate.clone(), step: record.step() };
                let index = record.covariate(covariate).and_then(|c| c.as_index()).ok_or_else(missing)?;
                *index.checked_sub(1).and_then(|i| rates.get(i)).ok_or_else(missing)?
            }
            ForecasterSpec::BayesMixture { prior } => match prior.beta_shapes() {
                Some((a, b)) => (a + s) / (a + b + t),
                None => prior.mean(),
            },
        };
        Ok((p, state))
    }
}

/// The crystal-ball forecast: probability 1 on the outcome that occurs.
pub fn oracle_forecast(outcome: Outcome) -> f64 {
    f64::from(outcome)
}

impl fmt::Display for ForecasterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForecasterSpec::Constant { c } => write!(f, "constant({c})"),
            ForecasterSpec::Climatology { prior_weight } => write!(f, "climatology({prior_weight})"),
            ForecasterSpec::Laplace => write!(f, "laplace"),
            ForecasterSpec::PolyaPredictive { r0, b0 } => write!(f, "polya_predictive({r0},{b0})"),
            ForecasterSpec::Oracle => write!(f, "oracle"),
            ForecasterSpec::Category { covariate, .. } => write!(f, "category({covariate})"),
            ForecasterSpec::BayesMixture { prior } => write!(f, "bayes_mixture({prior})"),
        }
    }
}

/// Runs `spec` step by step over `outcomes`. `info` must be the information
/// base of the same outcomes.
pub fn run_forecaster(spec: &ForecasterSpec, outcomes: &OutcomeSequence, info: &InformationBase) -> Result<ForecastSeries> {
    spec.validate()?;
    if info.outcomes() != outcomes.outcomes.as_slice() {
        return Err(Error::InformationMismatch);
    }
    let forecasts = match spec {
        ForecasterSpec::Oracle => outcomes.outcomes.iter().map(|&e| oracle_forecast(e)).collect(),
        _ => {
            let mut state = ForecasterState::default();
            let mut forecasts = Vec::with_capacity(outcomes.len());
            for record in info.records() {
                let (p, next) = spec.forecast_next(&record, state)?;
                forecasts.push(p);
                state = next;
            }
            forecasts
        }
    };
    ForecastSeries::new(forecasts, spec.to_string(), spec.h_based())
}
