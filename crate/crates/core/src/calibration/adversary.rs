//! Outcome sequences that defeat a given H-based forecaster.
//!
//! Because the forecaster commits to `p_k` from the history alone, an
//! adversary that sees `p_k` can set `e_k = 1` when `p_k <= 0.5` and `e_k = 0`
//! otherwise. On the steps with `p_k <= 0.5` every outcome is 1 while the mean
//! forecast is at most 0.5; on the rest every outcome is 0 while the mean
//! forecast exceeds 0.5. Whichever of the two subsets holds at least half the
//! steps therefore has discrepancy at least 0.5, and the subset is itself
//! selected by an H-based rule (a forecast threshold).

use crate::calibration::rule_sums;
use crate::error::{Error, Result};
use crate::forecasters::{ForecasterSpec, ForecasterState};
use crate::info::{CovariateTable, InformationBase, InformationRecord};
use crate::report::{Cell, ZTest};
use crate::rule::{Comparison, SelectionRule};
use crate::run::{align_run, ForecastSeries, Outcome, OutcomeSequence, ValidatedRun};

/// Forecasts at or below this value are answered with a 1. Ties go to 1.
pub const ADVERSARY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct AdversarialRun {
    pub run: ValidatedRun,
    pub info: InformationBase,
    /// The threshold rule (or its complement) holding at least half the steps.
    pub majority_rule: SelectionRule,
    pub majority_cell: Cell,
}

impl AdversarialRun {
    pub fn outcomes(&self) -> &OutcomeSequence {
        self.run.outcome_sequence()
    }

    pub fn forecasts(&self) -> &ForecastSeries {
        self.run.forecast_series()
    }

    /// Discrepancy on the majority rule; at least 0.5 by construction.
    pub fn majority_delta(&self) -> f64 {
        self.majority_cell.delta.expect("majority cell is non-empty")
    }
}

/// The rule `p_k <= 0.5` if it selects at least half of `forecasts`,
/// otherwise its complement `p_k > 0.5`.
pub fn majority_threshold_rule(forecasts: &[f64]) -> SelectionRule {
    let low = forecasts.iter().filter(|&&p| p <= ADVERSARY_THRESHOLD).count();
    if 2 * low >= forecasts.len() {
        SelectionRule::forecast("p_le_0.5", Comparison::Le, ADVERSARY_THRESHOLD)
    } else {
        SelectionRule::forecast("p_gt_0.5", Comparison::Gt, ADVERSARY_THRESHOLD)
    }
}

/// Couples the adversary to `spec` for `n` steps. `covariates` supplies the
/// background attributes for forecasters that read them (pass an empty table
/// otherwise).
pub fn adversarial_outcomes(spec: &ForecasterSpec, n: usize, covariates: &CovariateTable) -> Result<AdversarialRun> {
    if !spec.h_based() {
        return Err(Error::Oracle("it cannot be defeated by an adversary"));
    }
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyRun);
    }
    let mut outcomes: Vec<Outcome> = Vec::with_capacity(n);
    let mut forecasts = Vec::with_capacity(n);
    let mut state = ForecasterState::default();
    for _ in 0..n {
        let record = InformationRecord::new(&outcomes, covariates);
        let (p, next) = spec.forecast_next(&record, state)?;
        state = next;
        forecasts.push(p);
        outcomes.push(Outcome::from(p <= ADVERSARY_THRESHOLD));
    }

    let info = InformationBase::new(outcomes.clone(), covariates.clone())?;
    let sequence = OutcomeSequence::new(outcomes, format!("adversary({spec})"), 0)?;
    let series = ForecastSeries::new(forecasts, spec.to_string(), true)?;
    let run = align_run(sequence, series)?;
    let majority_rule = majority_threshold_rule(run.forecasts());
    let sums = rule_sums(&run, &info, &majority_rule);
    let majority_cell = Cell::from_sums(&majority_rule.rule_id, sums, &ZTest::default());
    Ok(AdversarialRun { run, info, majority_rule, majority_cell })
}
