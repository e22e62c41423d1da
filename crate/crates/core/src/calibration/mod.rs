//! Calibration criteria, from weakest to strongest: overall, probability,
//! subset and information-based.
//!
//! Each criterion partitions or selects steps into cells and compares the
//! outcome frequency of a cell with its mean forecast. Verdicts come from the
//! z statistic `sum (e - p) / sqrt(sum p (1 - p))`, so the tolerance on the
//! discrepancy shrinks like `1 / sqrt(count)`.

mod adversary;

pub use adversary::{adversarial_outcomes, majority_threshold_rule, AdversarialRun, ADVERSARY_THRESHOLD};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::InformationBase;
use crate::report::{CalibrationReport, Cell, CellSums, Criterion, ZTest};
use crate::rule::SelectionRule;
use crate::run::ValidatedRun;

/// Forecast bins of width `width` for probability calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub width: f64,
    pub m_min: u64,
}

impl Default for BinSpec {
    fn default() -> Self {
        Self { width: 0.05, m_min: 30 }
    }
}

impl BinSpec {
    pub fn new(width: f64, m_min: u64) -> Result<Self> {
        let spec = Self { width, m_min };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width <= 1.0) {
            return Err(Error::InvalidBins(format!("width {} not in (0, 1]", self.width)));
        }
        let count = 1.0 / self.width;
        if (count - count.round()).abs() > 1e-9 {
            return Err(Error::InvalidBins(format!("1 / {} is not an integer", self.width)));
        }
        if self.m_min == 0 {
            return Err(Error::InvalidBins("minimum cell count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn bin_count(&self) -> usize {
        (1.0 / self.width).round() as usize
    }

    /// Bin index of `p`; `p = 1` falls in the last bin.
    pub fn index(&self, p: f64) -> usize {
        ((p * self.bin_count() as f64).floor() as usize).min(self.bin_count() - 1)
    }

    pub fn label(&self, index: usize) -> String {
        let n = self.bin_count();
        let lo = index as f64 / n as f64;
        let hi = (index + 1) as f64 / n as f64;
        let close = if index + 1 == n { ']' } else { ')' };
        format!("[{lo:.4},{hi:.4}{close}")
    }
}

fn sums_where<F: FnMut(usize) -> bool>(run: &ValidatedRun, mut keep: F) -> CellSums {
    let mut sums = CellSums::default();
    for (step, e, p) in run.steps() {
        if keep(step) {
            sums.push(e, p);
        }
    }
    sums
}

/// Compares the overall outcome frequency with the average forecast.
pub fn overall_calibration(run: &ValidatedRun, test: &ZTest) -> CalibrationReport {
    let cell = Cell::from_sums("all", sums_where(run, |_| true), test);
    CalibrationReport::new(Criterion::Overall, *test, vec![cell])
}

/// One cell per occupied forecast bin. Cells below `bins.m_min` are marked
/// insufficient.
pub fn probability_calibration(run: &ValidatedRun, bins: &BinSpec, significance: f64) -> Result<CalibrationReport> {
    bins.validate()?;
    let mut occupied: BTreeMap<usize, CellSums> = BTreeMap::new();
    for (_, e, p) in run.steps() {
        occupied.entry(bins.index(p)).or_default().push(e, p);
    }
    let test = ZTest { significance, m_min: bins.m_min };
    let cells = occupied.into_iter().map(|(i, sums)| Cell::from_sums(bins.label(i), sums, &test)).collect();
    Ok(CalibrationReport::new(Criterion::Probability, test, cells))
}

/// Calibration restricted to subsets fixed in advance. History-dependent
/// rules are rejected: use [`h_calibration`] for those.
pub fn subset_calibration(run: &ValidatedRun, rules: &[SelectionRule], test: &ZTest) -> Result<CalibrationReport> {
    for rule in rules {
        rule.validate()?;
        if !rule.is_static() {
            return Err(Error::NonStaticRule(rule.rule_id.clone()));
        }
    }
    let info = InformationBase::history_only(run.outcomes());
    let cells = rules
        .iter()
        .map(|rule| Cell::from_sums(&rule.rule_id, rule_sums(run, &info, rule), test))
        .collect();
    Ok(CalibrationReport::new(Criterion::Subset, *test, cells))
}

/// Calibration over subsets selected from the information available before
/// each step. Requires H-based forecasts and an information base over the
/// same outcomes.
pub fn h_calibration(
    run: &ValidatedRun,
    info: &InformationBase,
    rules: &[SelectionRule],
    test: &ZTest,
) -> Result<CalibrationReport> {
    if !run.is_h_based() {
        return Err(Error::NotHBased);
    }
    if info.outcomes() != run.outcomes() {
        return Err(Error::InformationMismatch);
    }
    rules.iter().try_for_each(SelectionRule::validate)?;
    let cells = rules
        .iter()
        .map(|rule| Cell::from_sums(&rule.rule_id, rule_sums(run, info, rule), test))
        .collect();
    Ok(CalibrationReport::new(Criterion::HBased, *test, cells))
}

pub(crate) fn rule_sums(run: &ValidatedRun, info: &InformationBase, rule: &SelectionRule) -> CellSums {
    let mut sums = CellSums::default();
    for (record, (&e, &p)) in info.records().zip(run.outcomes().iter().zip(run.forecasts())) {
        if rule.contains(&record, p) {
            sums.push(e, p);
        }
    }
    sums
}

/// Membership of every step in `rule`, as a boolean mask.
pub fn rule_mask(run: &ValidatedRun, info: &InformationBase, rule: &SelectionRule) -> Vec<bool> {
    info.records().zip(run.forecasts()).map(|(record, &p)| rule.contains(&record, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecasters::{run_forecaster, ForecasterSpec};
    use crate::info::Covariate;
    use crate::processes::{gen_bernoulli, gen_deterministic};
    use crate::report::{GlobalVerdict, Verdict};
    use crate::rule::Comparison;
    use crate::run::{align_run, ForecastSeries, OutcomeSequence};

    fn forecast_run(spec: &ForecasterSpec, outcomes: OutcomeSequence) -> ValidatedRun {
        let info = InformationBase::history_only(&outcomes.outcomes);
        let series = run_forecaster(spec, &outcomes, &info).unwrap();
        align_run(outcomes, series).unwrap()
    }

    fn alternating(n: usize) -> OutcomeSequence {
        gen_deterministic(&[1, 0], n).unwrap()
    }

    #[test]
    fn constant_half_is_overall_calibrated_on_alternating_weather() {
        let run = forecast_run(&ForecasterSpec::Constant { c: 0.5 }, alternating(1000));
        let report = overall_calibration(&run, &ZTest::default());
        assert_eq!(report.cells[0].delta, Some(0.0));
        assert_eq!(report.verdict, GlobalVerdict::Pass);
    }

    #[test]
    fn oracle_is_overall_calibrated_exactly() {
        let outcomes = gen_bernoulli(0.37, 777, 3).unwrap();
        let run = forecast_run(&ForecasterSpec::Oracle, outcomes);
        let report = overall_calibration(&run, &ZTest::default());
        assert_eq!(report.cells[0].delta, Some(0.0));
        assert_eq!(report.cells[0].z, None);
        assert_eq!(report.verdict, GlobalVerdict::Pass);
    }

    #[test]
    fn single_step_overall_discrepancy() {
        let run = align_run(
            OutcomeSequence::new(vec![1], "t", 0).unwrap(),
            ForecastSeries::new(vec![0.2], "t", true).unwrap(),
        )
        .unwrap();
        let report = overall_calibration(&run, &ZTest::default());
        assert!((report.cells[0].delta.unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(report.cells[0].verdict, Verdict::Insufficient);
    }

    #[test]
    fn probability_calibration_examples() {
        let run = forecast_run(&ForecasterSpec::Constant { c: 0.5 }, alternating(1000));
        let report = probability_calibration(&run, &BinSpec::default(), 0.01).unwrap();
        assert_eq!(report.cells.len(), 1);
        assert_eq!(report.cells[0].mean_p, Some(0.5));
        assert_eq!(report.cells[0].freq_e, Some(0.5));
        assert_eq!(report.cells[0].delta, Some(0.0));

        let run = forecast_run(&ForecasterSpec::Oracle, alternating(1000));
        let report = probability_calibration(&run, &BinSpec::default(), 0.01).unwrap();
        assert_eq!(report.cells.len(), 2);
        assert_eq!(report.cells[0].mean_p, Some(0.0));
        assert_eq!(report.cells[1].mean_p, Some(1.0));
        assert!(report.cells.iter().all(|c| c.delta == Some(0.0) && c.verdict == Verdict::Pass));
    }

    #[test]
    fn laplace_reliability_on_bernoulli() {
        let run = forecast_run(&ForecasterSpec::Laplace, gen_bernoulli(0.3, 100_000, 31).unwrap());
        let report = probability_calibration(&run, &BinSpec::default(), 0.01).unwrap();
        for cell in report.cells.iter().filter(|c| c.count >= 500) {
            assert!(cell.delta.unwrap() < 0.03, "{cell:?}");
        }
    }

    #[test]
    fn bin_validation_and_labels() {
        assert!(BinSpec::new(0.3, 30).is_err());
        assert!(BinSpec::new(0.0, 30).is_err());
        assert!(BinSpec::new(0.1, 0).is_err());
        let bins = BinSpec::new(0.25, 1).unwrap();
        assert_eq!(bins.index(0.0), 0);
        assert_eq!(bins.index(0.25), 1);
        assert_eq!(bins.index(1.0), 3);
        assert_eq!(bins.label(3), "[0.7500,1.0000]");
    }

    #[test]
    fn odd_steps_separate_uninformative_from_perfect() {
        let rules = [SelectionRule::odd_steps()];
        let run = forecast_run(&ForecasterSpec::Constant { c: 0.5 }, alternating(1000));
        let report = subset_calibration(&run, &rules, &ZTest::default()).unwrap();
        let cell = &report.cells[0];
        assert_eq!((cell.mean_p, cell.freq_e, cell.delta), (Some(0.5), Some(1.0), Some(0.5)));
        assert_eq!(cell.verdict, Verdict::Fail);

        let run = forecast_run(&ForecasterSpec::Oracle, alternating(1000));
        let report = subset_calibration(&run, &rules, &ZTest::default()).unwrap();
        assert_eq!(report.cells[0].delta, Some(0.0));
        assert_eq!(report.verdict, GlobalVerdict::Pass);
    }

    #[test]
    fn all_rule_matches_overall() {
        let run = forecast_run(&ForecasterSpec::Laplace, gen_bernoulli(0.6, 3000, 8).unwrap());
        let test = ZTest::default();
        let subset = subset_calibration(&run, &[SelectionRule::all()], &test).unwrap();
        let overall = overall_calibration(&run, &test);
        assert_eq!(subset.cells, overall.cells);
    }

    #[test]
    fn subset_rejects_history_rules() {
        let run = forecast_run(&ForecasterSpec::Laplace, alternating(10));
        let err = subset_calibration(&run, &[SelectionRule::previous_outcome(1)], &ZTest::default()).unwrap_err();
        assert!(matches!(err, Error::NonStaticRule(_)));
    }

    #[test]
    fn previous_rain_rule_exposes_constant_forecaster() {
        let outcomes = alternating(1000);
        let info = InformationBase::history_only(&outcomes.outcomes);
        let run = forecast_run(&ForecasterSpec::Constant { c: 0.5 }, outcomes);
        let report = h_calibration(&run, &info, &[SelectionRule::previous_outcome(1)], &ZTest::default()).unwrap();
        let cell = &report.cells[0];
        // steps 2, 4, ... follow a wet day and are all dry
        assert_eq!(cell.count, 500);
        assert_eq!((cell.mean_p, cell.freq_e, cell.delta), (Some(0.5), Some(0.0), Some(0.5)));
        assert_eq!(report.verdict, GlobalVerdict::Fail);
    }

    #[test]
    fn h_calibration_preconditions() {
        let outcomes = alternating(20);
        let info = InformationBase::history_only(&outcomes.outcomes);
        let oracle = forecast_run(&ForecasterSpec::Oracle, outcomes.clone());
        assert!(matches!(h_calibration(&oracle, &info, &[SelectionRule::all()], &ZTest::default()), Err(Error::NotHBased)));

        let run = forecast_run(&ForecasterSpec::Laplace, outcomes);
        let peek = SelectionRule::predicate("peek", crate::rule::Predicate::OutcomeLag { lag: 0, value: 1 });
        assert!(matches!(h_calibration(&run, &info, &[peek], &ZTest::default()), Err(Error::LookaheadRule(_))));

        let other = InformationBase::history_only(&[0; 20]);
        assert!(matches!(
            h_calibration(&run, &other, &[SelectionRule::all()], &ZTest::default()),
            Err(Error::InformationMismatch)
        ));
    }

    #[test]
    fn threshold_and_covariate_rules() {
        let outcomes = gen_bernoulli(0.5, 200, 2).unwrap();
        let table = crate::info::CovariateTable::new()
            .with_column("c", (0..200).map(|i| Covariate::Int(i % 3)).collect());
        let info = InformationBase::new(outcomes.outcomes.clone(), table).unwrap();
        let run = forecast_run(&ForecasterSpec::Laplace, outcomes);
        let rules = [
            SelectionRule::forecast("low", Comparison::Le, 0.5),
            SelectionRule::forecast("high", Comparison::Gt, 0.5),
            SelectionRule::covariate_equals("c", 0),
        ];
        let report = h_calibration(&run, &info, &rules, &ZTest::default()).unwrap();
        assert_eq!(report.cells[0].count + report.cells[1].count, 200);
        assert_eq!(report.cells[2].count, 67);
    }
}
