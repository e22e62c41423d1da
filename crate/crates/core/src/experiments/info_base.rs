//! Forecasts on a coarse information base against forecasts that also see a
//! hidden deep covariate.
//!
//! On the steps where the coarse forecast is (close to) a target value, the
//! deep forecasts vary but average to the target, as do the outcomes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecasters::{run_forecaster, ForecasterSpec};
use crate::info::{Covariate, CovariateTable, InformationBase};
use crate::processes::{gen_two_level, DeepRate, DEEP_COVARIATE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoBaseReport {
    pub target: f64,
    pub tolerance: f64,
    /// Number of steps with `|p_k - target| <= tolerance`.
    pub selected: usize,
    pub mean_coarse_forecast: f64,
    pub mean_deep_forecast: f64,
    pub mean_outcome: f64,
    pub min_deep_forecast: f64,
    pub max_deep_forecast: f64,
}

/// The deep forecaster that knows the drawn component of every step.
pub fn deep_rate_forecaster(deep: &[DeepRate]) -> ForecasterSpec {
    ForecasterSpec::Category { rates: deep.iter().map(|d| d.rate).collect(), covariate: DEEP_COVARIATE.to_string() }
}

/// Generates a two-level stream, runs `coarse_forecaster` on the outcome
/// history alone and `deep_forecaster` with the deep covariate, and
/// summarises the subsequence where the coarse forecast is within
/// `tolerance` of `target`.
#[allow(clippy::too_many_arguments)]
pub fn run_info_base(
    deep: &[DeepRate],
    coarse: f64,
    coarse_forecaster: &ForecasterSpec,
    deep_forecaster: &ForecasterSpec,
    n: usize,
    seed: u64,
    target: f64,
    tolerance: f64,
) -> Result<InfoBaseReport> {
    if !coarse_forecaster.h_based() || !deep_forecaster.h_based() {
        return Err(Error::Oracle("information-base comparison needs record-based forecasters"));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tolerance} must be non-negative")));
    }
    let (outcomes, picks) = gen_two_level(deep, coarse, n, seed)?;
    let coarse_info = InformationBase::history_only(&outcomes.outcomes);
    let column = picks.iter().map(|&i| Covariate::Int(i as i64 + 1)).collect();
    let deep_info =
        InformationBase::new(outcomes.outcomes.clone(), CovariateTable::new().with_column(DEEP_COVARIATE, column))?;

    let p = run_forecaster(coarse_forecaster, &outcomes, &coarse_info)?.forecasts;
    let q = run_forecaster(deep_forecaster, &outcomes, &deep_info)?.forecasts;

    let mut selected = 0usize;
    let (mut sum_p, mut sum_q, mut sum_e) = (0.0, 0.0, 0.0);
    let (mut min_q, mut max_q) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..n {
        if (p[k] - target).abs() <= tolerance {
            selected += 1;
            sum_p += p[k];
            sum_q += q[k];
            sum_e += f64::from(outcomes.outcomes[k]);
            min_q = min_q.min(q[k]);
            max_q = max_q.max(q[k]);
        }
    }
    if selected == 0 {
        return Err(Error::EmptySubsequence);
    }
    let m = selected as f64;
    Ok(InfoBaseReport {
        target,
        tolerance,
        selected,
        mean_coarse_forecast: sum_p / m,
        mean_deep_forecast: sum_q / m,
        mean_outcome: sum_e / m,
        min_deep_forecast: min_q,
        max_deep_forecast: max_q,
    })
}
