//! Composite experiments: asymptotic identification, varying the
//! information base, limiting frequencies of exchangeable sequences, and the
//! crossed student-by-examination array.
//!
//! Limits are checked at fixed finite `n` against stated tolerances.

mod crossed;
mod definetti;
mod identification;
mod info_base;

pub use crossed::{
    cell_frequencies, run_crossed_array, CrossedArray, CrossedRisks, OutcomeTensor, ResitModel, MIN_MARGIN_CELLS,
};
pub use definetti::{run_definetti, DeFinettiResult, ExchangeableSource, KS_SIGNIFICANCE, MIN_REPLICATES};
pub use identification::{run_identification, IdentificationResult};
pub use info_base::{deep_rate_forecaster, run_info_base, InfoBaseReport};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::forecasters::ForecasterSpec;
use crate::processes::{DeepRate, ProcessKind};
use crate::rng::derive_seed;

fn default_identification_threshold() -> f64 {
    0.01
}

fn default_info_threshold() -> f64 {
    0.01
}

fn default_subsequence_tolerance() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentSpec {
    Identification {
        process: ProcessKind,
        forecaster_a: ForecasterSpec,
        forecaster_b: ForecasterSpec,
        n: usize,
        seeds: Vec<u64>,
        /// Bound on the tail divergence.
        #[serde(default = "default_identification_threshold")]
        threshold: f64,
    },
    InfoBase {
        deep: Vec<DeepRate>,
        coarse: f64,
        /// Defaults to a constant forecast of `coarse`.
        #[serde(default)]
        coarse_forecaster: Option<ForecasterSpec>,
        /// Defaults to the forecaster that reads the deep rate.
        #[serde(default)]
        deep_forecaster: Option<ForecasterSpec>,
        n: usize,
        seed: u64,
        /// Defaults to `coarse`.
        #[serde(default)]
        target: Option<f64>,
        #[serde(default = "default_subsequence_tolerance")]
        tolerance: f64,
        /// Bound on `|mean - target|` for deep forecasts and outcomes.
        #[serde(default = "default_info_threshold")]
        threshold: f64,
    },
    Definetti {
        #[serde(flatten)]
        source: ExchangeableSource,
        n: usize,
        replicates: usize,
        seed: u64,
    },
    CrossedArray {
        array: CrossedArray,
        student: usize,
        exam: usize,
        #[serde(default)]
        cell_replicates: usize,
    },
}

/// Summary plus tabular artifacts of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub summary: serde_json::Value,
    pub table_csv: String,
    /// Plot-ready series, when the experiment has one.
    pub series_csv: Option<String>,
    pub passed: Option<bool>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
            }
        };
        match self {
            ExperimentSpec::Identification { forecaster_a, forecaster_b, n, seeds, threshold, .. } => {
                positive("threshold", *threshold)?;
                if seeds.is_empty() || *n == 0 {
                    return Err(Error::InvalidParameter("identification needs n >= 1 and at least one seed".into()));
                }
                forecaster_a.validate()?;
                forecaster_b.validate()
            }
            ExperimentSpec::InfoBase { tolerance, threshold, .. } => {
                positive("threshold", *threshold)?;
                if tolerance.is_nan() || *tolerance < 0.0 {
                    return Err(Error::InvalidParameter("tolerance must be non-negative".into()));
                }
                Ok(())
            }
            ExperimentSpec::Definetti { replicates, .. } if *replicates < MIN_REPLICATES => Err(
                Error::InvalidParameter(format!("need at least {MIN_REPLICATES} replicates, got {replicates}")),
            ),
            ExperimentSpec::Definetti { .. } => Ok(()),
            ExperimentSpec::CrossedArray { array, .. } => array.validate(),
        }
    }

    /// Replaces every seed in the spec with one derived from `seed`; the
    /// identification seeds become `derive_seed(seed, "identification", i)`.
    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            ExperimentSpec::Identification { seeds, .. } => {
                let count = seeds.len().max(1) as u64;
                *seeds = (0..count).map(|i| derive_seed(seed, "identification", i)).collect();
            }
            ExperimentSpec::InfoBase { seed: s, .. } | ExperimentSpec::Definetti { seed: s, .. } => *s = seed,
            ExperimentSpec::CrossedArray { array, .. } => array.seed = seed,
        }
        self
    }

    pub fn run(&self) -> Result<ExperimentOutput> {
        self.validate()?;
        match self {
            ExperimentSpec::Identification { process, forecaster_a, forecaster_b, n, seeds, threshold } => {
                let mut table = String::from("seed,tail_max,pass\n");
                let mut series = None;
                let mut all_pass = true;
                let mut tails = Vec::with_capacity(seeds.len());
                for &seed in seeds {
                    let result = run_identification(process, forecaster_a, forecaster_b, *n, seed)?;
                    let pass = result.tail_max < *threshold;
                    all_pass &= pass;
                    table.push_str(&format!("{seed},{},{pass}\n", result.tail_max));
                    tails.push(result.tail_max);
                    if series.is_none() {
                        series = Some(result.divergence_csv());
                    }
                }
                Ok(ExperimentOutput {
                    summary: json!({
                        "kind": "identification",
                        "forecaster_a": forecaster_a.to_string(),
                        "forecaster_b": forecaster_b.to_string(),
                        "n": n,
                        "tail_max": tails,
                        "threshold": threshold,
                        "pass": all_pass,
                    }),
                    table_csv: table,
                    series_csv: series,
                    passed: Some(all_pass),
                })
            }
            ExperimentSpec::InfoBase {
                deep,
                coarse,
                coarse_forecaster,
                deep_forecaster,
                n,
                seed,
                target,
                tolerance,
                threshold,
            } => {
                let coarse_spec = coarse_forecaster.clone().unwrap_or(ForecasterSpec::Constant { c: *coarse });
                let deep_spec = deep_forecaster.clone().unwrap_or_else(|| deep_rate_forecaster(deep));
                let target = target.unwrap_or(*coarse);
                let report = run_info_base(deep, *coarse, &coarse_spec, &deep_spec, *n, *seed, target, *tolerance)?;
                let pass = (report.mean_deep_forecast - target).abs() < *threshold
                    && (report.mean_outcome - target).abs() < *threshold;
                let table = format!(
                    "target,selected,mean_coarse_forecast,mean_deep_forecast,mean_outcome,min_deep_forecast,max_deep_forecast\n{},{},{},{},{},{},{}\n",
                    report.target,
                    report.selected,
                    report.mean_coarse_forecast,
                    report.mean_deep_forecast,
                    report.mean_outcome,
                    report.min_deep_forecast,
                    report.max_deep_forecast
                );
                Ok(ExperimentOutput {
                    summary: json!({ "kind": "info_base", "report": report, "threshold": threshold, "pass": pass }),
                    table_csv: table,
                    series_csv: None,
                    passed: Some(pass),
                })
            }
            ExperimentSpec::Definetti { source, n, replicates, seed } => {
                let result = run_definetti(source, *n, *replicates, *seed)?;
                let pass = result.ks_distance.map(|d| d < result.ks_critical);
                Ok(ExperimentOutput {
                    summary: json!({
                        "kind": "definetti",
                        "source": source,
                        "n": n,
                        "replicates": replicates,
                        "ks_distance": result.ks_distance,
                        "ks_critical": result.ks_critical,
                        "settled_fraction_0.05": result.settled_fraction(0.05),
                        "pass": pass,
                    }),
                    table_csv: result.csv(),
                    series_csv: None,
                    passed: pass,
                })
            }
            ExperimentSpec::CrossedArray { array, student, exam, cell_replicates } => {
                let risks = run_crossed_array(array, *student, *exam)?;
                let table = format!(
                    "estimate,value,observations\nrow_margin,{},{}\ncolumn_margin,{},{}\ncell_probability,{},\n",
                    risks.row_margin,
                    risks.row_observations,
                    risks.column_margin,
                    risks.column_observations,
                    risks.cell_probability
                );
                let series = if *cell_replicates > 0 {
                    let freqs = cell_frequencies(array, *student, *exam, *cell_replicates)?;
                    let mut csv = String::from("replicate,cell_frequency\n");
                    for (i, f) in freqs.iter().enumerate() {
                        csv.push_str(&format!("{i},{f}\n"));
                    }
                    Some(csv)
                } else {
                    None
                };
                Ok(ExperimentOutput {
                    summary: json!({ "kind": "crossed_array", "risks": risks }),
                    table_csv: table,
                    series_csv: series,
                    passed: None,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::Prior;

    #[test]
    fn identification_spec_from_json() {
        let spec: ExperimentSpec = serde_json::from_str(
            r#"{"kind":"identification","process":{"kind":"bernoulli","p":0.3},
                "forecaster_a":{"kind":"laplace"},
                "forecaster_b":{"kind":"bayes_mixture","prior":{"family":"beta","a":2,"b":2}},
                "n":2000,"seeds":[1,2]}"#,
        )
        .unwrap();
        let out = spec.run().unwrap();
        assert_eq!(out.passed, Some(true));
        assert_eq!(out.table_csv.lines().count(), 3);
        assert!(out.series_csv.unwrap().starts_with("step,d_k\n1,0\n"));
    }

    #[test]
    fn definetti_spec_from_json() {
        let spec: ExperimentSpec =
            serde_json::from_str(r#"{"kind":"definetti","source":"polya","r0":1,"b0":1,"n":500,"replicates":100,"seed":4}"#)
                .unwrap();
        assert_eq!(
            spec,
            ExperimentSpec::Definetti { source: ExchangeableSource::Polya { r0: 1, b0: 1 }, n: 500, replicates: 100, seed: 4 }
        );
        let out = spec.run().unwrap();
        assert!(out.summary["ks_distance"].is_number());
    }

    #[test]
    fn info_base_defaults() {
        let spec = ExperimentSpec::InfoBase {
            deep: vec![DeepRate { rate: 0.2, weight: 0.5 }, DeepRate { rate: 0.6, weight: 0.5 }],
            coarse: 0.4,
            coarse_forecaster: None,
            deep_forecaster: None,
            n: 50_000,
            seed: 2,
            target: None,
            tolerance: 1e-9,
            threshold: 0.02,
        };
        let out = spec.run().unwrap();
        assert_eq!(out.passed, Some(true));
    }

    #[test]
    fn validation_errors() {
        let spec = ExperimentSpec::Definetti {
            source: ExchangeableSource::Mixture { prior: Prior::Uniform01 },
            n: 10,
            replicates: 5,
            seed: 1,
        };
        assert!(spec.run().is_err());
        let spec = ExperimentSpec::Identification {
            process: ProcessKind::Bernoulli { p: 0.5 },
            forecaster_a: ForecasterSpec::Laplace,
            forecaster_b: ForecasterSpec::Laplace,
            n: 10,
            seeds: vec![1],
            threshold: 0.0,
        };
        assert!(spec.run().is_err());
    }
}
