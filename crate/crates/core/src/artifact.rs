//! Persisted runs: the process spec and seed that produced the outcomes,
//! plus the forecaster and its forecasts. A run can be regenerated from its
//! spec and seed and compared bit for bit with what was stored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecasters::{run_forecaster, ForecasterSpec};
use crate::info::{CovariateTable, InformationBase};
use crate::processes::{ProcessKind, ProcessSpec};
use crate::rule::SelectionRule;
use crate::run::{align_run, ForecastSeries, Outcome, OutcomeSequence, ValidatedRun};

/// Format version written into every artifact.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const RUN_CSV_HEADER: &str = "step,e,p,rule_memberships";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub version: String,
    pub process: ProcessKind,
    pub n: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    pub outcomes: Vec<Outcome>,
    #[serde(default, skip_serializing_if = "CovariateTable::is_empty")]
    pub covariates: CovariateTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forecaster: Option<ForecasterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forecasts: Option<Vec<f64>>,
}

/// Outcome of replaying an artifact. Outcome or forecast mismatches are
/// errors; a version difference is only flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub stored_version: String,
    pub version_match: bool,
    pub steps: usize,
    pub outcomes_identical: bool,
    pub forecasts_identical: Option<bool>,
}

/// One parsed row of a run CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RunRow {
    pub step: usize,
    pub e: Outcome,
    pub p: Option<f64>,
    pub rule_memberships: String,
}

impl RunArtifact {
    pub fn simulate(spec: &ProcessSpec) -> Result<Self> {
        spec.validate()?;
        let generated = spec.generate()?;
        Ok(Self {
            version: ARTIFACT_VERSION.to_string(),
            process: spec.kind.clone(),
            n: spec.n,
            seed: Some(spec.seed),
            outcomes: generated.outcomes.outcomes,
            covariates: generated.covariates,
            forecaster: None,
            forecasts: None,
        })
    }

    pub fn process_spec(&self) -> Result<ProcessSpec> {
        let seed = self.seed.ok_or(Error::MissingSeed)?;
        Ok(ProcessSpec::new(self.process.clone(), self.n, seed))
    }

    pub fn outcome_sequence(&self) -> Result<OutcomeSequence> {
        let label = ProcessSpec::new(self.process.clone(), self.n, 0).label();
        OutcomeSequence::new(self.outcomes.clone(), label, self.seed.unwrap_or(0))
    }

    pub fn information_base(&self) -> Result<InformationBase> {
        InformationBase::new(self.outcomes.clone(), self.covariates.clone())
    }

    /// Runs `spec` over the stored outcomes and covariates.
    pub fn with_forecaster(mut self, spec: ForecasterSpec) -> Result<Self> {
        spec.validate()?;
        let series = run_forecaster(&spec, &self.outcome_sequence()?, &self.information_base()?)?;
        self.forecaster = Some(spec);
        self.forecasts = Some(series.forecasts);
        Ok(self)
    }

    pub fn validated_run(&self) -> Result<ValidatedRun> {
        let forecasts = self.forecasts.clone().ok_or(Error::MissingForecasts)?;
        let (id, h_based) = match &self.forecaster {
            Some(spec) => (spec.to_string(), spec.h_based()),
            None => ("external".to_string(), false),
        };
        align_run(self.outcome_sequence()?, ForecastSeries::new(forecasts, id, h_based)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let artifact: Self = serde_json::from_str(text)?;
        if artifact.outcomes.len() != artifact.n {
            return Err(Error::InvalidParameter(format!(
                "artifact declares n = {} but stores {} outcomes",
                artifact.n,
                artifact.outcomes.len()
            )));
        }
        if let Some(f) = &artifact.forecasts {
            if f.len() != artifact.n {
                return Err(Error::LengthMismatch { outcomes: artifact.n, forecasts: f.len() });
            }
        }
        Ok(artifact)
    }

    /// Per-step table in the layout of [`run_csv`].
    pub fn to_csv(&self, rules: &[SelectionRule]) -> Result<String> {
        run_csv(&self.information_base()?, self.forecasts.as_deref(), rules)
    }

    /// Regenerates outcomes (and forecasts, if a forecaster is recorded) from
    /// the stored spec and seed and checks that they match exactly.
    pub fn replay(&self) -> Result<ReplayReport> {
        let fresh = Self::simulate(&self.process_spec()?)?;
        if let Some(step) = first_difference(&fresh.outcomes, &self.outcomes) {
            return Err(Error::ReplayMismatch { what: "outcomes", step });
        }
        if fresh.covariates != self.covariates {
            return Err(Error::ReplayMismatch { what: "covariates", step: 0 });
        }
        let forecasts_identical = match (&self.forecaster, &self.forecasts) {
            (Some(spec), Some(stored)) => {
                let fresh = fresh.with_forecaster(spec.clone())?;
                let recomputed = fresh.forecasts.expect("forecaster was just run");
                let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
                if let Some(step) = first_difference(&bits(&recomputed), &bits(stored)) {
                    return Err(Error::ReplayMismatch { what: "forecasts", step });
                }
                Some(true)
            }
            _ => None,
        };
        Ok(ReplayReport {
            stored_version: self.version.clone(),
            version_match: self.version == ARTIFACT_VERSION,
            steps: self.n,
            outcomes_identical: true,
            forecasts_identical,
        })
    }
}

/// Per-step table `step,e,p,rule_memberships`; memberships are the ids of
/// the rules selecting the step, joined by `;`. `p` is blank without
/// forecasts, and forecast-threshold rules then select nothing.
pub fn run_csv(info: &InformationBase, forecasts: Option<&[f64]>, rules: &[SelectionRule]) -> Result<String> {
    for rule in rules {
        rule.validate()?;
    }
    if let Some(f) = forecasts {
        if f.len() != info.len() {
            return Err(Error::LengthMismatch { outcomes: info.len(), forecasts: f.len() });
        }
    }
    let forecast = |k: usize| forecasts.map_or(f64::NAN, |f| f[k]);
    let masks: Vec<Vec<bool>> = rules
        .iter()
        .map(|r| info.records().enumerate().map(|(k, record)| r.contains(&record, forecast(k))).collect())
        .collect();
    let mut out = String::with_capacity(16 * info.len());
    out.push_str(RUN_CSV_HEADER);
    out.push('\n');
    for (k, &e) in info.outcomes().iter().enumerate() {
        let p = forecasts.map(|f| f[k].to_string()).unwrap_or_default();
        let members: Vec<&str> = rules
            .iter()
            .zip(&masks)
            .filter(|(_, mask)| mask[k])
            .map(|(rule, _)| rule.rule_id.as_str())
            .collect();
        out.push_str(&format!("{},{e},{p},{}\n", k + 1, members.join(";")));
    }
    Ok(out)
}

/// 1-based step of the first difference, counting a length difference as a
/// difference just past the shorter input.
fn first_difference<T: PartialEq>(a: &[T], b: &[T]) -> Option<usize> {
    match a.iter().zip(b).position(|(x, y)| x != y) {
        Some(i) => Some(i + 1),
        None if a.len() != b.len() => Some(a.len().min(b.len()) + 1),
        None => None,
    }
}

pub fn parse_run_csv(text: &str) -> Result<Vec<RunRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader.deserialize().map(|row| row.map_err(Error::from)).collect()
}
