//! Prequential calibration workbench.
//!
//! Generates binary outcome sequences from seeded probabilistic processes,
//! runs sequential probability forecasters against them, and evaluates the
//! forecasts with a hierarchy of calibration criteria: overall, probability,
//! subset and information-based.

pub mod artifact;
pub mod calibration;
pub mod error;
pub mod experiments;
pub mod forecasters;
pub mod info;
pub mod intervals;
pub mod processes;
pub mod report;
pub mod rng;
pub mod rule;
pub mod run;
pub mod stats;

pub use error::{Error, Result};
pub use info::{Covariate, CovariateTable, InformationBase, InformationRecord};
pub use report::{calibration_z_test, CalibrationReport, Cell, CellSums, Criterion, GlobalVerdict, Verdict, ZTest};
pub use rule::{Comparison, Predicate, RuleKind, SelectionRule};
pub use run::{align_run, ForecastSeries, Outcome, OutcomeSequence, ValidatedRun};
pub use calibration::{h_calibration, overall_calibration, probability_calibration, subset_calibration, BinSpec};
pub use forecasters::{run_forecaster, ForecasterSpec, ForecasterState};
pub use processes::{Prior, ProcessKind, ProcessSpec};
pub use experiments::{ExperimentOutput, ExperimentSpec};
pub use intervals::{single_trial_demo, wilson_interval, IntervalResult};
pub use artifact::{parse_run_csv, run_csv, ReplayReport, RunArtifact, ARTIFACT_VERSION};
