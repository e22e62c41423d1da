//! Command-line front end for the prequential calibration workbench.
//!
//! Every command prints a one-line JSON summary on stdout and, when an output
//! directory is given, writes its artifacts there. Exit status is 0 on
//! success, 1 for invalid input and 2 for runtime failures.

pub mod config;
mod output;

use std::path::{Path, PathBuf};

use preq::artifact::RunArtifact;
use preq::calibration::{
    adversarial_outcomes, h_calibration, overall_calibration, probability_calibration, subset_calibration,
};
use preq::forecasters::ForecasterSpec;
use preq::intervals::{card_game_table, intervals_csv, round_to, single_trial_demo, wilson_interval, IntervalResult};
use preq::processes::{category_table, ProcessSpec, CATEGORY_COUNT, CATEGORY_COVARIATE};
use preq::report::{CalibrationReport, Criterion, ZTest};
use preq::rule::{default_h_family, SelectionRule};
use preq::{run_csv, CovariateTable, Error};
use serde_json::{json, Value};

pub use config::{Cli, CliCommand, Command, Format, RunConfig};
pub use output::Outputs;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot parse {what}: {source}")]
    Parse { what: String, source: serde_json::Error },

    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Write { .. } => 2,
            CliError::Core(
                Error::ReplayMismatch { .. } | Error::Io(_) | Error::EmptySubsequence | Error::StateAhead { .. },
            ) => 2,
            _ => 1,
        }
    }
}

pub(crate) fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

fn load_run(path: &Path) -> Result<RunArtifact, CliError> {
    let text = read_input(path)?;
    RunArtifact::from_json(&text).map_err(|e| match e {
        Error::Json(source) => CliError::Parse { what: format!("run artifact {}", path.display()), source },
        other => other.into(),
    })
}

/// Runs `config`, writes its artifacts, and returns the summary line.
pub fn execute(config: &RunConfig) -> Result<Value, CliError> {
    let mut outputs = Outputs::default();
    let mut summary = match &config.command {
        Command::Simulate { process, n, forecaster, rules } => {
            let spec = ProcessSpec::new(process.clone(), *n, config.seed.unwrap_or(0));
            let mut artifact = RunArtifact::simulate(&spec)?;
            if let Some(f) = forecaster {
                artifact = artifact.with_forecaster(f.clone())?;
            }
            let summary = run_summary(&artifact, &spec.label());
            emit_run(&mut outputs, &artifact, rules, config.format)?;
            summary
        }
        Command::Forecast { run, forecaster, rules } => {
            let artifact = load_run(run)?.with_forecaster(forecaster.clone())?;
            let label = artifact.outcome_sequence()?.process_id;
            let summary = run_summary(&artifact, &label);
            emit_run(&mut outputs, &artifact, rules, config.format)?;
            summary
        }
        Command::Evaluate { run, rules, criteria, bins, test } => {
            let artifact = load_run(run)?;
            let reports = evaluate(&artifact, rules, criteria.as_deref(), bins, test)?;
            emit_reports(&mut outputs, "report", &reports, config.format)?;
            json!({ "run": run, "reports": reports.iter().map(report_summary).collect::<Vec<_>>() })
        }
        Command::Adversary { forecaster, n } => adversary(&mut outputs, forecaster, *n, config)?,
        Command::Experiment { experiment } => {
            let spec = match config.seed {
                Some(seed) => experiment.clone().with_seed(seed),
                None => experiment.clone(),
            };
            let result = spec.run()?;
            outputs.add("summary.json", serde_json::to_string_pretty(&result.summary).expect("json value"));
            outputs.add("table.csv", result.table_csv);
            if let Some(series) = result.series_csv {
                outputs.add("series.csv", series);
            }
            result.summary
        }
        Command::Wilson { phat, n, conf, table } => {
            let rows = if *table {
                card_game_table()
            } else {
                let (Some(phat), Some(n)) = (phat, n) else {
                    return Err(CliError::Usage("wilson needs --phat and --n, or --table".into()));
                };
                vec![wilson_interval(*phat, *n, *conf)?]
            };
            match config.format {
                Format::Csv => outputs.add("intervals.csv", intervals_csv(&rows)),
                Format::Json => outputs.add("intervals.json", serde_json::to_string_pretty(&rows).expect("rows")),
            }
            let mut summary = json!({ "rows": rows.iter().map(interval_summary).collect::<Vec<_>>() });
            if let (false, Some(1)) = (*table, n) {
                summary["single_trial"] = serde_json::to_value(single_trial_demo(phat.unwrap_or_default())?)
                    .expect("report serializes");
            }
            summary
        }
        Command::Replay { run, rules } => {
            let artifact = load_run(run)?;
            let report = artifact.replay()?;
            let mut summary = serde_json::to_value(&report).expect("report serializes");
            if !report.version_match {
                summary["warning"] = json!(format!(
                    "artifact written by version {}, replayed with {}",
                    report.stored_version,
                    preq::ARTIFACT_VERSION
                ));
            }
            if artifact.forecasts.is_some() {
                let overall = overall_calibration(&artifact.validated_run()?, &ZTest::default());
                summary["overall"] = report_summary(&overall);
            }
            outputs.add("replay.json", serde_json::to_string_pretty(&summary).expect("json value"));
            outputs.add("run.csv", artifact.to_csv(rules)?);
            summary
        }
    };
    let files = match &config.out {
        Some(dir) => outputs.write_all(dir)?,
        None => Vec::new(),
    };
    let object = summary.as_object_mut().expect("summaries are objects");
    object.insert("command".into(), json!(config.command.name()));
    object.insert("status".into(), json!("ok"));
    object.insert("files".into(), json!(files));
    Ok(summary)
}

fn run_summary(artifact: &RunArtifact, label: &str) -> Value {
    let n = artifact.n as f64;
    let successes: usize = artifact.outcomes.iter().map(|&e| usize::from(e)).sum();
    let mut summary = json!({
        "process": label,
        "n": artifact.n,
        "seed": artifact.seed,
        "successes": successes,
        "frequency": successes as f64 / n,
    });
    if let (Some(f), Some(p)) = (&artifact.forecaster, &artifact.forecasts) {
        summary["forecaster"] = json!(f.to_string());
        summary["mean_forecast"] = json!(p.iter().sum::<f64>() / n);
    }
    summary
}

fn emit_run(outputs: &mut Outputs, artifact: &RunArtifact, rules: &[SelectionRule], format: Format) -> Result<(), CliError> {
    outputs.add("run.json", artifact.to_json()?);
    if format == Format::Csv {
        outputs.add("run.csv", artifact.to_csv(rules)?);
    }
    Ok(())
}

fn evaluate(
    artifact: &RunArtifact,
    rules: &[SelectionRule],
    criteria: Option<&[Criterion]>,
    bins: &preq::BinSpec,
    test: &ZTest,
) -> Result<Vec<CalibrationReport>, CliError> {
    let run = artifact.validated_run()?;
    let explicit = criteria.is_some();
    let criteria: Vec<Criterion> = match criteria {
        Some(c) => c.to_vec(),
        None => {
            let mut c = vec![Criterion::Overall, Criterion::Probability];
            if rules.iter().any(SelectionRule::is_static) {
                c.push(Criterion::Subset);
            }
            if !rules.is_empty() && run.is_h_based() {
                c.push(Criterion::HBased);
            }
            c
        }
    };
    let mut reports = Vec::with_capacity(criteria.len());
    for criterion in criteria {
        reports.push(match criterion {
            Criterion::Overall => overall_calibration(&run, test),
            Criterion::Probability => probability_calibration(&run, bins, test.significance)?,
            Criterion::Subset if explicit => subset_calibration(&run, rules, test)?,
            Criterion::Subset => {
                let fixed: Vec<SelectionRule> = rules.iter().filter(|r| r.is_static()).cloned().collect();
                subset_calibration(&run, &fixed, test)?
            }
            Criterion::HBased => h_calibration(&run, &artifact.information_base()?, rules, test)?,
        });
    }
    Ok(reports)
}

fn emit_reports(outputs: &mut Outputs, stem: &str, reports: &[CalibrationReport], format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => outputs.add(format!("{stem}.json"), serde_json::to_string_pretty(reports).expect("reports")),
        Format::Csv => {
            let mut csv = String::new();
            for (i, report) in reports.iter().enumerate() {
                let body = report.to_csv()?;
                let body = if i == 0 { body.as_str() } else { body.split_once('\n').map_or("", |(_, rest)| rest) };
                csv.push_str(body);
            }
            outputs.add(format!("{stem}.csv"), csv);
        }
    }
    Ok(())
}

fn report_summary(report: &CalibrationReport) -> Value {
    json!({
        "criterion": report.criterion,
        "verdict": report.verdict,
        "max_delta": report.max_delta(),
        "cells": report.cells.iter().map(|c| json!({
            "id": c.id,
            "count": c.count,
            "delta": c.delta,
            "z": c.z,
            "verdict": c.verdict,
        })).collect::<Vec<_>>(),
    })
}

fn interval_summary(row: &IntervalResult) -> Value {
    let (lo, hi) = row.percent_bounds();
    json!({
        "p_hat": row.p_hat,
        "n": row.n,
        "confidence": row.confidence,
        "lower": round_to(row.lower, 2),
        "upper": round_to(row.upper, 2),
        "lower_exact": row.lower,
        "upper_exact": row.upper,
        "percent": format!("{lo}-{hi}%"),
    })
}

fn adversary(outputs: &mut Outputs, forecaster: &ForecasterSpec, n: usize, config: &RunConfig) -> Result<Value, CliError> {
    let seed = config.seed.unwrap_or(0);
    // category forecasters need a category column; the seed drives its assignment
    let (covariates, category_rules) = match forecaster {
        ForecasterSpec::Category { covariate, .. } => {
            let column = category_table(seed, n).column(CATEGORY_COVARIATE).expect("column just built").to_vec();
            (CovariateTable::new().with_column(covariate.clone(), column), Some(covariate.as_str()))
        }
        _ => (CovariateTable::new(), None),
    };
    let adv = adversarial_outcomes(forecaster, n, &covariates)?;
    let mut rules = default_h_family(category_rules.map(|name| (name, 1..=CATEGORY_COUNT as i64)));
    if !rules.iter().any(|r| r.rule_id == adv.majority_rule.rule_id) {
        rules.push(adv.majority_rule.clone());
    }
    let report = h_calibration(&adv.run, &adv.info, &rules, &ZTest::default())?;
    outputs.add("run.csv", run_csv(&adv.info, Some(adv.run.forecasts()), std::slice::from_ref(&adv.majority_rule))?);
    emit_reports(outputs, "report", std::slice::from_ref(&report), config.format)?;
    Ok(json!({
        "forecaster": forecaster.to_string(),
        "n": n,
        "seed": seed,
        "majority_rule": adv.majority_rule.rule_id,
        "majority_count": adv.majority_cell.count,
        "majority_delta": adv.majority_delta(),
        "verdict": report.verdict,
    }))
}

/// Parses arguments, runs, prints the summary, and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let name = cli.command.as_ref().map_or("config", CliCommand::name);
    let result = cli.into_config().and_then(|config| execute(&config));
    match result {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            let code = e.exit_code();
            eprintln!("error: {e}");
            println!("{}", json!({ "command": name, "status": "error", "exit_code": code, "error": e.to_string() }));
            code
        }
    }
}
