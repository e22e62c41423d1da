//! Background information available to a forecaster before each step.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::run::Outcome;

/// A named per-step attribute value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Covariate {
    Int(i64),
    Real(f64),
}

impl Covariate {
    pub fn as_index(self) -> Option<usize> {
        match self {
            Covariate::Int(i) if i >= 0 => Some(i as usize),
            _ => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Covariate::Int(i) => i as f64,
            Covariate::Real(x) => x,
        }
    }
}

/// Covariate columns, one value per step. Column `name` entry `k - 1` is the
/// attribute of individual `k`, fixed before `e_k` is drawn.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CovariateTable {
    columns: BTreeMap<String, Vec<Covariate>>,
}

impl CovariateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_column(mut self, name: impl Into<String>, values: Vec<Covariate>) -> Self {
        self.insert(name, values);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, values: Vec<Covariate>) {
        self.columns.insert(name.into(), values);
    }

    pub fn column(&self, name: &str) -> Option<&[Covariate]> {
        self.columns.get(name).map(Vec::as_slice)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    /// Value of `name` at 1-based `step`.
    pub fn get(&self, name: &str, step: usize) -> Option<Covariate> {
        step.checked_sub(1).and_then(|i| self.columns.get(name)?.get(i).copied())
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Length of the shortest column, or `None` when there are no columns.
    pub fn min_len(&self) -> Option<usize> {
        self.columns.values().map(Vec::len).min()
    }

    /// Keeps only the named columns.
    pub fn restrict(&self, keep: &[&str]) -> Self {
        let columns = self
            .columns
            .iter()
            .filter(|(k, _)| keep.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Self { columns }
    }
}

/// What is known at step `k`: the outcomes `e_1..e_{k-1}` and the covariates
/// of steps up to and including `k`.
///
/// The history is a borrowed prefix, so a record can never expose `e_k` or
/// anything later.
#[derive(Debug, Clone, Copy)]
pub struct InformationRecord<'a> {
    history: &'a [Outcome],
    covariates: &'a CovariateTable,
}

impl<'a> InformationRecord<'a> {
    pub fn new(history: &'a [Outcome], covariates: &'a CovariateTable) -> Self {
        Self { history, covariates }
    }

    /// 1-based step index.
    pub fn step(&self) -> usize {
        self.history.len() + 1
    }

    pub fn outcome_history(&self) -> &'a [Outcome] {
        self.history
    }

    pub fn covariate(&self, name: &str) -> Option<Covariate> {
        self.covariates.get(name, self.step())
    }

    pub fn covariates(&self) -> &'a CovariateTable {
        self.covariates
    }
}

/// Per-step information records `H_1..H_N` over a fixed outcome sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationBase {
    outcomes: Vec<Outcome>,
    covariates: CovariateTable,
}

impl InformationBase {
    /// Every covariate column must cover all `outcomes.len()` steps.
    pub fn new(outcomes: Vec<Outcome>, covariates: CovariateTable) -> Result<Self> {
        if let Some(short) = covariates.min_len().filter(|&m| m < outcomes.len()) {
            return Err(Error::InvalidParameter(format!(
                "covariate column has {short} values for {} steps",
                outcomes.len()
            )));
        }
        Ok(Self { outcomes, covariates })
    }

    /// Information base with outcome history only.
    pub fn history_only(outcomes: &[Outcome]) -> Self {
        Self { outcomes: outcomes.to_vec(), covariates: CovariateTable::new() }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn covariates(&self) -> &CovariateTable {
        &self.covariates
    }

    /// Record for 1-based `step`.
    pub fn record(&self, step: usize) -> Result<InformationRecord<'_>> {
        if step == 0 || step > self.outcomes.len() {
            return Err(Error::IndexOutOfRange { index: step, size: self.outcomes.len() });
        }
        Ok(InformationRecord::new(&self.outcomes[..step - 1], &self.covariates))
    }

    pub fn records(&self) -> impl Iterator<Item = InformationRecord<'_>> {
        (0..self.outcomes.len()).map(|i| InformationRecord::new(&self.outcomes[..i], &self.covariates))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_history_excludes_current_outcome() {
        let base = InformationBase::history_only(&[1, 0, 1, 1]);
        for (i, rec) in base.records().enumerate() {
            assert_eq!(rec.step(), i + 1);
            assert_eq!(rec.outcome_history().len(), i);
            assert_eq!(rec.outcome_history(), &base.outcomes()[..i]);
        }
        assert!(base.record(0).is_err());
        assert!(base.record(5).is_err());
    }

    #[test]
    fn covariates_are_indexed_by_step() {
        let table = CovariateTable::new().with_column("category", vec![Covariate::Int(3), Covariate::Int(7)]);
        let base = InformationBase::new(vec![0, 1], table).unwrap();
        assert_eq!(base.record(1).unwrap().covariate("category"), Some(Covariate::Int(3)));
        assert_eq!(base.record(2).unwrap().covariate("category"), Some(Covariate::Int(7)));
        assert_eq!(base.record(2).unwrap().covariate("missing"), None);
    }

    #[test]
    fn short_covariate_column_is_rejected() {
        let table = CovariateTable::new().with_column("c", vec![Covariate::Int(1)]);
        assert!(InformationBase::new(vec![0, 1], table).is_err());
    }

    #[test]
    fn covariate_json_is_untagged() {
        let table = CovariateTable::new().with_column("c", vec![Covariate::Int(2), Covariate::Real(0.25)]);
        let text = serde_json::to_string(&table).unwrap();
        assert_eq!(text, r#"{"c":[2,0.25]}"#);
        assert_eq!(serde_json::from_str::<CovariateTable>(&text).unwrap(), table);
    }
}
