//! Selection rules choosing test subsets of steps.
//!
//! A rule is evaluated at step `k` against the [`InformationRecord`] of that
//! step and, for forecast-threshold predicates, the forecast `p_k`. Nothing in
//! the grammar can name `e_k` or a later outcome: outcome tests address the
//! history by a lag of at least one, and [`SelectionRule::validate`] rejects a
//! zero lag.
//!
//! The predicate grammar is a decidable stand-in for "any subset computable
//! from the background information". It covers step-modulo tests, windows
//! over the last `w <= 8` outcomes, covariate equality and forecast
//! thresholds, closed under and/or/not.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{Covariate, InformationRecord};

/// Longest outcome window a predicate may inspect.
pub const MAX_WINDOW: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRule {
    pub rule_id: String,
    #[serde(flatten)]
    pub kind: RuleKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RuleKind {
    All,
    /// Steps with `k mod m == offset mod m`.
    EveryMth { m: usize, offset: usize },
    IndexSet { steps: BTreeSet<usize> },
    HistoryPredicate { predicate: Predicate },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparison::Lt => lhs < rhs,
            Comparison::Le => lhs <= rhs,
            Comparison::Gt => lhs > rhs,
            Comparison::Ge => lhs >= rhs,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Predicate {
    StepModulo { modulus: usize, remainder: usize },
    /// The last `pattern.len()` outcomes equal `pattern` (oldest first).
    /// False while the history is shorter than the pattern.
    LastOutcomes { pattern: Vec<u8> },
    /// `e_{k - lag} == value`; requires `lag >= 1`.
    OutcomeLag { lag: usize, value: u8 },
    CovariateEquals { name: String, value: Covariate },
    Forecast { cmp: Comparison, threshold: f64 },
    And { all: Vec<Predicate> },
    Or { any: Vec<Predicate> },
    Not { inner: Box<Predicate> },
}

impl Predicate {
    pub fn matches(&self, record: &InformationRecord<'_>, forecast: f64) -> bool {
        match self {
            Predicate::StepModulo { modulus, remainder } => record.step() % modulus == remainder % modulus,
            Predicate::LastOutcomes { pattern } => record.outcome_history().ends_with(pattern),
            Predicate::OutcomeLag { lag, value } => {
                let history = record.outcome_history();
                history.len() >= *lag && history[history.len() - lag] == *value
            }
            Predicate::CovariateEquals { name, value } => record.covariate(name) == Some(*value),
            Predicate::Forecast { cmp, threshold } => cmp.holds(forecast, *threshold),
            Predicate::And { all } => all.iter().all(|p| p.matches(record, forecast)),
            Predicate::Or { any } => any.iter().any(|p| p.matches(record, forecast)),
            Predicate::Not { inner } => !inner.matches(record, forecast),
        }
    }

    pub fn reads_forecast(&self) -> bool {
        match self {
            Predicate::Forecast { .. } => true,
            Predicate::And { all: ps } | Predicate::Or { any: ps } => ps.iter().any(Predicate::reads_forecast),
            Predicate::Not { inner } => inner.reads_forecast(),
            _ => false,
        }
    }

    fn check(&self, rule: &str) -> Result<()> {
        let invalid = |reason: String| Err(Error::InvalidRule { rule: rule.to_string(), reason });
        match self {
            Predicate::StepModulo { modulus: 0, .. } => invalid("modulus must be positive".into()),
            Predicate::LastOutcomes { pattern } if pattern.is_empty() || pattern.len() > MAX_WINDOW => {
                invalid(format!("window length {} not in 1..={MAX_WINDOW}", pattern.len()))
            }
            Predicate::LastOutcomes { pattern } if pattern.iter().any(|&e| e > 1) => {
                invalid("pattern is not binary".into())
            }
            Predicate::OutcomeLag { lag: 0, .. } => Err(Error::LookaheadRule(rule.to_string())),
            Predicate::OutcomeLag { lag, .. } if *lag > MAX_WINDOW => {
                invalid(format!("lag {lag} exceeds {MAX_WINDOW}"))
            }
            Predicate::OutcomeLag { value, .. } if *value > 1 => invalid("outcome value is not binary".into()),
            Predicate::Forecast { threshold, .. } if !threshold.is_finite() => {
                invalid("threshold is not finite".into())
            }
            Predicate::And { all: ps } | Predicate::Or { any: ps } => ps.iter().try_for_each(|p| p.check(rule)),
            Predicate::Not { inner } => inner.check(rule),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, ps: &[Predicate], sep: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")
        };
        match self {
            Predicate::StepModulo { modulus, remainder } => write!(f, "k%{modulus}={remainder}"),
            Predicate::LastOutcomes { pattern } => {
                write!(f, "last=")?;
                pattern.iter().try_for_each(|e| write!(f, "{e}"))
            }
            Predicate::OutcomeLag { lag, value } => write!(f, "e[k-{lag}]={value}"),
            Predicate::CovariateEquals { name, value } => write!(f, "{name}={}", value.as_f64()),
            Predicate::Forecast { cmp, threshold } => write!(f, "p{}{threshold}", cmp.symbol()),
            Predicate::And { all } => join(f, all, "and"),
            Predicate::Or { any } => join(f, any, "or"),
            Predicate::Not { inner } => write!(f, "not {inner}"),
        }
    }
}

impl SelectionRule {
    pub fn new(rule_id: impl Into<String>, kind: RuleKind) -> Self {
        Self { rule_id: rule_id.into(), kind }
    }

    pub fn all() -> Self {
        Self::new("all", RuleKind::All)
    }

    pub fn every_mth(m: usize, offset: usize) -> Self {
        Self::new(format!("every_{m}_offset_{offset}"), RuleKind::EveryMth { m, offset })
    }

    pub fn odd_steps() -> Self {
        Self::new("odd_steps", RuleKind::EveryMth { m: 2, offset: 1 })
    }

    pub fn index_set(rule_id: impl Into<String>, steps: impl IntoIterator<Item = usize>) -> Self {
        Self::new(rule_id, RuleKind::IndexSet { steps: steps.into_iter().collect() })
    }

    pub fn predicate(rule_id: impl Into<String>, predicate: Predicate) -> Self {
        Self::new(rule_id, RuleKind::HistoryPredicate { predicate })
    }

    pub fn previous_outcome(value: u8) -> Self {
        Self::predicate(format!("previous_{value}"), Predicate::OutcomeLag { lag: 1, value })
    }

    pub fn covariate_equals(name: &str, value: i64) -> Self {
        Self::predicate(
            format!("{name}_{value}"),
            Predicate::CovariateEquals { name: name.to_string(), value: Covariate::Int(value) },
        )
    }

    pub fn forecast(rule_id: impl Into<String>, cmp: Comparison, threshold: f64) -> Self {
        Self::predicate(rule_id, Predicate::Forecast { cmp, threshold })
    }

    /// Static rules are chosen without reference to outcomes or information.
    pub fn is_static(&self) -> bool {
        !matches!(self.kind, RuleKind::HistoryPredicate { .. })
    }

    pub fn reads_forecast(&self) -> bool {
        match &self.kind {
            RuleKind::HistoryPredicate { predicate } => predicate.reads_forecast(),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            RuleKind::EveryMth { m: 0, .. } => Err(Error::InvalidRule {
                rule: self.rule_id.clone(),
                reason: "period must be positive".into(),
            }),
            RuleKind::IndexSet { steps } if steps.contains(&0) => Err(Error::InvalidRule {
                rule: self.rule_id.clone(),
                reason: "steps are 1-based".into(),
            }),
            RuleKind::HistoryPredicate { predicate } => predicate.check(&self.rule_id),
            _ => Ok(()),
        }
    }

    /// Membership of the step described by `record`, given its forecast.
    pub fn contains(&self, record: &InformationRecord<'_>, forecast: f64) -> bool {
        let step = record.step();
        match &self.kind {
            RuleKind::All => true,
            RuleKind::EveryMth { m, offset } => step % m == offset % m,
            RuleKind::IndexSet { steps } => steps.contains(&step),
            RuleKind::HistoryPredicate { predicate } => predicate.matches(record, forecast),
        }
    }
}

/// The default family for information-based checks: every step, outcome
/// windows of length 1 to 3, step residues for periods 2 to 7, the two halves
/// of the 0.5 forecast threshold, and one cell per category value when a
/// category covariate is given.
pub fn default_h_family(category: Option<(&str, std::ops::RangeInclusive<i64>)>) -> Vec<SelectionRule> {
    let mut rules = vec![SelectionRule::all()];
    for w in 1..=3u32 {
        for bits in 0..(1u32 << w) {
            let pattern: Vec<u8> = (0..w).rev().map(|j| ((bits >> j) & 1) as u8).collect();
            let id: String = pattern.iter().map(|e| char::from(b'0' + e)).collect();
            rules.push(SelectionRule::predicate(format!("last_{id}"), Predicate::LastOutcomes { pattern }));
        }
    }
    for modulus in 2..=7 {
        for remainder in 0..modulus {
            rules.push(SelectionRule::predicate(
                format!("mod_{modulus}_{remainder}"),
                Predicate::StepModulo { modulus, remainder },
            ));
        }
    }
    rules.push(SelectionRule::forecast("p_le_0.5", Comparison::Le, 0.5));
    rules.push(SelectionRule::forecast("p_gt_0.5", Comparison::Gt, 0.5));
    if let Some((name, values)) = category {
        rules.extend(values.map(|v| SelectionRule::covariate_equals(name, v)));
    }
    rules
}
