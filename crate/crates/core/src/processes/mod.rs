//! Seeded outcome generators.
//!
//! Every generator is a pure function of its parameters and seed. Outcome
//! draws use [`Stream::Outcomes`]; auxiliary randomness (the mixing draw of
//! `p`, category assignment, deep-rate selection) uses its own stream so the
//! outcome stream is shared across processes with the same seed.

mod polya;

pub use polya::{gen_polya, polya_sequence_ln_prob, polya_sequence_prob, polya_total_mass, UrnState};

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::info::{Covariate, CovariateTable};
use crate::rng::{stream, Stream, StreamRng};
use crate::run::{Outcome, OutcomeSequence};

/// Number of categories in the risk-category scenario.
pub const CATEGORY_COUNT: usize = 9;
/// Covariate column written by [`gen_category`].
pub const CATEGORY_COVARIATE: &str = "category";
/// Covariate column written by [`gen_two_level`], holding the 1-based index of
/// the deep rate drawn at each step.
pub const DEEP_COVARIATE: &str = "deep_index";

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Prior over a Bernoulli success probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Prior {
    Uniform01,
    Point { p: f64 },
    Beta { a: f64, b: f64 },
}

impl Prior {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Prior::Uniform01 => Ok(()),
            Prior::Point { p } => check_probability("p", p),
            Prior::Beta { a, b } if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() => Ok(()),
            Prior::Beta { a, b } => Err(Error::InvalidParameter(format!("beta({a}, {b}) needs positive finite shapes"))),
        }
    }

    /// Beta shape parameters, or `None` for a point mass.
    pub fn beta_shapes(&self) -> Option<(f64, f64)> {
        match *self {
            Prior::Uniform01 => Some((1.0, 1.0)),
            Prior::Beta { a, b } => Some((a, b)),
            Prior::Point { .. } => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Prior::Point { p } => p,
            _ => {
                let (a, b) = self.beta_shapes().expect("beta family");
                a / (a + b)
            }
        }
    }

    fn sample(&self, rng: &mut StreamRng) -> Result<f64> {
        Ok(match *self {
            Prior::Uniform01 => rng.random::<f64>(),
            Prior::Point { p } => p,
            Prior::Beta { a, b } => Beta::new(a, b)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?
                .sample(rng),
        })
    }
}

impl std::fmt::Display for Prior {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Prior::Uniform01 => write!(f, "uniform01"),
            Prior::Point { p } => write!(f, "point({p})"),
            Prior::Beta { a, b } => write!(f, "beta({a},{b})"),
        }
    }
}

/// One component of a two-level process: a deep rate and its selection weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeepRate {
    pub rate: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessKind {
    Bernoulli { p: f64 },
    Mixture { prior: Prior },
    Polya { r0: u64, b0: u64 },
    Deterministic { pattern: Vec<Outcome> },
    /// Two-state Markov chain: `P(e_1 = 1) = initial`,
    /// `P(e_k = 1 | e_{k-1} = j)` is `after_zero` or `after_one`.
    Markov { initial: f64, after_zero: f64, after_one: f64 },
    Category { rates: Vec<f64>, assignment_seed: u64 },
    TwoLevel { deep: Vec<DeepRate>, coarse: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    #[serde(flatten)]
    pub kind: ProcessKind,
    pub n: usize,
    pub seed: u64,
}

/// Process-specific by-products of generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detail", rename_all = "snake_case")]
pub enum ProcessDetail {
    None,
    Urn { trajectory: Vec<UrnState> },
    DrawnP { p: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub outcomes: OutcomeSequence,
    pub covariates: CovariateTable,
    pub detail: ProcessDetail,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, n: usize, seed: u64) -> Self {
        Self { kind, n, seed }
    }

    pub fn validate(&self) -> Result<()> {
        check_length(self.n)?;
        match &self.kind {
            ProcessKind::Bernoulli { p } => check_probability("p", *p),
            ProcessKind::Mixture { prior } => prior.validate(),
            ProcessKind::Polya { r0, b0 } => UrnState::new(*r0, *b0).map(|_| ()),
            ProcessKind::Deterministic { pattern } => check_pattern(pattern),
            ProcessKind::Markov { initial, after_zero, after_one } => {
                check_probability("initial", *initial)?;
                check_probability("after_zero", *after_zero)?;
                check_probability("after_one", *after_one)
            }
            ProcessKind::Category { rates, .. } => check_category_rates(rates),
            ProcessKind::TwoLevel { deep, coarse } => check_two_level(deep, *coarse).map(|_| ()),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ProcessKind::Bernoulli { p } => format!("bernoulli({p})"),
            ProcessKind::Mixture { prior } => format!("mixture({prior})"),
            ProcessKind::Polya { r0, b0 } => format!("polya({r0},{b0})"),
            ProcessKind::Deterministic { pattern } => {
                let bits: String = pattern.iter().map(|e| char::from(b'0' + e)).collect();
                format!("deterministic({bits})")
            }
            ProcessKind::Markov { initial, after_zero, after_one } => {
                format!("markov({initial},{after_zero},{after_one})")
            }
            ProcessKind::Category { .. } => "category".to_string(),
            ProcessKind::TwoLevel { coarse, .. } => format!("two_level({coarse})"),
        }
    }

    pub fn generate(&self) -> Result<Generated> {
        let (n, seed) = (self.n, self.seed);
        let plain = |outcomes| Generated { outcomes, covariates: CovariateTable::new(), detail: ProcessDetail::None };
        Ok(match &self.kind {
            ProcessKind::Bernoulli { p } => plain(gen_bernoulli(*p, n, seed)?),
            ProcessKind::Mixture { prior } => {
                let (outcomes, p) = gen_mixture(prior, n, seed)?;
                Generated { outcomes, covariates: CovariateTable::new(), detail: ProcessDetail::DrawnP { p } }
            }
            ProcessKind::Polya { r0, b0 } => {
                let (outcomes, trajectory) = gen_polya(*r0, *b0, n, seed)?;
                Generated { outcomes, covariates: CovariateTable::new(), detail: ProcessDetail::Urn { trajectory } }
            }
            ProcessKind::Deterministic { pattern } => {
                let mut outcomes = gen_deterministic(pattern, n)?;
                outcomes.seed = seed;
                plain(outcomes)
            }
            ProcessKind::Markov { initial, after_zero, after_one } => {
                plain(gen_markov(*initial, *after_zero, *after_one, n, seed)?)
            }
            ProcessKind::Category { rates, assignment_seed } => {
                let (outcomes, categories) = gen_category(rates, *assignment_seed, n, seed)?;
                let column = categories.into_iter().map(|c| Covariate::Int(i64::from(c))).collect();
                Generated {
                    outcomes,
                    covariates: CovariateTable::new().with_column(CATEGORY_COVARIATE, column),
                    detail: ProcessDetail::None,
                }
            }
            ProcessKind::TwoLevel { deep, coarse } => {
                let (outcomes, picks) = gen_two_level(deep, *coarse, n, seed)?;
                let column = picks.into_iter().map(|i| Covariate::Int(i as i64 + 1)).collect();
                Generated {
                    outcomes,
                    covariates: CovariateTable::new().with_column(DEEP_COVARIATE, column),
                    detail: ProcessDetail::None,
                }
            }
        })
    }
}

fn check_length(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("length must be at least 1".into()));
    }
    Ok(())
}

fn check_pattern(pattern: &[Outcome]) -> Result<()> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    match pattern.iter().position(|&e| e > 1) {
        Some(i) => Err(Error::NonBinaryOutcome { step: i + 1, value: pattern[i] }),
        None => Ok(()),
    }
}

fn check_category_rates(rates: &[f64]) -> Result<()> {
    if rates.len() != CATEGORY_COUNT {
        return Err(Error::RateCount { expected: CATEGORY_COUNT, got: rates.len() });
    }
    rates.iter().try_for_each(|&r| check_probability("category rate", r))
}

/// Returns the cumulative selection weights, normalised to end at 1.
fn check_two_level(deep: &[DeepRate], coarse: f64) -> Result<Vec<f64>> {
    check_probability("coarse", coarse)?;
    if deep.is_empty() {
        return Err(Error::InvalidParameter("two-level process needs at least one deep rate".into()));
    }
    for d in deep {
        check_probability("deep rate", d.rate)?;
        if !(d.weight > 0.0 && d.weight.is_finite()) {
            return Err(Error::InvalidParameter(format!("deep weight {} must be positive", d.weight)));
        }
    }
    let total: f64 = deep.iter().map(|d| d.weight).sum();
    let average = deep.iter().map(|d| d.rate * d.weight).sum::<f64>() / total;
    if (average - coarse).abs() > WEIGHT_TOLERANCE {
        return Err(Error::WeightMismatch { average, coarse });
    }
    let mut acc = 0.0;
    Ok(deep
        .iter()
        .map(|d| {
            acc += d.weight / total;
            acc
        })
        .collect())
}

fn bernoulli_draw(rng: &mut StreamRng, p: f64) -> Outcome {
    Outcome::from(rng.random::<f64>() < p)
}

/// Independent draws with common success probability `p`.
pub fn gen_bernoulli(p: f64, n: usize, seed: u64) -> Result<OutcomeSequence> {
    check_probability("p", p)?;
    check_length(n)?;
    let mut rng = stream(seed, Stream::Outcomes);
    let outcomes = (0..n).map(|_| bernoulli_draw(&mut rng, p)).collect();
    Ok(OutcomeSequence { outcomes, process_id: format!("bernoulli({p})"), seed })
}

/// Draws `p` once from `prior`, then `n` independent Bernoulli(`p`) outcomes.
pub fn gen_mixture(prior: &Prior, n: usize, seed: u64) -> Result<(OutcomeSequence, f64)> {
    prior.validate()?;
    check_length(n)?;
    let p = prior.sample(&mut stream(seed, Stream::Prior))?;
    let mut rng = stream(seed, Stream::Outcomes);
    let outcomes = (0..n).map(|_| bernoulli_draw(&mut rng, p)).collect();
    Ok((OutcomeSequence { outcomes, process_id: format!("mixture({prior})"), seed }, p))
}

/// Repeats `pattern` cyclically to length `n`.
pub fn gen_deterministic(pattern: &[Outcome], n: usize) -> Result<OutcomeSequence> {
    check_pattern(pattern)?;
    check_length(n)?;
    let outcomes = pattern.iter().copied().cycle().take(n).collect();
    let bits: String = pattern.iter().map(|e| char::from(b'0' + e)).collect();
    Ok(OutcomeSequence { outcomes, process_id: format!("deterministic({bits})"), seed: 0 })
}

pub fn gen_markov(initial: f64, after_zero: f64, after_one: f64, n: usize, seed: u64) -> Result<OutcomeSequence> {
    check_probability("initial", initial)?;
    check_probability("after_zero", after_zero)?;
    check_probability("after_one", after_one)?;
    check_length(n)?;
    let mut rng = stream(seed, Stream::Outcomes);
    let mut outcomes = Vec::with_capacity(n);
    let mut p = initial;
    for _ in 0..n {
        let e = bernoulli_draw(&mut rng, p);
        p = if e == 1 { after_one } else { after_zero };
        outcomes.push(e);
    }
    Ok(OutcomeSequence { outcomes, process_id: format!("markov({initial},{after_zero},{after_one})"), seed })
}

/// Categories in `1..=9` for `n` steps, drawn uniformly from the assignment
/// stream of `assignment_seed`.
pub fn category_assignment(assignment_seed: u64, n: usize) -> Vec<u8> {
    let mut assign = stream(assignment_seed, Stream::Assignment);
    (0..n).map(|_| assign.random_range(1..=CATEGORY_COUNT as u8)).collect()
}

/// Covariate table holding a category column from [`category_assignment`].
pub fn category_table(assignment_seed: u64, n: usize) -> CovariateTable {
    let column = category_assignment(assignment_seed, n).into_iter().map(|c| Covariate::Int(i64::from(c))).collect();
    CovariateTable::new().with_column(CATEGORY_COVARIATE, column)
}

/// Each step is assigned a category in `1..=9` uniformly from the assignment
/// stream, then its outcome is Bernoulli with that category's rate.
pub fn gen_category(rates: &[f64], assignment_seed: u64, n: usize, seed: u64) -> Result<(OutcomeSequence, Vec<u8>)> {
    check_category_rates(rates)?;
    check_length(n)?;
    let categories = category_assignment(assignment_seed, n);
    let mut rng = stream(seed, Stream::Outcomes);
    let outcomes = categories
        .iter()
        .map(|&c| bernoulli_draw(&mut rng, rates[usize::from(c) - 1]))
        .collect();
    Ok((OutcomeSequence { outcomes, process_id: "category".into(), seed }, categories))
}

/// Each step draws a deep rate by weight (0-based index returned as the
/// hidden covariate), then its outcome is Bernoulli with that rate. The
/// weighted average of the deep rates must equal `coarse`.
pub fn gen_two_level(deep: &[DeepRate], coarse: f64, n: usize, seed: u64) -> Result<(OutcomeSequence, Vec<usize>)> {
    let cumulative = check_two_level(deep, coarse)?;
    check_length(n)?;
    let mut pick_rng = stream(seed, Stream::Deep);
    let mut rng = stream(seed, Stream::Outcomes);
    let mut picks = Vec::with_capacity(n);
    let mut outcomes = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = pick_rng.random();
        let i = cumulative.iter().position(|&c| u < c).unwrap_or(deep.len() - 1);
        picks.push(i);
        outcomes.push(bernoulli_draw(&mut rng, deep[i].rate));
    }
    Ok((OutcomeSequence { outcomes, process_id: format!("two_level({coarse})"), seed }, picks))
}
