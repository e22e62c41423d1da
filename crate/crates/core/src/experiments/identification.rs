//! Asymptotic identification: two valid forecasters on the same stream must
//! agree in the limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecasters::{run_forecaster, ForecasterSpec};
use crate::info::InformationBase;
use crate::processes::{ProcessKind, ProcessSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    /// `d_k = |p_k - q_k|` for every step.
    pub divergence: Vec<f64>,
    /// `max { d_k : k > n/2 }`.
    pub tail_max: f64,
}

impl IdentificationResult {
    /// Plot-ready `step,d_k` rows.
    pub fn divergence_csv(&self) -> String {
        let mut out = String::from("step,d_k\n");
        for (i, d) in self.divergence.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, d));
        }
        out
    }
}

/// Runs both forecasters over one stream of `process` and records how far
/// apart they are at every step. Both must be H-based.
pub fn run_identification(
    process: &ProcessKind,
    forecaster_a: &ForecasterSpec,
    forecaster_b: &ForecasterSpec,
    n: usize,
    seed: u64,
) -> Result<IdentificationResult> {
    if !forecaster_a.h_based() || !forecaster_b.h_based() {
        return Err(Error::Oracle("identification compares H-based forecasters only"));
    }
    let spec = ProcessSpec::new(process.clone(), n, seed);
    spec.validate()?;
    let generated = spec.generate()?;
    let info = InformationBase::new(generated.outcomes.outcomes.clone(), generated.covariates)?;
    let p = run_forecaster(forecaster_a, &generated.outcomes, &info)?;
    let q = run_forecaster(forecaster_b, &generated.outcomes, &info)?;
    let divergence: Vec<f64> = p.forecasts.iter().zip(&q.forecasts).map(|(a, b)| (a - b).abs()).collect();
    let tail_max = divergence[n / 2..].iter().copied().fold(0.0, f64::max);
    Ok(IdentificationResult { divergence, tail_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::Prior;

    fn bernoulli() -> ProcessKind {
        ProcessKind::Bernoulli { p: 0.3 }
    }

    #[test]
    fn different_beta_priors_agree_in_the_tail() {
        let a = ForecasterSpec::BayesMixture { prior: Prior::Beta { a: 1.0, b: 1.0 } };
        let b = ForecasterSpec::BayesMixture { prior: Prior::Beta { a: 2.0, b: 2.0 } };
        let result = run_identification(&bernoulli(), &a, &b, 100_000, 5).unwrap();
        assert!(result.tail_max < 0.01);
        assert!(result.divergence[0] == 0.0); // both start at 1/2
    }

    #[test]
    fn identical_forecasters_never_diverge() {
        let result = run_identification(&bernoulli(), &ForecasterSpec::Laplace, &ForecasterSpec::Laplace, 1000, 1).unwrap();
        assert!(result.divergence.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn rule_of_succession_approaches_true_rate() {
        let c = ForecasterSpec::Constant { c: 0.3 };
        let a = ForecasterSpec::BayesMixture { prior: Prior::Uniform01 };
        let result = run_identification(&bernoulli(), &a, &c, 100_000, 9).unwrap();
        assert!(result.tail_max < 0.01, "{}", result.tail_max);
    }

    #[test]
    fn swapping_forecasters_is_symmetric() {
        let a = ForecasterSpec::Laplace;
        let b = ForecasterSpec::Climatology { prior_weight: 7.0 };
        let ab = run_identification(&bernoulli(), &a, &b, 2000, 4).unwrap();
        let ba = run_identification(&bernoulli(), &b, &a, 2000, 4).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn oracle_is_rejected() {
        let err = run_identification(&bernoulli(), &ForecasterSpec::Oracle, &ForecasterSpec::Laplace, 10, 1);
        assert!(matches!(err, Err(Error::Oracle(_))));
    }

    #[test]
    fn divergence_csv_layout() {
        let result = IdentificationResult { divergence: vec![0.0, 0.25], tail_max: 0.25 };
        assert_eq!(result.divergence_csv(), "step,d_k\n1,0\n2,0.25\n");
    }
}
