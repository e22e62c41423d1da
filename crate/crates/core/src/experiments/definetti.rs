//! Limiting relative frequencies of exchangeable sequences.
//!
//! Each replicate draws one long exchangeable sequence and records its final
//! relative frequency. Across replicates those frequencies follow the mixing
//! law: Beta(r0, b0) for a Pólya urn, the prior for a Bernoulli mixture.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processes::{gen_mixture, gen_polya, Prior};
use crate::rng::derive_seed;
use crate::run::OutcomeSequence;
use crate::stats::{beta_cdf_integer, ks_critical_value, ks_distance};

pub const MIN_REPLICATES: usize = 100;
/// Significance of the reported KS critical value.
pub const KS_SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ExchangeableSource {
    Polya { r0: u64, b0: u64 },
    Mixture { prior: Prior },
}

impl ExchangeableSource {
    fn generate(&self, n: usize, seed: u64) -> Result<OutcomeSequence> {
        match *self {
            ExchangeableSource::Polya { r0, b0 } => Ok(gen_polya(r0, b0, n, seed)?.0),
            ExchangeableSource::Mixture { prior } => Ok(gen_mixture(&prior, n, seed)?.0),
        }
    }

    /// Integer Beta shapes of the limit law, when it is continuous and has
    /// a closed-form CDF here.
    fn limit_shapes(&self) -> Option<(u64, u64)> {
        let integral = |x: f64| (x.fract() == 0.0 && x >= 1.0).then_some(x as u64);
        match *self {
            ExchangeableSource::Polya { r0, b0 } => Some((r0, b0)),
            ExchangeableSource::Mixture { prior } => {
                let (a, b) = prior.beta_shapes()?;
                Some((integral(a)?, integral(b)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeFinettiResult {
    pub n: usize,
    /// `f_N` per replicate, in replicate order.
    pub final_frequencies: Vec<f64>,
    /// `f_{N/2}` per replicate.
    pub midpoint_frequencies: Vec<f64>,
    /// KS distance of the final frequencies to the limit law, when that law
    /// is a Beta with integer shapes.
    pub ks_distance: Option<f64>,
    pub ks_critical: f64,
}

impl DeFinettiResult {
    /// Fraction of replicates with `|f_{N/2} - f_N| < tol`.
    pub fn settled_fraction(&self, tol: f64) -> f64 {
        let settled = self
            .final_frequencies
            .iter()
            .zip(&self.midpoint_frequencies)
            .filter(|(a, b)| (*a - *b).abs() < tol)
            .count();
        settled as f64 / self.final_frequencies.len() as f64
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("replicate,f_half,f_final\n");
        for (i, (h, f)) in self.midpoint_frequencies.iter().zip(&self.final_frequencies).enumerate() {
            out.push_str(&format!("{i},{h},{f}\n"));
        }
        out
    }
}

/// Replicate `i` uses seed `derive_seed(seed, "definetti", i)`; replicates run
/// in parallel and are collected in index order.
pub fn run_definetti(source: &ExchangeableSource, n: usize, replicates: usize, seed: u64) -> Result<DeFinettiResult> {
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidParameter(format!("need at least {MIN_REPLICATES} replicates, got {replicates}")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("sequence length must be at least 2".into()));
    }
    let half = n / 2;
    let pairs: Vec<(f64, f64)> = (0..replicates as u64)
        .into_par_iter()
        .map(|i| {
            let seq = source.generate(n, derive_seed(seed, "definetti", i))?;
            let ones_half = seq.outcomes[..half].iter().filter(|&&e| e == 1).count();
            Ok((ones_half as f64 / half as f64, seq.frequency()))
        })
        .collect::<Result<_>>()?;
    let (midpoint_frequencies, final_frequencies): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let ks = source
        .limit_shapes()
        .map(|(a, b)| ks_distance(&final_frequencies, |x| beta_cdf_integer(x, a, b)));
    Ok(DeFinettiResult {
        n,
        final_frequencies,
        midpoint_frequencies,
        ks_distance: ks,
        ks_critical: ks_critical_value(KS_SIGNIFICANCE, replicates),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_limit_for_one_one_urn() {
        let result = run_definetti(&ExchangeableSource::Polya { r0: 1, b0: 1 }, 10_000, 2000, 1).unwrap();
        let d = result.ks_distance.unwrap();
        assert!(d < 0.035, "ks {d}");
        assert!(d < result.ks_critical);
    }

    #[test]
    fn frequencies_settle_within_replicates() {
        let result = run_definetti(&ExchangeableSource::Polya { r0: 1, b0: 1 }, 10_000, 500, 2).unwrap();
        assert!(result.settled_fraction(0.05) >= 0.95, "{}", result.settled_fraction(0.05));
    }

    #[test]
    fn point_mixture_concentrates() {
        let source = ExchangeableSource::Mixture { prior: Prior::Point { p: 0.7 } };
        let result = run_definetti(&source, 10_000, 200, 3).unwrap();
        assert!(result.final_frequencies.iter().all(|f| (f - 0.7).abs() < 0.02));
        assert_eq!(result.ks_distance, None);
    }

    #[test]
    fn beta_limit_for_larger_urn() {
        let result = run_definetti(&ExchangeableSource::Polya { r0: 2, b0: 3 }, 5000, 1000, 4).unwrap();
        assert!(result.ks_distance.unwrap() < result.ks_critical);
    }

    #[test]
    fn reproducible_from_seed() {
        let source = ExchangeableSource::Mixture { prior: Prior::Uniform01 };
        let a = run_definetti(&source, 1000, 100, 8).unwrap();
        let b = run_definetti(&source, 1000, 100, 8).unwrap();
        assert_eq!(a, b);
        assert!((a.ks_distance.unwrap() - b.ks_distance.unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn too_few_replicates() {
        assert!(run_definetti(&ExchangeableSource::Polya { r0: 1, b0: 1 }, 100, 99, 1).is_err());
    }
}
