//! Pólya urn: simulation and exact sequence probabilities.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Stream};
use crate::run::{Outcome, OutcomeSequence};

/// Urn contents: `red` counts successes, `green` failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrnState {
    pub red: u64,
    pub green: u64,
}

impl UrnState {
    pub fn new(red: u64, green: u64) -> Result<Self> {
        if red == 0 || green == 0 {
            return Err(Error::EmptyUrn { red, green });
        }
        Ok(Self { red, green })
    }

    /// Probability the next draw is red, `r / (r + b)`.
    pub fn red_probability(&self) -> f64 {
        self.red as f64 / (self.red + self.green) as f64
    }

    /// Replaces the drawn ball together with one more of the same colour.
    pub fn reinforce(&mut self, outcome: Outcome) {
        if outcome == 1 {
            self.red += 1;
        } else {
            self.green += 1;
        }
    }
}

/// Draws `n` balls from an urn starting at `(r0, b0)`. The trajectory holds the
/// urn state before each draw.
pub fn gen_polya(r0: u64, b0: u64, n: usize, seed: u64) -> Result<(OutcomeSequence, Vec<UrnState>)> {
    let mut urn = UrnState::new(r0, b0)?;
    if n == 0 {
        return Err(Error::InvalidParameter("length must be at least 1".into()));
    }
    let mut rng = stream(seed, Stream::Outcomes);
    let mut outcomes = Vec::with_capacity(n);
    let mut trajectory = Vec::with_capacity(n);
    for _ in 0..n {
        trajectory.push(urn);
        // uniform integer draw over the balls in the urn
        let total = urn.red + urn.green;
        let e = Outcome::from(rng.random_range(0..total) < urn.red);
        urn.reinforce(e);
        outcomes.push(e);
    }
    Ok((OutcomeSequence { outcomes, process_id: format!("polya({r0},{b0})"), seed }, trajectory))
}

/// Exact probability of drawing `seq` from an urn starting at `(r0, b0)`: the
/// product of the sequential draw probabilities.
pub fn polya_sequence_prob(seq: &[Outcome], r0: u64, b0: u64) -> Result<BigRational> {
    let mut urn = UrnState::new(r0, b0)?;
    let mut numer = BigInt::one();
    let mut denom = BigInt::one();
    for &e in seq {
        numer *= if e == 1 { urn.red } else { urn.green };
        denom *= urn.red + urn.green;
        urn.reinforce(e);
    }
    Ok(BigRational::new(numer, denom))
}

/// Natural log of [`polya_sequence_prob`], for sequences too long to be
/// worth exact arithmetic.
pub fn polya_sequence_ln_prob(seq: &[Outcome], r0: u64, b0: u64) -> Result<f64> {
    let mut urn = UrnState::new(r0, b0)?;
    let mut ln_p = 0.0;
    for &e in seq {
        let hit = if e == 1 { urn.red } else { urn.green };
        ln_p += (hit as f64).ln() - ((urn.red + urn.green) as f64).ln();
        urn.reinforce(e);
    }
    Ok(ln_p)
}

/// Sum of [`polya_sequence_prob`] over all `2^n` sequences of length `n`.
pub fn polya_total_mass(n: u32, r0: u64, b0: u64) -> Result<BigRational> {
    let mut total = BigRational::zero();
    for bits in 0..(1u64 << n) {
        let seq: Vec<Outcome> = (0..n).map(|j| ((bits >> j) & 1) as Outcome).collect();
        total += polya_sequence_prob(&seq, r0, b0)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn factorial(n: u64) -> BigInt {
        (1..=n).fold(BigInt::one(), |acc, k| acc * k)
    }

    fn parse(s: &str) -> Vec<Outcome> {
        s.bytes().map(|b| Outcome::from(b == b'H')).collect()
    }

    #[test]
    fn single_draw_is_one_half() {
        assert_eq!(polya_sequence_prob(&[1], 1, 1).unwrap(), ratio(1, 2));
        assert_eq!(polya_sequence_prob(&[0], 1, 1).unwrap(), ratio(1, 2));
    }

    #[test]
    fn reordered_sequences_share_probability() {
        let a = polya_sequence_prob(&parse("HHTTHTH"), 1, 1).unwrap();
        let b = polya_sequence_prob(&parse("HTHHTHT"), 1, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, ratio(1, 280));
    }

    // Oracle: uniform-prior Beta integral a! b! / (a + b + 1)!, checked over
    // every sequence of length <= 10 by enumeration.
    #[test]
    fn matches_uniform_mixture_integral() {
        for n in 0..=10u32 {
            for bits in 0..(1u64 << n) {
                let seq: Vec<Outcome> = (0..n).map(|j| ((bits >> j) & 1) as Outcome).collect();
                let a = seq.iter().filter(|&&e| e == 1).count() as u64;
                let b = n as u64 - a;
                let expected = BigRational::new(factorial(a) * factorial(b), factorial(a + b + 1));
                assert_eq!(polya_sequence_prob(&seq, 1, 1).unwrap(), expected);
            }
        }
    }

    #[test]
    fn total_mass_is_one() {
        for n in 0..=10 {
            assert_eq!(polya_total_mass(n, 1, 1).unwrap(), BigRational::one());
            assert_eq!(polya_total_mass(n, 2, 3).unwrap(), BigRational::one());
        }
    }

    #[test]
    fn log_probability_agrees_with_exact() {
        let seq = parse("HHTHTTTHHHHT");
        let exact = polya_sequence_prob(&seq, 3, 2).unwrap().to_f64().unwrap();
        let ln = polya_sequence_ln_prob(&seq, 3, 2).unwrap();
        assert!((ln.exp() - exact).abs() < 1e-15);
    }

    #[test]
    fn empty_urn_is_rejected() {
        assert!(matches!(gen_polya(0, 1, 5, 1), Err(Error::EmptyUrn { .. })));
        assert!(polya_sequence_prob(&[1], 1, 0).is_err());
    }

    #[test]
    fn trajectory_follows_draws() {
        let (seq, trajectory) = gen_polya(1, 1, 200, 9).unwrap();
        assert_eq!(trajectory[0], UrnState { red: 1, green: 1 });
        assert_eq!(trajectory[0].red_probability(), 0.5);
        for (k, state) in trajectory.iter().enumerate().take(seq.len()).skip(1) {
            let reds = seq.outcomes[..k].iter().filter(|&&e| e == 1).count() as u64;
            assert_eq!(*state, UrnState { red: 1 + reds, green: 1 + k as u64 - reds });
        }
        assert_eq!(gen_polya(1, 1, 200, 9).unwrap().0, seq);
    }
}
