//! Wilson score intervals for a binomial proportion, and the single-trial
//! exhibit showing what such an interval does not describe.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::stats::two_sided_critical;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalResult {
    pub p_hat: f64,
    pub n: u64,
    pub confidence: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: String,
}

impl IntervalResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Bounds in whole percent, rounded half away from zero.
    pub fn percent_bounds(&self) -> (i64, i64) {
        (round_half_away(self.lower * 100.0), round_half_away(self.upper * 100.0))
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }
}

fn round_half_away(x: f64) -> i64 {
    // f64::round rounds half away from zero
    x.round() as i64
}

/// Rounds to `decimals` places, half away from zero.
pub fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

/// Wilson score interval at confidence `conf`:
/// centre `(p + z²/2n) / (1 + z²/n)`,
/// half-width `z sqrt(p(1-p)/n + z²/4n²) / (1 + z²/n)`.
pub fn wilson_interval(p_hat: f64, n: u64, conf: f64) -> Result<IntervalResult> {
    check_probability("p_hat", p_hat)?;
    if n == 0 {
        return Err(Error::ZeroTrials);
    }
    if !(conf > 0.0 && conf < 1.0) {
        return Err(Error::InvalidConfidence(conf));
    }
    let z = two_sided_critical(1.0 - conf);
    let n_f = n as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p_hat + z2 / (2.0 * n_f)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    Ok(IntervalResult {
        p_hat,
        n,
        confidence: conf,
        lower: (centre - half).max(0.0),
        upper: (centre + half).min(1.0),
        method: "wilson".into(),
    })
}

/// The card-game table: success probability 0.75 over 10000, 1000, 100 and
/// 1 plays at 95% confidence.
pub fn card_game_table() -> Vec<IntervalResult> {
    [10_000, 1000, 100, 1]
        .into_iter()
        .map(|n| wilson_interval(0.75, n, 0.95).expect("valid parameters"))
        .collect()
}

/// CSV rendering of interval rows: `p_hat,n,confidence,lower,upper,lower_pct,upper_pct`.
pub fn intervals_csv(rows: &[IntervalResult]) -> String {
    let mut out = String::from("p_hat,n,confidence,lower,upper,lower_pct,upper_pct\n");
    for row in rows {
        let (lo, hi) = row.percent_bounds();
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{},{}\n",
            row.p_hat, row.n, row.confidence, row.lower, row.upper, lo, hi
        ));
    }
    out
}

/// The actual success rate of one trial with success probability `p`, set
/// beside the Wilson interval one would get by treating `p` as an observed
/// proportion from a single trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleTrialReport {
    pub p: f64,
    /// Probability the realized success rate is 0%.
    pub mass_at_zero: f64,
    /// Probability the realized success rate is 100%.
    pub mass_at_one: f64,
    pub misapplied_interval: IntervalResult,
    pub note: String,
}

pub fn single_trial_demo(p: f64) -> Result<SingleTrialReport> {
    check_probability("p", p)?;
    let interval = wilson_interval(p, 1, 0.95)?;
    let (lo, hi) = interval.percent_bounds();
    Ok(SingleTrialReport {
        p,
        mass_at_zero: 1.0 - p,
        mass_at_one: p,
        misapplied_interval: interval,
        note: format!(
            "critique exhibit: a single trial succeeds at rate 0% (probability {:.2}) or 100% (probability {:.2}); \
             no value in the {lo}-{hi}% interval can occur",
            1.0 - p,
            p
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn card_game_percentages() {
        let bounds: Vec<(i64, i64)> = card_game_table().iter().map(IntervalResult::percent_bounds).collect();
        assert_eq!(bounds, vec![(74, 76), (72, 78), (66, 82), (12, 99)]);
        let one = wilson_interval(0.75, 1, 0.95).unwrap();
        assert_eq!((round_to(one.lower, 2), round_to(one.upper, 2)), (0.12, 0.99));
    }

    // Oracle: the score-test inversion solved as a quadratic in p,
    // (1 + z²/n) p² - (2 p̂ + z²/n) p + p̂² = 0.
    #[test]
    fn bounds_solve_the_score_quadratic() {
        for &(p_hat, n) in &[(0.75, 1u64), (0.75, 100), (0.1, 37), (0.0, 12), (1.0, 5)] {
            let iv = wilson_interval(p_hat, n, 0.95).unwrap();
            let z = 1.959963984540054f64;
            let n_f = n as f64;
            let a = 1.0 + z * z / n_f;
            let b = -(2.0 * p_hat + z * z / n_f);
            let c = p_hat * p_hat;
            let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
            assert!((iv.lower - (-b - disc) / (2.0 * a)).abs() < 1e-12);
            assert!((iv.upper - (-b + disc) / (2.0 * a)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(wilson_interval(0.5, 0, 0.95), Err(Error::ZeroTrials)));
        assert!(matches!(wilson_interval(0.5, 10, 1.0), Err(Error::InvalidConfidence(_))));
        assert!(wilson_interval(1.5, 10, 0.95).is_err());
    }

    #[test]
    fn single_trial_masses() {
        let r = single_trial_demo(0.75).unwrap();
        assert_eq!((r.mass_at_zero, r.mass_at_one), (0.25, 0.75));
        assert_eq!(r.misapplied_interval.percent_bounds(), (12, 99));
        let r = single_trial_demo(1.0).unwrap();
        assert_eq!((r.mass_at_zero, r.mass_at_one), (0.0, 1.0));
        let r = single_trial_demo(0.5).unwrap();
        assert_eq!(r.mass_at_zero, r.mass_at_one);
    }

    #[test]
    fn csv_rows() {
        let csv = intervals_csv(&card_game_table());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "p_hat,n,confidence,lower,upper,lower_pct,upper_pct");
        assert!(lines[4].ends_with(",12,99"));
        assert_eq!(lines.len(), 5);
    }

    proptest! {
        #[test]
        fn interval_stays_in_unit_range(p in 0.0f64..=1.0, n in 1u64..100_000, conf in 0.5f64..0.999) {
            let iv = wilson_interval(p, n, conf).unwrap();
            prop_assert!(0.0 <= iv.lower && iv.lower <= iv.upper && iv.upper <= 1.0);
        }

        #[test]
        fn width_shrinks_with_n(p in 0.0f64..=1.0, n in 1u64..50_000) {
            let a = wilson_interval(p, n, 0.95).unwrap();
            let b = wilson_interval(p, n + 1, 0.95).unwrap();
            prop_assert!(b.width() < a.width());
        }

        #[test]
        fn reflection_symmetry(p in 0.0f64..=1.0, n in 1u64..10_000) {
            let a = wilson_interval(p, n, 0.95).unwrap();
            let b = wilson_interval(1.0 - p, n, 0.95).unwrap();
            prop_assert!((a.lower - (1.0 - b.upper)).abs() < 1e-12);
            prop_assert!((a.upper - (1.0 - b.lower)).abs() < 1e-12);
        }
    }

    #[test]
    fn coverage_at_n_100() {
        use crate::processes::gen_bernoulli;
        let reps = 10_000u64;
        let covered = (0..reps)
            .filter(|&seed| {
                let p_hat = gen_bernoulli(0.75, 100, seed).unwrap().frequency();
                wilson_interval(p_hat, 100, 0.95).unwrap().contains(0.75)
            })
            .count();
        let rate = covered as f64 / reps as f64;
        assert!((0.92..=0.98).contains(&rate), "coverage {rate}");
    }
}
