//! Standard normal quantile, Kolmogorov–Smirnov distance and the Kolmogorov
//! limit distribution.

/// Standard normal quantile function.
///
/// Wichura's algorithm AS 241 (PPND16): piecewise rational approximations on
/// three ranges of `p`, accurate to about 1e-16 relative error. Returns
/// `-inf`/`+inf` at 0 and 1 and NaN outside `[0, 1]`.
#[allow(clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.509_080_928_730_122_672_7e3 * r + 3.343_057_558_358_812_810_5e4) * r
            + 6.726_577_092_700_870_085_3e4)
            * r
            + 4.592_195_393_154_987_145_7e4)
            * r
            + 1.373_169_376_550_946_112_5e4)
            * r
            + 1.971_590_950_306_551_442_7e3)
            * r
            + 1.331_416_678_917_843_774_5e2)
            * r
            + 3.387_132_872_796_366_608_0)
            * q;
        let den = ((((((5.226_495_278_852_854_561_0e3 * r + 2.872_908_573_572_194_267_4e4) * r
            + 3.930_789_580_009_271_061_0e4)
            * r
            + 2.121_379_430_158_659_586_7e4)
            * r
            + 5.394_196_021_424_751_107_7e3)
            * r
            + 6.871_870_074_920_579_083_0e2)
            * r
            + 4.231_333_070_160_091_125_2e1)
            * r
            + 1.0;
        return num / den;
    }

    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414_076_4e-4 * r + 2.272_384_498_926_918_458_33e-2) * r
            + 2.417_807_251_774_506_117_7e-1)
            * r
            + 1.270_458_252_452_368_382_58)
            * r
            + 3.647_848_324_763_204_605_04)
            * r
            + 5.769_497_221_460_691_405_5)
            * r
            + 4.630_337_846_156_545_295_9)
            * r
            + 1.423_437_110_749_683_577_34;
        let den = ((((((1.050_750_071_644_416_843_24e-9 * r + 5.475_938_084_995_344_946e-4) * r
            + 1.519_866_656_361_645_719_66e-2)
            * r
            + 1.481_039_764_274_800_745_9e-1)
            * r
            + 6.897_673_349_851_000_045_5e-1)
            * r
            + 1.676_384_830_183_803_849_4)
            * r
            + 2.053_191_626_637_758_821_87)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_132_65e-7 * r + 2.711_555_568_743_487_578_15e-5) * r
            + 1.242_660_947_388_078_438_6e-3)
            * r
            + 2.653_218_952_657_612_309_3e-2)
            * r
            + 2.965_605_718_285_048_912_3e-1)
            * r
            + 1.784_826_539_917_291_335_8)
            * r
            + 5.463_784_911_164_114_369_9)
            * r
            + 6.657_904_643_501_103_777_2;
        let den = ((((((2.044_263_103_389_939_785_64e-15 * r + 1.421_511_758_316_445_888_7e-7) * r
            + 1.846_318_317_510_054_681_8e-5)
            * r
            + 7.868_691_311_456_132_591e-4)
            * r
            + 1.487_536_129_085_061_485_25e-2)
            * r
            + 1.369_298_809_227_358_053_1e-1)
            * r
            + 5.998_322_065_558_879_376_9e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

/// Two-sided critical value: the `1 - significance / 2` normal quantile.
pub fn two_sided_critical(significance: f64) -> f64 {
    normal_quantile(1.0 - significance / 2.0)
}

/// Kolmogorov–Smirnov distance `sup |F_n(x) - F(x)|` between the empirical
/// distribution of `sample` and a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// CDF of the Kolmogorov distribution, the limit law of `sqrt(n) * D_n`.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 1.0 {
        // Jacobi theta form converges fast for small x.
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let sum: f64 = (1..=50)
            .map(|k| {
                let odd = (2 * k - 1) as f64;
                (-odd * odd * pi2 / (8.0 * x * x)).exp()
            })
            .sum();
        (2.0 * std::f64::consts::PI).sqrt() / x * sum
    } else {
        let sum: f64 = (1..=100)
            .map(|k| {
                let k = k as f64;
                let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * k * k * x * x).exp()
            })
            .sum();
        1.0 - 2.0 * sum
    }
}

/// Asymptotic critical value of the one-sample KS distance for a sample of
/// size `n` at the given significance level.
pub fn ks_critical_value(significance: f64, n: usize) -> f64 {
    let target = 1.0 - significance;
    let (mut lo, mut hi) = (0.1f64, 5.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / (n as f64).sqrt()
}

/// CDF of Beta(a, b) for positive integer parameters, via the identity
/// `I_x(a, b) = P(Binomial(a + b - 1, x) >= a)`.
pub fn beta_cdf_integer(x: f64, a: u64, b: u64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let n = a + b - 1;
    // log-space binomial pmf so large parameters do not overflow
    let ln_choose = |k: u64| ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
    (a..=n)
        .map(|j| (ln_choose(j) + j as f64 * x.ln() + (n - j) as f64 * (-x).ln_1p()).exp())
        .sum::<f64>()
        .min(1.0)
}

pub(crate) fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference quantiles from an independent double-precision implementation
    // (scipy.special.ndtri).
    #[test]
    fn normal_quantile_reference_values() {
        let cases = [
            (0.975, 1.959963984540054),
            (0.995, 2.5758293035489004),
            (0.9, 1.2815515655446004),
            (0.3, -0.5244005127080409),
            (0.5, 0.0),
            (0.01, -2.3263478740408408),
            (1e-10, -6.361340902404056),
            (1e-300, -37.0470962993612),
        ];
        for (p, expected) in cases {
            let got = normal_quantile(p);
            assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0), "p={p}: {got} vs {expected}");
        }
        assert_eq!(normal_quantile(0.0), f64::NEG_INFINITY);
        assert_eq!(normal_quantile(1.0), f64::INFINITY);
        assert!(normal_quantile(1.5).is_nan());
    }

    #[test]
    fn normal_quantile_is_antisymmetric() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            assert!((normal_quantile(p) + normal_quantile(1.0 - p)).abs() < 1e-12);
        }
    }

    #[test]
    fn kolmogorov_quantiles() {
        // Tabulated asymptotic critical values: 1.3581 (5%), 1.6276 (1%).
        assert!((ks_critical_value(0.05, 1) - 1.358099).abs() < 1e-5);
        assert!((ks_critical_value(0.01, 1) - 1.627624).abs() < 1e-5);
        assert!((ks_critical_value(0.01, 2000) - 0.0364).abs() < 1e-4);
        // the two series agree where they meet
        let below = kolmogorov_cdf(1.0 - 1e-12);
        let above = kolmogorov_cdf(1.0);
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn ks_distance_small_sample() {
        let d = ks_distance(&[0.1, 0.5, 0.9], |x| x);
        // max over i of max(x_i - i/n, (i+1)/n - x_i)
        assert!((d - (2.0 / 3.0 - 0.5f64).max(1.0 / 3.0 - 0.1).max(1.0 - 0.9)).abs() < 1e-15);
    }

    #[test]
    fn beta_cdf_matches_closed_forms() {
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            assert!((beta_cdf_integer(x, 1, 1) - x).abs() < 1e-12);
            assert!((beta_cdf_integer(x, 2, 1) - x * x).abs() < 1e-12);
            assert!((beta_cdf_integer(x, 1, 2) - (1.0 - (1.0 - x).powi(2))).abs() < 1e-12);
        }
    }
}
