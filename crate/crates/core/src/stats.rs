//! Statistics helpers: Pearson correlation with two-tailed p-values and
//! percentile bootstrap confidence intervals.

use alloc::vec::Vec;
use core::fmt;

use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsError {
    /// Fewer than three paired observations.
    TooFewSamples,
    /// One of the series is constant.
    DegenerateVariance,
    LengthMismatch,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::TooFewSamples => write!(f, "need at least 3 paired samples"),
            StatsError::DegenerateVariance => write!(f, "series has zero variance"),
            StatsError::LengthMismatch => write!(f, "series lengths differ"),
        }
    }
}

impl core::error::Error for StatsError {}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Pearson correlation coefficient with its two-tailed p-value from the
/// t-distribution with n-2 degrees of freedom.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch);
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::TooFewSamples);
    }
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let r = sxy / libm::sqrt(sxx * syy);
    let df = (n - 2) as f64;
    let r2 = (r * r).min(1.0);
    let p = if r2 >= 1.0 {
        0.0
    } else {
        let t2 = df * r2 / (1.0 - r2);
        // Two-tailed p for Student's t: I_{df/(df+t^2)}(df/2, 1/2).
        incomplete_beta(df / 2.0, 0.5, df / (df + t2))
    };
    Ok((r, p))
}

/// ln Gamma via the Lanczos approximation.
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * libm::log(tmp);
    let mut ser = 1.000000000190015;
    for c in COEF {
        y += 1.0;
        ser += c / y;
    }
    -tmp + libm::log(2.5066282746310005 * ser / x)
}

/// Regularized incomplete beta function I_x(a, b) via the Lentz continued
/// fraction.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * libm::log(x) + b * libm::log(1.0 - x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 200;
    const EPS: f64 = 3e-14;
    const FPMIN: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Percentile bootstrap 95% confidence interval of the mean, with a fixed
/// resample count and analysis seed so outputs are reproducible.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, seed: u64) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    if values.len() == 1 {
        return (values[0], values[0]);
    }
    let mut rng = Stream::derive(seed, "bootstrap", values.len() as u64);
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut acc = 0.0;
        for _ in 0..values.len() {
            acc += values[rng.next_below(values.len() as u64) as usize];
        }
        means.push(acc / values.len() as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite means"));
    let pick = |p: f64| {
        let rank = libm::ceil(p * resamples as f64) as usize;
        means[rank.clamp(1, resamples) - 1]
    };
    (pick(0.025), pick(0.975))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn pearson_is_exactly_minus_one_on_linear_fixture() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -2.0 * x).collect();
        let (r, p) = pearson(&xs, &ys).unwrap();
        assert_eq!(r, -1.0);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn pearson_is_symmetric() {
        let xs = vec![1.0, 4.0, 2.0, 8.0, 5.0];
        let ys = vec![0.3, -1.0, 2.0, 4.0, 1.1];
        let (r1, p1) = pearson(&xs, &ys).unwrap();
        let (r2, p2) = pearson(&ys, &xs).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(p1, p2);
    }

    #[test]
    fn pearson_rejects_constant_series() {
        let xs = vec![1.0, 1.0, 1.0, 1.0];
        let ys = vec![0.0, 1.0, 2.0, 3.0];
        assert_eq!(pearson(&xs, &ys).unwrap_err(), StatsError::DegenerateVariance);
    }

    /// Student's t density for the quadrature oracle.
    fn t_pdf(x: f64, df: f64) -> f64 {
        let ln_coef = ln_gamma((df + 1.0) / 2.0)
            - ln_gamma(df / 2.0)
            - 0.5 * libm::log(df * core::f64::consts::PI);
        libm::exp(ln_coef - (df + 1.0) / 2.0 * libm::log(1.0 + x * x / df))
    }

    /// Two-tailed p by Simpson quadrature over the density.
    fn p_by_quadrature(t: f64, df: f64) -> f64 {
        let n = 20_000;
        let h = t / n as f64;
        let mut acc = t_pdf(0.0, df) + t_pdf(t, df);
        for i in 1..n {
            let x = i as f64 * h;
            acc += t_pdf(x, df) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let central = 2.0 * acc * h / 3.0;
        1.0 - central
    }

    #[test]
    fn p_value_matches_quadrature_oracle() {
        for &(t, df) in &[(1.0, 3.0), (2.5, 8.0), (3.576, 3.0), (0.4, 30.0)] {
            let p_beta = incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
            let p_quad = p_by_quadrature(t, df);
            assert!(
                (p_beta - p_quad).abs() < 1e-6,
                "t={t}, df={df}: beta {p_beta} vs quadrature {p_quad}"
            );
        }
    }

    #[test]
    fn noise_series_has_large_p() {
        // Two independent seeded noise series should show no significant
        // correlation.
        let mut rng = Stream::seed_from(40);
        let xs: Vec<f64> = (0..100).map(|_| rng.next_f64()).collect();
        let ys: Vec<f64> = (0..100).map(|_| rng.next_f64()).collect();
        let (r, p) = pearson(&xs, &ys).unwrap();
        assert!(r.abs() < 0.2);
        assert!(p > 0.05);
    }

    #[test]
    fn bootstrap_ci_brackets_the_mean() {
        let values: Vec<f64> = (0..50).map(|i| (i % 7) as f64).collect();
        let m = mean(&values);
        let (lo, hi) = bootstrap_mean_ci(&values, 1000, 7);
        assert!(lo <= m && m <= hi);
        assert!(hi - lo < 2.0);
        // Deterministic for a fixed analysis seed.
        assert_eq!(bootstrap_mean_ci(&values, 1000, 7), (lo, hi));
    }
}
