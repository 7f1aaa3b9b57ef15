//! Small statistical helpers: order statistics, the standard normal quantile
//! and an exact binomial CDF.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// Quantile by linear interpolation between order statistics (R type 7).
/// `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(values: &[f64]) -> f64 {
    quantile_sorted(&sorted(values), 0.5)
}

pub fn iqr(values: &[f64]) -> f64 {
    let s = sorted(values);
    quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    let rough = mean(values);
    // Second pass removes the rounding error of the first mean.
    let mu = rough + values.iter().map(|v| v - rough).sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

/// `Φ⁻¹(p)` for the standard normal distribution.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// `ln n! − ln(sqrt(2πn)(n/e)^n)`, the Stirling-series remainder.
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return ln_gamma(n + 1.0) - (n + 0.5) * n.ln() + n - 0.5 * (2.0 * PI).ln();
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x/np) + np − x`, accurate when `x ≈ np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Binomial log-pmf in saddle-point form, free of the cancellation that
/// `ln C(n, j)` suffers for large `n`.
fn ln_pmf(j: u64, n: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    if j == 0 {
        return n as f64 * (-p).ln_1p();
    }
    if j == n {
        return n as f64 * p.ln();
    }
    let (x, nf) = (j as f64, n as f64);
    let lc = stirlerr(nf) - stirlerr(x) - stirlerr(nf - x) - bd0(x, nf * p) - bd0(nf - x, nf * q);
    let lf = (2.0 * PI).ln() + x.ln() + (-x / nf).ln_1p();
    lc - 0.5 * lf
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Sums `exp(ln_pmf(j))` walking away from the mode, starting at `start`
/// and stepping by `dir`, until the terms become negligible.
fn ln_tail(start: u64, end_inclusive: u64, n: u64, p: f64, up: bool) -> f64 {
    let ln_ratio_up = p.ln() - (-p).ln_1p();
    let mut j = start;
    let mut term = ln_pmf(j, n, p);
    let mut acc = term;
    loop {
        if j == end_inclusive {
            break;
        }
        if up {
            term += ((n - j) as f64).ln() - ((j + 1) as f64).ln() + ln_ratio_up;
            j += 1;
        } else {
            term += (j as f64).ln() - ((n - j + 1) as f64).ln() - ln_ratio_up;
            j -= 1;
        }
        acc = log_add(acc, term);
        if term < acc - 40.0 {
            break;
        }
    }
    acc
}

/// `P[X ≤ k]` for `X ~ Binomial(n, p)`, accumulated in log space.
pub fn binomial_cdf(k: i64, n: u64, p: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let k = k as u64;
    if k >= n {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let mode = ((n + 1) as f64 * p).floor() as u64;
    if k < mode {
        // Lower tail, terms decrease as j falls below k.
        ln_tail(k, 0, n, p, false).exp().min(1.0)
    } else {
        // Upper tail from k + 1, terms decrease as j grows.
        (1.0 - ln_tail(k + 1, n, n, p, true).exp()).max(0.0)
    }
}

/// `P[X > k] = 1 − P[X ≤ k]`, computed without cancellation when the upper
/// tail is small.
pub fn binomial_sf(k: i64, n: u64, p: f64) -> f64 {
    if k < 0 {
        return 1.0;
    }
    let k = k as u64;
    if k >= n || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let mode = ((n + 1) as f64 * p).floor() as u64;
    if k + 1 > mode {
        ln_tail(k + 1, n, n, p, true).exp().min(1.0)
    } else {
        (1.0 - ln_tail(k, 0, n, p, false).exp()).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use statrs::distribution::{Binomial, DiscreteCDF};

    #[test]
    fn quantiles() {
        assert_eq!(median(&[0.3, 0.1, 0.2]), 0.2);
        assert_eq!(iqr(&[0.4; 7]), 0.0);
        assert_eq!(std_dev(&[0.4; 7]), 0.0);
    }

    /// Type-7 IQR against an independent order-statistic oracle on {1..10}/10.
    #[test]
    fn iqr_matches_interpolation_oracle() {
        let v: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        // Oracle: position (m − 1)·q on the 0-based sorted list.
        let oracle = |q: f64| {
            let pos = 9.0 * q;
            let i = pos as usize;
            let frac = pos - i as f64;
            v[i] * (1.0 - frac) + v[(i + 1).min(9)] * frac
        };
        assert_abs_diff_eq!(oracle(0.25), 0.325, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle(0.75), 0.775, epsilon = 1e-15);
        assert_abs_diff_eq!(iqr(&v), oracle(0.75) - oracle(0.25), epsilon = 1e-15);
    }

    /// Inverse normal checked against Simpson quadrature of the density.
    #[test]
    fn normal_quantile_against_quadrature() {
        fn cdf(z: f64) -> f64 {
            let n = 20_000;
            let (a, b) = (-12.0, z);
            let h = (b - a) / n as f64;
            let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let mut s = f(a) + f(b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(a + i as f64 * h);
            }
            s * h / 3.0
        }
        for &p in &[0.5, 0.9, 0.9772, 0.99, 0.999, 0.05] {
            let z = normal_quantile(p);
            assert_abs_diff_eq!(cdf(z), p, epsilon = 1e-9);
        }
        assert_eq!(normal_quantile(0.5), 0.0);
    }

    /// Oracle: pmf ratios relative to the mode, summed in linear space and
    /// normalized by their total.
    fn ratio_cdf(k: u64, n: u64, p: f64) -> f64 {
        let mode = ((n + 1) as f64 * p).floor().min(n as f64) as usize;
        let mut w = vec![0.0; n as usize + 1];
        w[mode] = 1.0;
        for j in mode..n as usize {
            w[j + 1] = w[j] * (n as usize - j) as f64 / (j + 1) as f64 * p / (1.0 - p);
        }
        for j in (1..=mode).rev() {
            w[j - 1] = w[j] * j as f64 / (n as usize - j + 1) as f64 * (1.0 - p) / p;
        }
        let total: f64 = w.iter().sum();
        w[..=k as usize].iter().sum::<f64>() / total
    }

    #[test]
    fn binomial_cdf_matches_oracles() {
        for &(n, p) in &[(1u64, 0.3), (10, 0.5), (97, 0.55), (1000, 0.001), (5000, 0.6), (200_000, 0.5)] {
            let dist = Binomial::new(p, n).unwrap();
            for k in [0, 1, n / 4, n / 2, (n as f64 * p) as u64, n - 1] {
                let ours = binomial_cdf(k as i64, n, p);
                let reference = ratio_cdf(k, n, p);
                assert_abs_diff_eq!(ours, reference, epsilon = 1e-11);
                assert_abs_diff_eq!(binomial_sf(k as i64, n, p), 1.0 - reference, epsilon = 1e-11);
                if n <= 5000 {
                    assert_abs_diff_eq!(ours, dist.cdf(k), epsilon = 1e-10);
                }
            }
        }
        // Mid-range value cross-checked with an independent library.
        assert_abs_diff_eq!(binomial_cdf(100_000, 200_000, 0.5), 0.5008920609429994, epsilon = 1e-12);
        assert_eq!(binomial_cdf(-1, 10, 0.5), 0.0);
        assert_eq!(binomial_cdf(10, 10, 0.5), 1.0);
        assert_abs_diff_eq!(binomial_cdf(0, 7, 0.5), 0.5f64.powi(7), epsilon = 1e-15);
    }
}
