//! Scaling of kernel statistics with qubit count: exponential fits with an
//! elbow rule for discarding small-`n` points, extrapolation and
//! concentration checks.

use std::fmt;
use std::io::Write;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::characteristics::{expressibility, mean_relative_entropy};
use crate::dataset::{select_features, Dataset};
use crate::error::{Error, Result};
use crate::feature_map::{Entanglement, FeatureMapConfig};
use crate::kernels::{gram_matrix, kernel_statistics, reduced_table, KernelFamily, KernelMatrix};
use crate::shots::{dataset_budget, BudgetParams, DatasetInput};

pub const DEFAULT_R2_THRESHOLD: f64 = 0.99;

/// Rule used to pick how many leading points to drop, recorded with fits.
pub const ELBOW_RULE: &str = "largest second difference of R2 over dropped prefixes (at least 4 points kept), \
     else first prefix with R2 >= threshold, else best R2";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Mean,
    Std,
    Median,
    Iqr,
    NSpread,
    NCa,
    /// Largest `|κ − μ|` over independent entries.
    MaxDeviation,
    Expressibility,
    RelativeEntropy,
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesMetadata {
    pub family: Option<KernelFamily>,
    pub r: Option<usize>,
    pub entanglement: Option<Entanglement>,
    pub dataset_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSeries {
    pub statistic: Statistic,
    pub points: Vec<(usize, f64)>,
    pub metadata: SeriesMetadata,
}

impl ScalingSeries {
    pub fn new(statistic: Statistic, points: Vec<(usize, f64)>, metadata: SeriesMetadata) -> Result<Self> {
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Domain("series qubit counts must be strictly increasing".into()));
        }
        if points.iter().any(|p| !p.1.is_finite()) {
            return Err(Error::Domain(format!("{statistic} series has non-finite values")));
        }
        Ok(Self {
            statistic,
            points,
            metadata,
        })
    }
}

/// `value ≈ C · 2^{α n}` fitted on `points[dropped_prefix..]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub log2_c: f64,
    pub alpha: f64,
    pub r_squared: f64,
    pub dropped_prefix: usize,
    pub valid: bool,
}

struct Line {
    intercept: f64,
    slope: f64,
    r_squared: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Line {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let scale = ys.iter().map(|y| y * y).sum::<f64>().max(1.0);
    let r_squared = if ss_res <= 1e-24 * scale {
        1.0
    } else if ss_tot == 0.0 {
        0.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Line {
        intercept,
        slope,
        r_squared,
    }
}

/// Fits `log2 value = log2 C + α n`, choosing the dropped prefix by the
/// elbow of R² as a function of the number of dropped points.
pub fn fit_exponential(series: &ScalingSeries, threshold: f64) -> Result<ScalingFit> {
    let pts = &series.points;
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} series has {} points; at least 4 are needed",
            series.statistic,
            pts.len()
        )));
    }
    if let Some(&(n, v)) = pts.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::Domain(format!("{} at n = {n} is {v}; values must be positive", series.statistic)));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.log2()).collect();
    let fits: Vec<Line> = (0..=pts.len() - 4).map(|d| least_squares(&xs[d..], &ys[d..])).collect();
    let r2: Vec<f64> = fits.iter().map(|f| f.r_squared).collect();

    let mut elbow = None;
    let mut best = 1e-12;
    for d in 1..r2.len().saturating_sub(1) {
        let c = (r2[d] - r2[d - 1]) - (r2[d + 1] - r2[d]);
        if c > best {
            best = c;
            elbow = Some(d);
        }
    }
    let chosen = elbow
        .filter(|&d| r2[d] >= threshold)
        .or_else(|| r2.iter().position(|&r| r >= threshold))
        .unwrap_or_else(|| {
            (0..r2.len())
                .fold(0, |b, d| if r2[d] > r2[b] { d } else { b })
        });
    let f = &fits[chosen];
    Ok(ScalingFit {
        log2_c: f.intercept,
        alpha: f.slope,
        r_squared: f.r_squared,
        dropped_prefix: chosen,
        valid: f.r_squared >= threshold,
    })
}

/// `2^{log2 C + α n}`. Refuses to extrapolate a fit below threshold.
pub fn extrapolate(fit: &ScalingFit, n_target: usize) -> Result<f64> {
    if !fit.valid {
        return Err(Error::Domain(format!(
            "refusing to extrapolate a fit with R² = {:.4} below threshold",
            fit.r_squared
        )));
    }
    Ok((fit.log2_c + fit.alpha * n_target as f64).exp2())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub mu: f64,
    pub fit: ScalingFit,
    /// Valid fit with `α < 0`.
    pub concentrated: bool,
    /// Decay base `b = 2^{−α}` of `|κ − μ| ∈ O(b^{−n})`.
    pub base: f64,
}

/// Decides exponential concentration from a series of `|κ − μ|` statistics
/// (the maximum for the deterministic form, the standard deviation for the
/// probabilistic one).
pub fn concentration_check(series: &ScalingSeries, mu: f64, threshold: f64) -> Result<ConcentrationReport> {
    let fit = fit_exponential(series, threshold)?;
    Ok(ConcentrationReport {
        mu,
        fit,
        concentrated: fit.valid && fit.alpha < -1e-9,
        base: (-fit.alpha).exp2(),
    })
}

/// `max |κ_ij − μ|` over independent entries.
pub fn max_deviation(k: &KernelMatrix, mu: f64) -> f64 {
    k.off_diagonal().iter().fold(0.0, |m, v| m.max((v - mu).abs()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub family: KernelFamily,
    /// Template whose qubit count is replaced at every step.
    pub template: FeatureMapConfig,
    pub n_values: Vec<usize>,
    pub gamma: f64,
    /// Adds `n_spread`/`n_ca` series when set.
    pub budget: Option<BudgetParams>,
    /// Adds expressibility and relative-entropy series.
    pub characteristics: bool,
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub series: Vec<ScalingSeries>,
    pub kernels: Vec<KernelMatrix>,
}

/// Builds exact Gram matrices on the first `n` variance-ordered features for
/// each `n` and collects their statistics as scaling series.
pub fn sweep(dataset: &Dataset, opts: &SweepOptions) -> Result<SweepOutput> {
    let max_n = opts.n_values.iter().copied().max().unwrap_or(0);
    if max_n > dataset.n_features() {
        return Err(Error::Config(format!(
            "sweep up to n = {max_n} needs that many features; dataset {} has {}",
            dataset.id,
            dataset.n_features()
        )));
    }
    let mut stats: Vec<(Statistic, Vec<(usize, f64)>)> = Vec::new();
    let mut push = |s: Statistic, n: usize, v: f64| match stats.iter_mut().find(|e| e.0 == s) {
        Some(e) => e.1.push((n, v)),
        None => stats.push((s, vec![(n, v)])),
    };
    let mu = match opts.family {
        KernelFamily::FidelityQ => 0.0,
        KernelFamily::ProjectedQ => 1.0,
    };
    let mut kernels = Vec::with_capacity(opts.n_values.len());
    for &n in &opts.n_values {
        let cfg = opts.template.with_qubits(n);
        let ds = select_features(dataset, n)?;
        let points = ds.points()?;
        let mut k = gram_matrix(&points, &cfg, opts.family, opts.gamma)?;
        k.dataset_id = Some(dataset.id.clone());
        let st = kernel_statistics(&k)?;
        push(Statistic::Mean, n, st.mean);
        push(Statistic::Std, n, st.std);
        push(Statistic::Median, n, st.median);
        push(Statistic::Iqr, n, st.iqr);
        push(Statistic::MaxDeviation, n, max_deviation(&k, mu));
        if let Some(params) = &opts.budget {
            let budget = match opts.family {
                KernelFamily::FidelityQ => dataset_budget(DatasetInput::Kernel(&k), params),
                KernelFamily::ProjectedQ => {
                    let table = reduced_table(&points, &cfg)?;
                    dataset_budget(DatasetInput::WithReduced { kernel: &k, table: &table }, params)
                }
            };
            match budget {
                Ok(b) => {
                    push(Statistic::NSpread, n, b.n_spread as f64);
                    push(Statistic::NCa, n, b.n_ca as f64);
                }
                Err(e) => warn!("no shot budget at n = {n}: {e}"),
            }
        }
        if opts.characteristics {
            push(Statistic::Expressibility, n, expressibility(&points, &cfg)?);
            push(Statistic::RelativeEntropy, n, mean_relative_entropy(&points, &cfg)?);
        }
        info!("sweep {}: n = {n} done", dataset.id);
        kernels.push(k);
    }
    let metadata = SeriesMetadata {
        family: Some(opts.family),
        r: Some(opts.template.repetitions),
        entanglement: Some(opts.template.entanglement),
        dataset_id: Some(dataset.id.clone()),
    };
    let series = stats
        .into_iter()
        .map(|(s, p)| ScalingSeries::new(s, p, metadata.clone()))
        .collect::<Result<_>>()?;
    Ok(SweepOutput { series, kernels })
}

/// Long-format CSV with columns `statistic,n,value,dataset_id`.
pub fn write_series_csv<W: Write>(series: &[ScalingSeries], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["statistic", "n", "value", "dataset_id"])?;
    for s in series {
        let id = s.metadata.dataset_id.clone().unwrap_or_default();
        for &(n, v) in &s.points {
            w.write_record([s.statistic.to_string(), n.to_string(), format!("{v:.17e}"), id.clone()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// A fit together with the series it came from, for JSON output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub statistic: Statistic,
    pub metadata: SeriesMetadata,
    pub threshold: f64,
    pub elbow_rule: String,
    pub fit: Option<ScalingFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub extrapolations: Vec<(usize, Option<f64>)>,
}

/// Fits every series and extrapolates valid fits to `n_targets`.
pub fn fit_all(series: &[ScalingSeries], threshold: f64, n_targets: &[usize]) -> Vec<FitRecord> {
    series
        .iter()
        .map(|s| {
            let fitted = fit_exponential(s, threshold);
            let max_n = s.points.last().map(|p| p.0).unwrap_or(0);
            let extrapolations = match &fitted {
                Ok(f) => n_targets
                    .iter()
                    .map(|&n| {
                        if n < max_n {
                            warn!("extrapolation target n = {n} lies inside the fitted range (max {max_n})");
                        }
                        (n, extrapolate(f, n).ok())
                    })
                    .collect(),
                Err(_) => n_targets.iter().map(|&n| (n, None)).collect(),
            };
            FitRecord {
                statistic: s.statistic,
                metadata: s.metadata.clone(),
                threshold,
                elbow_rule: ELBOW_RULE.into(),
                fit: fitted.as_ref().ok().copied(),
                error: fitted.err().map(|e| e.to_string()),
                extrapolations,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn series(points: Vec<(usize, f64)>) -> ScalingSeries {
        ScalingSeries::new(Statistic::Mean, points, SeriesMetadata::default()).unwrap()
    }

    fn exact() -> Vec<(usize, f64)> {
        (2..=10).map(|n| (n, 8.0 * (-0.5 * n as f64).exp2())).collect()
    }

    #[test]
    fn exact_exponential() {
        let f = fit_exponential(&series(exact()), 0.99).unwrap();
        assert_abs_diff_eq!(f.alpha, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.log2_c, 3.0, epsilon = 1e-12);
        assert_eq!(f.r_squared, 1.0);
        assert_eq!(f.dropped_prefix, 0);
        assert!(f.valid);
    }

    #[test]
    fn elbow_drops_preasymptotic_points() {
        let mut pts = exact();
        for p in pts.iter_mut().take(3) {
            p.1 *= 10.0;
        }
        let f = fit_exponential(&series(pts.clone()), 0.99).unwrap();
        assert_eq!(f.dropped_prefix, 3);
        assert_abs_diff_eq!(f.alpha, -0.5, epsilon = 1e-9);
        // Exhaustive oracle: the smallest drop giving a perfect fit.
        let xs: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1.log2()).collect();
        let first_perfect = (0..=pts.len() - 4)
            .find(|&d| least_squares(&xs[d..], &ys[d..]).r_squared >= 1.0 - 1e-12)
            .unwrap();
        assert_eq!(first_perfect, f.dropped_prefix);
    }

    #[test]
    fn white_noise_is_rejected() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rejected = (0..100)
            .filter(|_| {
                let pts = (2..=10).map(|n| (n, rng.random_range(0.1..1.0))).collect();
                !fit_exponential(&series(pts), 0.99).unwrap().valid
            })
            .count();
        assert!(rejected >= 95, "only {rejected} rejected");
    }

    #[test]
    fn scale_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<(usize, f64)> = (2..=10)
            .map(|n| (n, (-0.8 * n as f64).exp2() * rng.random_range(0.8..1.2)))
            .collect();
        let a = fit_exponential(&series(pts.clone()), 0.9).unwrap();
        let c = 37.0;
        let b = fit_exponential(&series(pts.iter().map(|&(n, v)| (n, c * v)).collect()), 0.9).unwrap();
        assert_abs_diff_eq!(b.log2_c - a.log2_c, c.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.alpha, a.alpha, epsilon = 1e-12);
        assert_abs_diff_eq!(b.r_squared, a.r_squared, epsilon = 1e-12);
        assert_eq!(a.dropped_prefix, b.dropped_prefix);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_exponential(&series(exact()[..3].to_vec()), 0.99),
            Err(Error::InsufficientData(_))
        ));
        let mut pts = exact();
        pts[4].1 = 0.0;
        assert!(matches!(fit_exponential(&series(pts), 0.99), Err(Error::Domain(_))));
        assert!(ScalingSeries::new(Statistic::Std, vec![(3, 1.0), (2, 1.0)], SeriesMetadata::default()).is_err());
    }

    #[test]
    fn extrapolation() {
        let f = fit_exponential(&series(exact()), 0.99).unwrap();
        assert_abs_diff_eq!(extrapolate(&f, 20).unwrap(), 0.0078125, epsilon = 1e-15);
        assert_abs_diff_eq!(extrapolate(&f, 10).unwrap(), 8.0 * (-5f64).exp2(), epsilon = 1e-15);
        let bad = ScalingFit { valid: false, ..f };
        assert!(extrapolate(&bad, 20).is_err());
    }

    #[test]
    fn concentration_reports() {
        let decay = series((2..=10).map(|n| (n, (-(n as f64)).exp2())).collect());
        let r = concentration_check(&decay, 0.0, 0.99).unwrap();
        assert!(r.concentrated);
        assert_abs_diff_eq!(r.base, 2.0, epsilon = 1e-12);
        let flat = series((2..=10).map(|n| (n, 0.3)).collect());
        let r = concentration_check(&flat, 0.0, 0.99).unwrap();
        assert!(!r.concentrated);
        assert_abs_diff_eq!(r.fit.alpha, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn toy_sweep() {
        let ds = Dataset::new(
            "toy",
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.1, 0.5, 0.9], vec![0.4, -0.2, 1.3], vec![-0.7, 0.8, 0.0], vec![1.1, 0.3, -0.6]],
            vec![0, 1, 0, 1],
        )
        .unwrap();
        let opts = SweepOptions {
            family: KernelFamily::FidelityQ,
            template: FeatureMapConfig::new(2, 1, Entanglement::Full),
            n_values: vec![2, 3],
            gamma: 1.0,
            budget: None,
            characteristics: false,
        };
        let out = sweep(&ds, &opts).unwrap();
        assert_eq!(out.kernels.len(), 2);
        for k in &out.kernels {
            for i in 0..k.m() {
                assert_eq!(k.values[[i, i]], 1.0);
            }
        }
        assert!(out.series.iter().all(|s| s.points.len() == 2));
        let mut buf = Vec::new();
        write_series_csv(&out.series, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("statistic,n,value,dataset_id\n"));
        assert!(text.contains("\nmean,2,"));

        let too_many = SweepOptions {
            n_values: vec![2, 4],
            ..opts
        };
        assert!(matches!(sweep(&ds, &too_many), Err(Error::Config(_))));
    }
}
