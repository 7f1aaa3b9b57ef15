//! Exact (infinite-shot) fidelity and projected quantum kernels.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use log::warn;
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{self, Error, Result};
use crate::feature_map::{embed, DataPoint, FeatureMapConfig};
use crate::statevector::{ReducedDensityMatrix, StateVector};
use crate::stats;

pub const DEFAULT_GAMMA: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelFamily {
    /// `|⟨ψ(y)|ψ(x)⟩|²`.
    #[serde(rename = "fidelity", alias = "fq")]
    FidelityQ,
    /// `exp(−γ Σ_k ‖ρ_k(x) − ρ_k(y)‖²₂)`.
    #[serde(rename = "projected", alias = "pq")]
    ProjectedQ,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelFamily::FidelityQ => "fidelity",
            KernelFamily::ProjectedQ => "projected",
        })
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fidelity" | "fq" => Ok(KernelFamily::FidelityQ),
            "projected" | "pq" => Ok(KernelFamily::ProjectedQ),
            other => Err(Error::Config(format!("unknown kernel family {other:?}"))),
        }
    }
}

pub fn fidelity_kernel(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner_product(b)?.norm_sqr().min(1.0))
}

pub fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("gamma must be positive, got {gamma}")))
    }
}

/// `Σ_k ‖ρ_k(x) − ρ_k(y)‖²₂`.
pub fn projected_distance(a: &[ReducedDensityMatrix], b: &[ReducedDensityMatrix]) -> Result<f64> {
    error::shape(a.len(), b.len())?;
    if a.is_empty() {
        return Err(Error::InsufficientData("no reduced density matrices".into()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x.distance_sqr(y)).sum())
}

pub fn projected_kernel(a: &[ReducedDensityMatrix], b: &[ReducedDensityMatrix], gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok((-gamma * projected_distance(a, b)?).exp())
}

/// Sampling provenance attached to kernel matrices estimated from shots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingInfo {
    pub n_shots: u64,
    pub p_error: f64,
    pub seed: u64,
    pub total_shots: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    pub values: Array2<f64>,
    pub family: KernelFamily,
    /// Only meaningful for the projected family.
    pub gamma: Option<f64>,
    pub config: FeatureMapConfig,
    pub dataset_id: Option<String>,
    pub sampling: Option<SamplingInfo>,
}

/// JSON sidecar describing a serialized kernel matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelMetadata {
    pub family: KernelFamily,
    pub gamma: Option<f64>,
    pub n_qubits: usize,
    pub r: usize,
    pub entanglement: crate::feature_map::Entanglement,
    pub dataset_id: Option<String>,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none", flatten)]
    pub sampling: Option<SamplingInfo>,
}

impl KernelMatrix {
    pub fn m(&self) -> usize {
        self.values.nrows()
    }

    /// The `m(m−1)/2` strictly upper-triangular entries, row-major.
    pub fn off_diagonal(&self) -> Vec<f64> {
        let m = self.m();
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .map(|(i, j)| self.values[[i, j]])
            .collect()
    }

    pub fn metadata(&self) -> KernelMetadata {
        KernelMetadata {
            family: self.family,
            gamma: self.gamma,
            n_qubits: self.config.n_qubits,
            r: self.config.repetitions,
            entanglement: self.config.entanglement,
            dataset_id: self.dataset_id.clone(),
            m: self.m(),
            sampling: self.sampling.clone(),
        }
    }

    /// Writes the `m×m` values as CSV with a `k0,k1,…` header row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        w.write_record((0..self.m()).map(|j| format!("k{j}")))?;
        for row in self.values.rows() {
            w.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads an `m×m` CSV with a header row back into a value matrix.
    pub fn read_values_csv<R: Read>(reader: R) -> Result<Array2<f64>> {
        let mut rd = csv::ReaderBuilder::new().from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Dataset(format!("bad kernel value {s:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let m = rows.len();
        if m < 2 {
            return Err(Error::InsufficientData("kernel matrix needs m ≥ 2".into()));
        }
        let mut out = Array2::zeros((m, m));
        for (i, row) in rows.iter().enumerate() {
            error::shape(m, row.len())?;
            for (j, v) in row.iter().enumerate() {
                out[[i, j]] = *v;
            }
        }
        Ok(out)
    }
}

/// Per-point quantum data the two kernel families consume.
pub(crate) enum Embedded {
    States(Vec<StateVector>),
    Reduced(Vec<Vec<ReducedDensityMatrix>>),
}

pub(crate) fn embed_all(points: &[DataPoint], cfg: &FeatureMapConfig, family: KernelFamily) -> Result<Embedded> {
    cfg.validate()?;
    let states: Vec<StateVector> = points.par_iter().map(|x| embed(x, cfg)).collect::<Result<_>>()?;
    Ok(match family {
        KernelFamily::FidelityQ => Embedded::States(states),
        KernelFamily::ProjectedQ => Embedded::Reduced(states.iter().map(StateVector::reduced_matrices).collect()),
    })
}

/// Fills a symmetric matrix with unit diagonal from an upper-triangle rule.
pub(crate) fn symmetric_from<F>(m: usize, entry: F) -> Result<Array2<f64>>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let vals: Vec<f64> = pairs.par_iter().map(|&(i, j)| entry(i, j)).collect::<Result<_>>()?;
    let mut out = Array2::from_elem((m, m), 1.0);
    for (&(i, j), v) in pairs.iter().zip(vals) {
        out[[i, j]] = v;
        out[[j, i]] = v;
    }
    Ok(out)
}

pub fn gram_matrix(
    points: &[DataPoint],
    cfg: &FeatureMapConfig,
    family: KernelFamily,
    gamma: f64,
) -> Result<KernelMatrix> {
    let m = points.len();
    if m < 2 {
        return Err(Error::InsufficientData(format!("Gram matrix needs m ≥ 2, got {m}")));
    }
    if family == KernelFamily::ProjectedQ {
        check_gamma(gamma)?;
    }
    let values = match embed_all(points, cfg, family)? {
        Embedded::States(s) => symmetric_from(m, |i, j| fidelity_kernel(&s[i], &s[j]))?,
        Embedded::Reduced(r) => symmetric_from(m, |i, j| projected_kernel(&r[i], &r[j], gamma))?,
    };
    Ok(KernelMatrix {
        values,
        family,
        gamma: (family == KernelFamily::ProjectedQ).then_some(gamma),
        config: *cfg,
        dataset_id: None,
        sampling: None,
    })
}

/// Reduced matrices for every point, qubit 0 first.
pub fn reduced_table(points: &[DataPoint], cfg: &FeatureMapConfig) -> Result<Vec<Vec<ReducedDensityMatrix>>> {
    match embed_all(points, cfg, KernelFamily::ProjectedQ)? {
        Embedded::Reduced(r) => Ok(r),
        Embedded::States(_) => unreachable!(),
    }
}

/// Ensemble statistics over the independent (strictly upper-triangular)
/// kernel entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelStatistics {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub iqr: f64,
    /// Mean of `ln κ` (projected family only); `-inf` when an entry is 0.
    pub log_mean_pq: Option<f64>,
}

pub fn kernel_statistics(k: &KernelMatrix) -> Result<KernelStatistics> {
    if k.m() < 2 {
        return Err(Error::InsufficientData("statistics need m ≥ 2".into()));
    }
    let vals = k.off_diagonal();
    Ok(statistics_of(&vals, k.family))
}

pub(crate) fn statistics_of(vals: &[f64], family: KernelFamily) -> KernelStatistics {
    let sorted = stats::sorted(vals);
    let log_mean_pq = (family == KernelFamily::ProjectedQ).then(|| {
        if vals.iter().any(|&v| v <= 0.0) {
            warn!("projected kernel has vanishing entries; log-mean is -inf");
            f64::NEG_INFINITY
        } else {
            stats::mean(&vals.iter().map(|v| v.ln()).collect::<Vec<_>>())
        }
    });
    KernelStatistics {
        mean: stats::mean(vals),
        std: stats::std_dev(vals),
        median: stats::quantile_sorted(&sorted, 0.5),
        iqr: stats::quantile_sorted(&sorted, 0.75) - stats::quantile_sorted(&sorted, 0.25),
        log_mean_pq,
    }
}
