//! Finite-shot simulation of quantum kernel estimation.
//!
//! Each shot is a Bernoulli trial, so `N` shots give a binomial count. Noise
//! follows the depolarizing model: with probability `p` a run ends in the
//! maximally mixed state, which moves a success probability `q` to
//! `(1 − p)·q + p·q̃` (`q̃ = 2^{−n}` for the vacuum projector, `½` for any
//! single-qubit projector).
//!
//! Randomness is derived from a single seed. Every independent binomial draw
//! owns a ChaCha stream selected by its (entry, basis) index, so results do
//! not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_map::{DataPoint, FeatureMapConfig};
use crate::kernels::{
    check_gamma, embed_all, fidelity_kernel, projected_kernel, symmetric_from, Embedded, KernelFamily,
    KernelMatrix, SamplingInfo,
};
use crate::resources::total_shots;
use crate::statevector::ReducedDensityMatrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p_error: f64,
}

impl NoiseModel {
    pub const NOISELESS: NoiseModel = NoiseModel { p_error: 0.0 };

    pub fn new(p_error: f64) -> Result<Self> {
        check_probability("p_error", p_error)?;
        Ok(Self { p_error })
    }

    /// `(1 − p)·q + p·q_noise`.
    pub fn depolarize(&self, q: f64, q_noise: f64) -> f64 {
        (1.0 - self.p_error) * q + self.p_error * q_noise
    }

    /// Success probability of the vacuum projector on `n` qubits.
    pub fn fidelity_success(&self, kappa: f64, n_qubits: usize) -> f64 {
        self.depolarize(kappa, vacuum_overlap_mixed(n_qubits))
    }
}

/// `Tr[|0⟩⟨0| I/2^n] = 2^{−n}`.
pub fn vacuum_overlap_mixed(n_qubits: usize) -> f64 {
    (-(n_qubits as f64)).exp2()
}

pub(crate) fn check_probability(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} is not a probability")))
    }
}

/// A ChaCha generator on the stream reserved for one draw.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw(n_shots: u64, q: f64, seed: u64, stream: u64) -> Result<u64> {
    let dist = Binomial::new(n_shots, q.clamp(0.0, 1.0)).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dist.sample(&mut stream_rng(seed, stream)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotResult {
    pub estimate: f64,
    pub n_shots: u64,
    pub successes: u64,
    pub seed: u64,
}

/// Estimates a fidelity kernel value from `n_shots` vacuum-projector trials.
pub fn sample_fidelity(
    kappa: f64,
    n_shots: u64,
    noise: NoiseModel,
    n_qubits: usize,
    seed: u64,
) -> Result<ShotResult> {
    sample_fidelity_stream(kappa, n_shots, noise, n_qubits, seed, 0)
}

pub fn sample_fidelity_stream(
    kappa: f64,
    n_shots: u64,
    noise: NoiseModel,
    n_qubits: usize,
    seed: u64,
    stream: u64,
) -> Result<ShotResult> {
    check_probability("kappa", kappa)?;
    check_probability("p_error", noise.p_error)?;
    check_shots(n_shots)?;
    let q = noise.fidelity_success(kappa, n_qubits);
    let successes = draw(n_shots, q, seed, stream)?;
    Ok(ShotResult {
        estimate: successes as f64 / n_shots as f64,
        n_shots,
        successes,
        seed,
    })
}

fn check_shots(n_shots: u64) -> Result<()> {
    if n_shots == 0 {
        Err(Error::Domain("shot count must be ≥ 1".into()))
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyResult {
    /// Clipped, physical estimates, one per qubit.
    pub estimates: Vec<ReducedDensityMatrix>,
    /// Success counts in the `(D, R, I)` bases, one triple per qubit.
    pub counts: Vec<[u64; 3]>,
    pub n_shots: u64,
    pub seed: u64,
}

/// Pulls an estimated single-qubit matrix back into the physical set:
/// `ρ^D ∈ [0, 1]` and `(ρ^R)² + (ρ^I)² ≤ ρ^D(1 − ρ^D)`.
pub fn clip_to_physical(rho: ReducedDensityMatrix) -> ReducedDensityMatrix {
    let diag = rho.diag.clamp(0.0, 1.0);
    let bound = diag * (1.0 - diag);
    let off = rho.re * rho.re + rho.im * rho.im;
    if off > bound {
        let s = if off > 0.0 { (bound / off).sqrt() } else { 0.0 };
        ReducedDensityMatrix::from_components(diag, rho.re * s, rho.im * s)
    } else {
        ReducedDensityMatrix::from_components(diag, rho.re, rho.im)
    }
}

/// Single-qubit tomography of every qubit with `n_shots` shots per basis.
pub fn sample_tomography(
    rhos: &[ReducedDensityMatrix],
    n_shots: u64,
    noise: NoiseModel,
    seed: u64,
) -> Result<TomographyResult> {
    sample_tomography_stream(rhos, n_shots, noise, seed, 0)
}

/// Like [`sample_tomography`] with draws taken from streams
/// `3·(stream_base + k) + basis`.
pub fn sample_tomography_stream(
    rhos: &[ReducedDensityMatrix],
    n_shots: u64,
    noise: NoiseModel,
    seed: u64,
    stream_base: u64,
) -> Result<TomographyResult> {
    check_probability("p_error", noise.p_error)?;
    check_shots(n_shots)?;
    let mut counts = Vec::with_capacity(rhos.len());
    let mut estimates = Vec::with_capacity(rhos.len());
    for (k, rho) in rhos.iter().enumerate() {
        let q = rho.measured_values();
        let mut c = [0u64; 3];
        let mut m_hat = [0.0; 3];
        for basis in 0..3 {
            let qf = noise.depolarize(q[basis], 0.5);
            let stream = 3 * (stream_base + k as u64) + basis as u64;
            c[basis] = draw(n_shots, qf, seed, stream)?;
            m_hat[basis] = c[basis] as f64 / n_shots as f64;
        }
        counts.push(c);
        estimates.push(clip_to_physical(ReducedDensityMatrix::from_measured_values(m_hat)));
    }
    Ok(TomographyResult {
        estimates,
        counts,
        n_shots,
        seed,
    })
}

/// Shot-estimated Gram matrix. Fidelity entries are sampled independently
/// with `n_shots` shots each; projected entries are built classically from one
/// tomography run per data point.
#[allow(clippy::too_many_arguments)]
pub fn sample_gram(
    points: &[DataPoint],
    cfg: &FeatureMapConfig,
    family: KernelFamily,
    gamma: f64,
    n_shots: u64,
    noise: NoiseModel,
    seed: u64,
) -> Result<KernelMatrix> {
    let m = points.len();
    if m < 2 {
        return Err(Error::InsufficientData(format!("Gram matrix needs m ≥ 2, got {m}")));
    }
    check_shots(n_shots)?;
    check_probability("p_error", noise.p_error)?;
    if family == KernelFamily::ProjectedQ {
        check_gamma(gamma)?;
    }
    let n = cfg.n_qubits;
    let values = match embed_all(points, cfg, family)? {
        Embedded::States(s) => symmetric_from(m, |i, j| {
            let kappa = fidelity_kernel(&s[i], &s[j])?;
            let stream = (i * m + j) as u64;
            Ok(sample_fidelity_stream(kappa, n_shots, noise, n, seed, stream)?.estimate)
        })?,
        Embedded::Reduced(r) => {
            let est: Vec<Vec<ReducedDensityMatrix>> = r
                .par_iter()
                .enumerate()
                .map(|(i, rhos)| {
                    sample_tomography_stream(rhos, n_shots, noise, seed, (i * n) as u64).map(|t| t.estimates)
                })
                .collect::<Result<_>>()?;
            symmetric_from(m, |i, j| projected_kernel(&est[i], &est[j], gamma))?
        }
    };
    Ok(KernelMatrix {
        values,
        family,
        gamma: (family == KernelFamily::ProjectedQ).then_some(gamma),
        config: *cfg,
        dataset_id: None,
        sampling: Some(SamplingInfo {
            n_shots,
            p_error: noise.p_error,
            seed,
            total_shots: total_shots(family, m as u64, n_shots),
        }),
    })
}
