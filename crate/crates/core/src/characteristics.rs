//! Feature-map diagnostics: a dataset estimate of expressibility and the
//! mean single-qubit relative entropy to the maximally mixed state.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feature_map::{embed, DataPoint, FeatureMapConfig};
use crate::kernels::fidelity_kernel;
use crate::statevector::{ReducedDensityMatrix, StateVector};

/// Second frame potential of the Haar ensemble, `1 / (2^{n−1}(2^n + 1))`.
pub fn haar_frame_potential(n_qubits: usize) -> f64 {
    let d = (n_qubits as f64).exp2();
    1.0 / (d / 2.0 * (d + 1.0))
}

fn embed_points(points: &[DataPoint], cfg: &FeatureMapConfig) -> Result<Vec<StateVector>> {
    if points.is_empty() {
        return Err(Error::InsufficientData("no data points".into()));
    }
    cfg.validate()?;
    points.par_iter().map(|x| embed(x, cfg)).collect()
}

/// `(1/m²) Σ_{i,j} F_ij² − 1/(2^{n−1}(2^n + 1))` over all ordered pairs,
/// diagonal included, where `F_ij = |⟨ψ_j|ψ_i⟩|²`.
pub fn expressibility(points: &[DataPoint], cfg: &FeatureMapConfig) -> Result<f64> {
    let states = embed_points(points, cfg)?;
    let m = states.len();
    let off: f64 = (0..m)
        .into_par_iter()
        .map(|i| {
            (i + 1..m)
                .map(|j| fidelity_kernel(&states[i], &states[j]).map(|f| f * f))
                .sum::<Result<f64>>()
        })
        .sum::<Result<f64>>()?;
    let total = m as f64 + 2.0 * off;
    Ok(total / (m * m) as f64 - haar_frame_potential(cfg.n_qubits))
}

/// `S(ρ || I/2) = λ ln λ + (1 − λ) ln(1 − λ) + ln 2`, in nats.
pub fn relative_entropy_to_mixed(rho: &ReducedDensityMatrix) -> f64 {
    let lambda = rho.eigenvalues()[0].clamp(0.0, 1.0);
    let xlnx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    (xlnx(lambda) + xlnx(1.0 - lambda) + std::f64::consts::LN_2).max(0.0)
}

/// Relative entropy averaged over qubits, then over points.
pub fn mean_relative_entropy(points: &[DataPoint], cfg: &FeatureMapConfig) -> Result<f64> {
    let states = embed_points(points, cfg)?;
    let per_point: Vec<f64> = states
        .par_iter()
        .map(|s| {
            let rhos = s.reduced_matrices();
            rhos.iter().map(relative_entropy_to_mixed).sum::<f64>() / rhos.len() as f64
        })
        .collect();
    Ok(per_point.iter().sum::<f64>() / per_point.len() as f64)
}
