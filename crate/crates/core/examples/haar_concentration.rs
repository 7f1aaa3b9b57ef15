//! Mean fidelity kernel of a deep, fully entangled map on random inputs
//! decays like `2^{-n}`; fit the exponent.

use qke::concentration::{fit_exponential, ScalingSeries, SeriesMetadata, Statistic};
use qke::kernels::{gram_matrix, kernel_statistics};
use qke::{DataPoint, Entanglement, FeatureMapConfig, KernelFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qke::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut means = Vec::new();
    for n in 2..=8 {
        let points = (0..80)
            .map(|_| DataPoint::new((0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()))
            .collect::<qke::Result<Vec<_>>>()?;
        let cfg = FeatureMapConfig::new(n, 6, Entanglement::Full);
        let k = gram_matrix(&points, &cfg, KernelFamily::FidelityQ, 1.0)?;
        let mean = kernel_statistics(&k)?.mean;
        println!("n = {n}: mean κ = {mean:.5} (2^-n = {:.5})", (-(n as f64)).exp2());
        means.push((n, mean));
    }
    let fit = fit_exponential(&ScalingSeries::new(Statistic::Mean, means, SeriesMetadata::default())?, 0.99)?;
    println!("α = {:.3}, R² = {:.4}, dropped {}", fit.alpha, fit.r_squared, fit.dropped_prefix);
    Ok(())
}
