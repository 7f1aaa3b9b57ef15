//! Shot-sampled fidelity estimates against the exact value, with and
//! without depolarizing noise.

use qke::measurement::sample_fidelity_stream;
use qke::NoiseModel;

fn main() -> qke::Result<()> {
    let kappa = 0.3;
    for p in [0.0, 0.05] {
        let noise = NoiseModel::new(p)?;
        println!("p = {p} (noisy success probability {:.4})", noise.fidelity_success(kappa, 4));
        for n_shots in [10, 100, 1000, 10_000] {
            let estimates: Vec<f64> = (0..200)
                .map(|s| sample_fidelity_stream(kappa, n_shots, noise, 4, 42, s).map(|r| r.estimate))
                .collect::<qke::Result<_>>()?;
            let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
            let sd = (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (estimates.len() - 1) as f64).sqrt();
            println!("  N = {n_shots:>6}: mean {mean:.4}, sd {sd:.4}");
        }
    }
    Ok(())
}
