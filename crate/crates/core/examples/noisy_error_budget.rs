//! Largest tolerable error probability per run, and how depolarizing noise
//! inflates the concentration-avoidance shot count.

use qke::shots::{error_budget, n_ca_noisy, CaMethod};
use qke::{KernelFamily, NoiseModel};

fn main() -> qke::Result<()> {
    for n in [4, 8, 12] {
        let fq = error_budget(KernelFamily::FidelityQ, 0.05, 0.5, 0.02, n)?;
        let pq = error_budget(KernelFamily::ProjectedQ, 0.3, 0.5, 0.02, n)?;
        println!("n = {n}: p_max fidelity {:.4}, projected {:.4}", fq.p_max, pq.p_max);
    }
    for p in [0.0, 0.01, 0.05, 0.1] {
        let noise = NoiseModel::new(p)?;
        let fq = n_ca_noisy(KernelFamily::FidelityQ, 0.01, 0.0, 0.99, noise, 6, CaMethod::Normal)?;
        let pq = n_ca_noisy(KernelFamily::ProjectedQ, 0.6, 0.5, 0.99, noise, 6, CaMethod::Exact)?;
        println!("p = {p}: CA fidelity {}, projected {}", fq.shots, pq.shots);
    }
    Ok(())
}
