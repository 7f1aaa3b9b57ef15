//! Spread and concentration-avoidance shot counts for single entries, and the
//! dataset-level budget for a small twonorm kernel.

use qke::dataset::{generate_twonorm, preprocess, select_features};
use qke::kernels::gram_matrix;
use qke::shots::{
    dataset_budget, n_ca_binomial_exact, n_ca_fq, n_ca_pq_normal, n_spread_fq, BudgetParams, DatasetInput,
};
use qke::{Entanglement, FeatureMapConfig, KernelFamily, SpreadTarget};

fn main() -> qke::Result<()> {
    let target = SpreadTarget::new(0.1, 0.2, 0.9)?;
    for kappa in [0.5, 0.1, 0.01] {
        println!("spread, κ = {kappa}: N = {}", n_spread_fq(kappa, &target)?.shots);
    }
    println!("CA fidelity, M = 2^-8, P = 0.99: N = {}", n_ca_fq(2f64.powi(-8), 0.99)?.shots);
    for m in [0.6, 0.55] {
        println!(
            "CA projected, M = {m}: normal {}, exact {}",
            n_ca_pq_normal(m, 0.5, 0.99)?.shots,
            n_ca_binomial_exact(m, 0.5, 0.99)?.shots
        );
    }

    let ds = select_features(&preprocess(&generate_twonorm(40, 20, 7)?)?, 6)?;
    let cfg = FeatureMapConfig::new(6, 2, Entanglement::Linear);
    let k = gram_matrix(&ds.points()?, &cfg, KernelFamily::FidelityQ, 1.0)?;
    let params = BudgetParams {
        eps: 0.5,
        p_spread: 0.9,
        p_ca: 0.99,
        noise: None,
    };
    let b = dataset_budget(DatasetInput::Kernel(&k), &params)?;
    println!(
        "dataset: spread {}, CA {}, required {} ({:?} dominates)",
        b.n_spread, b.n_ca, b.n_required, b.effect_dominant
    );
    Ok(())
}
