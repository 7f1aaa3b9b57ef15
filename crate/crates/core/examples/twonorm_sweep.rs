//! Kernel statistics and shot budgets versus qubit count on a twonorm
//! subset, with exponential fits.

use qke::concentration::{fit_all, sweep, SweepOptions};
use qke::dataset::{generate_twonorm, preprocess, stratify};
use qke::shots::BudgetParams;
use qke::{Entanglement, FeatureMapConfig, KernelFamily};

fn main() -> qke::Result<()> {
    let ds = preprocess(&generate_twonorm(400, 20, 3)?)?;
    let subset = stratify(&ds, 50, 4)?.remove(0);
    let opts = SweepOptions {
        family: KernelFamily::FidelityQ,
        template: FeatureMapConfig::new(2, 2, Entanglement::Full),
        n_values: (2..=10).collect(),
        gamma: 1.0,
        budget: Some(BudgetParams {
            eps: 1.0,
            p_spread: 0.9,
            p_ca: 0.99,
            noise: None,
        }),
        characteristics: false,
    };
    let out = sweep(&subset, &opts)?;
    for rec in fit_all(&out.series, 0.99, &[20]) {
        match rec.fit {
            Some(f) => println!(
                "{:>14}: α = {:+.3}, R² = {:.4}, dropped {}, valid {}, n=20 → {:?}",
                rec.statistic.to_string(),
                f.alpha,
                f.r_squared,
                f.dropped_prefix,
                f.valid,
                rec.extrapolations[0].1
            ),
            None => println!("{:>14}: {}", rec.statistic.to_string(), rec.error.unwrap_or_default()),
        }
    }
    Ok(())
}
