//! One-qubit fidelity kernel against its closed form `cos²(x − y)`.

use qke::kernels::fidelity_kernel;
use qke::{embed, DataPoint, Entanglement, FeatureMapConfig};

fn main() -> qke::Result<()> {
    let cfg = FeatureMapConfig::new(1, 1, Entanglement::Linear);
    println!("{:>6} {:>6} {:>10} {:>10}", "x", "y", "kernel", "cos²(x−y)");
    for (x, y) in [(0.0, 0.0), (0.3, 1.1), (1.0, 2.5), (0.5, 0.5 + std::f64::consts::FRAC_PI_2)] {
        let a = embed(&DataPoint::new(vec![x])?, &cfg)?;
        let b = embed(&DataPoint::new(vec![y])?, &cfg)?;
        let k = fidelity_kernel(&a, &b)?;
        println!("{x:>6.3} {y:>6.3} {k:>10.6} {:>10.6}", (x - y).cos().powi(2));
    }
    Ok(())
}
