//! Expressibility and mean single-qubit relative entropy to the maximally
//! mixed state, for linear and full entanglement.

use qke::characteristics::{expressibility, haar_frame_potential, mean_relative_entropy};
use qke::dataset::{generate_twonorm, preprocess, select_features};
use qke::{Entanglement, FeatureMapConfig};

fn main() -> qke::Result<()> {
    let ds = preprocess(&generate_twonorm(60, 20, 9)?)?;
    println!("{:>3} {:>12} {:>12} {:>12} {:>12} {:>10}", "n", "expr lin", "expr full", "S lin", "S full", "Haar");
    for n in 2..=8 {
        let pts = select_features(&ds, n)?.points()?;
        let lin = FeatureMapConfig::new(n, 2, Entanglement::Linear);
        let full = FeatureMapConfig::new(n, 2, Entanglement::Full);
        println!(
            "{n:>3} {:>12.5} {:>12.5} {:>12.5} {:>12.5} {:>10.5}",
            expressibility(&pts, &lin)?,
            expressibility(&pts, &full)?,
            mean_relative_entropy(&pts, &lin)?,
            mean_relative_entropy(&pts, &full)?,
            haar_frame_potential(n)
        );
    }
    Ok(())
}
