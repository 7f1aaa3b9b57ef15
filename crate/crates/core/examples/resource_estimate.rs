//! Runtime, energy and qubit counts for a shot budget, ideal and
//! error-corrected, plus the crossover against a classical cost model.

use qke::resources::{
    classical_cost, crossover_n, quantum_cost, ClassicalProfile, Execution, HardwareProfile, Workload,
};
use qke::{Entanglement, FeatureMapConfig, KernelFamily};

fn main() -> qke::Result<()> {
    let hw = HardwareProfile::default();
    let classical = ClassicalProfile::default();
    let m = 100;
    for family in [KernelFamily::FidelityQ, KernelFamily::ProjectedQ] {
        let cfg = FeatureMapConfig::new(20, 2, Entanglement::Full);
        let work = Workload::new(&cfg, family, m, 10_000);
        for execution in [Execution::Ideal, Execution::Corrected { error_budget: 1e-3 }] {
            let q = quantum_cost(&work, &hw, execution)?;
            println!(
                "{family:?} {execution:?}: {} shots, {:.3e} s, {:.3e} J, {} physical qubits, d = {:?}",
                q.total_shots, q.runtime_s, q.energy_j, q.physical_qubits, q.code_distance
            );
        }
        let c = classical_cost(family, 20, m, &classical)?;
        println!("{family:?} classical: {:.3e} s, {:.3e} J", c.runtime_s, c.energy_j);
        let shots_at = |n: usize| (10.0 + 0.5 * n as f64).exp2().ceil() as u64;
        let cross = crossover_n(family, m, &cfg, shots_at, &hw, Execution::Ideal, &classical, 1..=60)?;
        println!("{family:?} crossover n: {cross:?}");
    }
    Ok(())
}
