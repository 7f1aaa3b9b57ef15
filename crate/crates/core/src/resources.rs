//! Runtime, energy and qubit-count estimates for executing a shot budget on
//! ideal or surface-code error-corrected hardware, and a classical baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_map::{Entanglement, FeatureMapConfig};
use crate::kernels::KernelFamily;

/// Largest code distance the chooser will consider.
pub const MAX_CODE_DISTANCE: u32 = 51;

/// Shots needed for a whole Gram matrix with `n_shots` per estimated
/// quantity: `N·m(m−1)/2` circuits for the fidelity family, `3mN` for
/// per-point tomography in the projected family.
pub fn total_shots(family: KernelFamily, m: u64, n_shots: u64) -> u64 {
    match family {
        KernelFamily::FidelityQ => n_shots.saturating_mul(m * m.saturating_sub(1) / 2),
        KernelFamily::ProjectedQ => n_shots.saturating_mul(3 * m),
    }
}

/// Parallel two-qubit layers needed by the entangling pattern. Linear chains
/// are applied sequentially; full connectivity uses a round-robin schedule.
pub fn pair_layers(n_qubits: usize, entanglement: Entanglement) -> usize {
    if n_qubits < 2 {
        return 0;
    }
    match entanglement {
        Entanglement::Linear => n_qubits - 1,
        Entanglement::Full if n_qubits.is_multiple_of(2) => n_qubits - 1,
        Entanglement::Full => n_qubits,
    }
}

/// Gate layers of one embedding `U(x)`.
pub fn embed_depth(cfg: &FeatureMapConfig) -> usize {
    cfg.repetitions * (1 + pair_layers(cfg.n_qubits, cfg.entanglement))
}

/// Gate layers of the circuit run per shot: `U†(y)U(x)` for the fidelity
/// family, `U(x)` plus a basis change for tomography.
pub fn circuit_depth(cfg: &FeatureMapConfig, family: KernelFamily) -> usize {
    match family {
        KernelFamily::FidelityQ => 2 * embed_depth(cfg),
        KernelFamily::ProjectedQ => embed_depth(cfg) + 1,
    }
}

fn check_distance(d: u32) -> Result<()> {
    if d >= 3 && d % 2 == 1 {
        Ok(())
    } else {
        Err(Error::Domain(format!("code distance must be odd and ≥ 3, got {d}")))
    }
}

/// Surface-code logical error rate `0.03·(p/0.01)^{(d+1)/2}`.
pub fn logical_error_rate(d: u32, p_phys: f64) -> Result<f64> {
    check_distance(d)?;
    if !(p_phys > 0.0 && p_phys < 1.0) {
        return Err(Error::Domain(format!("physical error rate must lie in (0, 1), got {p_phys}")));
    }
    Ok(0.03 * (p_phys / 0.01).powi(d.div_ceil(2) as i32))
}

/// Smallest odd distance `d ≥ 3` with `n_logical · layers · p_L(d) ≤ budget`.
pub fn choose_code_distance(error_budget: f64, n_logical: usize, layers: usize, p_phys: f64) -> Result<u32> {
    if !(error_budget > 0.0 && error_budget < 1.0) {
        return Err(Error::Domain(format!("error budget must lie in (0, 1), got {error_budget}")));
    }
    let ops = (n_logical * layers).max(1) as f64;
    let mut d = 3;
    while d <= MAX_CODE_DISTANCE {
        if ops * logical_error_rate(d, p_phys)? <= error_budget {
            return Ok(d);
        }
        d += 2;
    }
    Err(Error::Unreachable(format!(
        "no code distance up to {MAX_CODE_DISTANCE} reaches error budget {error_budget:e} \
         for {ops} logical operations at p_phys = {p_phys:e} (p_L({MAX_CODE_DISTANCE}) = {:e})",
        logical_error_rate(MAX_CODE_DISTANCE, p_phys)?
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HardwareProfile {
    /// Seconds per physical gate layer.
    pub t_gate: f64,
    /// Seconds per physical measurement.
    pub t_meas: f64,
    pub p_phys: f64,
    /// Watts drawn per physical qubit.
    pub power_per_physical_qubit: f64,
    /// Physical qubits per logical qubit are `coefficient · d²`.
    pub physical_per_logical_coefficient: f64,
}

impl Default for HardwareProfile {
    fn default() -> Self {
        Self {
            t_gate: 50e-9,
            t_meas: 100e-9,
            p_phys: 1e-3,
            power_per_physical_qubit: 0.030,
            physical_per_logical_coefficient: 2.0,
        }
    }
}

impl HardwareProfile {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.t_gate,
            self.t_meas,
            self.p_phys,
            self.power_per_physical_qubit,
            self.physical_per_logical_coefficient,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) && self.p_phys < 1.0 {
            Ok(())
        } else {
            Err(Error::Config("hardware profile values must be positive (p_phys < 1)".into()))
        }
    }

    pub fn physical_qubits_per_logical(&self, d: u32) -> u64 {
        (self.physical_per_logical_coefficient * (d as f64).powi(2)).ceil() as u64
    }
}

/// How the circuit is executed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Execution {
    Ideal,
    /// Surface-code protected, with a tolerated error probability per run.
    Corrected { error_budget: f64 },
}

/// Work to be executed: a shot budget applied to a Gram matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub family: KernelFamily,
    pub n_qubits: usize,
    pub m: usize,
    pub n_shots: u64,
    pub layers: usize,
}

impl Workload {
    pub fn new(cfg: &FeatureMapConfig, family: KernelFamily, m: usize, n_shots: u64) -> Self {
        Self {
            family,
            n_qubits: cfg.n_qubits,
            m,
            n_shots,
            layers: circuit_depth(cfg, family),
        }
    }

    pub fn total_shots(&self) -> u64 {
        total_shots(self.family, self.m as u64, self.n_shots)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumCost {
    pub total_shots: u64,
    pub layers: usize,
    pub runtime_s: f64,
    pub energy_j: f64,
    pub physical_qubits: u64,
    pub code_distance: Option<u32>,
}

/// Runtime `total_shots · (layers · t_gate + t_meas)` and energy
/// `runtime · physical_qubits · power`. Under error correction both times
/// become the logical cycle `d · (t_gate + t_meas)`.
pub fn quantum_cost(work: &Workload, profile: &HardwareProfile, execution: Execution) -> Result<QuantumCost> {
    profile.validate()?;
    if work.m < 2 || work.n_shots == 0 || work.n_qubits == 0 {
        return Err(Error::Domain("workload needs m ≥ 2, N ≥ 1 and n ≥ 1".into()));
    }
    let (t_gate, t_meas, physical_qubits, code_distance) = match execution {
        Execution::Ideal => (profile.t_gate, profile.t_meas, work.n_qubits as u64, None),
        Execution::Corrected { error_budget } => {
            let d = choose_code_distance(error_budget, work.n_qubits, work.layers, profile.p_phys)?;
            let cycle = d as f64 * (profile.t_gate + profile.t_meas);
            let qubits = work.n_qubits as u64 * profile.physical_qubits_per_logical(d);
            (cycle, cycle, qubits, Some(d))
        }
    };
    let total = work.total_shots();
    let runtime_s = total as f64 * (work.layers as f64 * t_gate + t_meas);
    Ok(QuantumCost {
        total_shots: total,
        layers: work.layers,
        runtime_s,
        energy_j: runtime_s * physical_qubits as f64 * profile.power_per_physical_qubit,
        physical_qubits,
        code_distance,
    })
}

/// Classical simulation baseline. The constants other than the exponents
/// are placeholders for a machine that has not been measured; calibrate
/// `c0` with [`ClassicalProfile::calibrated`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassicalProfile {
    pub alpha_fq: f64,
    pub alpha_pq: f64,
    /// Floating-point operations per kernel entry (or per point) at `n = 0`.
    pub c0: f64,
    /// Sustained floating-point operations per second.
    pub flops: f64,
    pub watts: f64,
}

impl Default for ClassicalProfile {
    fn default() -> Self {
        Self {
            alpha_fq: 1.07,
            alpha_pq: 2.30,
            c0: 1e3,
            flops: 1e12,
            watts: 500.0,
        }
    }
}

impl ClassicalProfile {
    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha_fq, self.alpha_pq, self.c0, self.flops, self.watts];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("classical profile values must be positive".into()))
        }
    }

    pub fn alpha(&self, family: KernelFamily) -> f64 {
        match family {
            KernelFamily::FidelityQ => self.alpha_fq,
            KernelFamily::ProjectedQ => self.alpha_pq,
        }
    }

    /// Copy with `c0` chosen so that the model reproduces a measured runtime.
    pub fn calibrated(self, family: KernelFamily, n_qubits: usize, m: usize, measured_runtime_s: f64) -> Result<Self> {
        let unit = classical_cost(family, n_qubits, m, &Self { c0: 1.0, ..self })?;
        Ok(Self {
            c0: measured_runtime_s / unit.runtime_s,
            ..self
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCost {
    pub runtime_s: f64,
    pub energy_j: f64,
}

fn work_items(family: KernelFamily, m: usize) -> f64 {
    match family {
        KernelFamily::FidelityQ => (m * m.saturating_sub(1) / 2) as f64,
        KernelFamily::ProjectedQ => m as f64,
    }
}

/// `c0 · 2^{α n} · items / flops`, with items the pair count (fidelity) or
/// point count (projected).
pub fn classical_cost(family: KernelFamily, n_qubits: usize, m: usize, profile: &ClassicalProfile) -> Result<ClassicalCost> {
    profile.validate()?;
    let ops = profile.c0 * (profile.alpha(family) * n_qubits as f64).exp2() * work_items(family, m);
    let runtime_s = ops / profile.flops;
    Ok(ClassicalCost {
        runtime_s,
        energy_j: runtime_s * profile.watts,
    })
}

/// Smallest `n` in `n_range` whose quantum runtime is below the classical
/// one. `shots_at(n)` supplies the per-quantity shot budget at that size.
#[allow(clippy::too_many_arguments)]
pub fn crossover_n<F>(
    family: KernelFamily,
    m: usize,
    template: &FeatureMapConfig,
    shots_at: F,
    hardware: &HardwareProfile,
    execution: Execution,
    classical: &ClassicalProfile,
    n_range: std::ops::RangeInclusive<usize>,
) -> Result<Option<usize>>
where
    F: Fn(usize) -> u64,
{
    for n in n_range {
        let cfg = template.with_qubits(n);
        let q = quantum_cost(&Workload::new(&cfg, family, m, shots_at(n)), hardware, execution)?;
        let c = classical_cost(family, n, m, classical)?;
        if q.runtime_s < c.runtime_s {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Scenario summary written by the `resources` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub family: KernelFamily,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub n_shots: u64,
    pub total_shots: u64,
    pub layers: usize,
    pub runtime_s: f64,
    pub energy_j: f64,
    pub physical_qubits: u64,
    pub code_distance: Option<u32>,
    pub classical_runtime_s: f64,
    pub classical_energy_j: f64,
    pub crossover_n: Option<usize>,
}

impl ScenarioReport {
    pub fn new(work: &Workload, q: &QuantumCost, c: &ClassicalCost, crossover_n: Option<usize>) -> Self {
        Self {
            family: work.family,
            n: work.n_qubits,
            m: work.m,
            n_shots: work.n_shots,
            total_shots: q.total_shots,
            layers: q.layers,
            runtime_s: q.runtime_s,
            energy_j: q.energy_j,
            physical_qubits: q.physical_qubits,
            code_distance: q.code_distance,
            classical_runtime_s: c.runtime_s,
            classical_energy_j: c.energy_j,
            crossover_n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn shot_totals() {
        assert_eq!(total_shots(KernelFamily::FidelityQ, 100, 1000), 4_950_000);
        assert_eq!(total_shots(KernelFamily::ProjectedQ, 100, 1000), 300_000);
        assert_eq!(total_shots(KernelFamily::FidelityQ, 2, 77), 77);
    }

    #[test]
    fn depths() {
        let lin = FeatureMapConfig::new(4, 1, Entanglement::Linear);
        assert_eq!(circuit_depth(&lin, KernelFamily::ProjectedQ), 5);
        assert_eq!(circuit_depth(&lin, KernelFamily::FidelityQ), 2 * embed_depth(&lin));
        let twice = FeatureMapConfig::new(4, 2, Entanglement::Linear);
        assert_eq!(embed_depth(&twice), 2 * embed_depth(&lin));
        assert_eq!(pair_layers(4, Entanglement::Full), 3);
        assert_eq!(pair_layers(5, Entanglement::Full), 5);
        assert_eq!(pair_layers(1, Entanglement::Full), 0);
    }

    /// Round-robin schedule oracle: every pair appears exactly once and no
    /// qubit is used twice in a round.
    #[test]
    fn full_schedule_is_a_proper_edge_colouring() {
        for n in 2..=9usize {
            let slots = if n % 2 == 0 { n } else { n + 1 };
            let mut seen = std::collections::BTreeSet::new();
            for round in 0..slots - 1 {
                let mut used = vec![false; slots];
                for k in 0..slots / 2 {
                    let a = if k == 0 { slots - 1 } else { (round + k) % (slots - 1) };
                    let b = (round + slots - 1 - k) % (slots - 1);
                    assert!(!used[a] && !used[b]);
                    used[a] = true;
                    used[b] = true;
                    if a < n && b < n {
                        seen.insert((a.min(b), a.max(b)));
                    }
                }
            }
            assert_eq!(seen.len(), n * (n - 1) / 2);
            assert_eq!(slots - 1, pair_layers(n, Entanglement::Full));
        }
    }

    #[test]
    fn logical_rates() {
        assert_eq!(logical_error_rate(5, 1e-3).unwrap(), 0.03 * 0.1f64.powi(3));
        assert_relative_eq!(logical_error_rate(5, 1e-3).unwrap(), 3e-5, max_relative = 1e-12);
        assert_relative_eq!(logical_error_rate(3, 1e-2).unwrap(), 0.03, max_relative = 1e-15);
        assert!(logical_error_rate(4, 1e-3).is_err());
        let mut prev = 1.0;
        for d in (3..=21).step_by(2) {
            let p = logical_error_rate(d, 5e-3).unwrap();
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn code_distance_choice() {
        // p_L(3) = 3e-4, p_L(5) = 3e-5 at p_phys = 1e-3.
        assert_eq!(choose_code_distance(1e-2, 10, 1, 1e-3).unwrap(), 3);
        assert_eq!(choose_code_distance(1e-3, 10, 1, 1e-3).unwrap(), 5);
        // Scan oracle for a tiny budget.
        let (budget, ops) = (1e-30, 12usize);
        let d = choose_code_distance(budget, 3, 4, 1e-4).unwrap();
        let oracle = (3..=51u32)
            .step_by(2)
            .find(|&d| ops as f64 * 0.03 * 0.01f64.powi(d.div_ceil(2) as i32) <= budget)
            .unwrap();
        assert_eq!(d, oracle);
        assert!(d > 3 && ops as f64 * logical_error_rate(d - 2, 1e-4).unwrap() > budget);
        assert!(matches!(choose_code_distance(budget, 3, 4, 1e-3), Err(Error::Unreachable(_))));
        let mut prev = u32::MAX;
        for b in [1e-20, 1e-10, 1e-5, 1e-2, 0.5] {
            let d = choose_code_distance(b, 3, 4, 1e-3).unwrap();
            assert!(d <= prev);
            prev = d;
        }
        assert!(matches!(choose_code_distance(1e-3, 10, 10, 0.02), Err(Error::Unreachable(_))));
    }

    #[test]
    fn ideal_runtime_and_energy() {
        let work = Workload {
            family: KernelFamily::FidelityQ,
            n_qubits: 7,
            m: 2,
            n_shots: 1_000_000,
            layers: 10,
        };
        let hw = HardwareProfile::default();
        let q = quantum_cost(&work, &hw, Execution::Ideal).unwrap();
        assert_relative_eq!(q.runtime_s, 0.6, max_relative = 1e-12);
        assert_relative_eq!(q.energy_j, 0.6 * 7.0 * 0.030, max_relative = 1e-12);

        let c = quantum_cost(&work, &hw, Execution::Corrected { error_budget: 1e-3 }).unwrap();
        let d = c.code_distance.unwrap();
        assert_eq!(c.physical_qubits, 7 * 2 * (d as u64).pow(2));
        assert_eq!(c.total_shots, q.total_shots);
        assert!(c.runtime_s > q.runtime_s);
    }

    #[test]
    fn classical_scaling_and_calibration() {
        let p = ClassicalProfile::default();
        let a = classical_cost(KernelFamily::FidelityQ, 10, 50, &p).unwrap();
        let b = classical_cost(KernelFamily::FidelityQ, 12, 50, &p).unwrap();
        assert_relative_eq!(b.runtime_s / a.runtime_s, 2f64.powf(1.07 * 2.0), max_relative = 1e-12);

        let cal = p.calibrated(KernelFamily::ProjectedQ, 10, 100, 42.0).unwrap();
        let again = classical_cost(KernelFamily::ProjectedQ, 10, 100, &cal).unwrap();
        assert_relative_eq!(again.runtime_s, 42.0, max_relative = 1e-12);
    }

    #[test]
    fn crossover_is_first_win() {
        let template = FeatureMapConfig::new(2, 1, Entanglement::Linear);
        let hw = HardwareProfile::default();
        let cl = ClassicalProfile {
            c0: 1e-3,
            ..Default::default()
        };
        let shots = |n: usize| 1000 * n as u64;
        let n = crossover_n(KernelFamily::FidelityQ, 20, &template, shots, &hw, Execution::Ideal, &cl, 2..=60)
            .unwrap()
            .expect("curves cross");
        let run = |n: usize| {
            let q = quantum_cost(
                &Workload::new(&template.with_qubits(n), KernelFamily::FidelityQ, 20, shots(n)),
                &hw,
                Execution::Ideal,
            )
            .unwrap();
            (q.runtime_s, classical_cost(KernelFamily::FidelityQ, n, 20, &cl).unwrap().runtime_s)
        };
        let (q, c) = run(n);
        assert!(q < c);
        let (q, c) = run(n - 1);
        assert!(q >= c);
    }
}
