//! Shot-count bounds for quantum kernel estimation.
//!
//! Two effects set the number of shots `N` per estimated quantity:
//!
//! * **spread**: a single entry must be resolved to within `ε·Δ_ensemble` of
//!   its true value with probability `P_spread` (Chebyshev bound);
//! * **concentration avoidance (CA)**: the measured proportion must land on
//!   the correct side of the concentration value `μ` (0 for the vacuum
//!   projector, ½ for tomography projectors) with probability `P_CA`.
//!
//! The budget is `max(N_spread, N_CA)`. Noisy variants assume depolarizing
//! noise with per-run error probability `p`.
//!
//! Every count is the ceiling of the real-valued bound, never below 1.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{check_gamma, kernel_statistics, projected_distance, KernelFamily, KernelMatrix};
use crate::measurement::{check_probability, vacuum_overlap_mixed, NoiseModel};
use crate::statevector::ReducedDensityMatrix;
use crate::stats::{self, binomial_cdf, binomial_sf, normal_quantile};

/// Concentration value of the tomography measurements.
pub const PQ_CONCENTRATION: f64 = 0.5;

/// Largest shot count the exact CA search will consider.
pub const MAX_SEARCH_SHOTS: u64 = 1 << 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Informative,
    /// The bound carries no information (zero variance or zero gradient);
    /// the count is pinned to 1.
    Degenerate,
    /// No finite number of shots satisfies the bound.
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCount {
    pub shots: u64,
    pub status: BoundStatus,
}

impl ShotCount {
    pub fn degenerate() -> Self {
        Self {
            shots: 1,
            status: BoundStatus::Degenerate,
        }
    }

    pub fn unbounded() -> Self {
        Self {
            shots: u64::MAX,
            status: BoundStatus::Unbounded,
        }
    }

    fn exact(shots: u64) -> Self {
        Self {
            shots: shots.max(1),
            status: BoundStatus::Informative,
        }
    }

    /// Smallest integer ≥ `bound`, at least 1.
    pub fn from_bound(bound: f64) -> Self {
        if !bound.is_finite() {
            return Self::unbounded();
        }
        Self::exact(ceil_count(bound))
    }
}

/// Ceiling that ignores relative rounding noise below 1e-12, so that e.g.
/// `0.25 / 0.00025` yields 1000 rather than 1001.
pub(crate) fn ceil_count(x: f64) -> u64 {
    if x <= 1.0 {
        return 1;
    }
    let r = x.round();
    let c = if (x - r).abs() <= 1e-12 * x { r } else { x.ceil() };
    if c >= u64::MAX as f64 {
        u64::MAX
    } else {
        c as u64
    }
}

/// Precision requirement shared by all spread bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadTarget {
    /// Ratio of single-entry uncertainty to ensemble spread.
    pub eps: f64,
    /// Ensemble spread `Δ_ensemble` (the IQR of the kernel values).
    pub delta_ens: f64,
    /// Probability of resolving the entry to within `ε·Δ_ensemble`.
    pub p_spread: f64,
}

impl SpreadTarget {
    pub fn new(eps: f64, delta_ens: f64, p_spread: f64) -> Result<Self> {
        let t = Self {
            eps,
            delta_ens,
            p_spread,
        };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Domain(format!("eps must be positive, got {}", self.eps)));
        }
        if self.delta_ens == 0.0 {
            return Err(Error::ZeroSpread);
        }
        if !(self.delta_ens > 0.0 && self.delta_ens.is_finite()) {
            return Err(Error::Domain(format!("delta_ens must be positive, got {}", self.delta_ens)));
        }
        if !(0.0..1.0).contains(&self.p_spread) {
            return Err(Error::Domain(format!("p_spread must lie in [0, 1), got {}", self.p_spread)));
        }
        Ok(())
    }

    /// `(1 − P_spread)·ε²·Δ²`.
    fn denominator(&self) -> f64 {
        (1.0 - self.p_spread) * self.eps * self.eps * self.delta_ens * self.delta_ens
    }
}

fn check_open_probability(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// Spread bound for the fidelity kernel: `κ(1 − κ) / [(1 − P)ε²Δ²]`.
pub fn n_spread_fq(kappa: f64, target: &SpreadTarget) -> Result<ShotCount> {
    check_probability("kappa", kappa)?;
    target.validate()?;
    if kappa == 0.0 || kappa == 1.0 {
        return Ok(ShotCount::degenerate());
    }
    Ok(ShotCount::from_bound(kappa * (1.0 - kappa) / target.denominator()))
}

/// Measured-value coordinates `Z = (M^D, M^R, M^I)` of `ρ(x)` followed by
/// those of `ρ(y)`.
fn z_coordinates(x: &ReducedDensityMatrix, y: &ReducedDensityMatrix) -> [f64; 6] {
    let a = x.measured_values();
    let b = y.measured_values();
    [a[0], a[1], a[2], b[0], b[1], b[2]]
}

/// `|∂X^{(k)}/∂Z_i| = 4|Z_i − Z_{i±3}|`, where
/// `X^{(k)} = 2Σ_α (Z_α − Z_{α+3})²` is the squared distance on qubit `k`.
pub fn distance_gradient(x: &ReducedDensityMatrix, y: &ReducedDensityMatrix) -> [f64; 6] {
    let z = z_coordinates(x, y);
    let mut g = [0.0; 6];
    for a in 0..3 {
        let d = 4.0 * (z[a] - z[a + 3]).abs();
        g[a] = d;
        g[a + 3] = d;
    }
    g
}

/// Delta-method variance weight of one qubit's squared distance.
///
/// `V_k = Σ_{i,j} |∂_i X ∂_j X| σ_i σ_j` with `σ_i = sqrt(Z_i(1 − Z_i))`,
/// the diagonal terms being the binomial variances and the off-diagonal ones
/// the Cauchy–Schwarz bounds on the covariances.
pub fn variance_weight(x: &ReducedDensityMatrix, y: &ReducedDensityMatrix) -> f64 {
    let z = z_coordinates(x, y);
    let g = distance_gradient(x, y);
    let sigma: Vec<f64> = z.iter().map(|&v| (v * (1.0 - v)).max(0.0).sqrt()).collect();
    let mut v = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            v += (g[i] * g[j]).abs() * sigma[i] * sigma[j];
        }
    }
    v
}

/// Noisy-circuit variant of [`variance_weight`] in which every variance and
/// covariance is replaced by its bound 1: `V̂_k = Σ_{i,j} |∂_i X ∂_j X|`.
pub fn variance_weight_bounded(x: &ReducedDensityMatrix, y: &ReducedDensityMatrix) -> f64 {
    let g = distance_gradient(x, y);
    let mut v = 0.0;
    for gi in g {
        for gj in g {
            v += (gi * gj).abs();
        }
    }
    v
}

fn check_reduced_pair(x: &[ReducedDensityMatrix], y: &[ReducedDensityMatrix]) -> Result<()> {
    projected_distance(x, y).map(|_| ())
}

/// Spread bound for the projected kernel:
/// `n γ² κ² Σ_k V_k / [(1 − P)ε²Δ²]`.
pub fn n_spread_pq(
    rho_x: &[ReducedDensityMatrix],
    rho_y: &[ReducedDensityMatrix],
    kappa: f64,
    gamma: f64,
    target: &SpreadTarget,
) -> Result<ShotCount> {
    check_reduced_pair(rho_x, rho_y)?;
    check_gamma(gamma)?;
    check_probability("kappa", kappa)?;
    target.validate()?;
    let n = rho_x.len() as f64;
    let v: f64 = rho_x.iter().zip(rho_y).map(|(x, y)| variance_weight(x, y)).sum();
    if v == 0.0 || kappa == 0.0 {
        return Ok(ShotCount::degenerate());
    }
    Ok(ShotCount::from_bound(n * gamma * gamma * kappa * kappa * v / target.denominator()))
}

/// Noisy spread bound for the fidelity kernel: `4 / [(1 − P)ε²Δ²]`.
pub fn n_spread_noisy_fq(target: &SpreadTarget) -> Result<ShotCount> {
    target.validate()?;
    Ok(ShotCount::from_bound(4.0 / target.denominator()))
}

/// Noisy spread bound for the projected kernel:
/// `4 n γ² κ_f² Σ_k V̂_k / [(1 − P)ε²Δ²]`, evaluated at the noisy reduced
/// matrices `ρ_f` and noisy kernel value `κ_f`.
pub fn n_spread_noisy_pq(
    rho_x_f: &[ReducedDensityMatrix],
    rho_y_f: &[ReducedDensityMatrix],
    kappa_f: f64,
    gamma: f64,
    target: &SpreadTarget,
) -> Result<ShotCount> {
    check_reduced_pair(rho_x_f, rho_y_f)?;
    check_gamma(gamma)?;
    check_probability("kappa", kappa_f)?;
    target.validate()?;
    let n = rho_x_f.len() as f64;
    let v: f64 = rho_x_f.iter().zip(rho_y_f).map(|(x, y)| variance_weight_bounded(x, y)).sum();
    if v == 0.0 || kappa_f == 0.0 {
        return Ok(ShotCount::degenerate());
    }
    Ok(ShotCount::from_bound(4.0 * n * gamma * gamma * kappa_f * kappa_f * v / target.denominator()))
}

/// Depolarized reduced matrices and the resulting projected kernel value.
pub fn noisy_projected_inputs(
    rho_x: &[ReducedDensityMatrix],
    rho_y: &[ReducedDensityMatrix],
    gamma: f64,
    noise: NoiseModel,
) -> Result<(Vec<ReducedDensityMatrix>, Vec<ReducedDensityMatrix>, f64)> {
    let p = noise.p_error;
    let xf: Vec<_> = rho_x.iter().map(|r| r.depolarize(p)).collect();
    let yf: Vec<_> = rho_y.iter().map(|r| r.depolarize(p)).collect();
    let kappa_f = crate::kernels::projected_kernel(&xf, &yf, gamma)?;
    Ok((xf, yf, kappa_f))
}

/// CA bound for the fidelity kernel, `N ≥ log_{1−M}(1 − P_CA)`: the smallest
/// `N` with `1 − (1 − M)^N ≥ P_CA`.
pub fn n_ca_fq(m_true: f64, p_ca: f64) -> Result<ShotCount> {
    check_probability("expected measurement", m_true)?;
    check_open_probability("p_ca", p_ca)?;
    if m_true == 0.0 {
        return Ok(ShotCount::unbounded());
    }
    if m_true == 1.0 {
        return Ok(ShotCount::exact(1));
    }
    let ln_fail = (-m_true).ln_1p();
    let target = (-p_ca).ln_1p();
    let ok = |n: u64| n as f64 * ln_fail <= target;
    let mut n = ceil_count(target / ln_fail);
    while n > 1 && ok(n - 1) {
        n -= 1;
    }
    while !ok(n) {
        n += 1;
    }
    Ok(ShotCount::exact(n))
}

/// Probability that `N` shots put the measured proportion strictly on the
/// same side of `μ` as the true success probability `M`.
pub fn correct_side_probability(n_shots: u64, m_true: f64, mu: f64) -> f64 {
    let t = n_shots as f64 * mu;
    if m_true < mu {
        // k < Nμ  ⇔  k ≤ ⌈Nμ⌉ − 1
        let k = (t - 1e-9).ceil() as i64 - 1;
        binomial_cdf(k, n_shots, m_true)
    } else {
        // k > Nμ  ⇔  k > ⌊Nμ⌋
        let k = (t + 1e-9).floor() as i64;
        binomial_sf(k, n_shots, m_true)
    }
}

/// First `N = 2j + parity` passing `ok`, by doubling then bisection on `j`.
/// `None` when the search exceeds [`MAX_SEARCH_SHOTS`].
fn first_passing<F: Fn(u64) -> bool>(ok: &F, parity: u64) -> Option<u64> {
    let n = |j: u64| 2 * j + parity;
    let j0 = 1 - parity;
    if ok(n(j0)) {
        return Some(n(j0));
    }
    let mut lo = j0;
    let mut hi = j0.max(1) * 2;
    while !ok(n(hi)) {
        lo = hi;
        hi *= 2;
        if n(hi) > MAX_SEARCH_SHOTS {
            return None;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(n(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(n(hi))
}

/// CA bound from the exact binomial distribution: the smallest `N` whose
/// correct-side probability reaches `P_CA`.
///
/// Because `⌊Nμ⌋` moves in steps, the probability is not monotone in `N`
/// (at `μ = ½` even `N` are penalized by ties). Odd and even `N` are each
/// monotone there, so both are searched and the smaller result is kept.
pub fn n_ca_binomial_exact(m_true: f64, mu: f64, p_ca: f64) -> Result<ShotCount> {
    check_probability("expected measurement", m_true)?;
    check_probability("mu", mu)?;
    check_open_probability("p_ca", p_ca)?;
    if m_true == mu {
        return Err(Error::BoundNotImposed(m_true));
    }
    let ok = |n: u64| correct_side_probability(n, m_true, mu) >= p_ca;
    match (first_passing(&ok, 1), first_passing(&ok, 0)) {
        (None, None) => Ok(ShotCount::unbounded()),
        (a, b) => Ok(ShotCount::exact(a.unwrap_or(u64::MAX).min(b.unwrap_or(u64::MAX)))),
    }
}

/// Normal-approximation CA bound: `z² M(1 − M) / (M − μ)²`,
/// `z = Φ⁻¹(P_CA)`. For `P_CA ≤ ½` any single shot suffices.
pub fn n_ca_pq_normal(m_true: f64, mu: f64, p_ca: f64) -> Result<ShotCount> {
    check_probability("expected measurement", m_true)?;
    check_probability("mu", mu)?;
    check_open_probability("p_ca", p_ca)?;
    if m_true == mu {
        return Err(Error::BoundNotImposed(m_true));
    }
    let z = normal_quantile(p_ca).max(0.0);
    let d = m_true - mu;
    Ok(ShotCount::from_bound(z * z * m_true * (1.0 - m_true) / (d * d)))
}

/// How the CA bound is evaluated for tomography measurements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaMethod {
    /// Exact binomial search.
    Exact,
    /// Normal approximation.
    #[default]
    Normal,
}

/// Expected measurement under depolarizing noise:
/// `(1 − p)·M + p·q̃`, `q̃ = 2^{−n}` (fidelity) or `½` (projected).
pub fn noisy_measurement(family: KernelFamily, m_true: f64, noise: NoiseModel, n_qubits: usize) -> f64 {
    match family {
        KernelFamily::FidelityQ => noise.fidelity_success(m_true, n_qubits),
        KernelFamily::ProjectedQ => noise.depolarize(m_true, PQ_CONCENTRATION),
    }
}

/// CA bound with the noisy expected measurement substituted. The fidelity
/// family uses the closed-form bound (`μ = 0`); the projected family uses
/// `mu` and `method`.
pub fn n_ca_noisy(
    family: KernelFamily,
    m_true: f64,
    mu: f64,
    p_ca: f64,
    noise: NoiseModel,
    n_qubits: usize,
    method: CaMethod,
) -> Result<ShotCount> {
    check_probability("p_error", noise.p_error)?;
    check_probability("expected measurement", m_true)?;
    let m_f = noisy_measurement(family, m_true, noise, n_qubits);
    match family {
        KernelFamily::FidelityQ => n_ca_fq(m_f, p_ca),
        KernelFamily::ProjectedQ => match method {
            CaMethod::Exact => n_ca_binomial_exact(m_f, mu, p_ca),
            CaMethod::Normal => n_ca_pq_normal(m_f, mu, p_ca),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Largest tolerable per-run error probability, capped at 1.
    pub p_max: f64,
    /// Set when the noise cannot move the expected kernel value.
    pub unconstrained: bool,
}

/// Largest per-run error probability `p` that keeps the noise-induced bias
/// `|κ_f − κ|` within `ε·Δ/2`, assuming depolarizing noise.
///
/// Fidelity: `p ≤ εΔ / (2|2^{−n} − κ|)`. Projected (first order in `p`):
/// `p ≤ εΔ / (4|κ ln κ|)`.
pub fn error_budget(
    family: KernelFamily,
    kappa: f64,
    eps: f64,
    delta_ens: f64,
    n_qubits: usize,
) -> Result<ErrorBudget> {
    check_open_probability("kappa", kappa)?;
    if !(eps > 0.0) || !(delta_ens >= 0.0) {
        return Err(Error::Domain("eps must be positive and delta_ens non-negative".into()));
    }
    let denom = match family {
        KernelFamily::FidelityQ => 2.0 * (vacuum_overlap_mixed(n_qubits) - kappa).abs(),
        KernelFamily::ProjectedQ => 4.0 * (kappa * kappa.ln()).abs(),
    };
    if denom < 1e-15 {
        return Ok(ErrorBudget {
            p_max: 1.0,
            unconstrained: true,
        });
    }
    Ok(ErrorBudget {
        p_max: (eps * delta_ens / denom).min(1.0),
        unconstrained: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    Spread,
    ConcentrationAvoidance,
}

/// Everything a budget was computed from. Fields that do not apply to the
/// family or input path are left empty.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BudgetInputs {
    pub eps: f64,
    pub p_spread: f64,
    pub p_ca: f64,
    pub delta_ens: f64,
    pub n_qubits: usize,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_noisy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_r1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_r2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_mean_kappa: Option<f64>,
    /// `n γ² κ² Σ_k V_k` (or its noisy counterpart, without the factor 4).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread_numerator: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread_path: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotBudget {
    pub family: KernelFamily,
    pub noisy: bool,
    pub n_spread: u64,
    pub n_ca: u64,
    pub n_required: u64,
    pub effect_dominant: Effect,
    pub spread_status: BoundStatus,
    pub ca_status: BoundStatus,
    pub inputs: BudgetInputs,
}

impl ShotBudget {
    pub fn combine(family: KernelFamily, noisy: bool, spread: ShotCount, ca: ShotCount, inputs: BudgetInputs) -> Self {
        let (n_required, effect_dominant) = if spread.shots >= ca.shots {
            (spread.shots, Effect::Spread)
        } else {
            (ca.shots, Effect::ConcentrationAvoidance)
        };
        Self {
            family,
            noisy,
            n_spread: spread.shots,
            n_ca: ca.shots,
            n_required,
            effect_dominant,
            spread_status: spread.status,
            ca_status: ca.status,
            inputs,
        }
    }
}

/// Mean distance of the tomography measurements from ½:
/// `ε¹_R = (1/3mn) Σ_i Σ_α Σ_k |M^α_k(x_i) − ½|`.
pub fn epsilon_r1(table: &[Vec<ReducedDensityMatrix>]) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for row in table {
        for rho in row {
            for m in rho.measured_values() {
                total += (m - PQ_CONCENTRATION).abs();
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::InsufficientData("empty reduced-matrix table".into()));
    }
    Ok(total / count as f64)
}

/// Scale of the measurement offsets recovered from kernel values alone:
/// `ε²_R = sqrt(−⟨ln κ⟩ / (12 γ n))`.
pub fn epsilon_r2(log_mean_kappa: f64, gamma: f64, n_qubits: usize) -> Result<f64> {
    check_gamma(gamma)?;
    if !(log_mean_kappa <= 0.0) {
        return Err(Error::Domain(format!("mean log-kernel must be ≤ 0, got {log_mean_kappa}")));
    }
    Ok((-log_mean_kappa / (12.0 * gamma * n_qubits as f64)).sqrt())
}

/// Dataset-level CA bound for the projected family:
/// `z² μ(1 − μ) / ε_R²` with `μ = ½`.
pub fn n_ca_pq_dataset(epsilon_r: f64, p_ca: f64) -> Result<ShotCount> {
    check_open_probability("p_ca", p_ca)?;
    if epsilon_r == 0.0 {
        return Ok(ShotCount::unbounded());
    }
    let z = normal_quantile(p_ca).max(0.0);
    let mu = PQ_CONCENTRATION;
    Ok(ShotCount::from_bound(z * z * mu * (1.0 - mu) / (epsilon_r * epsilon_r)))
}

/// Probabilities and precision for a dataset-level budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetParams {
    pub eps: f64,
    pub p_spread: f64,
    pub p_ca: f64,
    /// `None` for noiseless formulas; `Some` switches to the noisy ones.
    pub noise: Option<NoiseModel>,
}

/// Data available for a dataset-level budget.
#[derive(Clone, Copy, Debug)]
pub enum DatasetInput<'a> {
    /// Kernel matrix only.
    Kernel(&'a KernelMatrix),
    /// Kernel matrix plus every point's reduced matrices (projected family).
    WithReduced {
        kernel: &'a KernelMatrix,
        table: &'a [Vec<ReducedDensityMatrix>],
    },
}

impl<'a> DatasetInput<'a> {
    fn kernel(&self) -> &'a KernelMatrix {
        match *self {
            DatasetInput::Kernel(k) | DatasetInput::WithReduced { kernel: k, .. } => k,
        }
    }
}

/// Shot budget `N̄ = max(N̄_spread, N̄_CA)` for a whole kernel matrix.
///
/// The ensemble is represented by `κ_repr = median(𝕂)` and spread
/// `Δ = IQR(𝕂)` over the independent entries. Projected-kernel CA uses the
/// offset scale `ε²_R`; projected spread averages `n γ² κ² Σ V_k` over pairs
/// when reduced matrices are given, otherwise evaluates it at a pair of
/// representative states whose offsets from ½ reproduce `ε²_R`.
pub fn dataset_budget(input: DatasetInput<'_>, params: &BudgetParams) -> Result<ShotBudget> {
    let k = input.kernel();
    let stats = kernel_statistics(k)?;
    let n = k.config.n_qubits;
    let noisy = params.noise.is_some();
    let noise = params.noise.unwrap_or(NoiseModel::NOISELESS);
    let target = SpreadTarget::new(params.eps, stats.iqr, params.p_spread)?;
    let mut inputs = BudgetInputs {
        eps: params.eps,
        p_spread: params.p_spread,
        p_ca: params.p_ca,
        delta_ens: stats.iqr,
        n_qubits: n,
        m: k.m(),
        p_error: params.noise.map(|n| n.p_error),
        ..Default::default()
    };
    match k.family {
        KernelFamily::FidelityQ => {
            let kappa = stats.median;
            let kappa_f = noise.fidelity_success(kappa, n);
            inputs.kappa = Some(kappa);
            inputs.mu = Some(0.0);
            let spread = if noisy {
                inputs.kappa_noisy = Some(kappa_f);
                n_spread_noisy_fq(&target)?
            } else {
                n_spread_fq(kappa, &target)?
            };
            let ca = n_ca_fq(kappa_f, params.p_ca)?;
            Ok(ShotBudget::combine(k.family, noisy, spread, ca, inputs))
        }
        KernelFamily::ProjectedQ => {
            let gamma = k.gamma.ok_or_else(|| Error::Config("projected kernel without gamma".into()))?;
            let vals: Vec<f64> = k
                .off_diagonal()
                .into_iter()
                .filter(|&v| {
                    let keep = v < 1.0;
                    if !keep {
                        warn!("off-diagonal projected kernel entry equal to 1 excluded from ⟨ln κ⟩");
                    }
                    keep
                })
                .collect();
            if vals.is_empty() {
                return Err(Error::InsufficientData("no off-diagonal entries below 1".into()));
            }
            if vals.iter().any(|&v| v <= 0.0) {
                return Err(Error::Domain("projected kernel entries must be positive".into()));
            }
            let log_mean = stats::mean(&vals.iter().map(|v| v.ln()).collect::<Vec<_>>());
            let eps_r2 = epsilon_r2(log_mean, gamma, n)?;
            let eps_r2_f = (1.0 - noise.p_error) * eps_r2;
            inputs.gamma = Some(gamma);
            inputs.mu = Some(PQ_CONCENTRATION);
            inputs.log_mean_kappa = Some(log_mean);
            inputs.epsilon_r2 = Some(eps_r2);
            inputs.z = Some(normal_quantile(params.p_ca).max(0.0));
            inputs.kappa = Some(stats.median);
            let ca = n_ca_pq_dataset(eps_r2_f, params.p_ca)?;

            let numerator = match input {
                DatasetInput::WithReduced { table, .. } => {
                    if table.len() != k.m() {
                        return Err(Error::Shape {
                            expected: k.m(),
                            got: table.len(),
                        });
                    }
                    inputs.epsilon_r1 = Some(epsilon_r1(table)?);
                    inputs.spread_path = Some("reduced_table".into());
                    mean_pair_numerator(table, gamma, noise, noisy)?
                }
                DatasetInput::Kernel(_) => {
                    inputs.spread_path = Some("representative_states".into());
                    let (x, y) = representative_pair(eps_r2, n);
                    pair_numerator(&x, &y, gamma, noise, noisy)?
                }
            };
            inputs.spread_numerator = Some(numerator);
            let factor = if noisy { 4.0 } else { 1.0 };
            let spread = if numerator == 0.0 {
                ShotCount::degenerate()
            } else {
                ShotCount::from_bound(factor * numerator / target.denominator())
            };
            Ok(ShotBudget::combine(k.family, noisy, spread, ca, inputs))
        }
    }
}

/// Two states whose measured values sit at `½ ± ε·√2/2` on every qubit and
/// basis, so that their per-component squared difference is `2ε²` and their
/// projected kernel equals `exp(−12γnε²)`.
pub fn representative_pair(eps_r: f64, n_qubits: usize) -> (Vec<ReducedDensityMatrix>, Vec<ReducedDensityMatrix>) {
    let h = eps_r * std::f64::consts::SQRT_2 / 2.0;
    let x = ReducedDensityMatrix::from_measured_values([0.5 + h; 3]);
    let y = ReducedDensityMatrix::from_measured_values([0.5 - h; 3]);
    (vec![x; n_qubits], vec![y; n_qubits])
}

/// `n γ² κ² Σ_k V_k` for one pair, or `n γ² κ_f² Σ_k V̂_k` when noisy.
fn pair_numerator(
    x: &[ReducedDensityMatrix],
    y: &[ReducedDensityMatrix],
    gamma: f64,
    noise: NoiseModel,
    noisy: bool,
) -> Result<f64> {
    let n = x.len() as f64;
    if noisy {
        let (xf, yf, kappa_f) = noisy_projected_inputs(x, y, gamma, noise)?;
        let v: f64 = xf.iter().zip(&yf).map(|(a, b)| variance_weight_bounded(a, b)).sum();
        Ok(n * gamma * gamma * kappa_f * kappa_f * v)
    } else {
        let kappa = crate::kernels::projected_kernel(x, y, gamma)?;
        let v: f64 = x.iter().zip(y).map(|(a, b)| variance_weight(a, b)).sum();
        Ok(n * gamma * gamma * kappa * kappa * v)
    }
}

fn mean_pair_numerator(
    table: &[Vec<ReducedDensityMatrix>],
    gamma: f64,
    noise: NoiseModel,
    noisy: bool,
) -> Result<f64> {
    let m = table.len();
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..m {
        for j in i + 1..m {
            total += pair_numerator(&table[i], &table[j], gamma, noise, noisy)?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InsufficientData("need at least two points".into()));
    }
    Ok(total / count as f64)
}

/// Per-entry budget for one pair of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryBudget {
    pub i: usize,
    pub j: usize,
    pub kappa: f64,
    pub budget: ShotBudget,
}

/// Budgets for every independent entry of a kernel matrix, using the
/// ensemble spread of the whole matrix. Projected-family CA takes the
/// largest bound over the `6n` tomography measurements of the two points;
/// measurements sitting exactly at ½ impose no bound.
pub fn entry_budgets(
    kernel: &KernelMatrix,
    table: Option<&[Vec<ReducedDensityMatrix>]>,
    params: &BudgetParams,
    method: CaMethod,
) -> Result<Vec<EntryBudget>> {
    let stats = kernel_statistics(kernel)?;
    let target = SpreadTarget::new(params.eps, stats.iqr, params.p_spread)?;
    let n = kernel.config.n_qubits;
    let noisy = params.noise.is_some();
    let noise = params.noise.unwrap_or(NoiseModel::NOISELESS);
    let m = kernel.m();
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            let kappa = kernel.values[[i, j]];
            let mut inputs = BudgetInputs {
                eps: params.eps,
                p_spread: params.p_spread,
                p_ca: params.p_ca,
                delta_ens: stats.iqr,
                n_qubits: n,
                m,
                kappa: Some(kappa),
                p_error: params.noise.map(|n| n.p_error),
                ..Default::default()
            };
            let (spread, ca) = match kernel.family {
                KernelFamily::FidelityQ => {
                    inputs.mu = Some(0.0);
                    let spread = if noisy {
                        n_spread_noisy_fq(&target)?
                    } else {
                        n_spread_fq(kappa, &target)?
                    };
                    let ca = n_ca_noisy(KernelFamily::FidelityQ, kappa, 0.0, params.p_ca, noise, n, method)?;
                    (spread, ca)
                }
                KernelFamily::ProjectedQ => {
                    let table = table.ok_or_else(|| {
                        Error::Config("per-entry projected budgets need reduced matrices".into())
                    })?;
                    let gamma = kernel
                        .gamma
                        .ok_or_else(|| Error::Config("projected kernel without gamma".into()))?;
                    inputs.gamma = Some(gamma);
                    inputs.mu = Some(PQ_CONCENTRATION);
                    let (x, y) = (&table[i], &table[j]);
                    let spread = if noisy {
                        let (xf, yf, kf) = noisy_projected_inputs(x, y, gamma, noise)?;
                        inputs.kappa_noisy = Some(kf);
                        n_spread_noisy_pq(&xf, &yf, kf, gamma, &target)?
                    } else {
                        n_spread_pq(x, y, kappa, gamma, &target)?
                    };
                    let mut ca = ShotCount::degenerate();
                    for rho in x.iter().chain(y.iter()) {
                        for mv in rho.measured_values() {
                            match n_ca_noisy(
                                KernelFamily::ProjectedQ,
                                mv.clamp(0.0, 1.0),
                                PQ_CONCENTRATION,
                                params.p_ca,
                                noise,
                                n,
                                method,
                            ) {
                                Ok(c) if c.shots > ca.shots || ca.status == BoundStatus::Degenerate => ca = c,
                                Ok(_) | Err(Error::BoundNotImposed(_)) => {}
                                Err(e) => return Err(e),
                            }
                        }
                    }
                    (spread, ca)
                }
            };
            out.push(EntryBudget {
                i,
                j,
                kappa,
                budget: ShotBudget::combine(kernel.family, noisy, spread, ca, inputs),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn target(eps: f64, delta: f64, p: f64) -> SpreadTarget {
        SpreadTarget::new(eps, delta, p).unwrap()
    }

    #[test]
    fn spread_fq_examples() {
        // 0.25 / (0.1 · 0.01 · 0.25)
        assert_eq!(n_spread_fq(0.5, &target(0.1, 0.5, 0.9)).unwrap().shots, 1000);
        assert_eq!(n_spread_fq(0.5, &target(0.1, 1.0, 0.9)).unwrap().shots, 250);
        assert_eq!(n_spread_fq(0.0, &target(0.1, 1.0, 0.9)).unwrap(), ShotCount::degenerate());
        assert_eq!(n_spread_fq(1.0, &target(0.1, 1.0, 0.9)).unwrap(), ShotCount::degenerate());
        assert!(matches!(SpreadTarget::new(0.1, 0.0, 0.9), Err(Error::ZeroSpread)));
        assert!(SpreadTarget::new(0.0, 0.1, 0.9).is_err());
        assert!(SpreadTarget::new(0.1, 0.1, 1.0).is_err());
    }

    #[test]
    fn ca_fq_examples() {
        assert_eq!(n_ca_fq(0.5, 0.99).unwrap().shots, 7);
        assert_eq!(n_ca_fq(1.0, 0.99).unwrap().shots, 1);
        assert_eq!(n_ca_fq(0.0, 0.99).unwrap(), ShotCount::unbounded());
        // ceil(ln 0.01 / ln(1 − 2⁻¹⁰))
        let m = 2f64.powi(-10);
        assert_eq!(n_ca_fq(m, 0.99).unwrap().shots, 4714);
        assert!(1.0 - (1.0 - m).powi(4714) >= 0.99);
        assert!(1.0 - (1.0 - m).powi(4713) < 0.99);
    }

    #[test]
    fn ca_exact_examples() {
        assert_eq!(n_ca_binomial_exact(0.5, 0.0, 0.99).unwrap().shots, 7);
        let small = n_ca_binomial_exact(0.6, 0.5, 0.5).unwrap().shots;
        let big = n_ca_binomial_exact(0.6, 0.5, 0.9).unwrap().shots;
        assert!(small <= big);
        assert!(matches!(n_ca_binomial_exact(0.5, 0.5, 0.9), Err(Error::BoundNotImposed(_))));
        // Below the concentration value.
        let below = n_ca_binomial_exact(0.4, 0.5, 0.9).unwrap().shots;
        assert!(correct_side_probability(below, 0.4, 0.5) >= 0.9);
        assert!(correct_side_probability(below - 1, 0.4, 0.5) < 0.9);
    }

    #[test]
    fn ca_normal_examples() {
        let p = 0.9772;
        let z = normal_quantile(p);
        let expect = (z * z * 0.24 / 0.01).ceil() as u64;
        assert_eq!(expect, 96);
        assert_eq!(n_ca_pq_normal(0.6, 0.5, p).unwrap().shots, 96);
        assert_eq!(n_ca_pq_normal(0.6, 0.5, 0.5).unwrap().shots, 1);
        // The strict side condition makes the exact bound slightly larger.
        let exact = n_ca_binomial_exact(0.6, 0.5, p).unwrap().shots;
        assert!(correct_side_probability(exact, 0.6, 0.5) >= p);
        assert!(correct_side_probability(exact - 1, 0.6, 0.5) < p);
        assert!((96..=120).contains(&exact), "exact {exact}");
        assert!(matches!(n_ca_pq_normal(0.5, 0.5, 0.9), Err(Error::BoundNotImposed(_))));
    }

    #[test]
    fn ca_normal_scaling() {
        // Halving |M − μ| quadruples the real-valued bound.
        let a = n_ca_pq_normal(0.5 + 0.02, 0.5, 0.99).unwrap().shots as f64;
        let b = n_ca_pq_normal(0.5 + 0.01, 0.5, 0.99).unwrap().shots as f64;
        assert!((b / a - 4.0).abs() < 0.01 * 4.0);
    }

    /// Appendix-style three-block evaluation of `V_k / 16`.
    fn v_over_16_blocks(z: [f64; 6]) -> f64 {
        let s = |i: usize| (z[i] * (1.0 - z[i])).sqrt();
        let d = |i: usize| if i < 3 { z[i] - z[i + 3] } else { z[i - 3] - z[i] };
        let mut a = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                a += (d(i) * d(j)).abs() * s(i) * s(j);
            }
        }
        let mut b = 0.0;
        for i in 3..6 {
            for j in 3..6 {
                b += (d(i) * d(j)).abs() * s(i) * s(j);
            }
        }
        let mut c = 0.0;
        for i in 0..3 {
            for j in 3..6 {
                c += (d(i) * d(j)).abs() * s(i) * s(j);
            }
        }
        a + b + 2.0 * c
    }

    #[test]
    fn variance_weight_matches_block_sum() {
        let x = ReducedDensityMatrix::zero();
        let y = ReducedDensityMatrix::maximally_mixed();
        let z = [1.0, 0.5, 0.5, 0.5, 0.5, 0.5];
        let oracle = 16.0 * v_over_16_blocks(z);
        assert_abs_diff_eq!(oracle, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(variance_weight(&x, &y), oracle, epsilon = 1e-15);

        let a = ReducedDensityMatrix::from_components(0.7, 0.2, -0.1);
        let b = ReducedDensityMatrix::from_components(0.4, -0.15, 0.3);
        let mut z = [0.0; 6];
        z[..3].copy_from_slice(&a.measured_values());
        z[3..].copy_from_slice(&b.measured_values());
        assert_abs_diff_eq!(variance_weight(&a, &b), 16.0 * v_over_16_blocks(z), epsilon = 1e-13);
    }

    #[test]
    fn spread_pq_examples() {
        let x = [ReducedDensityMatrix::zero()];
        let y = [ReducedDensityMatrix::maximally_mixed()];
        let t = target(0.1, 0.5, 0.9);
        let kappa = crate::kernels::projected_kernel(&x, &y, 1.0).unwrap();
        assert_abs_diff_eq!(kappa, (-0.5f64).exp(), epsilon = 1e-15);
        // n γ² κ² V / denom with V = 1
        let expect = (-1.0f64).exp() / (0.1 * 0.01 * 0.25);
        assert_eq!(n_spread_pq(&x, &y, kappa, 1.0, &t).unwrap().shots, expect.ceil() as u64);

        let same = n_spread_pq(&x, &x, 1.0, 1.0, &t).unwrap();
        assert_eq!(same, ShotCount::degenerate());

        // Holding V fixed, the bound scales as γ²κ².
        let a = n_spread_pq(&x, &y, 0.5, 1.0, &t).unwrap().shots as f64;
        let b = n_spread_pq(&x, &y, 0.25, 4.0, &t).unwrap().shots as f64;
        assert!((b / a - 4.0).abs() < 4.0 * 1e-3);
    }

    #[test]
    fn noisy_spread_examples() {
        let t = target(0.1, 0.5, 0.9);
        assert_eq!(n_spread_noisy_fq(&t).unwrap().shots, 16000);
        let noiseless = n_spread_fq(0.5, &t).unwrap().shots;
        assert_eq!(16000 / noiseless, 16);
        let x = [ReducedDensityMatrix::from_components(0.3, 0.1, 0.0)];
        assert_eq!(n_spread_noisy_pq(&x, &x, 1.0, 1.0, &t).unwrap(), ShotCount::degenerate());
    }

    #[test]
    fn noisy_ca_examples() {
        let noise = NoiseModel::new(0.2).unwrap();
        let m_f = noisy_measurement(KernelFamily::FidelityQ, 0.1, noise, 4);
        assert_abs_diff_eq!(m_f, 0.0925, epsilon = 1e-15);
        let n = n_ca_noisy(KernelFamily::FidelityQ, 0.1, 0.0, 0.99, noise, 4, CaMethod::Exact).unwrap();
        assert_eq!(n.shots, 48);
        assert!(1.0 - (1.0 - m_f).powi(48) >= 0.99);
        assert!(1.0 - (1.0 - m_f).powi(47) < 0.99);

        for p in [0.0, 0.3, 1.0] {
            let r = n_ca_noisy(KernelFamily::ProjectedQ, 0.5, 0.5, 0.9, NoiseModel::new(p).unwrap(), 3, CaMethod::Normal);
            assert!(matches!(r, Err(Error::BoundNotImposed(_))));
        }
        assert_eq!(
            n_ca_noisy(KernelFamily::FidelityQ, 0.1, 0.0, 0.99, NoiseModel::NOISELESS, 4, CaMethod::Exact).unwrap(),
            n_ca_fq(0.1, 0.99).unwrap()
        );
    }

    #[test]
    fn error_budget_examples() {
        let fq = error_budget(KernelFamily::FidelityQ, 0.1, 0.1, 0.2, 2).unwrap();
        assert_abs_diff_eq!(fq.p_max, 0.02 / 0.3, epsilon = 1e-15);
        assert!(!fq.unconstrained);

        let e = std::f64::consts::E;
        let pq = error_budget(KernelFamily::ProjectedQ, 1.0 / e, 0.1, 0.4, 5).unwrap();
        assert_abs_diff_eq!(pq.p_max, 0.04 / (4.0 / e), epsilon = 1e-15);
        assert_abs_diff_eq!(pq.p_max, 0.02718, epsilon = 1e-5);

        let free = error_budget(KernelFamily::FidelityQ, 0.25, 0.1, 0.2, 2).unwrap();
        assert!(free.unconstrained);

        let capped = error_budget(KernelFamily::FidelityQ, 0.3, 1.0, 1.0, 1).unwrap();
        assert_eq!(capped.p_max, 1.0);
    }

    #[test]
    fn epsilon_scales() {
        let c = 0.07;
        let rho = ReducedDensityMatrix::from_measured_values([0.5 + c, 0.5 - c, 0.5 + c]);
        let table = vec![vec![rho; 3]; 4];
        assert_abs_diff_eq!(epsilon_r1(&table).unwrap(), c, epsilon = 1e-15);

        let (gamma, n) = (0.8, 5);
        let log_k = -12.0 * gamma * n as f64 * c * c;
        assert_abs_diff_eq!(epsilon_r2(log_k, gamma, n).unwrap(), c, epsilon = 1e-15);

        let (x, y) = representative_pair(c, n);
        let k = crate::kernels::projected_kernel(&x, &y, gamma).unwrap();
        assert_abs_diff_eq!(k.ln(), log_k, epsilon = 1e-12);
    }

    #[test]
    fn ceil_count_ignores_rounding_noise() {
        assert_eq!(ceil_count(1000.0000000000001), 1000);
        assert_eq!(ceil_count(1000.001), 1001);
        assert_eq!(ceil_count(0.2), 1);
    }
}
