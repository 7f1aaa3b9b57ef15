//! Command-line front end: a TOML config plus flag overrides drives one of
//! the `kernels`, `estimate-shots`, `sweep`, `resources` or `characterize`
//! commands. Every output file carries the resolved config and tool version.
//!
//! All randomness derives from the top-level seed `s`: twonorm synthesis
//! uses `s`, stratification `s + 1`, shot sampling `s + 2`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::concentration::{fit_all, sweep, write_series_csv, FitRecord, ScalingSeries, Statistic, SweepOptions};
use crate::dataset::{generate_twonorm, load_csv, preprocess, select_features, stratify, Dataset, DatasetSummary};
use crate::error::{Error, Result};
use crate::feature_map::{DataPoint, Entanglement, FeatureMapConfig};
use crate::kernels::{gram_matrix, kernel_statistics, reduced_table, KernelFamily, KernelMatrix, KernelMetadata, KernelStatistics, DEFAULT_GAMMA};
use crate::measurement::{sample_gram, NoiseModel};
use crate::resources::{
    classical_cost, crossover_n, quantum_cost, ClassicalProfile, Execution, HardwareProfile, ScenarioReport, Workload,
};
use crate::shots::{dataset_budget, entry_budgets, error_budget, BudgetParams, CaMethod, DatasetInput, EntryBudget, ErrorBudget, ShotBudget};
use crate::statevector::DEFAULT_MAX_QUBITS;

pub const TOOL: &str = "qke";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "qke", version, about = "Shot budgets and scaling analysis for quantum kernel estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for Gram construction and sampling.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Build a Gram matrix (exact or shot-sampled).
    Kernels,
    /// Per-entry and dataset-level shot budgets.
    EstimateShots,
    /// Kernel statistics and shot budgets versus qubit count, with fits.
    Sweep,
    /// Runtime, energy and qubit counts for executing the shot budget.
    Resources,
    /// Expressibility and relative-entropy entanglement versus qubit count.
    Characterize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Twonorm,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub source: Source,
    pub path: Option<PathBuf>,
    pub label_column: String,
    /// Twonorm size.
    pub m: usize,
    /// Twonorm dimensionality.
    pub n_features: usize,
    /// Per-feature standardization.
    pub preprocess: bool,
    /// Split into balanced subsets of this size.
    pub subset_size: Option<usize>,
    /// Subset used by single-dataset commands.
    pub subset_index: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            source: Source::Twonorm,
            path: None,
            label_column: "label".into(),
            m: 100,
            n_features: 20,
            preprocess: true,
            subset_size: None,
            subset_index: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureMapSection {
    pub n_qubits: usize,
    pub repetitions: usize,
    pub entanglement: Entanglement,
    pub max_qubits: usize,
}

impl Default for FeatureMapSection {
    fn default() -> Self {
        Self {
            n_qubits: 4,
            repetitions: 1,
            entanglement: Entanglement::Linear,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl FeatureMapSection {
    fn config(&self) -> FeatureMapConfig {
        FeatureMapConfig {
            max_qubits: self.max_qubits,
            ..FeatureMapConfig::new(self.n_qubits, self.repetitions, self.entanglement)
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMode {
    #[default]
    Exact,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub family: KernelFamily,
    pub gamma: f64,
    pub mode: KernelMode,
    pub n_shots: u64,
    pub p_error: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            family: KernelFamily::FidelityQ,
            gamma: DEFAULT_GAMMA,
            mode: KernelMode::Exact,
            n_shots: 1000,
            p_error: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShotsSection {
    pub eps: f64,
    pub p_spread: f64,
    pub p_ca: f64,
    /// Switches to the noisy bounds when set.
    pub p_error: Option<f64>,
    pub ca_method: CaMethod,
    pub per_entry: bool,
}

impl Default for ShotsSection {
    fn default() -> Self {
        Self {
            eps: 1.0,
            p_spread: 0.9,
            p_ca: 0.99,
            p_error: None,
            ca_method: CaMethod::Normal,
            per_entry: true,
        }
    }
}

impl ShotsSection {
    fn params(&self) -> Result<BudgetParams> {
        Ok(BudgetParams {
            eps: self.eps,
            p_spread: self.p_spread,
            p_ca: self.p_ca,
            noise: self.p_error.map(NoiseModel::new).transpose()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub n_min: usize,
    pub n_max: usize,
    pub n_targets: Vec<usize>,
    pub threshold: f64,
    /// Number of stratified subsets swept (requires `dataset.subset_size`).
    pub subsets: usize,
    pub shot_budgets: bool,
    pub characteristics: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 10,
            n_targets: Vec::new(),
            threshold: crate::concentration::DEFAULT_R2_THRESHOLD,
            subsets: 1,
            shot_budgets: true,
            characteristics: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotScaling {
    pub log2_c: f64,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    #[default]
    Ideal,
    Corrected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourcesSection {
    /// Shots per quantity; computed from the dataset budget when absent.
    pub n_shots: Option<u64>,
    /// `N(n) = 2^{log2_c + α n}` for the crossover scan; constant otherwise.
    pub shots_scaling: Option<ShotScaling>,
    pub execution: ExecutionMode,
    /// Tolerated error per run under correction; derived from the shot
    /// precision target when absent.
    pub error_budget: Option<f64>,
    pub hardware: HardwareProfile,
    /// Enables the crossover scan when present.
    pub classical: Option<ClassicalProfile>,
    pub crossover_max_n: usize,
}

impl Default for ResourcesSection {
    fn default() -> Self {
        Self {
            n_shots: None,
            shots_scaling: None,
            execution: ExecutionMode::Ideal,
            error_budget: None,
            hardware: HardwareProfile::default(),
            classical: None,
            crossover_max_n: 64,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub feature_map: FeatureMapSection,
    pub kernel: KernelSection,
    pub shots: ShotsSection,
    pub sweep: SweepSection,
    pub resources: ResourcesSection,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.feature_map.config().validate()?;
        if self.dataset.source == Source::Csv && self.dataset.path.is_none() {
            return Err(Error::Config("dataset.source = \"csv\" requires dataset.path".into()));
        }
        if self.sweep.n_min < 1 || self.sweep.n_min > self.sweep.n_max {
            return Err(Error::Config(format!(
                "sweep range {}..={} is empty",
                self.sweep.n_min, self.sweep.n_max
            )));
        }
        if self.sweep.subsets == 0 {
            return Err(Error::Config("sweep.subsets must be ≥ 1".into()));
        }
        if self.sweep.subsets > 1 && self.dataset.subset_size.is_none() {
            return Err(Error::Config("sweep.subsets > 1 requires dataset.subset_size".into()));
        }
        Ok(())
    }

    fn feature_map(&self) -> FeatureMapConfig {
        self.feature_map.config()
    }
}

/// Provenance wrapper around every JSON output.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub config: &'a Config,
    pub result: T,
}

/// Sidecar for a CSV output.
#[derive(Debug, Serialize)]
struct CsvProvenance<'a> {
    file: &'a str,
    columns: Vec<String>,
}

struct Outputs<'a> {
    dir: &'a Path,
    command: Command,
    config: &'a Config,
    written: Vec<PathBuf>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path, command: Command, config: &'a Config) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir,
            command,
            config,
            written: Vec::new(),
        })
    }

    fn json<T: Serialize>(&mut self, name: &str, result: T) -> Result<()> {
        let path = self.dir.join(name);
        let env = Envelope {
            tool: TOOL,
            version: VERSION,
            command: self.command,
            config: self.config,
            result,
        };
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, &env)?;
        use std::io::Write;
        writeln!(w)?;
        self.written.push(path);
        Ok(())
    }

    /// Writes a CSV through `f` plus a `<name>.meta.json` provenance sidecar.
    fn csv<F>(&mut self, name: &str, columns: Vec<String>, f: F) -> Result<()>
    where
        F: FnOnce(BufWriter<File>) -> Result<()>,
    {
        let path = self.dir.join(name);
        f(BufWriter::new(File::create(&path)?))?;
        self.written.push(path);
        let meta = format!("{}.meta.json", name.trim_end_matches(".csv"));
        self.json(&meta, CsvProvenance { file: name, columns })
    }
}

fn load_dataset(cfg: &Config, seed: u64) -> Result<Dataset> {
    let d = &cfg.dataset;
    let raw = match d.source {
        Source::Twonorm => generate_twonorm(d.m, d.n_features, seed)?,
        Source::Csv => load_csv(d.path.as_ref().expect("validated"), &d.label_column)?,
    };
    if d.preprocess {
        preprocess(&raw)
    } else {
        Ok(raw)
    }
}

/// Datasets a command works on: the whole set, or its stratified subsets.
fn datasets(cfg: &Config, seed: u64, count: usize) -> Result<Vec<Dataset>> {
    let ds = load_dataset(cfg, seed)?;
    match cfg.dataset.subset_size {
        None => Ok(vec![ds]),
        Some(size) => {
            let subsets = stratify(&ds, size, seed.wrapping_add(1))?;
            let start = cfg.dataset.subset_index;
            if start + count > subsets.len() {
                return Err(Error::Config(format!(
                    "requested subsets {start}..{} but only {} exist",
                    start + count,
                    subsets.len()
                )));
            }
            Ok(subsets.into_iter().skip(start).take(count).collect())
        }
    }
}

fn points_for(ds: &Dataset, n: usize) -> Result<(Dataset, Vec<DataPoint>)> {
    let sel = select_features(ds, n)?;
    let pts = sel.points()?;
    Ok((sel, pts))
}

fn exact_kernel(cfg: &Config, ds: &Dataset) -> Result<(Vec<DataPoint>, KernelMatrix)> {
    let fm = cfg.feature_map();
    let (_, points) = points_for(ds, fm.n_qubits)?;
    let mut k = gram_matrix(&points, &fm, cfg.kernel.family, cfg.kernel.gamma)?;
    k.dataset_id = Some(ds.id.clone());
    Ok((points, k))
}

#[derive(Debug, Serialize)]
struct KernelsResult {
    dataset: DatasetSummary,
    kernel: KernelMetadata,
    statistics: KernelStatistics,
    files: Vec<String>,
}

fn cmd_kernels(cfg: &Config, seed: u64, out: &mut Outputs) -> Result<()> {
    let ds = datasets(cfg, seed, 1)?.remove(0);
    let fm = cfg.feature_map();
    let (_, points) = points_for(&ds, fm.n_qubits)?;
    let k = &cfg.kernel;
    let mut kernel = match k.mode {
        KernelMode::Exact => gram_matrix(&points, &fm, k.family, k.gamma)?,
        KernelMode::Sampled => sample_gram(
            &points,
            &fm,
            k.family,
            k.gamma,
            k.n_shots,
            NoiseModel::new(k.p_error)?,
            seed.wrapping_add(2),
        )?,
    };
    kernel.dataset_id = Some(ds.id.clone());
    let cols = (0..kernel.m()).map(|j| format!("k{j}")).collect();
    out.csv("kernel.csv", cols, |w| kernel.write_csv(w))?;
    out.json(
        "kernel.json",
        KernelsResult {
            dataset: ds.summary(),
            kernel: kernel.metadata(),
            statistics: kernel_statistics(&kernel)?,
            files: vec!["kernel.csv".into()],
        },
    )
}

#[derive(Debug, Serialize)]
struct ShotsResult {
    dataset: DatasetSummary,
    statistics: KernelStatistics,
    dataset_budget: ShotBudget,
    error_budget: Option<ErrorBudget>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<EntryBudget>>,
}

type Budgets = (KernelMatrix, ShotBudget, Option<ErrorBudget>, Option<Vec<EntryBudget>>);

fn budgets(cfg: &Config, ds: &Dataset) -> Result<Budgets> {
    let (points, k) = exact_kernel(cfg, ds)?;
    let params = cfg.shots.params()?;
    let table = match k.family {
        KernelFamily::ProjectedQ => Some(reduced_table(&points, &cfg.feature_map())?),
        KernelFamily::FidelityQ => None,
    };
    let budget = match &table {
        Some(t) => dataset_budget(DatasetInput::WithReduced { kernel: &k, table: t }, &params)?,
        None => dataset_budget(DatasetInput::Kernel(&k), &params)?,
    };
    let kappa = budget.inputs.kappa.unwrap_or(0.0);
    let eb = match error_budget(k.family, kappa, params.eps, budget.inputs.delta_ens, k.config.n_qubits) {
        Ok(b) => Some(b),
        Err(e) => {
            warn!("no error budget: {e}");
            None
        }
    };
    let entries = if cfg.shots.per_entry {
        Some(entry_budgets(&k, table.as_deref(), &params, cfg.shots.ca_method)?)
    } else {
        None
    };
    Ok((k, budget, eb, entries))
}

fn cmd_estimate_shots(cfg: &Config, seed: u64, out: &mut Outputs) -> Result<()> {
    let ds = datasets(cfg, seed, 1)?.remove(0);
    let (k, budget, eb, entries) = budgets(cfg, &ds)?;
    info!(
        "N = {} ({:?} dominates; spread {}, CA {})",
        budget.n_required, budget.effect_dominant, budget.n_spread, budget.n_ca
    );
    out.json(
        "shots.json",
        ShotsResult {
            dataset: ds.summary(),
            statistics: kernel_statistics(&k)?,
            dataset_budget: budget,
            error_budget: eb,
            entries,
        },
    )
}

/// Average fitted exponent of one statistic over all subsets.
#[derive(Debug, Serialize)]
struct AlphaSummary {
    statistic: Statistic,
    mean_alpha: Option<f64>,
    valid_fits: usize,
    total_fits: usize,
}

fn summarize(fits: &[FitRecord]) -> Vec<AlphaSummary> {
    let mut stats: Vec<Statistic> = Vec::new();
    for f in fits {
        if !stats.contains(&f.statistic) {
            stats.push(f.statistic);
        }
    }
    stats
        .into_iter()
        .map(|s| {
            let of: Vec<&FitRecord> = fits.iter().filter(|f| f.statistic == s).collect();
            let alphas: Vec<f64> = of.iter().filter_map(|f| f.fit).filter(|f| f.valid).map(|f| f.alpha).collect();
            AlphaSummary {
                statistic: s,
                mean_alpha: (!alphas.is_empty()).then(|| alphas.iter().sum::<f64>() / alphas.len() as f64),
                valid_fits: alphas.len(),
                total_fits: of.len(),
            }
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct FitsResult {
    fits: Vec<FitRecord>,
    summary: Vec<AlphaSummary>,
}

fn write_series(out: &mut Outputs, stem: &str, series: &[ScalingSeries], threshold: f64, targets: &[usize]) -> Result<()> {
    let cols = ["statistic", "n", "value", "dataset_id"].map(String::from).to_vec();
    out.csv(&format!("{stem}.csv"), cols, |w| write_series_csv(series, w))?;
    let fits = fit_all(series, threshold, targets);
    let summary = summarize(&fits);
    out.json(&format!("{stem}_fits.json"), FitsResult { fits, summary })
}

fn cmd_sweep(cfg: &Config, seed: u64, out: &mut Outputs) -> Result<()> {
    let s = &cfg.sweep;
    let opts = SweepOptions {
        family: cfg.kernel.family,
        template: cfg.feature_map(),
        n_values: (s.n_min..=s.n_max).collect(),
        gamma: cfg.kernel.gamma,
        budget: s.shot_budgets.then(|| cfg.shots.params()).transpose()?,
        characteristics: s.characteristics,
    };
    let mut series = Vec::new();
    for ds in datasets(cfg, seed, s.subsets)? {
        series.extend(sweep(&ds, &opts)?.series);
    }
    write_series(out, "series", &series, s.threshold, &s.n_targets)
}

fn cmd_characterize(cfg: &Config, seed: u64, out: &mut Outputs) -> Result<()> {
    use crate::characteristics::{expressibility, mean_relative_entropy};
    use crate::concentration::SeriesMetadata;
    let s = &cfg.sweep;
    let template = cfg.feature_map();
    let mut series = Vec::new();
    for ds in datasets(cfg, seed, s.subsets)? {
        let mut expr = Vec::new();
        let mut ent = Vec::new();
        for n in s.n_min..=s.n_max {
            let (_, points) = points_for(&ds, n)?;
            let fm = template.with_qubits(n);
            expr.push((n, expressibility(&points, &fm)?));
            ent.push((n, mean_relative_entropy(&points, &fm)?));
        }
        let meta = SeriesMetadata {
            family: None,
            r: Some(template.repetitions),
            entanglement: Some(template.entanglement),
            dataset_id: Some(ds.id.clone()),
        };
        series.push(ScalingSeries::new(Statistic::Expressibility, expr, meta.clone())?);
        series.push(ScalingSeries::new(Statistic::RelativeEntropy, ent, meta)?);
    }
    write_series(out, "characteristics", &series, s.threshold, &s.n_targets)
}

#[derive(Debug, Serialize)]
struct ResourcesResult {
    dataset: DatasetSummary,
    shots_source: &'static str,
    execution: Execution,
    report: ScenarioReport,
}

fn cmd_resources(cfg: &Config, seed: u64, out: &mut Outputs) -> Result<()> {
    let r = &cfg.resources;
    let ds = datasets(cfg, seed, 1)?.remove(0);
    let fm = cfg.feature_map();
    let family = cfg.kernel.family;
    let m = ds.m();
    let needs_budget = r.n_shots.is_none() || (r.execution == ExecutionMode::Corrected && r.error_budget.is_none());
    let computed = if needs_budget { Some(budgets(cfg, &ds)?) } else { None };
    let (n_shots, shots_source) = match (r.n_shots, &computed) {
        (Some(n), _) => (n, "config"),
        (None, Some((_, b, _, _))) => (b.n_required, "dataset_budget"),
        (None, None) => unreachable!(),
    };
    let execution = match r.execution {
        ExecutionMode::Ideal => Execution::Ideal,
        ExecutionMode::Corrected => {
            let budget = match (r.error_budget, &computed) {
                (Some(b), _) => b,
                (None, Some((_, _, Some(eb), _))) => {
                    if eb.unconstrained {
                        warn!("error budget unconstrained; using p = 0.5");
                    }
                    eb.p_max.min(0.5)
                }
                _ => return Err(Error::Config("corrected execution needs resources.error_budget".into())),
            };
            Execution::Corrected { error_budget: budget }
        }
    };
    let work = Workload::new(&fm, family, m, n_shots);
    let q = quantum_cost(&work, &r.hardware, execution)?;
    let classical = r.classical.unwrap_or_default();
    let c = classical_cost(family, fm.n_qubits, m, &classical)?;
    let crossover = match &r.classical {
        Some(cl) => {
            let scaling = r.shots_scaling;
            let shots_at = |n: usize| match scaling {
                Some(s) => ((s.log2_c + s.alpha * n as f64).exp2().ceil().max(1.0)).min(u64::MAX as f64) as u64,
                None => n_shots,
            };
            crossover_n(family, m, &fm, shots_at, &r.hardware, execution, cl, 1..=r.crossover_max_n)?
        }
        None => None,
    };
    out.json(
        "resources.json",
        ResourcesResult {
            dataset: ds.summary(),
            shots_source,
            execution,
            report: ScenarioReport::new(&work, &q, &c, crossover),
        },
    )
}

/// Resolves the config (file, then flag overrides) and runs one command.
/// Returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Config("--threads must be ≥ 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            warn!("thread pool already initialised: {e}");
        }
    }
    let seed = cfg.seed;
    let mut out = Outputs::new(&cli.out, cli.command, &cfg)?;
    match cli.command {
        Command::Kernels => cmd_kernels(&cfg, seed, &mut out)?,
        Command::EstimateShots => cmd_estimate_shots(&cfg, seed, &mut out)?,
        Command::Sweep => cmd_sweep(&cfg, seed, &mut out)?,
        Command::Resources => cmd_resources(&cfg, seed, &mut out)?,
        Command::Characterize => cmd_characterize(&cfg, seed, &mut out)?,
    }
    Ok(out.written)
}

/// Machine-readable error written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
}

impl ErrorReport {
    pub fn from_error(e: &Error) -> Self {
        let kind = match e {
            Error::Config(_) => "config",
            Error::Shape { .. } => "shape",
            Error::Index { .. } => "index",
            Error::Domain(_) => "domain",
            Error::InsufficientData(_) => "insufficient_data",
            Error::BoundNotImposed(_) => "bound_not_imposed",
            Error::ZeroSpread => "zero_spread",
            Error::Dataset(_) => "dataset",
            Error::Unreachable(_) => "unreachable",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        };
        Self {
            error: kind,
            message: e.to_string(),
        }
    }
}

/// Process exit code for an error: 2 for configuration problems, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = Config::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(Config::from_toml(&text).unwrap(), cfg);
        assert_eq!(cfg.shots.eps, 1.0);
    }

    #[test]
    fn config_errors_name_the_line() {
        let err = Config::from_toml("seed = 3\n[feature_map]\nentanglement = \"ring\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Config(_)));
        assert!(msg.contains("line 3"), "{msg}");
        assert!(Config::from_toml("[kernel]\nfamliy = \"fidelity\"\n").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = Config::default();
        cfg.dataset.source = Source::Csv;
        assert!(cfg.validate().is_err());
        let mut cfg = Config::default();
        cfg.sweep.n_min = 5;
        cfg.sweep.n_max = 4;
        assert!(cfg.validate().is_err());
    }
}
