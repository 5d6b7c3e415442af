//! Config parsing, report types and subcommand runners for the `mhe` binary.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use mhe::mlp::{
    blob_means, make_imbalanced_blobs, sample_blobs, train, MlpArch, RegularizerConfig,
    TrainConfig, TrainReport,
};
use mhe::sphere::{
    asymptotic_check, compare_regularizers, minimize, random_sphere_init, AsymptoticReport,
    ComparisonReport, OptimizerConfig, Trajectory,
};
use mhe::{energy, EnergySpec, EnergyValue, MheError, NeuronSet};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot parse config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error(transparent)]
    Module(#[from] MheError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::ConfigParse { .. } => "ConfigParse",
            CliError::Io { .. } => "Io",
            CliError::Csv { .. } => "Csv",
            CliError::Module(e) => e.kind(),
        }
    }

    /// Error record printed on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let index = match self {
            CliError::Module(e) => e.index(),
            _ => None,
        };
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "index": index,
            }
        })
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::ConfigParse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Reads a headerless CSV of coordinates, one point per row.
pub fn read_points_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let csv_err = |e: &dyn std::fmt::Display| CliError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(&e))?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(&e))?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|e| csv_err(&format!("row {line}: {field:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_points_csv(path: &Path, points: &NeuronSet) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    for row in points.rows() {
        writer
            .write_record(row.iter().map(f64::to_string))
            .map_err(|e| io_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

/// Points given inline or as a CSV path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum PointSource {
    Inline(Vec<Vec<f64>>),
    Csv(PathBuf),
}

impl PointSource {
    pub fn load(&self) -> Result<NeuronSet> {
        let rows = match self {
            PointSource::Inline(rows) => rows.clone(),
            PointSource::Csv(path) => read_points_csv(path)?,
        };
        Ok(NeuronSet::new(rows)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub points: PointSource,
    #[serde(default)]
    pub spec: EnergySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub config: EnergyConfig,
    pub energy: EnergyValue,
}

/// Starting configuration: explicit points, or `n` random points in `R^dim`
/// drawn from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum InitSource {
    Points(PointSource),
    Random { n: usize, dim: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeConfig {
    pub init: InitSource,
    #[serde(default)]
    pub spec: EnergySpec,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeReport {
    pub config: MinimizeConfig,
    pub trajectory: Trajectory,
}

fn default_compare_seeds() -> Vec<u64> {
    (0..20).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default = "default_compare_n")]
    pub n: usize,
    #[serde(default = "default_compare_dim")]
    pub dim: usize,
    #[serde(default = "default_compare_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub spec: EnergySpec,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

fn default_compare_n() -> usize {
    10
}

fn default_compare_dim() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub config: CompareConfig,
    pub report: ComparisonReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryConfig {
    #[serde(default = "default_theory_s")]
    pub s: f64,
    /// Sphere dimension; points live in `R^(d+1)`.
    #[serde(default = "default_theory_d")]
    pub d: usize,
    #[serde(default = "default_sample_counts")]
    pub sample_counts: Vec<usize>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

fn default_theory_s() -> f64 {
    1.0
}

fn default_theory_d() -> usize {
    2
}

fn default_sample_counts() -> Vec<usize> {
    vec![20, 50, 100]
}

fn default_restarts() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub config: TheoryConfig,
    pub report: AsymptoticReport,
}

/// Gaussian blobs; the test set shares the class means of the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub classes: usize,
    pub dim: usize,
    pub train_per_class: Vec<usize>,
    pub test_per_class: Vec<usize>,
    pub spread: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainCommandConfig {
    pub dataset: DatasetConfig,
    pub arch: MlpArch,
    #[serde(default)]
    pub init_seed: u64,
    #[serde(default)]
    pub regularizer: RegularizerConfig,
    #[serde(default)]
    pub training: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainCommandReport {
    pub config: TrainCommandConfig,
    pub report: TrainReport,
}

pub fn run_energy(config: EnergyConfig) -> Result<EnergyReport> {
    let points = config.points.load()?;
    info!("energy of {} points in R^{}", points.count(), points.dim());
    let energy = energy(&points, &config.spec)?;
    Ok(EnergyReport { config, energy })
}

pub fn run_minimize(config: MinimizeConfig) -> Result<MinimizeReport> {
    config.optimizer.validate()?;
    let init = match &config.init {
        InitSource::Points(source) => source.load()?,
        InitSource::Random { n, dim, seed } => random_sphere_init(*n, *dim, *seed)?,
    };
    info!("minimizing {} points in R^{}", init.count(), init.dim());
    let trajectory = minimize(&init, &config.spec, &config.optimizer)?;
    info!(
        "stopped after {} steps ({:?}), energy {}",
        trajectory.accepted_steps,
        trajectory.stop_reason,
        trajectory.final_energy()
    );
    Ok(MinimizeReport { config, trajectory })
}

pub fn run_compare(config: CompareConfig) -> Result<CompareReport> {
    config.optimizer.validate()?;
    info!("comparing regularizers over {} seeds", config.seeds.len());
    let report = compare_regularizers(config.n, config.dim, &config.seeds, &config.spec, &config.optimizer)?;
    Ok(CompareReport { config, report })
}

pub fn run_theory(config: TheoryConfig) -> Result<TheoryReport> {
    config.optimizer.validate()?;
    info!("minimal energies for N in {:?}", config.sample_counts);
    let report = asymptotic_check(
        config.s,
        config.d,
        &config.sample_counts,
        config.restarts,
        &config.optimizer,
    )?;
    Ok(TheoryReport { config, report })
}

pub fn run_train(config: TrainCommandConfig) -> Result<TrainCommandReport> {
    let data = &config.dataset;
    let train_set = make_imbalanced_blobs(data.classes, &data.train_per_class, data.dim, data.spread, data.seed)?;
    let means = blob_means(data.classes, data.dim, data.seed)?;
    let test_set = sample_blobs(&means, &data.test_per_class, data.spread, data.seed.wrapping_add(1000))?;
    let mut model = config.arch.he_init(config.init_seed)?;
    info!(
        "training {} parameters on {} samples",
        model.param_count(),
        train_set.len()
    );
    let report = train(&mut model, &train_set, Some(&test_set), &config.regularizer, &config.training)?;
    info!("test accuracy {}", report.accuracy);
    Ok(TrainCommandReport { config, report })
}

/// Files written by a subcommand.
pub fn write_outputs<T: Serialize>(out: &Path, name: &str, report: &T) -> Result<PathBuf> {
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let path = out.join(format!("{name}.json"));
    write_json(&path, report)?;
    Ok(path)
}

pub fn write_features(path: &Path, report: &TrainReport) -> Result<()> {
    let Some(rows) = &report.features else {
        return Ok(());
    };
    let mut writer = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for row in rows {
        writer.serialize(row).map_err(|e| io_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}
