//! Experiment orchestration: approximation correlation studies, repeated EA
//! variant comparisons, and CSV/JSON report emission.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffusion::{DiffusionModel, SpreadMethod, StreamKey};
use crate::ea::{self, set_hash, CandidateFilter, EaConfig, InitSpec, InitStrategy, MutationSpec};
use crate::error::{Error, Result};
use crate::filter::BestSpreadParams;
use crate::generators::barabasi_albert;
use crate::graph::{load_edgelist_file, Graph, NodeId};
use crate::stats;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));
pub const CSV_HEADER: [&str; 8] = ["run_id", "method", "dataset", "model", "k", "metric", "value", "runtime_ms"];

const FINAL_SALT: u64 = 0xF1AA_1E7A_1000_0001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetSource {
    File { path: PathBuf, directed: bool },
    BarabasiAlbert { n: usize, m: usize, seed: u64 },
}

impl DatasetSource {
    pub fn load(&self) -> Result<Graph> {
        match self {
            DatasetSource::File { path, directed } => load_edgelist_file(path, *directed),
            DatasetSource::BarabasiAlbert { n, m, seed } => barabasi_albert(*n, *m, *seed),
        }
    }

    pub fn name(&self) -> String {
        match self {
            DatasetSource::File { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            DatasetSource::BarabasiAlbert { n, m, .. } => format!("ba-{n}-{m}"),
        }
    }
}

/// A named EA configuration; `model`, `k` and `master_seed` are overridden
/// per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EaVariant {
    pub name: String,
    pub config: EaConfig,
}

impl EaVariant {
    pub const PRESETS: [&'static str; 7] = [
        "basic",
        "degree-random",
        "degree-random-ranked",
        "community-degree",
        "bandit",
        "min-degree",
        "best-spread",
    ];

    /// A preset variant derived from `base`.
    pub fn preset(name: &str, base: &EaConfig) -> Result<Self> {
        let mut config = base.clone();
        let smart = |strategy| InitSpec {
            strategy,
            smart_fraction: 0.5,
        };
        match name {
            "basic" => {}
            "degree-random" => config.init = smart(InitStrategy::DegreeRandom),
            "degree-random-ranked" => config.init = smart(InitStrategy::DegreeRandomRanked),
            "community-degree" => config.init = smart(InitStrategy::CommunityDegree),
            "bandit" => config.mutation = MutationSpec::full_pool(100),
            "min-degree" => config.candidate_filter = CandidateFilter::MinDegree { threshold: 2 },
            "best-spread" => {
                config.candidate_filter = CandidateFilter::BestSpread {
                    params: BestSpreadParams::default(),
                }
            }
            other => {
                return Err(Error::param(format!(
                    "unknown variant {other:?}; expected one of {}",
                    Self::PRESETS.join(", ")
                )))
            }
        }
        Ok(EaVariant {
            name: name.to_string(),
            config,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub model: DiffusionModel,
    pub k: Vec<usize>,
    pub repetitions: usize,
    pub master_seed: u64,
    /// Approximations compared against `reference` in a correlation study.
    pub methods: Vec<SpreadMethod>,
    pub reference: SpreadMethod,
    /// Shared random seed sets per `k` in a correlation study.
    pub seed_sets: usize,
    pub variants: Vec<EaVariant>,
    /// Common re-scoring of every variant's best seed set.
    pub final_evaluation: SpreadMethod,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSource::BarabasiAlbert { n: 1000, m: 3, seed: 0 },
            model: DiffusionModel::Wc,
            k: vec![5],
            repetitions: 10,
            master_seed: 0,
            methods: vec![
                SpreadMethod::TwoHop,
                SpreadMethod::McMaxHop {
                    simulations: 10_000,
                    max_hop: 2,
                },
            ],
            reference: SpreadMethod::Mc { simulations: 10_000 },
            seed_sets: 100,
            variants: Vec::new(),
            final_evaluation: SpreadMethod::Mc { simulations: 10_000 },
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::param("repetitions must be at least 1"));
        }
        if self.k.is_empty() || self.k.contains(&0) {
            return Err(Error::param("k list must be nonempty and positive"));
        }
        if let DatasetSource::File { path, .. } = &self.dataset {
            if !path.exists() {
                return Err(Error::io(
                    path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "dataset not found"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub method: String,
    pub dataset: String,
    pub model: String,
    pub k: usize,
    pub metric: String,
    pub value: f64,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: String,
    pub k: usize,
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub mean_runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub method: String,
    pub k: usize,
    /// `None` when either series has zero variance.
    pub pearson_r: Option<f64>,
    pub degenerate: bool,
    pub total_runtime_ms: f64,
    pub reference_runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
    pub correlations: Vec<Correlation>,
    /// Shared seed sets of a correlation study, in original labels, per `k`.
    pub seed_sets: Vec<Vec<u64>>,
}

impl RunReport {
    /// Recomputes `aggregates` from `records`, grouped by method, k and
    /// metric in first-appearance order.
    pub fn aggregate(&mut self) {
        type Key = (String, usize, String);
        let mut groups: Vec<(Key, Vec<&RunRecord>)> = Vec::new();
        for r in &self.records {
            let key = (r.method.clone(), r.k, r.metric.clone());
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(r),
                None => groups.push((key, vec![r])),
            }
        }
        self.aggregates = groups
            .into_iter()
            .map(|((method, k, metric), rows)| {
                let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
                let times: Vec<f64> = rows.iter().map(|r| r.runtime_ms).collect();
                Aggregate {
                    method,
                    k,
                    metric,
                    n: rows.len(),
                    mean: stats::mean(&values),
                    std: stats::sample_std(&values),
                    mean_runtime_ms: stats::mean(&times),
                }
            })
            .collect();
    }

    pub fn aggregate_for(&self, method: &str, k: usize, metric: &str) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.method == method && a.k == k && a.metric == metric)
    }

    /// Values of one metric for one method, in run order.
    pub fn values(&self, method: &str, k: usize, metric: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.method == method && r.k == k && r.metric == metric)
            .map(|r| r.value)
            .collect()
    }
}

/// Uniform random `k`-subsets shared by every method under test.
pub fn random_seed_sets(graph: &Graph, k: usize, count: usize, seed: u64) -> Result<Vec<Vec<NodeId>>> {
    if k > graph.node_count() {
        return Err(Error::param(format!("k = {k} exceeds the node count")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    Ok((0..count)
        .map(|_| {
            let mut s = index::sample(&mut rng, graph.node_count(), k).into_vec();
            s.sort_unstable();
            s
        })
        .collect())
}

/// Evaluates every method and the reference on the same random seed sets and
/// correlates each method with the reference.
pub fn run_correlation_study(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let graph = config.dataset.load()?;
    correlation_study_on(&graph, &config.dataset.name(), config)
}

pub fn correlation_study_on(graph: &Graph, dataset: &str, config: &ExperimentConfig) -> Result<RunReport> {
    let mut report = RunReport::default();
    for &k in &config.k {
        let sets = random_seed_sets(graph, k, config.seed_sets, config.master_seed)?;
        report
            .seed_sets
            .extend(sets.iter().map(|s| s.iter().map(|&u| graph.label(u)).collect::<Vec<u64>>()));
        let (reference, reference_ms) = evaluate_all(graph, config, &config.reference, &sets)?;
        push_spreads(&mut report, dataset, config, k, &config.reference, &reference);
        for method in &config.methods {
            let (values, total_ms) = evaluate_all(graph, config, method, &sets)?;
            push_spreads(&mut report, dataset, config, k, method, &values);
            let means: Vec<f64> = values.iter().map(|v| v.0).collect();
            let ref_means: Vec<f64> = reference.iter().map(|v| v.0).collect();
            let r = match stats::pearson_correlation(&means, &ref_means) {
                Ok(r) => Some(r),
                Err(Error::ZeroVariance) => None,
                Err(e) => return Err(e),
            };
            report.correlations.push(Correlation {
                method: method.label(),
                k,
                pearson_r: r,
                degenerate: r.is_none(),
                total_runtime_ms: total_ms,
                reference_runtime_ms: reference_ms,
            });
        }
    }
    report.aggregate();
    Ok(report)
}

fn evaluate_all(
    graph: &Graph,
    config: &ExperimentConfig,
    method: &SpreadMethod,
    sets: &[Vec<NodeId>],
) -> Result<(Vec<(f64, f64)>, f64)> {
    let mut out = Vec::with_capacity(sets.len());
    let mut total = 0.0;
    for (i, set) in sets.iter().enumerate() {
        let key = StreamKey::new(config.master_seed, i as u64);
        let t = Instant::now();
        let est = method.evaluate(graph, &config.model, set, key)?;
        let ms = t.elapsed().as_secs_f64() * 1e3;
        total += ms;
        out.push((est.mean, ms));
    }
    Ok((out, total))
}

fn push_spreads(
    report: &mut RunReport,
    dataset: &str,
    config: &ExperimentConfig,
    k: usize,
    method: &SpreadMethod,
    values: &[(f64, f64)],
) {
    for (i, &(value, ms)) in values.iter().enumerate() {
        report.records.push(RunRecord {
            run_id: i,
            method: method.label(),
            dataset: dataset.to_string(),
            model: config.model.to_string(),
            k,
            metric: "spread".into(),
            value,
            runtime_ms: ms,
        });
    }
}

/// Seed of repetition `run`; shared across variants so runs are paired.
pub fn run_seed(master_seed: u64, run: usize) -> u64 {
    let mut z = master_seed.wrapping_add((run as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Common high-fidelity score of a seed set.
pub fn final_fitness(graph: &Graph, config: &ExperimentConfig, nodes: &[NodeId]) -> Result<f64> {
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    let key = StreamKey::new(config.master_seed ^ FINAL_SALT, set_hash(&sorted));
    Ok(config.final_evaluation.evaluate(graph, &config.model, &sorted, key)?.mean)
}

/// Runs every variant `repetitions` times with paired seeds. Each run emits
/// `final_fitness` (common re-scoring), `ea_fitness` (the variant's own
/// fitness) and `generations` records.
pub fn run_ea_comparison(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let graph = config.dataset.load()?;
    ea_comparison_on(&graph, &config.dataset.name(), config)
}

pub fn ea_comparison_on(graph: &Graph, dataset: &str, config: &ExperimentConfig) -> Result<RunReport> {
    if config.variants.is_empty() {
        return Err(Error::param("at least one EA variant is required"));
    }
    let mut report = RunReport::default();
    for &k in &config.k {
        for variant in &config.variants {
            for run in 0..config.repetitions {
                let mut ea_config = variant.config.clone();
                ea_config.k = k;
                ea_config.model = config.model;
                ea_config.master_seed = run_seed(config.master_seed, run);
                if let CandidateFilter::BestSpread { params } = &mut ea_config.candidate_filter {
                    params.master_seed = ea_config.master_seed;
                }
                let t = Instant::now();
                let result = ea::evolve(graph, &ea_config)?;
                let ms = t.elapsed().as_secs_f64() * 1e3;
                let best = &result.best.nodes;
                let rows = [
                    ("final_fitness", final_fitness(graph, config, best)?),
                    ("ea_fitness", result.best.fitness.unwrap_or(0.0)),
                    ("generations", result.generations_executed as f64),
                ];
                for (metric, value) in rows {
                    report.records.push(RunRecord {
                        run_id: run,
                        method: variant.name.clone(),
                        dataset: dataset.to_string(),
                        model: config.model.to_string(),
                        k,
                        metric: metric.into(),
                        value,
                        runtime_ms: ms,
                    });
                }
            }
        }
    }
    report.aggregate();
    Ok(report)
}

/// JSON document written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument<C> {
    pub version: String,
    pub config: C,
    pub aggregates: Vec<Aggregate>,
    pub correlations: Vec<Correlation>,
    pub seed_sets: Vec<Vec<u64>>,
}

pub fn write_csv<W: Write>(report: &RunReport, writer: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in &report.records {
        w.serialize(r)?;
    }
    w.flush()
}

/// Writes the per-run CSV and the aggregate JSON.
pub fn emit_reports<C: Serialize>(report: &RunReport, config: &C, csv_path: &Path, json_path: &Path) -> Result<()> {
    let file = File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
    write_csv(report, BufWriter::new(file)).map_err(|e| Error::io(csv_path, e))?;
    let doc = ReportDocument {
        version: VERSION.to_string(),
        config,
        aggregates: report.aggregates.clone(),
        correlations: report.correlations.clone(),
        seed_sets: report.seed_sets.clone(),
    };
    let file = File::create(json_path).map_err(|e| Error::io(json_path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &doc)?;
    w.flush().map_err(|e| Error::io(json_path, e))?;
    Ok(())
}
