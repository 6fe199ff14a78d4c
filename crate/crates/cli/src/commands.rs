use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use serde_json::json;

use imea::centrality::{centrality, Metric};
use imea::ea::{evolve_with, CandidateFilter, EaConfig, EaResources, InitSpec, MutationSpec};
use imea::embedding::EmbeddingTable;
use imea::experiment::{
    correlation_study_on, ea_comparison_on, emit_reports, DatasetSource, EaVariant, ExperimentConfig,
};
use imea::filter::{filter_best_spread, filter_min_degree, BestSpreadParams, LabeledFilterReport};
use imea::generators::barabasi_albert;
use imea::{DiffusionModel, Graph, NodeId, SpreadMethod, StreamKey};

use crate::args::*;

pub struct Globals {
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Globals {
    fn path(&self, explicit: &Option<PathBuf>, default: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.out_dir.join(default))
    }
}

fn dataset(args: &GraphArgs, g: &Globals) -> Result<DatasetSource> {
    match (&args.graph, args.ba_nodes, args.ba_edges) {
        (Some(path), _, _) => Ok(DatasetSource::File {
            path: path.clone(),
            directed: args.directed,
        }),
        (None, Some(n), Some(m)) => Ok(DatasetSource::BarabasiAlbert {
            n,
            m,
            seed: args.ba_seed.unwrap_or(g.seed),
        }),
        _ => bail!("a graph is required: pass --graph <file> or --ba-nodes N --ba-edges M"),
    }
}

fn load_graph(args: &GraphArgs, g: &Globals) -> Result<(Graph, DatasetSource)> {
    let source = dataset(args, g)?;
    let graph = source.load().with_context(|| format!("loading {}", source.name()))?;
    Ok((graph, source))
}

fn model(args: &ModelArgs, default_p: f64) -> Result<DiffusionModel> {
    Ok(match args.model {
        ModelKind::Wc => DiffusionModel::Wc,
        ModelKind::Ic => DiffusionModel::ic(args.p.unwrap_or(default_p))?,
    })
}

fn method(kind: MethodKind, simulations: usize, max_hop: MaxHop) -> SpreadMethod {
    match (kind, max_hop.0) {
        (MethodKind::Mc, _) | (MethodKind::McMaxHop, None) => SpreadMethod::Mc { simulations },
        (MethodKind::McMaxHop, Some(max_hop)) => SpreadMethod::McMaxHop { simulations, max_hop },
        (MethodKind::TwoHop, _) => SpreadMethod::TwoHop,
        (MethodKind::Exact, _) => SpreadMethod::Exact,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn to_nodes(graph: &Graph, labels: &[u64]) -> Result<Vec<NodeId>> {
    labels
        .iter()
        .map(|&l| graph.index_of(l).with_context(|| format!("label {l} is not a node of the graph")))
        .collect()
}

fn labels(graph: &Graph, nodes: &[NodeId]) -> Vec<u64> {
    nodes.iter().map(|&u| graph.label(u)).collect()
}

pub fn generate(args: &GenerateArgs, g: &Globals) -> Result<()> {
    let graph = barabasi_albert(args.nodes, args.edges, g.seed)?;
    let path = g.path(&args.output, &format!("ba-{}-{}.txt", args.nodes, args.edges));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    graph.write_edgelist_file(&path)?;
    eprintln!(
        "wrote {} nodes, {} edges to {}",
        graph.node_count(),
        graph.edge_count(),
        path.display()
    );
    Ok(())
}

pub fn spread(args: &SpreadArgs, g: &Globals) -> Result<()> {
    let (graph, _) = load_graph(&args.graph, g)?;
    let model = model(&args.model, 0.1)?;
    let seeds = to_nodes(&graph, &args.seeds)?;
    let mut out = output(&args.output)?;
    writeln!(out, "method,mean,std,runtime_ms")?;
    for &kind in &args.methods {
        let m = method(kind, args.simulations, args.max_hop);
        let t = Instant::now();
        let est = m.evaluate(&graph, &model, &seeds, StreamKey::new(g.seed, 0))?;
        let ms = t.elapsed().as_secs_f64() * 1e3;
        writeln!(out, "{},{},{},{:.3}", m.label(), est.mean, est.std, ms)?;
    }
    out.flush()?;
    Ok(())
}

fn filter_params(opts: &FilterOptions, seed: u64) -> BestSpreadParams {
    BestSpreadParams {
        initial_error_rate: opts.initial_error_rate,
        error_decrement: opts.error_decrement,
        space_lower: opts.space_lower,
        space_upper: opts.space_upper,
        batch_size: opts.batch_size,
        max_hop: opts.filter_max_hop,
        confidence: opts.confidence,
        simulation_budget: opts.simulation_budget,
        master_seed: seed,
        ..BestSpreadParams::default()
    }
}

fn ea_config(ea: &EaArgs, model: DiffusionModel, seed: u64) -> Result<EaConfig> {
    let mutation = if ea.mutation == "bandit" {
        MutationSpec::full_pool(ea.window)
    } else {
        MutationSpec::single(ea.mutation.parse()?)
    };
    Ok(EaConfig {
        population_size: ea.population,
        max_generations: ea.generations,
        crossover_rate: ea.crossover_rate,
        mutation_rate: ea.mutation_rate,
        tournament_size: ea.tournament_size,
        num_elites: ea.elites,
        patience: ea.patience,
        k: ea.k,
        model,
        fitness: method(ea.fitness.fitness, ea.fitness.simulations, ea.fitness.max_hop),
        init: InitSpec {
            strategy: ea.init.parse()?,
            smart_fraction: ea.smart_fraction,
        },
        mutation,
        embedding_neighbors: ea.embedding_neighbors,
        master_seed: seed,
        ..EaConfig::default()
    })
}

fn read_candidates(path: &Path, graph: &Graph) -> Result<Vec<NodeId>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let report: LabeledFilterReport =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        return Ok(report.candidates(graph)?);
    }
    let labels = text
        .split_whitespace()
        .map(|t| t.parse::<u64>().with_context(|| format!("{}: bad label {t:?}", path.display())))
        .collect::<Result<Vec<u64>>>()?;
    to_nodes(graph, &labels)
}

pub fn optimize(args: &OptimizeArgs, g: &Globals) -> Result<()> {
    let (graph, source) = load_graph(&args.graph, g)?;
    let model = model(&args.model, 0.01)?;
    let mut config = ea_config(&args.ea, model, g.seed)?;
    config.candidate_filter = match (&args.candidates, args.filter.kind) {
        (Some(path), _) => CandidateFilter::Explicit {
            nodes: read_candidates(path, &graph)?,
        },
        (None, FilterKind::None) => CandidateFilter::None,
        (None, FilterKind::MinDegree) => CandidateFilter::MinDegree {
            threshold: args.filter.min_degree,
        },
        (None, FilterKind::BestSpread) => CandidateFilter::BestSpread {
            params: filter_params(&args.filter, g.seed),
        },
    };
    let embeddings = match &args.ea.embeddings {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let (table, report) = EmbeddingTable::load(BufReader::new(f), &graph)?;
            if report.missing > 0 || !report.unknown_labels.is_empty() {
                eprintln!(
                    "embeddings: {} loaded, {} nodes without a vector, {} unknown labels skipped",
                    report.loaded,
                    report.missing,
                    report.unknown_labels.len()
                );
            }
            Some(table)
        }
        None => None,
    };
    let resources = EaResources {
        embeddings: embeddings.as_ref(),
        ..EaResources::default()
    };
    let result = evolve_with(&graph, &config, resources)?;

    let log_path = g.path(&args.log, "generations.csv");
    let mut log = create(&log_path)?;
    writeln!(log, "generation,best,mean,std,elapsed_ms")?;
    for s in &result.generations {
        writeln!(log, "{},{},{},{},{:.3}", s.generation, s.best, s.mean, s.std, s.elapsed_ms)?;
    }
    log.flush()?;

    if let Some(path) = &args.bandit_log {
        let mut w = create(path)?;
        writeln!(w, "generation,arm,count,window_sum")?;
        for snap in &result.bandit_log {
            for (a, arm) in result.bandit_arms.iter().enumerate() {
                writeln!(w, "{},{},{},{}", snap.generation, arm, snap.counts[a], snap.window_sums[a])?;
            }
        }
        w.flush()?;
    }

    let best_labels = labels(&graph, &result.best.nodes);
    let doc = json!({
        "dataset": source.name(),
        "best_seed_set": best_labels,
        "fitness": result.best.fitness,
        "initial_best": result.initial_best,
        "stop_reason": result.stop_reason,
        "generations_executed": result.generations_executed,
        "history": result.history,
        "timings": result.timings,
        "candidate_count": result.candidate_count,
        "evaluations": result.evaluations,
        "cache_hits": result.cache_hits,
        "config": config,
        "version": imea::experiment::VERSION,
    });
    let result_path = g.path(&args.result, "result.json");
    write_json(&result_path, &doc)?;
    println!(
        "best fitness {:.4} after {} generations ({:?}); seeds {:?}",
        result.best.fitness.unwrap_or(0.0),
        result.generations_executed,
        result.stop_reason,
        best_labels
    );
    Ok(())
}

pub fn filter(args: &FilterArgs, g: &Globals) -> Result<()> {
    let (graph, _) = load_graph(&args.graph, g)?;
    let model = model(&args.model, 0.1)?;
    let report = match args.filter.kind {
        FilterKind::MinDegree => filter_min_degree(&graph, args.filter.min_degree),
        FilterKind::BestSpread | FilterKind::None => {
            filter_best_spread(&graph, &model, args.k, &filter_params(&args.filter, g.seed))?
        }
    };
    let path = g.path(&args.output, "filter.json");
    write_json(&path, &serde_json::to_value(report.to_labeled(&graph))?)?;
    println!(
        "kept {} of {} nodes ({:?}, {} iterations)",
        report.retained.len(),
        graph.node_count(),
        report.stop,
        report.iterations
    );
    Ok(())
}

fn stem_paths(g: &Globals, explicit: &Option<PathBuf>, default: &str) -> (PathBuf, PathBuf) {
    let stem = g.path(explicit, default);
    (stem.with_extension("csv"), stem.with_extension("json"))
}

pub fn correlate(args: &CorrelateArgs, g: &Globals) -> Result<()> {
    let (graph, source) = load_graph(&args.graph, g)?;
    let config = ExperimentConfig {
        dataset: source.clone(),
        model: model(&args.model, 0.1)?,
        k: args.k.clone(),
        repetitions: 1,
        master_seed: g.seed,
        methods: vec![
            SpreadMethod::TwoHop,
            SpreadMethod::McMaxHop {
                simulations: args.simulations,
                max_hop: args.max_hop,
            },
        ],
        reference: SpreadMethod::Mc {
            simulations: args.simulations,
        },
        seed_sets: args.seed_sets,
        ..ExperimentConfig::default()
    };
    config.validate()?;
    let report = correlation_study_on(&graph, &source.name(), &config)?;
    let (csv, json) = stem_paths(g, &args.output, "correlation");
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    emit_reports(&report, &config, &csv, &json)?;
    println!("method,k,pearson_r,total_runtime_ms,reference_runtime_ms");
    for c in &report.correlations {
        let r = c.pearson_r.map_or("degenerate".to_string(), |r| format!("{r:.4}"));
        println!(
            "{},{},{},{:.1},{:.1}",
            c.method, c.k, r, c.total_runtime_ms, c.reference_runtime_ms
        );
    }
    Ok(())
}

pub fn compare(args: &CompareArgs, g: &Globals) -> Result<()> {
    let (graph, source) = load_graph(&args.graph, g)?;
    let model = model(&args.model, 0.01)?;
    let base = ea_config(&args.ea, model, g.seed)?;
    let variants = args
        .variants
        .iter()
        .map(|name| EaVariant::preset(name, &base))
        .collect::<imea::Result<Vec<_>>>()?;
    let config = ExperimentConfig {
        dataset: source.clone(),
        model,
        k: vec![args.ea.k],
        repetitions: args.repetitions,
        master_seed: g.seed,
        variants,
        final_evaluation: SpreadMethod::Mc {
            simulations: args.final_simulations,
        },
        ..ExperimentConfig::default()
    };
    config.validate()?;
    let report = ea_comparison_on(&graph, &source.name(), &config)?;
    let (csv, json) = stem_paths(g, &args.output, "comparison");
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    emit_reports(&report, &config, &csv, &json)?;
    println!("variant,k,mean_final_fitness,std,mean_runtime_ms");
    for a in report.aggregates.iter().filter(|a| a.metric == "final_fitness") {
        println!("{},{},{:.4},{:.4},{:.1}", a.method, a.k, a.mean, a.std, a.mean_runtime_ms);
    }
    Ok(())
}

pub fn centrality_cmd(args: &CentralityArgs, g: &Globals) -> Result<()> {
    let (graph, _) = load_graph(&args.graph, g)?;
    let metric: Metric = args.metric.parse()?;
    let budget = args.budget.map(Duration::from_secs_f64);
    let scores = centrality(&graph, metric, budget)?;
    let mut out = output(&args.output)?;
    writeln!(out, "node,score")?;
    for u in graph.nodes() {
        writeln!(out, "{},{}", graph.label(u), scores.values[u])?;
    }
    out.flush()?;
    Ok(())
}

