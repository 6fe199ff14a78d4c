use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "imea", version, about = "Evolutionary influence maximization on social graphs")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Master random seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Directory for default output files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// File of key=value lines applied before command-line flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a Barabási–Albert graph as an edge list.
    Generate(GenerateArgs),
    /// Estimate the spread of one seed set with one or more methods.
    Spread(SpreadArgs),
    /// Run the evolutionary optimizer.
    Optimize(OptimizeArgs),
    /// Reduce the candidate node set.
    Filter(FilterArgs),
    /// Correlate spread approximations with Monte Carlo on shared seed sets.
    Correlate(CorrelateArgs),
    /// Compare EA variants over repeated paired runs.
    Compare(CompareArgs),
    /// Score every node by a centrality metric.
    Centrality(CentralityArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge-list file (two integer labels per line, '#' comments).
    #[arg(long, conflicts_with = "ba_nodes")]
    pub graph: Option<PathBuf>,

    /// Treat the edge list as directed.
    #[arg(long)]
    pub directed: bool,

    /// Generate a Barabási–Albert graph with this many nodes instead.
    #[arg(long, requires = "ba_edges")]
    pub ba_nodes: Option<usize>,

    /// Edges attached per new node in the generated graph.
    #[arg(long)]
    pub ba_edges: Option<usize>,

    /// Seed of the generated graph (default: --seed).
    #[arg(long)]
    pub ba_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Ic,
    Wc,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Wc)]
    pub model: ModelKind,

    /// Uniform arc probability of the IC model.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodKind {
    Mc,
    McMaxHop,
    TwoHop,
    Exact,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub nodes: usize,

    /// Edges attached per new node.
    #[arg(long)]
    pub edges: usize,

    /// Output path (default: <out-dir>/ba-<nodes>-<edges>.txt).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpreadArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub model: ModelArgs,

    /// Seed node labels, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub seeds: Vec<u64>,

    /// Methods to run (repeatable or comma separated).
    #[arg(long = "method", value_enum, value_delimiter = ',', default_values_t = [MethodKind::Mc])]
    pub methods: Vec<MethodKind>,

    #[arg(long, default_value_t = 10_000)]
    pub simulations: usize,

    /// Hop limit for mc-max-hop: a positive integer or "inf".
    #[arg(long, default_value = "2", value_parser = parse_max_hop)]
    pub max_hop: MaxHop,

    /// CSV output (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxHop(pub Option<usize>);

pub fn parse_max_hop(s: &str) -> Result<MaxHop, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(MaxHop(None));
    }
    match s.parse::<usize>() {
        Ok(0) => Err("max-hop must be at least 1".into()),
        Ok(h) => Ok(MaxHop(Some(h))),
        Err(_) => Err(format!("expected a positive integer or \"inf\", got {s:?}")),
    }
}

#[derive(Debug, Args)]
pub struct FitnessArgs {
    /// Fitness evaluation method.
    #[arg(long, value_enum, default_value_t = MethodKind::McMaxHop)]
    pub fitness: MethodKind,

    #[arg(long, default_value_t = 100)]
    pub simulations: usize,

    #[arg(long, default_value = "3", value_parser = parse_max_hop)]
    pub max_hop: MaxHop,
}

#[derive(Debug, Args)]
pub struct EaArgs {
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub population: usize,
    #[arg(long, default_value_t = 100)]
    pub generations: usize,
    #[arg(long, default_value_t = 1.0)]
    pub crossover_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    pub mutation_rate: f64,
    #[arg(long, default_value_t = 5)]
    pub tournament_size: usize,
    #[arg(long, default_value_t = 1)]
    pub elites: usize,
    /// Generations without improvement before stopping (default: 10% of --generations).
    #[arg(long)]
    pub patience: Option<usize>,

    #[command(flatten)]
    pub fitness: FitnessArgs,

    /// Initialization: random, degree-random, degree-random-ranked,
    /// community-degree or single-smart:<metric>.
    #[arg(long, default_value = "random")]
    pub init: String,
    #[arg(long, default_value_t = 0.5)]
    pub smart_fraction: f64,

    /// A mutation strategy name, or "bandit" for the full adaptive pool.
    #[arg(long, default_value = "global-random")]
    pub mutation: String,
    /// Sliding window of the bandit.
    #[arg(long, default_value_t = 100)]
    pub window: usize,

    /// Node embeddings ("N d" header, then "label v1 .. vd" rows).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub embedding_neighbors: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterKind {
    None,
    MinDegree,
    BestSpread,
}

#[derive(Debug, Args)]
pub struct FilterOptions {
    #[arg(long = "filter", value_enum, default_value_t = FilterKind::None)]
    pub kind: FilterKind,
    /// Minimum out-degree kept by the min-degree filter.
    #[arg(long, default_value_t = 2)]
    pub min_degree: usize,
    #[arg(long, default_value_t = 0.8)]
    pub initial_error_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    pub error_decrement: f64,
    #[arg(long, default_value_t = 1e9)]
    pub space_lower: f64,
    #[arg(long, default_value_t = 1e11)]
    pub space_upper: f64,
    #[arg(long, default_value_t = 30)]
    pub batch_size: usize,
    /// Hop limit of the filter's simulations.
    #[arg(long, default_value_t = 2)]
    pub filter_max_hop: usize,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
    /// Total simulation budget of the filter.
    #[arg(long)]
    pub simulation_budget: Option<u64>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub ea: EaArgs,
    #[command(flatten)]
    pub filter: FilterOptions,

    /// Candidate labels (whitespace separated) or a filter JSON report.
    #[arg(long, conflicts_with = "kind")]
    pub candidates: Option<PathBuf>,

    /// Per-generation CSV (default: <out-dir>/generations.csv).
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Result JSON (default: <out-dir>/result.json).
    #[arg(long)]
    pub result: Option<PathBuf>,
    /// Per-generation bandit CSV, written when the bandit pool is active.
    #[arg(long)]
    pub bandit_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[command(flatten)]
    pub filter: FilterOptions,
    /// JSON output (default: <out-dir>/filter.json).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Seed-set sizes (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [5])]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub seed_sets: usize,
    /// Simulations of the Monte Carlo reference and of mc-max-hop.
    #[arg(long, default_value_t = 10_000)]
    pub simulations: usize,
    #[arg(long, default_value_t = 2)]
    pub max_hop: usize,
    /// Output stem (default: <out-dir>/correlation).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub ea: EaArgs,
    /// Variants: basic, degree-random, degree-random-ranked,
    /// community-degree, bandit, min-degree, best-spread.
    #[arg(long, value_delimiter = ',', default_values_t = ["basic".to_string(), "best-spread".to_string()])]
    pub variants: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub repetitions: usize,
    /// Simulations of the common final evaluation.
    #[arg(long, default_value_t = 10_000)]
    pub final_simulations: usize,
    /// Output stem (default: <out-dir>/comparison).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CentralityArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// betweenness, closeness, degree, eigenvector or katz.
    #[arg(long, default_value = "degree")]
    pub metric: String,
    /// Time budget in seconds.
    #[arg(long)]
    pub budget: Option<f64>,
    /// CSV output (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}
