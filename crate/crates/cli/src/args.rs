use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use emopair::annotation::BinarizationPolicy;
use emopair::diststats::FrequencyUnit;
use emopair::emonet::{CountMode, MatrixOrder, NetworkFormat};
use emopair::logit::Correction;

#[derive(Debug, Parser)]
#[command(
    name = "emopair",
    version,
    about = "Emotion co-occurrence and emotion-pair regression pipeline"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// key=value file mirroring command-line flags; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a post dump, segment sentences and report the manifest.
    Ingest(IngestArgs),
    /// Label sentences and posts with a lexicon or remote backend.
    Annotate(AnnotateArgs),
    /// Build the co-occurrence matrix and network.
    Network(NetworkArgs),
    /// Emotion frequency CDF/CCDF and pairs-per-post histogram.
    Stats(StatsArgs),
    /// Export the emotion-pair design matrix.
    Pairs(PairsArgs),
    /// Fit the logistic regression on emotion-pair features.
    Fit(FitArgs),
    /// Run stats, network, pairs and fit into one run directory.
    Report(ReportArgs),
    /// Generate a labeled corpus from a planted pair model.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// JSON-lines post dump.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Earliest post date (ISO-8601), inclusive.
    #[arg(long, default_value = "2012-01-01")]
    pub since: String,
    /// Latest post date (ISO-8601), inclusive; a bare date covers the whole day.
    #[arg(long, default_value = "2022-12-31")]
    pub until: String,
    /// Disable the time filter.
    #[arg(long)]
    pub all_time: bool,
    /// Do not treat the title as sentence 0 or send it to the post classifier.
    #[arg(long)]
    pub ignore_titles: bool,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Segmented posts as JSON lines.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Manifest JSON (stdout when omitted).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Backend {
    Lexicon,
    Remote,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, value_enum, default_value = "lexicon")]
    pub backend: Backend,
    /// Ordered `keyword,emotion` CSV for the lexicon backend; label-name rules when omitted.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Ordered `keyword,label` CSV for post depression labels (lexicon backend).
    #[arg(long)]
    pub depression_rules: Option<PathBuf>,
    /// Annotator service base URL.
    #[arg(long, env = "EMOPAIR_ANNOTATOR_URL")]
    pub endpoint: Option<String>,
    /// Posts in flight against the remote backend.
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,
    /// Attempts per request before giving up.
    #[arg(long, default_value_t = 3)]
    pub attempts: usize,
    /// moderate_or_severe | severe_only
    #[arg(long, default_value = "moderate_or_severe")]
    pub binarize: BinarizationPolicy,
    /// Labeled corpus output (JSON lines).
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct LabeledArgs {
    /// Labeled corpus (JSON lines).
    #[arg(long, short)]
    pub input: PathBuf,
    /// Recompute outcomes from depression labels: moderate_or_severe | severe_only
    #[arg(long)]
    pub binarize: Option<BinarizationPolicy>,
    /// Keep `neutral` sentences as an emotion.
    #[arg(long)]
    pub include_neutral: bool,
    /// Ignore sentence labels scored below this.
    #[arg(long, default_value_t = 0.0)]
    pub min_confidence: f64,
}

#[derive(Debug, Args)]
pub struct NetworkOptions {
    /// distinct | multiset
    #[arg(long, default_value = "distinct")]
    pub count_mode: CountMode,
    /// Matrix row/column order: canonical | sentiment
    #[arg(long, default_value = "canonical")]
    pub order: MatrixOrder,
    /// `emotion,group` CSV overriding the bundled sentiment grouping.
    #[arg(long)]
    pub sentiment_map: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    #[command(flatten)]
    pub labeled: LabeledArgs,
    #[command(flatten)]
    pub network: NetworkOptions,
    /// graphml | dot | edge_csv
    #[arg(long, default_value = "graphml")]
    pub format: NetworkFormat,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Co-occurrence matrix CSV.
    #[arg(long)]
    pub matrix_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsOptions {
    /// sentence | post_presence
    #[arg(long, default_value = "sentence")]
    pub unit: FrequencyUnit,
    /// Print the cumulative share of the k most frequent emotions.
    #[arg(long, default_value_t = 8)]
    pub top_k: usize,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub labeled: LabeledArgs,
    #[command(flatten)]
    pub stats: StatsOptions,
    /// Frequency TSV.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Pairs-per-post TSV.
    #[arg(long)]
    pub histogram_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PairOptions {
    /// Minimum posts per pair; default max(25, 0.1% of posts).
    #[arg(long)]
    pub min_support: Option<usize>,
    /// Directed pairs by first appearance in the post.
    #[arg(long)]
    pub ordered_pairs: bool,
}

#[derive(Debug, Args)]
pub struct PairsArgs {
    #[command(flatten)]
    pub labeled: LabeledArgs,
    #[command(flatten)]
    pub pairs: PairOptions,
    /// Directory for matrix.csv, vocabulary.csv and outcome.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitOptions {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// none | bonferroni
    #[arg(long, default_value = "none")]
    pub correction: Correction,
    /// L2 penalty on pair coefficients.
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    /// Convergence threshold on the log-likelihood change.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    /// One single-pair model per pair instead of the joint model.
    #[arg(long)]
    pub marginal: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub labeled: LabeledArgs,
    #[command(flatten)]
    pub pairs: PairOptions,
    #[command(flatten)]
    pub fit: FitOptions,
    /// Results CSV (all coefficients).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Significant pairs CSV.
    #[arg(long)]
    pub significant_output: Option<PathBuf>,
    /// Run metadata JSON.
    #[arg(long)]
    pub metadata: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub labeled: LabeledArgs,
    #[command(flatten)]
    pub network: NetworkOptions,
    #[command(flatten)]
    pub stats: StatsOptions,
    #[command(flatten)]
    pub pairs: PairOptions,
    #[command(flatten)]
    pub fit: FitOptions,
    /// Parent directory; each run writes a new timestamped subdirectory.
    #[arg(long, default_value = "reports")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub posts: usize,
    /// Planted model JSON; the built-in twelve-pair model when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Labeled corpus output.
    #[arg(long, short, default_value = "simulated.jsonl")]
    pub output: PathBuf,
    /// Ground-truth model JSON.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Also write matching raw posts (one sentence per label name).
    #[arg(long)]
    pub raw_output: Option<PathBuf>,
}
