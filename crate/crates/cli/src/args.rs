use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use quadnet_core::{LossMode, OptimizerKind};

#[derive(Debug, Parser)]
#[command(
    name = "quadnet",
    version,
    about = "Similar/complementary item embeddings with a quadruplet loss"
)]
pub struct Cli {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for every random choice in the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a planted synthetic catalog and co-purchase edge list.
    GenSample(GenSampleArgs),
    /// Build quadruplets and split them by anchor into train/test files.
    GenQuads(GenQuadsArgs),
    /// Write hashed title feature vectors.
    Featurize(FeaturizeArgs),
    /// Train the projection network.
    Train(TrainArgs),
    /// Score a quadruplet file against a checkpoint.
    Eval(EvalArgs),
    /// Print similar and complementary candidates for one item.
    Recommend(RecommendArgs),
}

#[derive(Debug, Args)]
pub struct GenSampleArgs {
    /// Output directory for catalog.tsv and edges.tsv.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub categories: Option<usize>,
    #[arg(long)]
    pub items_per_category: Option<usize>,
    #[arg(long)]
    pub edges_per_item: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Catalog format; guessed from the extension when omitted.
    #[arg(long, value_parser = ["jsonl", "tsv"])]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    /// Precomputed vector file (`id<TAB>v1 v2 ...`).
    #[arg(long, conflicts_with_all = ["hash_dim", "hash_seed"])]
    pub vectors: Option<PathBuf>,
    /// Use hashed title features of this dimension.
    #[arg(long)]
    pub hash_dim: Option<usize>,
    /// Hash seed; defaults to the run seed.
    #[arg(long)]
    pub hash_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenQuadsArgs {
    #[command(flatten)]
    pub catalog: CatalogArgs,
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Output directory for train.tsv, test.tsv and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub similars_per_pair: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[command(flatten)]
    pub catalog: CatalogArgs,
    #[arg(long)]
    pub hash_dim: Option<usize>,
    #[arg(long)]
    pub hash_seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Default)]
pub struct MarginArgs {
    #[arg(long)]
    pub m_s: Option<f64>,
    #[arg(long)]
    pub m_c: Option<f64>,
    #[arg(long)]
    pub m_n: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub quads: PathBuf,
    #[command(flatten)]
    pub catalog: CatalogArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<LossMode>,
    #[arg(long, value_parser = parse_optimizer)]
    pub optimizer: Option<OptimizerKind>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub triplet_margin: Option<f64>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub d_out: Option<usize>,
    #[command(flatten)]
    pub margins: MarginArgs,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch JSON-lines log; defaults to `<out>.log.jsonl`.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub quads: PathBuf,
    #[arg(long)]
    pub ckpt: PathBuf,
    #[command(flatten)]
    pub catalog: CatalogArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub margins: MarginArgs,
    /// Report JSON to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Histogram CSV to write.
    #[arg(long)]
    pub hist: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[command(flatten)]
    pub catalog: CatalogArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub margins: MarginArgs,
    #[arg(long)]
    pub anchor: String,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Keep same-category items among complementary candidates.
    #[arg(long)]
    pub no_category_filter: bool,
}

fn parse_mode(s: &str) -> Result<LossMode, String> {
    s.parse()
}

fn parse_optimizer(s: &str) -> Result<OptimizerKind, String> {
    s.parse()
}
