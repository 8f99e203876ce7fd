use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use pivotree::{
    build_index, resolve_query, run_eval, search_index, write_eval_outputs, CorpusFile, GenParams, IndexFile, IndexType,
};
use pivotree_core::{BoundKind, BoundVariant, BuildConfig, Method, PivotScore, SweepConfig};

#[derive(Parser)]
#[command(name = "pivotree", version, about = "Pivot-tree top-k retrieval over sparse tf-idf vectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TypeArg {
    Mta,
    Mip,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundArg {
    Safe,
    Heuristic,
}

impl From<BoundArg> for BoundKind {
    fn from(b: BoundArg) -> Self {
        match b {
            BoundArg::Safe => BoundKind::Safe,
            BoundArg::Heuristic => BoundKind::Heuristic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoreArg {
    TraceGain,
    RawProjection,
}

#[derive(clap::Args)]
struct BuildArgs {
    /// Leaf capacity.
    #[arg(long, default_value_t = 32)]
    leaf: usize,
    /// Pivot candidates sampled per node.
    #[arg(long, default_value_t = 10)]
    candidates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    max_depth: usize,
    #[arg(long, value_enum, default_value = "trace-gain")]
    score: ScoreArg,
}

impl BuildArgs {
    fn config(&self) -> BuildConfig {
        BuildConfig {
            leaf_capacity: self.leaf,
            candidate_count: self.candidates,
            rng_seed: self.seed,
            max_depth: self.max_depth,
            score: match self.score {
                ScoreArg::TraceGain => PivotScore::TraceGain,
                ScoreArg::RawProjection => PivotScore::RawProjection,
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a corpus file.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "type", value_enum, default_value = "mta")]
        index_type: TypeArg,
        /// Bound stored as the index default.
        #[arg(long, value_enum, default_value = "safe")]
        bound: BoundArg,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Top-k search for a document id, text, or `index:weight` line.
    Search {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Defaults to the bound stored in the index.
        #[arg(long, value_enum)]
        bound: Option<BoundArg>,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Sweep gamma over every method and write CSV reports.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_value = "1.0,0.95,0.9,0.8,0.7,0.6,0.5")]
        gammas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "MTA-safe,MTA-heuristic,MIP")]
        methods: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Write a synthetic Zipf corpus.
    Gen {
        #[arg(long)]
        docs: usize,
        #[arg(long)]
        vocab: usize,
        #[arg(long)]
        avg_len: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        zipf: f64,
        /// Document id prefix.
        #[arg(long, default_value = "d")]
        prefix: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Build { corpus, out, index_type, bound, build } => {
            let corpus = pivotree::parse_corpus(&corpus)?;
            let index_type = match index_type {
                TypeArg::Mta => IndexType::Mta,
                TypeArg::Mip => IndexType::Mip,
            };
            let index = build_index(&corpus, index_type, &build.config(), bound.into())?;
            index.save(&out)?;
            println!("built {} index over {} documents -> {}", index.type_name(), corpus.len(), out.display());
        }
        Command::Search { index, corpus, query, k, bound, gamma } => {
            let index = IndexFile::load(&index)?;
            let corpus = pivotree::parse_corpus(&corpus)?;
            let kind = bound.map_or(index.default_bound, BoundKind::from);
            let variant = BoundVariant::new(kind, gamma)?;
            let q = resolve_query(&query, &corpus, index.vocabulary.as_ref())?;
            let outcome = search_index(&index, &corpus, &q, k, variant)?;
            for (rank, hit) in outcome.hits.iter().enumerate() {
                println!("{}\t{}\t{:.12}", rank + 1, corpus.id(hit.doc), hit.similarity);
            }
            println!("scored={} pruned={}", outcome.stats.scored, outcome.stats.pruned_docs);
        }
        Command::Eval { corpus, queries, k, gammas, methods, out, build } => {
            let corpus_file = CorpusFile::read(&corpus)?;
            let query_file = CorpusFile::read(&queries)?;
            let mut cfg = SweepConfig::new(k, gammas);
            cfg.methods = methods
                .iter()
                .map(|m| Method::from_name(m.trim()).with_context(|| format!("unknown method {m:?}")))
                .collect::<anyhow::Result<_>>()?;
            if cfg.methods.is_empty() {
                bail!("no methods selected");
            }
            cfg.build = build.config();
            cfg.ball_leaf_capacity = build.leaf;
            let outputs = run_eval(&corpus_file, &query_file, &cfg)?;
            for path in write_eval_outputs(&outputs, &out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Gen { docs, vocab, avg_len, seed, zipf, prefix, out } => {
            let mut params = GenParams::new(docs, vocab, avg_len, seed);
            params.zipf_exponent = zipf;
            params.id_prefix = prefix;
            pivotree::generate_file(&params)?.write(&out)?;
            println!("wrote {} documents -> {}", docs, out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
