//! `supplykg` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use supplykg::config::RunConfig;
use supplykg::pipeline::{self, graph_summary, Outputs};
use supplykg::sampling::CorruptionMode;
use supplykg::{Error, RelationType, Result};

#[derive(Debug, Parser)]
#[command(name = "supplykg", version, about = "Supply-chain knowledge graph link prediction")]
struct Cli {
    /// JSON run configuration; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (also seeds the split and the generator).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a company CSV into a graph file.
    Build {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Add capability_produces and complimentary_product_to edges.
    Derive {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        cooccurrence_threshold: Option<u32>,
        #[arg(long)]
        projection_threshold: Option<u32>,
    },
    /// Write a stratified train/validation/test manifest.
    Split {
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Train the encoder and decoder.
    Train {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        split: Option<PathBuf>,
        #[command(flatten)]
        model: ModelFlags,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// Evaluate a checkpoint and write reports.
    Eval {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        split: Option<PathBuf>,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Grid search over thresholds, dimension and depth.
    Sweep {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        cooccurrence_thresholds: Option<Vec<u32>>,
        #[arg(long, value_delimiter = ',')]
        projection_thresholds: Option<Vec<u32>>,
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        depths: Option<Vec<usize>>,
        #[arg(long, value_parser = parse_relation)]
        target: Option<RelationType>,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// Rank unobserved triplets of one relation.
    Predict {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_parser = parse_relation)]
        relation: RelationType,
        #[arg(long, default_value_t = 20)]
        top_k: usize,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Generate a synthetic graph with planted structure.
    Synth {
        #[arg(long)]
        companies: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        attachment_edges: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct ModelFlags {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    fanout: Option<usize>,
}

#[derive(Debug, Args)]
struct TrainFlags {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long, value_parser = parse_corruption)]
    corruption: Option<CorruptionMode>,
}

fn parse_relation(s: &str) -> std::result::Result<RelationType, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_corruption(s: &str) -> std::result::Result<CorruptionMode, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown corruption mode '{s}'"))
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl ModelFlags {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.model.dim, self.dim);
        set(&mut cfg.model.depth, self.depth);
        if let Some(f) = self.fanout {
            cfg.model.fanout = f;
            cfg.eval.fanout = f;
        }
    }
}

impl TrainFlags {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.train.epochs, self.epochs);
        set(&mut cfg.train.batch_size, self.batch_size);
        set(&mut cfg.train.learning_rate, self.learning_rate);
        set(&mut cfg.train.negatives_per_positive, self.negatives);
        set(&mut cfg.train.corruption, self.corruption);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if cli.out.is_some() {
        cfg.paths.out = cli.out.clone();
    }
    match cli.command {
        Command::Build { input } => {
            set(&mut cfg.paths.input, input.map(Some));
            let out = outputs(&cfg)?;
            let g = pipeline::cmd_build(&cfg, &out, None)?;
            print!("{}", graph_summary(&g));
        }
        Command::Derive { graph, cooccurrence_threshold, projection_threshold } => {
            set(&mut cfg.paths.graph, graph.map(Some));
            set(&mut cfg.derive.capability_cooccurrence_threshold, cooccurrence_threshold);
            set(&mut cfg.derive.projection_weight_threshold, projection_threshold);
            let out = outputs(&cfg)?;
            let (g, s) = pipeline::cmd_derive(&cfg, &out, None)?;
            println!(
                "capability_produces: {} edges, complimentary_product_to: {} edges",
                s.capability_produces_added, s.complimentary_added
            );
            print!("{}", graph_summary(&g));
        }
        Command::Split { graph } => {
            set(&mut cfg.paths.graph, graph.map(Some));
            let out = outputs(&cfg)?;
            let s = pipeline::cmd_split(&cfg, &out, None)?;
            println!("train {} validation {} test {}", s.train.len(), s.validation.len(), s.test.len());
        }
        Command::Train { graph, split, model, train } => {
            set(&mut cfg.paths.graph, graph.map(Some));
            set(&mut cfg.paths.split, split.map(Some));
            model.apply(&mut cfg);
            train.apply(&mut cfg);
            let out = outputs(&cfg)?;
            let o = pipeline::cmd_train(&cfg, &out, None, None)?;
            let last = o.log.last().map(|r| r.loss).unwrap_or(f64::NAN);
            println!("final loss {last:.6}; best epoch {} (validation AUC {:?})", o.best_epoch, o.best_val_auc);
        }
        Command::Eval { graph, checkpoint, split, model } => {
            set(&mut cfg.paths.graph, graph.map(Some));
            set(&mut cfg.paths.checkpoint, checkpoint.map(Some));
            set(&mut cfg.paths.split, split.map(Some));
            model.apply(&mut cfg);
            let out = outputs(&cfg)?;
            let r = pipeline::cmd_eval(&cfg, &out, None, None, None)?;
            print!("{}", r.to_markdown());
        }
        Command::Sweep { graph, cooccurrence_thresholds, projection_thresholds, dims, depths, target, train } => {
            set(&mut cfg.paths.graph, graph.map(Some));
            set(&mut cfg.sweep.cooccurrence_thresholds, cooccurrence_thresholds);
            set(&mut cfg.sweep.projection_thresholds, projection_thresholds);
            set(&mut cfg.sweep.dims, dims);
            set(&mut cfg.sweep.depths, depths);
            set(&mut cfg.sweep.target_relation, target);
            train.apply(&mut cfg);
            let out = outputs(&cfg)?;
            let (entries, _) = pipeline::cmd_sweep(&cfg, &out, None)?;
            print!("{}", pipeline::leaderboard_csv(&entries));
        }
        Command::Predict { graph, checkpoint, relation, top_k, model } => {
            set(&mut cfg.paths.graph, graph.map(Some));
            set(&mut cfg.paths.checkpoint, checkpoint.map(Some));
            model.apply(&mut cfg);
            let out = outputs(&cfg)?;
            let set = pipeline::cmd_predict(&cfg, &out, None, None, relation, top_k)?;
            if let Some(n) = set.sampled {
                println!("candidate space {} too large; scored a sample of {n} draws", set.candidate_space);
            }
            for p in &set.predictions {
                println!("{}\t{relation}\t{}\t{:.6}", p.source, p.destination, p.probability);
            }
        }
        Command::Synth { companies, lambda, attachment_edges } => {
            set(&mut cfg.synth.companies, companies);
            set(&mut cfg.synth.lambda, lambda);
            set(&mut cfg.synth.attachment_edges, attachment_edges);
            let out = outputs(&cfg)?;
            let s = pipeline::cmd_synth(&cfg, &out)?;
            print!("{}", graph_summary(&s.graph));
        }
    }
    Ok(())
}

fn outputs(cfg: &RunConfig) -> Result<Outputs> {
    let dir = cfg.paths.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    info!("writing to {}", dir.display());
    Outputs::new(dir, cfg.fingerprint())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
