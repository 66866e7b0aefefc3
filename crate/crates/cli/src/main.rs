use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use vgrnn_cli::{cmd_embed, cmd_evaluate, cmd_generate, cmd_stats, cmd_train, Command, RunConfig};

#[derive(Parser)]
#[command(name = "vgrnn", version, about = "Variational graph recurrent networks on dynamic graphs")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Write the synthetic community-migration graph and its manifest.
    Generate(Flags),
    /// Train one model per seed and write checkpoints and logs.
    Train(Flags),
    /// Score trained checkpoints on detection and prediction tasks.
    Evaluate(Flags),
    /// Per-snapshot density and clustering, as CSV and SVG.
    Stats(Flags),
    /// Dump posterior means and variances of a trained model.
    Embed(Flags),
}

/// Flags override values from `--config`, which override the defaults.
#[derive(Args)]
struct Flags {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Snapshot edge-list file.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// grnn, vgrnn or si-vgrnn.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeds, starting at --seed.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Trailing snapshots held out for prediction.
    #[arg(long)]
    holdout: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seeds run concurrently.
    #[arg(long)]
    workers: Option<usize>,
}

impl Flags {
    fn resolve(&self, command: Command) -> Result<RunConfig> {
        let mut cfg = RunConfig::new(command);
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(v) = &self.dataset {
            cfg.dataset = Some(v.clone());
        }
        if let Some(v) = &self.model {
            cfg.set("model", v)?;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.runs = self.runs.unwrap_or(cfg.runs);
        cfg.epochs = self.epochs.unwrap_or(cfg.epochs);
        cfg.lr = self.lr.unwrap_or(cfg.lr);
        cfg.holdout = self.holdout.unwrap_or(cfg.holdout);
        cfg.workers = self.workers.unwrap_or(cfg.workers);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Sub::Generate(f) => {
            let out = cmd_generate(&f.resolve(Command::Generate)?)?;
            println!("graph: {}", out.graph.display());
            println!("manifest: {}", out.manifest.display());
            println!(
                "migrating node {} (transfer at steps {:?}), control node {}",
                out.info.migrating_node, out.info.transfer_steps, out.info.control_node
            );
        }
        Sub::Train(f) => {
            let cfg = f.resolve(Command::Train)?;
            let out = cmd_train(&cfg)?;
            for s in &out.summary {
                println!("{}: {:.4} ± {:.4} (n={})", s.metric, s.mean, s.std_err, s.n);
            }
            println!("outputs in {}", cfg.model_dir().display());
        }
        Sub::Evaluate(f) => {
            let cfg = f.resolve(Command::Evaluate)?;
            let out = cmd_evaluate(&cfg)?;
            println!("task,model,auc_mean,auc_std_err,ap_mean,ap_std_err,runs");
            for s in &out.summary {
                println!(
                    "{},{},{:.4},{:.4},{:.4},{:.4},{}",
                    s.task, s.model, s.auc_mean, s.auc_std_err, s.ap_mean, s.ap_std_err, s.runs
                );
            }
        }
        Sub::Stats(f) => {
            let cfg = f.resolve(Command::Stats)?;
            let rows = cmd_stats(&cfg)?;
            println!("t,density,clustering");
            for r in rows {
                println!("{},{:.4},{:.4}", r.t, r.density, r.clustering);
            }
        }
        Sub::Embed(f) => {
            let out = cmd_embed(&f.resolve(Command::Embed)?)?;
            println!("embeddings: {}", out.csv.display());
            if let Some(svg) = out.svg {
                println!("plot: {}", svg.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
