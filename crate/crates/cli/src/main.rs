use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;
use roadprior_cli::config::PipelineConfig;
use roadprior_cli::pipeline::{run_attributes, run_eval, run_masks, Outcome};

#[derive(Parser)]
#[command(name = "roadprior", version, about = "OSM road priors, sensor road masks and their evaluation")]
struct Cli {
    /// TOML configuration file; every field has a default.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `paths.output_dir`).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Run seed (overrides `run.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Five comma-separated fusion weights summing to one.
    #[arg(long, global = true, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// `auto` or a number in [0, 1].
    #[arg(long, global = true)]
    threshold: Option<String>,
    /// Write edge maps and Hough overlays next to the masks.
    #[arg(long, global = true)]
    debug_images: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Attribute records and feature rows for every pose in the pose file.
    Attributes,
    /// Road masks for every frame.
    Masks,
    /// Scores the written masks against ground truth.
    Eval,
    /// Attributes (when a pose file is set), masks, then eval.
    Pipeline,
}

fn load(cli: &Cli) -> anyhow::Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(o) = &cli.output {
        cfg.paths.output_dir = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(j) = cli.jobs {
        cfg.run.jobs = j;
    }
    if let Some(w) = &cli.weights {
        let w: [f64; 5] = w[..].try_into().map_err(|_| anyhow::anyhow!("--weights needs 5 values, got {}", w.len()))?;
        cfg.set_weights(w);
    }
    if let Some(t) = &cli.threshold {
        cfg.run.threshold = t.clone();
    }
    cfg.run.debug_images |= cli.debug_images;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cmd: Command, cfg: &PipelineConfig) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::default();
    match cmd {
        Command::Attributes => outcome.merge(run_attributes(cfg)?),
        Command::Masks => outcome.merge(run_masks(cfg)?),
        Command::Eval => outcome.merge(run_eval(cfg)?),
        Command::Pipeline => {
            if cfg.paths.pose_file.is_some() {
                outcome.merge(run_attributes(cfg)?);
            }
            outcome.merge(run_masks(cfg)?);
            outcome.merge(run_eval(cfg)?);
        }
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    // usage errors share the config-error exit code; 2 means failed frames
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            error!("{e:#}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command, &cfg) {
        Ok(o) if o.failures.is_empty() => ExitCode::SUCCESS,
        Ok(o) => {
            for (frame, why) in &o.failures {
                error!("{frame}: {why}");
            }
            error!("{} frame(s) failed, {} processed", o.failures.len(), o.processed);
            ExitCode::from(2)
        }
        Err(e) => {
            error!("{e:#}");
            ExitCode::from(1)
        }
    }
}
