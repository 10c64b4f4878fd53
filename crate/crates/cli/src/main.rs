//! `vad` — train and run the video anomaly detector on a clip dataset.
//!
//! Subcommands: `synth` (generate a synthetic dataset), `train` (fit the
//! model bundle), `score` (score the test split), `eval` (ROC/AUC/EER
//! report), `nu-grid` (one-class SVM ν sweep).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use vad_core::config::{FlowMethod, RunConfig};
use vad_core::pipeline;

#[derive(Parser)]
#[command(name = "vad", version, about = "Video anomaly detection pipeline")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "vad.toml")]
    config: PathBuf,
    /// Override the run seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the optical-flow source.
    #[arg(long, global = true, value_enum)]
    flow: Option<FlowArg>,
    /// Override the output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlowArg {
    /// In-repo Horn-Schunck solver.
    Hs,
    /// Precomputed Middlebury .flo files (flow.flo_dir).
    FloDir,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic dataset configured under [synth].
    Synth,
    /// Train SDAEs, one-class SVMs and fusion weights; write the bundle.
    Train {
        /// Use the published 1024/2048-wide architectures instead of the
        /// desk-scale defaults.
        #[arg(long)]
        paper_arch: bool,
    },
    /// Score the test split with a trained bundle.
    Score,
    /// Evaluate scores against ground truth and print AUC/EER.
    Eval,
    /// Sweep one-class SVM nu values and report outlier/SV fractions.
    NuGrid,
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(&cli.config)
        .with_context(|| format!("loading {}", cli.config.display()))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(flow) = cli.flow {
        cfg.flow.method = match flow {
            FlowArg::Hs => FlowMethod::Hs,
            FlowArg::FloDir => FlowMethod::FloDir,
        };
    }
    if let Some(output) = &cli.output {
        cfg.output_dir = output.clone();
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = load_config(&cli)?;
    match cli.command {
        Command::Synth => {
            pipeline::run_synth(&cfg)?;
            println!(
                "wrote {} train + {} test clips under {}",
                cfg.dataset.train.len(),
                cfg.dataset.test.len(),
                cfg.dataset.root.display()
            );
        }
        Command::Train { paper_arch } => {
            let mut cfg = cfg;
            if paper_arch {
                cfg.apply_paper_arch();
            }
            let models = pipeline::run_train(&cfg)?;
            println!(
                "alpha = [{:.3}, {:.3}, {:.3}]",
                models.fusion.alpha.get(0),
                models.fusion.alpha.get(1),
                models.fusion.alpha.get(2)
            );
            println!("bundle written to {}", pipeline::bundle_dir(&cfg).display());
        }
        Command::Score => {
            pipeline::run_score(&cfg)?;
            println!(
                "scores written to {}",
                cfg.output_dir.join("scores").display()
            );
        }
        Command::Eval => {
            let summary = pipeline::run_eval(&cfg)?;
            println!(
                "frame-level AUC = {:.4}, EER = {:.4}",
                summary.frame_auc, summary.frame_eer
            );
            if let (Some(auc), Some(eer)) = (summary.pixel_auc, summary.pixel_eer) {
                println!("pixel-level AUC = {auc:.4}, EER = {eer:.4}");
            }
            println!(
                "per-pipeline AUC: appearance {:.4}, motion {:.4}, joint {:.4}",
                summary.auc_appearance, summary.auc_motion, summary.auc_joint
            );
            println!(
                "alpha = [{:.3}, {:.3}, {:.3}]",
                summary.alpha[0], summary.alpha[1], summary.alpha[2]
            );
        }
        Command::NuGrid => {
            let rows = pipeline::run_nu_grid(&cfg)?;
            println!("pipeline,nu,outlier_fraction,sv_fraction");
            for row in rows {
                println!(
                    "{},{},{:.4},{:.4}",
                    row.pipeline, row.nu, row.outlier_fraction, row.sv_fraction
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
