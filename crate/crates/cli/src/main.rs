//! `apcast`: Wi-Fi AP metric forecasting from counter exports.
//!
//! Stages exchange files under the configured output directory, so they
//! can run one by one (`preprocess`, `correlate`, `train`, `evaluate`) or
//! all at once (`run`). `synth` writes a coupled synthetic export for
//! verification and `predict` applies a stored model to fresh data.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use apcast_core::pipeline::{
    predict_once, run_pipeline, stage_correlate, stage_evaluate, stage_preprocess, stage_synth,
    stage_train, RunSummary,
};
use apcast_core::PipelineConfig;

#[derive(Parser)]
#[command(name = "apcast", version, about = "Wi-Fi AP metric forecasting pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    /// Pipeline config file (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl StageArgs {
    fn load(&self) -> anyhow::Result<PipelineConfig> {
        let mut config = PipelineConfig::from_toml_file(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out_dir = out.clone();
        }
        Ok(config)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    stage: StageArgs,
    /// Train only these APs (comma separated); earlier stages must already
    /// cover them
    #[arg(long, value_delimiter = ',')]
    aps: Option<Vec<String>>,
}

#[derive(Args)]
struct PredictArgs {
    /// Stored model file
    #[arg(long)]
    model: PathBuf,
    /// Window file: header of AP names, one row of raw metric values per
    /// period (oldest first), covering at least the model's lag
    #[arg(long)]
    window: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic measurement export configured under [synth]
    Synth(StageArgs),
    /// Derive metrics, grid, backfill, normalize and select lags
    Preprocess(StageArgs),
    /// Correlate candidate pairs; fix neighbour sets and prediction modes
    Correlate(StageArgs),
    /// Fit the configured models with walk-forward validation
    Train(TrainArgs),
    /// Score stored validation predictions and emit report files
    Evaluate(StageArgs),
    /// Run preprocess, correlate, train and evaluate in order
    Run(StageArgs),
    /// Apply a stored model to a window file and print the prediction
    Predict(PredictArgs),
}

fn print_summary(summary: &RunSummary) {
    for line in &summary.skipped {
        eprintln!("skipped: {line}");
    }
    println!("ap,metric,mode,model,r2,mse,rmse,mae,tct_s,pct_s");
    for r in &summary.reports {
        println!(
            "{},{},{},{},{:.5},{:.5},{:.5},{:.5},{:.3},{:.3}",
            r.ap_name,
            r.metric,
            r.mode,
            r.model_kind,
            r.r2,
            r.mse,
            r.rmse,
            r.mae,
            r.tct_seconds,
            r.pct_seconds
        );
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Synth(args) => {
            let config = args.load()?;
            stage_synth(&config)?;
            println!("wrote {}", config.measurements.display());
        }
        Command::Preprocess(args) => {
            let config = args.load()?;
            stage_preprocess(&config)?;
            println!("preprocess artifacts under {}", config.out_dir.display());
        }
        Command::Correlate(args) => {
            let config = args.load()?;
            stage_correlate(&config)?;
            println!("correlation artifacts under {}", config.out_dir.display());
        }
        Command::Train(args) => {
            let config = args.stage.load()?;
            stage_train(&config, args.aps.as_deref())?;
            println!("models under {}", config.out_dir.join("train").display());
        }
        Command::Evaluate(args) => {
            let config = args.load()?;
            let summary = stage_evaluate(&config)?;
            print_summary(&summary);
        }
        Command::Run(args) => {
            let config = args.load()?;
            let summary = run_pipeline(&config)?;
            print_summary(&summary);
        }
        Command::Predict(args) => {
            let prediction = predict_once(&args.model, &args.window)?;
            println!(
                "{}: predicted {:.6} (normalized {:.6}), pct {:.3}s",
                prediction.target_ap,
                prediction.value,
                prediction.normalized,
                prediction.pct_seconds
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
