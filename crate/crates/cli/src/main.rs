//! Operator entry points: generate scenarios, train classifiers, evaluate
//! them, run ablation studies, replay traces against the safety-stop
//! controller, and export plot-ready tables.
//!
//! Exit codes: 0 on success, 1 for runtime/model errors, 2 for usage or
//! config errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tactus",
    about = "Touch intention recognition: synthetic scenarios, classifiers, safety-stop replay",
    version
)]
struct Cli {
    /// System config (chain, sensors, camera, POIs, gains). Falls back to
    /// the CONFIG_PATH environment variable, then to the built-in demo.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic trace from a scenario spec.
    Gen {
        /// Scenario spec (TOML).
        #[arg(long)]
        spec: PathBuf,
        /// Output trace path.
        #[arg(long)]
        out: PathBuf,
        /// Override the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a classifier on labeled traces and write a model container.
    Train {
        /// Glob over trace files, e.g. `out/*.trace`.
        #[arg(long)]
        traces: String,
        /// Classifier kind.
        #[arg(long, value_parser = ["knn", "mlp"], default_value = "knn")]
        model: String,
        /// Neighbour count for kNN; must be odd.
        #[arg(long, default_value_t = 11)]
        k: usize,
        /// Feature flags, comma-separated subset of TS,HP,HS,GA,GS.
        #[arg(long, default_value = "TS,HP,HS,GA,GS")]
        features: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Training epochs (MLP only).
        #[arg(long, default_value_t = 2000)]
        epochs: usize,
        /// Learning rate (MLP only).
        #[arg(long, default_value_t = 0.5)]
        learning_rate: f64,
    },
    /// Evaluate: either a stored model on the traces, or retrain with
    /// k-fold cross-validation.
    Eval {
        #[arg(long)]
        traces: String,
        /// Stored model to evaluate.
        #[arg(long, conflicts_with = "retrain")]
        model: Option<PathBuf>,
        /// Retrain per fold instead of loading a model.
        #[arg(long)]
        retrain: bool,
        /// Classifier kind when retraining.
        #[arg(long, value_parser = ["knn", "mlp"], default_value = "knn")]
        model_kind: String,
        #[arg(long, default_value_t = 11)]
        k: usize,
        #[arg(long, default_value = "TS,HP,HS,GA,GS")]
        features: String,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report file (JSON).
        #[arg(long, default_value = "eval_report.json")]
        out: PathBuf,
    },
    /// Cross-validate a list of feature masks and print the sorted table.
    Ablate {
        #[arg(long)]
        traces: String,
        /// Semicolon-separated mask list, e.g. `TS,HP;TS;HP`. Defaults to
        /// the seven-row study.
        #[arg(long)]
        masks: Option<String>,
        #[arg(long, value_parser = ["knn", "mlp"], default_value = "knn")]
        model_kind: String,
        #[arg(long, default_value_t = 11)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report file (JSON).
        #[arg(long, default_value = "ablation_report.json")]
        out: PathBuf,
    },
    /// Replay a trace through the pipeline and the simulated arm.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Engage the safety stop (stiffness modulation + setpoint reset).
        #[arg(long)]
        control: bool,
        /// Smoothing window span in seconds.
        #[arg(long, default_value_t = 1.0)]
        window: f64,
        /// Replay log output (trace format plus appended columns).
        #[arg(long, default_value = "replay_log.jsonl")]
        out: PathBuf,
    },
    /// Convert a replay log into a CSV table for external plotting.
    ExportPlot {
        /// Replay log produced by `replay`.
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Usage/config errors exit 2, runtime/model errors exit 1.
fn exit_code_for(err: &tactus::Error) -> u8 {
    match err {
        tactus::Error::Config(_) | tactus::Error::FormatVersion { .. } | tactus::Error::Io(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config_path = cli
        .config
        .or_else(|| std::env::var_os("CONFIG_PATH").map(PathBuf::from));

    let result = match cli.command {
        Command::Gen { spec, out, seed } => commands::gen(config_path, &spec, &out, seed),
        Command::Train {
            traces,
            model,
            k,
            features,
            out,
            seed,
            epochs,
            learning_rate,
        } => commands::train(
            config_path,
            &traces,
            &model,
            k,
            &features,
            &out,
            seed,
            epochs,
            learning_rate,
        ),
        Command::Eval {
            traces,
            model,
            retrain,
            model_kind,
            k,
            features,
            folds,
            seed,
            out,
        } => commands::eval(
            config_path,
            &traces,
            model.as_deref(),
            retrain,
            &model_kind,
            k,
            &features,
            folds,
            seed,
            &out,
        ),
        Command::Ablate {
            traces,
            masks,
            model_kind,
            k,
            folds,
            seed,
            out,
        } => commands::ablate(
            config_path,
            &traces,
            masks.as_deref(),
            &model_kind,
            k,
            folds,
            seed,
            &out,
        ),
        Command::Replay {
            trace,
            model,
            control,
            window,
            out,
        } => commands::replay(config_path, &trace, &model, control, window, &out),
        Command::ExportPlot { log, out } => commands::export_plot(&log, &out),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
