//! `dank`: train, apply and inspect adaptive-kernel SVM/SVR models.

mod args;
mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dank::DankError;

use args::{BoundsArgs, CvArgs, EvalArgs, GridArgs, PredictArgs, TrainArgs};

#[derive(Debug, Parser)]
#[command(name = "dank", version, about = "Adaptive-kernel SVM and SVR")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model and write it to --model.
    Train(TrainArgs),
    /// Apply a saved model to new data.
    Predict(PredictArgs),
    /// Accuracy (svm) or relative squared error (svr) on labelled data.
    Eval(EvalArgs),
    /// Cross-validate over the sigma x C grid.
    Cv(CvArgs),
    /// Decomposition bounds against the exact solve, one row per cluster count.
    Bounds(BoundsArgs),
    /// Decision values on a regular 2-D grid.
    Grid(GridArgs),
}

/// A flag combination that parses but makes no sense.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<DankError>() {
        Some(DankError::Parameter(_) | DankError::Config(_)) => 1,
        Some(e) if e.is_numerical() => 3,
        Some(DankError::UndefinedMetric(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Cv(a) => commands::cv(&a),
        Command::Bounds(a) => commands::bounds(&a),
        Command::Grid(a) => commands::grid(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
