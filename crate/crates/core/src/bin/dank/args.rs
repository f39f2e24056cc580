use std::path::PathBuf;

use clap::{Args, ValueEnum};
use dank::data::{self, Dataset, Format};
use dank::solver::{SolverConfig, StepRule, Variant};
use dank::svm::{Eta, Mode, TrainOptions};
use dank::svr::SvrOptions;

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Svm,
    Svr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Scalable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Libsvm,
    Csv,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input file (libsvm, or CSV for *.csv); `-` reads standard input.
    #[arg(long)]
    pub data: String,
    /// Override the format guessed from the file name.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Zero-based CSV label column (default: last).
    #[arg(long)]
    pub label_column: Option<usize>,
}

impl DataArgs {
    pub fn format_for(&self, path: &str) -> Format {
        match self.format {
            Some(FormatArg::Libsvm) => Format::Libsvm,
            Some(FormatArg::Csv) => Format::Csv {
                label_column: self.label_column,
            },
            None => Format::from_path(path, self.label_column),
        }
    }

    pub fn load(&self) -> anyhow::Result<Dataset> {
        Ok(data::load(&self.data, self.format_for(&self.data))?)
    }

    pub fn load_other(&self, path: &str) -> anyhow::Result<Dataset> {
        Ok(data::load(path, self.format_for(path))?)
    }
}

/// Everything that defines a model except the data.
#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "svm")]
    pub task: Task,
    /// Gaussian kernel width.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Box bound on the dual variables.
    #[arg(long = "C", id = "C")]
    pub c: Option<f64>,
    /// Nuclear-norm weight.
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,
    /// `auto` (squared norm of a standard SVM's duals) or a positive number.
    #[arg(long, default_value = "auto")]
    pub eta: String,
    /// Tube half-width for svr, on targets scaled to [0, 1].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// nesterov, pgd or monotone.
    #[arg(long, default_value = "nesterov")]
    pub variant: String,
    /// Step constant: theory (closed-form Lipschitz bound) or tight.
    #[arg(long, default_value = "theory")]
    pub step: String,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    /// Number of k-means blocks for --mode scalable.
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Seed for every random choice (folds, k-means).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub t_max: usize,
    /// Stop when consecutive iterates are this close (0 disables).
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Keep F = 11^T, i.e. fit a standard SVM/SVR.
    #[arg(long)]
    pub frozen: bool,
}

pub fn parse_eta(s: &str) -> anyhow::Result<Eta> {
    if s == "auto" {
        return Ok(Eta::Auto);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| UsageError(format!("--eta must be 'auto' or a number, got '{s}'")))?;
    Ok(Eta::Fixed(v))
}

impl ModelArgs {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.clusters.is_some() && self.mode != ModeArg::Scalable {
            return Err(UsageError("--clusters only applies to --mode scalable".into()).into());
        }
        if self.mode == ModeArg::Scalable {
            if self.task == Task::Svr {
                return Err(UsageError("--mode scalable is only available for --task svm".into()).into());
            }
            if self.clusters.is_none() {
                return Err(UsageError("--mode scalable needs --clusters".into()).into());
            }
        }
        if self.epsilon.is_some() && self.task == Task::Svm {
            return Err(UsageError("--epsilon only applies to --task svr".into()).into());
        }
        Ok(())
    }

    fn solver(&self, c: f64) -> anyhow::Result<SolverConfig> {
        let mut cfg = SolverConfig::new(c, self.tau, 1.0);
        cfg.t_max = self.t_max;
        cfg.tol = self.tol;
        cfg.variant = self.variant.parse::<Variant>()?;
        cfg.step = self.step.parse::<StepRule>()?;
        Ok(cfg)
    }

    pub fn svm_options(&self, c: f64) -> anyhow::Result<TrainOptions> {
        let mut opts = TrainOptions::new(c, self.tau);
        opts.solver = self.solver(c)?;
        opts.eta = parse_eta(&self.eta)?;
        opts.frozen = self.frozen;
        opts.mode = match (self.mode, self.clusters) {
            (ModeArg::Scalable, Some(clusters)) => Mode::Scalable {
                clusters,
                seed: self.seed,
            },
            _ => Mode::Exact,
        };
        Ok(opts)
    }

    pub fn svr_options(&self, c: f64) -> anyhow::Result<SvrOptions> {
        let mut opts = SvrOptions::new(c, self.tau, self.epsilon.unwrap_or(0.1));
        opts.solver = self.solver(c)?;
        opts.eta = parse_eta(&self.eta)?;
        opts.frozen = self.frozen;
        Ok(opts)
    }

    /// `--sigma` and `--C`, both required outside cross-validation.
    pub fn fixed(&self) -> anyhow::Result<(f64, f64)> {
        match (self.sigma, self.c) {
            (Some(s), Some(c)) => Ok((s, c)),
            _ => Err(UsageError("--sigma and --C are required (or use --cv)".into()).into()),
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Also report accuracy / error on this labelled file.
    #[arg(long)]
    pub test: Option<String>,
    /// Pick sigma and C by k-fold cross-validation over 2^-5..2^5.
    #[arg(long, conflicts_with_all = ["sigma", "C"])]
    pub cv: bool,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Where to write the model.
    #[arg(long = "model")]
    pub model_path: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long = "model")]
    pub model_path: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Evaluate this saved model on --data.
    #[arg(long = "model", conflicts_with = "splits")]
    pub model_path: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    /// Instead of a saved model, retrain on this many seeded random splits
    /// of --data and report mean and standard deviation.
    #[arg(long)]
    pub splits: Option<usize>,
    /// Held-out share of each split.
    #[arg(long, default_value_t = 0.3)]
    pub test_fraction: f64,
    #[command(flatten)]
    pub spec: ModelArgs,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long = "C", id = "C")]
    pub c: f64,
    #[arg(long, default_value = "auto")]
    pub eta: String,
    /// Cluster counts to compare, e.g. 2,5,10.
    #[arg(long, value_delimiter = ',', default_value = "2,5,10")]
    pub clusters: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub t_max: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value = "theory")]
    pub step: String,
    /// Slack added to the row norms in the screening test.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long = "model")]
    pub model_path: PathBuf,
    /// Bounding box and resolution: x0,x1,y0,y1,res.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
}

/// Parses `x0,x1,y0,y1,res`.
pub fn parse_grid(s: &str) -> anyhow::Result<(f64, f64, f64, f64, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || UsageError(format!("--grid expects x0,x1,y0,y1,res, got '{s}'"));
    if parts.len() != 5 {
        return Err(bad().into());
    }
    let f = |i: usize| parts[i].parse::<f64>().map_err(|_| bad());
    let res: usize = parts[4].parse().map_err(|_| bad())?;
    if res < 2 {
        return Err(UsageError("--grid resolution must be at least 2".into()).into());
    }
    Ok((f(0)?, f(1)?, f(2)?, f(3)?, res))
}
