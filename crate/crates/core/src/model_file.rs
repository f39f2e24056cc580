//! Plain-text model persistence.
//!
//! One `key values...` record per line. Matrices are written one row per
//! record under a repeated key. Floats are written in scientific notation
//! with 17 significant digits, enough for a bit-exact reload.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::data::Scaler;
use crate::error::{DankError, Result};
use crate::linalg::SymMatrix;
use crate::solver::{AdaptiveMatrix, Projection, SolverConfig, StepRule, Variant};
use crate::svm::{Mode, SvmModel, TrainInfo};
use crate::svr::SvrModel;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "dank-model";

/// A trained model of either task.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Svm(SvmModel),
    Svr(SvrModel),
}

impl Model {
    pub fn task(&self) -> &'static str {
        match self {
            Model::Svm(_) => "svm",
            Model::Svr(_) => "svr",
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model> {
        Model::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut w = Writer::default();
        w.line(MAGIC, &[FORMAT_VERSION.to_string()]);
        w.line("task", &[self.task().to_string()]);
        match self {
            Model::Svm(m) => {
                write_common(&mut w, m.sigma, &m.config, m.frozen, &m.scaler, &m.x_train, &m.y);
                write_mode(&mut w, m.mode);
                w.floats("alpha", m.alpha.iter());
                write_adaptive(&mut w, &m.adaptive);
                w.floats("bias", [m.bias].iter());
                write_info(&mut w, &m.info);
            }
            Model::Svr(m) => {
                write_common(&mut w, m.sigma, &m.config, m.frozen, &m.scaler, &m.x_train, &m.y);
                w.floats("epsilon", [m.epsilon].iter());
                w.floats("target_min", m.target_scaler.min.iter());
                w.floats("target_max", m.target_scaler.max.iter());
                w.floats("alpha_hat", m.alpha_hat.iter());
                w.floats("alpha_check", m.alpha_check.iter());
                write_adaptive(&mut w, &m.adaptive);
                w.floats("bias", [m.bias].iter());
                write_info(&mut w, &m.info);
            }
        }
        w.out
    }

    pub fn from_text(text: &str) -> Result<Model> {
        let r = Records::parse(text)?;
        let version: u32 = r.parsed(MAGIC)?;
        if version != FORMAT_VERSION {
            return Err(DankError::Model(format!(
                "model file has format version {version}, this build reads version {FORMAT_VERSION}"
            )));
        }
        let task = r.word("task")?;
        let sigma: f64 = r.parsed("sigma")?;
        let config = read_config(&r)?;
        let frozen = r.boolean("frozen")?;
        let n: usize = r.parsed("n")?;
        let d: usize = r.parsed("d")?;
        let scaler = Scaler {
            min: r.floats("scaler_min", Some(d))?,
            max: r.floats("scaler_max", Some(d))?,
        };
        let x_train = r.matrix("x", n, d)?;
        let y = DVector::from_vec(r.floats("y", Some(n))?);
        let adaptive = read_adaptive(&r, n)?;
        let bias: f64 = r.parsed("bias")?;
        let info = TrainInfo {
            iterations: r.parsed("iterations")?,
            final_objective: r.parsed("final_objective")?,
            warnings: r.texts("warning"),
        };
        match task {
            "svm" => Ok(Model::Svm(SvmModel {
                x_train,
                y,
                alpha: DVector::from_vec(r.floats("alpha", Some(n))?),
                adaptive,
                bias,
                sigma,
                config,
                frozen,
                mode: read_mode(&r)?,
                scaler,
                info,
            })),
            "svr" => Ok(Model::Svr(SvrModel {
                x_train,
                y,
                alpha_hat: DVector::from_vec(r.floats("alpha_hat", Some(n))?),
                alpha_check: DVector::from_vec(r.floats("alpha_check", Some(n))?),
                adaptive,
                bias,
                sigma,
                epsilon: r.parsed("epsilon")?,
                config,
                frozen,
                scaler,
                target_scaler: Scaler {
                    min: r.floats("target_min", Some(1))?,
                    max: r.floats("target_max", Some(1))?,
                },
                info,
            })),
            other => Err(DankError::Model(format!("unknown task '{other}'"))),
        }
    }
}

#[derive(Default)]
struct Writer {
    out: String,
}

impl Writer {
    fn line(&mut self, key: &str, values: &[String]) {
        self.out.push_str(key);
        for v in values {
            self.out.push(' ');
            self.out.push_str(v);
        }
        self.out.push('\n');
    }

    fn floats<'a>(&mut self, key: &str, values: impl Iterator<Item = &'a f64>) {
        self.out.push_str(key);
        for v in values {
            let _ = write!(self.out, " {v:.16e}");
        }
        self.out.push('\n');
    }

    fn rows(&mut self, key: &str, m: &DMatrix<f64>) {
        for row in m.row_iter() {
            self.floats(key, row.iter());
        }
    }
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Nesterov => "nesterov",
        Variant::Pgd => "pgd",
        Variant::MonotoneNesterov => "monotone-nesterov",
    }
}

fn step_name(s: StepRule) -> &'static str {
    match s {
        StepRule::Theory => "theory",
        StepRule::Tight => "tight",
    }
}

fn write_common(
    w: &mut Writer,
    sigma: f64,
    config: &SolverConfig,
    frozen: bool,
    scaler: &Scaler,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
) {
    w.floats("sigma", [sigma].iter());
    w.floats("C", [config.c].iter());
    w.floats("tau", [config.tau].iter());
    w.floats("eta", [config.eta].iter());
    w.line("t_max", &[config.t_max.to_string()]);
    w.floats("tol", [config.tol].iter());
    w.line("variant", &[variant_name(config.variant).into()]);
    w.line("step", &[step_name(config.step).into()]);
    match config.projection {
        Projection::Exact => w.line("projection", &["exact".into()]),
        Projection::Alternating { rounds } => w.line("projection", &["alternating".into(), rounds.to_string()]),
    }
    w.line("frozen", &[frozen.to_string()]);
    w.line("n", &[x.nrows().to_string()]);
    w.line("d", &[x.ncols().to_string()]);
    w.floats("scaler_min", scaler.min.iter());
    w.floats("scaler_max", scaler.max.iter());
    w.rows("x", x);
    w.floats("y", y.iter());
}

fn write_mode(w: &mut Writer, mode: Mode) {
    match mode {
        Mode::Exact => w.line("mode", &["exact".into()]),
        Mode::Scalable { clusters, seed } => {
            w.line("mode", &["scalable".into(), clusters.to_string(), seed.to_string()])
        }
    }
}

fn write_adaptive(w: &mut Writer, f: &AdaptiveMatrix) {
    w.floats("f_nuclear", [f.nuclear_norm()].iter());
    w.rows("f", f.as_matrix());
}

fn write_info(w: &mut Writer, info: &TrainInfo) {
    w.line("iterations", &[info.iterations.to_string()]);
    w.floats("final_objective", [info.final_objective].iter());
    for msg in &info.warnings {
        w.line("warning", &[msg.replace('\n', " ")]);
    }
}

/// Records grouped by key, in file order.
struct Records<'t> {
    by_key: HashMap<&'t str, Vec<(usize, &'t str)>>,
}

impl<'t> Records<'t> {
    fn parse(text: &'t str) -> Result<Self> {
        let mut by_key: HashMap<&str, Vec<(usize, &str)>> = HashMap::new();
        for (no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            by_key.entry(key).or_default().push((no + 1, rest));
        }
        if !by_key.contains_key(MAGIC) {
            return Err(DankError::Model("not a model file (missing header)".into()));
        }
        Ok(Records { by_key })
    }

    fn all(&self, key: &str) -> &[(usize, &'t str)] {
        self.by_key.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    fn single(&self, key: &str) -> Result<(usize, &'t str)> {
        match self.all(key) {
            [one] => Ok(*one),
            [] => Err(DankError::Model(format!("missing field '{key}'"))),
            more => Err(DankError::Model(format!("field '{key}' repeated on line {}", more[1].0))),
        }
    }

    fn word(&self, key: &str) -> Result<&'t str> {
        Ok(self.single(key)?.1.trim())
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.single(key)?;
        v.trim()
            .parse()
            .map_err(|_| DankError::Model(format!("line {line}: bad value '{}' for '{key}'", v.trim())))
    }

    fn boolean(&self, key: &str) -> Result<bool> {
        self.parsed(key)
    }

    fn texts(&self, key: &str) -> Vec<String> {
        self.all(key).iter().map(|(_, v)| v.to_string()).collect()
    }

    fn float_row(line: usize, key: &str, v: &str, expect: Option<usize>) -> Result<Vec<f64>> {
        let vals = v
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| DankError::Model(format!("line {line}: bad number '{t}' in '{key}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(e) = expect {
            if vals.len() != e {
                return Err(DankError::Model(format!(
                    "line {line}: '{key}' has {} values, expected {e}",
                    vals.len()
                )));
            }
        }
        Ok(vals)
    }

    fn floats(&self, key: &str, expect: Option<usize>) -> Result<Vec<f64>> {
        let (line, v) = self.single(key)?;
        Self::float_row(line, key, v, expect)
    }

    fn matrix(&self, key: &str, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        let recs = self.all(key);
        if recs.len() != rows {
            return Err(DankError::Model(format!("'{key}' has {} rows, expected {rows}", recs.len())));
        }
        let mut m = DMatrix::zeros(rows, cols);
        for (i, (line, v)) in recs.iter().enumerate() {
            for (j, x) in Self::float_row(*line, key, v, Some(cols))?.into_iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        Ok(m)
    }
}

fn read_config(r: &Records<'_>) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::new(r.parsed("C")?, r.parsed("tau")?, r.parsed("eta")?);
    cfg.t_max = r.parsed("t_max")?;
    cfg.tol = r.parsed("tol")?;
    cfg.variant = r.word("variant")?.parse().map_err(|e: DankError| DankError::Model(e.to_string()))?;
    cfg.step = r.word("step")?.parse().map_err(|e: DankError| DankError::Model(e.to_string()))?;
    let proj = r.word("projection")?;
    cfg.projection = match proj.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["exact"] => Projection::Exact,
        ["alternating", rounds] => Projection::Alternating {
            rounds: rounds
                .parse()
                .map_err(|_| DankError::Model(format!("bad projection rounds '{rounds}'")))?,
        },
        _ => return Err(DankError::Model(format!("bad projection '{proj}'"))),
    };
    cfg.validate().map_err(|e| DankError::Model(e.to_string()))?;
    Ok(cfg)
}

fn read_mode(r: &Records<'_>) -> Result<Mode> {
    let raw = r.word("mode")?;
    let parts: Vec<&str> = raw.split_whitespace().collect();
    let bad = || DankError::Model(format!("bad mode '{raw}'"));
    match parts.as_slice() {
        ["exact"] => Ok(Mode::Exact),
        ["scalable", v, seed] => Ok(Mode::Scalable {
            clusters: v.parse().map_err(|_| bad())?,
            seed: seed.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn read_adaptive(r: &Records<'_>, n: usize) -> Result<AdaptiveMatrix> {
    let nuclear: f64 = r.parsed("f_nuclear")?;
    let f = r.matrix("f", n, n)?;
    let sym = SymMatrix::new(f).map_err(|e| DankError::Model(format!("adaptive matrix: {e}")))?;
    Ok(AdaptiveMatrix::from_parts(sym, nuclear))
}
