use std::io::Write;

use anyhow::Context;
use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dank::data::{self, Dataset};
use dank::kernel::gaussian_gram;
use dank::linalg;
use dank::model_file::Model;
use dank::scale;
use dank::solver::{AdaptiveMatrix, SolverConfig};
use dank::svm::{self, Eta};
use dank::svr;
use dank::tuning::{self, Grid};

use crate::args::{
    parse_eta, parse_grid, BoundsArgs, CvArgs, EvalArgs, GridArgs, ModelArgs, PredictArgs, Task, TrainArgs,
};
use crate::UsageError;

fn class_labels(ds: &Dataset) -> anyhow::Result<DVector<f64>> {
    let (y, coerced) = ds.binary_labels()?;
    if coerced {
        warn!("{}: labels in {{0, 1}} mapped to {{-1, +1}}", ds.source);
    }
    Ok(y)
}

fn fit(spec: &ModelArgs, ds: &Dataset, sigma: f64, c: f64) -> anyhow::Result<Model> {
    Ok(match spec.task {
        Task::Svm => Model::Svm(svm::train(&ds.x, &class_labels(ds)?, sigma, &spec.svm_options(c)?)?),
        Task::Svr => Model::Svr(svr::train(&ds.x, &ds.y, sigma, &spec.svr_options(c)?)?),
    })
}

/// Accuracy for classifiers, relative squared error for regressors.
fn score(model: &Model, ds: &Dataset) -> anyhow::Result<(&'static str, f64)> {
    Ok(match model {
        Model::Svm(m) => ("accuracy", svm::accuracy(&m.predict(&ds.x)?.labels, &class_labels(ds)?)?),
        Model::Svr(m) => ("rmse", svr::rmse(&m.predict(&ds.x)?, &ds.y)?),
    })
}

fn adaptive_of(model: &Model) -> &AdaptiveMatrix {
    match model {
        Model::Svm(m) => &m.adaptive,
        Model::Svr(m) => &m.adaptive,
    }
}

fn cross_validate(spec: &ModelArgs, ds: &Dataset, folds: usize) -> anyhow::Result<tuning::CvOutcome> {
    let grid = Grid {
        sigmas: spec.sigma.map(|s| vec![s]).unwrap_or_else(|| Grid::powers_of_two().sigmas),
        cs: spec.c.map(|c| vec![c]).unwrap_or_else(|| Grid::powers_of_two().cs),
    };
    Ok(match spec.task {
        Task::Svm => tuning::cv_svm(&ds.x, &class_labels(ds)?, &grid, folds, spec.seed, &spec.svm_options(1.0)?)?,
        Task::Svr => tuning::cv_svr(&ds.x, &ds.y, &grid, folds, spec.seed, &spec.svr_options(1.0)?)?,
    })
}

pub fn train(a: &TrainArgs) -> anyhow::Result<()> {
    a.model.validate()?;
    let ds = a.data.load()?;
    let mut rows: Vec<(String, String)> = Vec::new();
    let (sigma, c) = if a.cv {
        let out = cross_validate(&a.model, &ds, a.folds)?;
        rows.push(("cv_score".into(), out.best.mean.to_string()));
        (out.best.sigma, out.best.c)
    } else {
        a.model.fixed()?
    };
    let model = fit(&a.model, &ds, sigma, c)?;
    model
        .save(&a.model_path)
        .with_context(|| format!("writing {}", a.model_path.display()))?;

    let (config, iterations, objective, warnings): (&SolverConfig, usize, f64, &[String]) = match &model {
        Model::Svm(m) => (&m.config, m.info.iterations, m.info.final_objective, &m.info.warnings),
        Model::Svr(m) => (&m.config, m.info.iterations, m.info.final_objective, &m.info.warnings),
    };
    for w in warnings {
        warn!("{w}");
    }
    let f = adaptive_of(&model);
    let rank = linalg::numerical_rank(f.as_sym(), 1e-6)?;
    let mut put = |k: &str, v: String| rows.push((k.into(), v));
    put("task", model.task().into());
    put("n", ds.len().to_string());
    put("d", ds.dim().to_string());
    put("sigma", sigma.to_string());
    put("C", config.c.to_string());
    put("tau", config.tau.to_string());
    put("eta", config.eta.to_string());
    put("iterations", iterations.to_string());
    put("objective", objective.to_string());
    put("f_min", f.as_matrix().min().to_string());
    put("f_max", f.as_matrix().max().to_string());
    put("f_rank", rank.to_string());
    let (metric, value) = score(&model, &ds)?;
    put(&format!("train_{metric}"), value.to_string());
    if let Some(path) = &a.test {
        let test = a.data.load_other(path)?;
        let (metric, value) = score(&model, &test)?;
        put(&format!("test_{metric}"), value.to_string());
    }
    let mut out = std::io::stdout().lock();
    writeln!(out, "field,value")?;
    for (k, v) in rows {
        writeln!(out, "{k},{v}")?;
    }
    Ok(())
}

pub fn predict(a: &PredictArgs) -> anyhow::Result<()> {
    let model = Model::load(&a.model_path).with_context(|| format!("reading {}", a.model_path.display()))?;
    let ds = a.data.load()?;
    let mut out = std::io::stdout().lock();
    match &model {
        Model::Svm(m) => {
            let p = m.predict(&ds.x)?;
            writeln!(out, "index,label,decision")?;
            for i in 0..p.labels.len() {
                writeln!(out, "{i},{},{}", p.labels[i], p.decision[i])?;
            }
        }
        Model::Svr(m) => {
            let p = m.predict(&ds.x)?;
            writeln!(out, "index,value")?;
            for (i, v) in p.iter().enumerate() {
                writeln!(out, "{i},{v}")?;
            }
        }
    }
    Ok(())
}

pub fn eval(a: &EvalArgs) -> anyhow::Result<()> {
    let ds = a.data.load()?;
    let mut out = std::io::stdout().lock();
    if let Some(path) = &a.model_path {
        let model = Model::load(path).with_context(|| format!("reading {}", path.display()))?;
        let (metric, value) = score(&model, &ds)?;
        writeln!(out, "metric,value\n{metric},{value}")?;
        return Ok(());
    }
    let Some(splits) = a.splits else {
        return Err(UsageError("eval needs --model or --splits".into()).into());
    };
    if !(a.test_fraction > 0.0 && a.test_fraction < 1.0) {
        return Err(UsageError("--test-fraction must lie strictly between 0 and 1".into()).into());
    }
    a.spec.validate()?;
    let (sigma, c) = a.spec.fixed()?;
    let n_test = ((ds.len() as f64 * a.test_fraction).round() as usize).clamp(1, ds.len().saturating_sub(2).max(1));
    let mut scores = Vec::with_capacity(splits);
    let mut name = "";
    writeln!(out, "split,metric,value")?;
    for s in 0..splits {
        let mut idx: Vec<usize> = (0..ds.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(a.spec.seed.wrapping_add(s as u64)));
        let (test, train) = idx.split_at(n_test);
        let model = fit(&a.spec, &ds.subset(train), sigma, c)?;
        let (metric, value) = score(&model, &ds.subset(test))?;
        name = metric;
        writeln!(out, "{s},{metric},{value}")?;
        scores.push(value);
    }
    let mean = scores.iter().sum::<f64>() / scores.len().max(1) as f64;
    let std = (scores.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / scores.len().max(1) as f64).sqrt();
    writeln!(out, "mean,{name},{mean}\nstd,{name},{std}")?;
    Ok(())
}

pub fn cv(a: &CvArgs) -> anyhow::Result<()> {
    a.model.validate()?;
    let ds = a.data.load()?;
    let out_cv = cross_validate(&a.model, &ds, a.folds)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "sigma,C,mean,std,best")?;
    for p in &out_cv.points {
        let best = u8::from(*p == out_cv.best);
        writeln!(out, "{},{},{},{},{best}", p.sigma, p.c, p.mean, p.std)?;
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_count(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn bounds(a: &BoundsArgs) -> anyhow::Result<()> {
    let ds = a.data.load()?;
    let y = class_labels(&ds)?;
    let xs = data::Scaler::fit(&ds.x)?.apply(&ds.x)?;
    let k = gaussian_gram(&xs, a.sigma)?;
    let mut config = SolverConfig::new(a.c, 0.0, 1.0);
    config.t_max = a.t_max;
    config.tol = a.tol;
    config.step = a.step.parse()?;
    config.eta = match parse_eta(&a.eta)? {
        Eta::Fixed(e) => e,
        Eta::Auto => svm::auto_eta(&k, &y, &config, true)?,
    };
    let exact = scale::solve_whole(&k, &y, &config)?;
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "clusters,q_pi,b1,b2,b,objective_gap,objective_bound,alpha_gap,alpha_bound,f_gap,f_bound,f_exact_bound,\
         candidates,screened_strict,screened_relaxed,false_pos_strict,false_pos_relaxed,nonsupport"
    )?;
    for &v in &a.clusters {
        let partition = scale::kmeans_partition(&xs, v, a.seed)?;
        let blocks = scale::solve_blocks(&k, &y, &partition, &config, false)?;
        let r = scale::bound_report(Some(&exact), &blocks, &k, &y, &partition, &config, a.kappa)?;
        for w in &r.warnings {
            warn!("v = {v}: {w}");
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.clusters,
            r.q_pi,
            r.b1,
            r.b2,
            r.b,
            opt(r.objective_gap),
            r.objective_gap_bound,
            opt(r.alpha_gap),
            r.alpha_gap_bound,
            opt(r.f_gap),
            r.f_gap_bound,
            r.f_gap_exact_bound,
            r.screening.candidates,
            r.screening.strict.len(),
            r.screening.relaxed.len(),
            opt_count(r.strict_false_positives),
            opt_count(r.relaxed_false_positives),
            opt_count(r.exact_nonsupport),
        )?;
    }
    Ok(())
}

pub fn grid(a: &GridArgs) -> anyhow::Result<()> {
    let (x0, x1, y0, y1, res) = parse_grid(&a.grid)?;
    let model = Model::load(&a.model_path).with_context(|| format!("reading {}", a.model_path.display()))?;
    let dim = match &model {
        Model::Svm(m) => m.dim(),
        Model::Svr(m) => m.dim(),
    };
    if dim != 2 {
        return Err(dank::DankError::Shape(format!("grid output needs a 2-feature model, this one has {dim}")).into());
    }
    let (gx, gy) = (data::linspace(res, x0, x1), data::linspace(res, y0, y1));
    let pts = DMatrix::from_fn(res * res, 2, |i, j| if j == 0 { gx[i / res] } else { gy[i % res] });
    let values = match &model {
        Model::Svm(m) => m.predict(&pts)?.decision,
        Model::Svr(m) => m.predict(&pts)?,
    };
    let mut out = std::io::stdout().lock();
    writeln!(out, "x,y,decision")?;
    for i in 0..pts.nrows() {
        writeln!(out, "{},{},{}", pts[(i, 0)], pts[(i, 1)], values[i])?;
    }
    Ok(())
}
