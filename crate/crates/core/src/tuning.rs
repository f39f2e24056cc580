//! k-fold cross-validation over a `(sigma, C)` grid.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::data::{self, Dataset};
use crate::error::{DankError, Result};
use crate::svm::{self, TrainOptions};
use crate::svr::{self, SvrOptions};

/// Candidate kernel widths and box bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub sigmas: Vec<f64>,
    pub cs: Vec<f64>,
}

impl Grid {
    /// `2^-5, ..., 2^5` for both.
    pub fn powers_of_two() -> Self {
        let p: Vec<f64> = (-5..=5).map(|e| 2f64.powi(e)).collect();
        Grid {
            sigmas: p.clone(),
            cs: p,
        }
    }

    fn pairs(&self) -> Vec<(f64, f64)> {
        self.sigmas
            .iter()
            .flat_map(|&s| self.cs.iter().map(move |&c| (s, c)))
            .collect()
    }
}

/// Mean and spread of the fold scores at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvPoint {
    pub sigma: f64,
    pub c: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub best: CvPoint,
    pub points: Vec<CvPoint>,
}

fn summarize(sigma: f64, c: f64, scores: &[f64]) -> CvPoint {
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    CvPoint {
        sigma,
        c,
        mean,
        std: var.sqrt(),
    }
}

/// Best mean score; exact ties go to the smaller C,
/// then the larger sigma.
fn select(points: &[CvPoint], higher_is_better: bool) -> CvPoint {
    let key = |p: &CvPoint| if higher_is_better { p.mean } else { -p.mean };
    *points
        .iter()
        .max_by(|a, b| {
            key(a)
                .total_cmp(&key(b))
                .then(b.c.total_cmp(&a.c))
                .then(a.sigma.total_cmp(&b.sigma))
        })
        .expect("grid is not empty")
}

fn folds_for(n: usize, folds: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    Ok(data::kfold(n, folds, seed)?
        .into_iter()
        .map(|test| (data::complement(n, &test), test))
        .collect())
}

fn check(x: &DMatrix<f64>, y: &DVector<f64>, grid: &Grid) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(DankError::Shape(format!("{} rows but {} labels", x.nrows(), y.len())));
    }
    if grid.sigmas.is_empty() || grid.cs.is_empty() {
        return Err(DankError::Parameter("empty hyperparameter grid".into()));
    }
    Ok(())
}

/// Classification accuracy averaged over `folds` seeded folds, for every
/// grid point. `base` supplies everything except `sigma` and `C`.
pub fn cv_svm(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    grid: &Grid,
    folds: usize,
    seed: u64,
    base: &TrainOptions,
) -> Result<CvOutcome> {
    check(x, y, grid)?;
    let ds = Dataset::new(x.clone(), y.clone(), "cv")?;
    let splits = folds_for(ds.len(), folds, seed)?;
    let points = grid
        .pairs()
        .into_par_iter()
        .map(|(sigma, c)| {
            let mut opts = base.clone();
            opts.solver.c = c;
            let scores = splits
                .iter()
                .map(|(train, test)| {
                    let (tr, te) = (ds.subset(train), ds.subset(test));
                    let model = svm::train(&tr.x, &tr.y, sigma, &opts)?;
                    svm::accuracy(&model.predict(&te.x)?.labels, &te.y)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(summarize(sigma, c, &scores))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvOutcome {
        best: select(&points, true),
        points,
    })
}

/// Regression error (see [`svr::rmse`]) averaged over folds; lower wins.
pub fn cv_svr(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    grid: &Grid,
    folds: usize,
    seed: u64,
    base: &SvrOptions,
) -> Result<CvOutcome> {
    check(x, y, grid)?;
    let ds = Dataset::new(x.clone(), y.clone(), "cv")?;
    let splits = folds_for(ds.len(), folds, seed)?;
    let points = grid
        .pairs()
        .into_par_iter()
        .map(|(sigma, c)| {
            let mut opts = base.clone();
            opts.solver.c = c;
            let scores = splits
                .iter()
                .map(|(train, test)| {
                    let (tr, te) = (ds.subset(train), ds.subset(test));
                    let model = svr::train(&tr.x, &tr.y, sigma, &opts)?;
                    svr::rmse(&model.predict(&te.x)?, &te.y)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(summarize(sigma, c, &scores))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvOutcome {
        best: select(&points, false),
        points,
    })
}
