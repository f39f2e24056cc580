//! Dense symmetric linear algebra: eigendecomposition, singular value
//! soft-thresholding and the matrix norms used by the solvers.
//!
//! Storage is `nalgebra::DMatrix<f64>`; the eigen and singular value
//! decompositions are delegated to `faer` running sequentially, so results
//! are reproducible run to run.

use nalgebra::{DMatrix, DVector};

use crate::error::{DankError, Result};

/// Relative tolerance on `|A_ij - A_ji|` accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A square matrix known to be symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Wraps `m` after checking that it is square and symmetric within
    /// `1e-12 * max(1, ||m||_F)`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(DankError::Shape(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let allowed = SYMMETRY_TOL * m.norm().max(1.0);
        let asymmetry = max_asymmetry(&m);
        if asymmetry > allowed || asymmetry.is_nan() {
            return Err(DankError::NotSymmetric { asymmetry, allowed });
        }
        Ok(SymMatrix(m))
    }

    /// Builds a symmetric matrix from the lower triangle produced by `f(i, j)`
    /// with `i >= j`, mirroring it to the upper triangle.
    pub fn from_lower_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    /// Averages `m` with its transpose.
    pub fn symmetrize(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(DankError::Shape(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let t = m.transpose();
        Ok(SymMatrix((m + t) * 0.5))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    /// The all-ones matrix `1 1^T`.
    pub fn ones(n: usize) -> Self {
        SymMatrix(DMatrix::from_element(n, n, 1.0))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }
}

impl AsRef<DMatrix<f64>> for SymMatrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in (j + 1)..n {
            let d = (m[(i, j)] - m[(j, i)]).abs();
            if d.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(d);
        }
    }
    worst
}

/// Eigenvalues in non-increasing order with matching orthonormal eigenvectors
/// stored column-wise.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenPair {
    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    pub fn min_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        scaled_outer(&self.vectors, &self.values)
    }
}

/// Eigendecomposition of a symmetric matrix.
pub fn sym_eig(a: &SymMatrix) -> Result<EigenPair> {
    let n = a.order();
    if n == 0 {
        return Err(DankError::Shape("cannot decompose an empty matrix".into()));
    }
    let m = a.as_matrix();
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = fm
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| DankError::NoConvergence(format!("{e:?} (order {n})")))?;
    let s = evd.S();
    let u = evd.U();
    let raw: Vec<f64> = (0..n).map(|k| s[k]).collect();
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(DankError::NoConvergence(format!(
            "non-finite eigenvalue in a matrix of order {n}"
        )));
    }

    // faer returns ascending values; reorder to non-increasing, keeping the
    // solver's relative order among ties.
    let mut order: Vec<usize> = (0..n).rev().collect();
    order.sort_by(|&p, &q| raw[q].total_cmp(&raw[p]));

    let values = DVector::from_iterator(n, order.iter().map(|&k| raw[k]));
    let vectors = DMatrix::from_fn(n, n, |i, c| u[(i, order[c])]);
    Ok(EigenPair { values, vectors })
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(a: &SymMatrix) -> Result<f64> {
    let n = a.order();
    let m = a.as_matrix();
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let vals = fm
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| DankError::NoConvergence(format!("{e:?} (order {n})")))?;
    vals.last()
        .copied()
        .ok_or_else(|| DankError::Shape("cannot decompose an empty matrix".into()))
}

/// Result of singular value soft-thresholding: the shrunk matrix and its
/// shrunk spectrum (non-increasing).
#[derive(Debug, Clone)]
pub struct Shrinkage {
    pub matrix: SymMatrix,
    pub values: DVector<f64>,
}

impl Shrinkage {
    /// Nuclear norm of the shrunk matrix.
    pub fn nuclear_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

/// Soft-thresholds every eigenvalue: `lambda -> sign(lambda) * max(0, |lambda| - threshold)`.
pub fn svt(a: &SymMatrix, threshold: f64) -> Result<SymMatrix> {
    Ok(svt_spectrum(a, threshold)?.matrix)
}

/// Like [`svt`], also returning the shrunk eigenvalues.
pub fn svt_spectrum(a: &SymMatrix, threshold: f64) -> Result<Shrinkage> {
    if !(threshold >= 0.0) || !threshold.is_finite() {
        return Err(DankError::Parameter(format!(
            "threshold must be a finite nonnegative number, got {threshold}"
        )));
    }
    let eig = sym_eig(a)?;
    let shrunk = eig
        .values
        .map(|l| l.signum() * (l.abs() - threshold).max(0.0));
    let keep: Vec<usize> = (0..shrunk.len()).filter(|&k| shrunk[k] != 0.0).collect();
    let n = a.order();
    let matrix = if keep.is_empty() {
        DMatrix::zeros(n, n)
    } else {
        let v = eig.vectors.select_columns(&keep);
        let s = DVector::from_iterator(keep.len(), keep.iter().map(|&k| shrunk[k]));
        scaled_outer(&v, &s)
    };
    Ok(Shrinkage {
        matrix: SymMatrix::symmetrize(matrix)?,
        values: shrunk,
    })
}

/// `V diag(s) V^T`
fn scaled_outer(v: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let mut vs = v.clone();
    for (c, mut col) in vs.column_iter_mut().enumerate() {
        col *= s[c];
    }
    vs * v.transpose()
}

/// The four matrix norms used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub frobenius: f64,
    pub spectral: f64,
    pub nuclear: f64,
    /// Entry-wise absolute sum.
    pub manhattan: f64,
}

/// Frobenius, spectral, nuclear and entry-wise L1 norms of a (possibly
/// rectangular, non-symmetric) matrix.
pub fn norms(a: &DMatrix<f64>) -> Result<Norms> {
    let frobenius = a.norm();
    let manhattan = a.iter().map(|v| v.abs()).sum();
    if a.is_empty() {
        return Ok(Norms {
            frobenius,
            spectral: 0.0,
            nuclear: 0.0,
            manhattan,
        });
    }
    let fm = faer::Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let sv = fm
        .singular_values()
        .map_err(|e| DankError::NoConvergence(format!("{e:?}")))?;
    Ok(Norms {
        frobenius,
        spectral: sv.first().copied().unwrap_or(0.0),
        nuclear: sv.iter().sum(),
        manhattan,
    })
}

/// Number of eigenvalues above `rel_tol * lambda_max`.
pub fn numerical_rank(a: &SymMatrix, rel_tol: f64) -> Result<usize> {
    let eig = sym_eig(a)?;
    let top = eig.max_value();
    if top <= 0.0 {
        return Ok(0);
    }
    Ok(eig.values.iter().filter(|&&v| v > rel_tol * top).count())
}
