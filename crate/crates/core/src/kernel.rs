//! Gaussian Gram matrices for training and cross (train x test) evaluation.

use nalgebra::DMatrix;

use crate::error::{DankError, Result};
use crate::linalg::{self, SymMatrix};

/// Base kernel matrix `K` over the training points.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    matrix: SymMatrix,
    /// Gaussian width, `None` when the matrix was supplied externally.
    sigma: Option<f64>,
}

impl GramMatrix {
    /// Wraps an externally supplied kernel matrix after checking symmetry
    /// and positive semi-definiteness (`lambda_min >= -1e-8 * lambda_max`).
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        let matrix = SymMatrix::new(m)?;
        if matrix.as_matrix().iter().any(|v| !v.is_finite()) {
            return Err(DankError::Data("kernel matrix has non-finite entries".into()));
        }
        let eig = linalg::sym_eig(&matrix)?;
        let top = eig.max_value().max(0.0);
        if eig.min_value() < -1e-8 * top.max(1e-300) {
            return Err(DankError::Data(format!(
                "kernel matrix is not positive semi-definite (lambda_min = {:.3e}, lambda_max = {:.3e})",
                eig.min_value(),
                top
            )));
        }
        Ok(GramMatrix { matrix, sigma: None })
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        self.matrix.as_matrix()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.as_matrix().norm_squared()
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> GramMatrix {
        let m = self.as_matrix();
        GramMatrix {
            matrix: SymMatrix::from_lower_fn(idx.len(), |i, j| m[(idx[i], idx[j])]),
            sigma: self.sigma,
        }
    }
}

/// Kernel evaluations between training rows and test rows, shape `n x m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossGram {
    pub matrix: DMatrix<f64>,
    pub sigma: f64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(DankError::Parameter(format!(
            "kernel width must be positive and finite, got {sigma}"
        )));
    }
    Ok(())
}

fn check_finite(x: &DMatrix<f64>, what: &str) -> Result<()> {
    if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
        let (r, c) = (pos % x.nrows(), pos / x.nrows());
        return Err(DankError::Data(format!(
            "{what} has a non-finite value at row {}, column {}",
            r + 1,
            c + 1
        )));
    }
    Ok(())
}

/// Squared Euclidean distance between row `i` of `a` and row `j` of `b`.
///
/// Summed directly so that identical rows give exactly zero and the result
/// is symmetric in its arguments.
#[inline]
pub(crate) fn row_sq_dist(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    (0..a.ncols()).map(|k| (a[(i, k)] - b[(j, k)]).powi(2)).sum()
}

/// Gaussian kernel value for a squared distance.
#[inline]
pub fn gaussian(sq_dist: f64, sigma: f64) -> f64 {
    (-sq_dist / (2.0 * sigma * sigma)).exp()
}

/// `K_ij = exp(-|x_i - x_j|^2 / (2 sigma^2))` over the rows of `x`.
pub fn gaussian_gram(x: &DMatrix<f64>, sigma: f64) -> Result<GramMatrix> {
    check_sigma(sigma)?;
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(DankError::Shape(format!(
            "feature matrix must be non-empty, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    check_finite(x, "feature matrix")?;
    let matrix = SymMatrix::from_lower_fn(x.nrows(), |i, j| gaussian(row_sq_dist(x, i, x, j), sigma));
    Ok(GramMatrix {
        matrix,
        sigma: Some(sigma),
    })
}

/// Cross kernel between training rows (`n`) and test rows (`m`).
///
/// Uses the same arithmetic as [`gaussian_gram`], so passing the training
/// set as the test set reproduces the Gram matrix bit for bit.
pub fn cross_gram(x_train: &DMatrix<f64>, x_test: &DMatrix<f64>, sigma: f64) -> Result<CrossGram> {
    check_sigma(sigma)?;
    if x_train.ncols() != x_test.ncols() {
        return Err(DankError::Shape(format!(
            "train has {} features but test has {}",
            x_train.ncols(),
            x_test.ncols()
        )));
    }
    check_finite(x_train, "training features")?;
    check_finite(x_test, "test features")?;
    let matrix = DMatrix::from_fn(x_train.nrows(), x_test.nrows(), |i, j| {
        gaussian(row_sq_dist(x_train, i, x_test, j), sigma)
    });
    Ok(CrossGram { matrix, sigma })
}
