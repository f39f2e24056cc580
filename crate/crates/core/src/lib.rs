//! Data-adaptive nonparametric kernel learning for support vector machines
//! and support vector regression.
//!
//! A Gaussian base kernel `K` is reweighted entry-wise by a learned PSD
//! matrix `F`, obtained jointly with the dual variables by solving a
//! saddle-point problem. See [`svm::train`] and [`svr::train`] for the entry
//! points, and [`scale`] for the block-decomposed variant used on larger
//! training sets.

pub mod data;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod model_file;
pub mod scale;
pub mod solver;
pub mod svm;
pub mod svr;
pub mod tuning;

pub use error::{DankError, Result};
