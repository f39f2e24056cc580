//! Binary classification with a learned adaptive kernel.

use nalgebra::{DMatrix, DVector};

use crate::data::Scaler;
use crate::error::{DankError, Result};
use crate::kernel::{self, gaussian_gram, GramMatrix};
use crate::linalg::{self, SymMatrix};
use crate::scale;
use crate::solver::{
    self, check_labels, hadamard_apply, AdaptiveMatrix, DualState, SolverConfig, SvmProblem, Variant,
};

/// How the Frobenius weight `eta` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eta {
    /// `|alpha|^2` of a standard SVM fitted first, or `0.1 C^2` if that is zero.
    Auto,
    Fixed(f64),
}

/// Whether to solve the whole problem or k-means blocks of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Exact,
    /// Block-diagonal approximation over `clusters` k-means clusters, with no
    /// bias and no nuclear-norm term.
    Scalable { clusters: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    /// Solver settings; `eta` is overwritten when [`TrainOptions::eta`] is `Auto`.
    pub solver: SolverConfig,
    pub eta: Eta,
    /// Keep `F = 11^T`, i.e. train a standard SVM.
    pub frozen: bool,
    pub mode: Mode,
}

impl TrainOptions {
    pub fn new(c: f64, tau: f64) -> Self {
        TrainOptions {
            solver: SolverConfig::new(c, tau, 1.0),
            eta: Eta::Auto,
            frozen: false,
            mode: Mode::Exact,
        }
    }
}

/// Summary of the optimization that produced a model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainInfo {
    pub iterations: usize,
    pub final_objective: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// Training features as given (unscaled).
    pub x_train: DMatrix<f64>,
    pub y: DVector<f64>,
    pub alpha: DVector<f64>,
    pub adaptive: AdaptiveMatrix,
    pub bias: f64,
    pub sigma: f64,
    pub config: SolverConfig,
    pub frozen: bool,
    pub mode: Mode,
    pub scaler: Scaler,
    pub info: TrainInfo,
}

/// Labels and raw decision values.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: DVector<f64>,
    pub decision: DVector<f64>,
}

/// `eta` for the automatic rule: a standard SVM dual (frozen `F`) is solved
/// first and `|alpha|^2` is used; if that vanishes, `0.1 C^2`.
pub fn auto_eta(k: &GramMatrix, y: &DVector<f64>, config: &SolverConfig, box_only: bool) -> Result<f64> {
    let mut problem = SvmProblem::new(k, y)?.frozen();
    if box_only {
        problem = problem.box_only();
    }
    let mut cfg = config.clone();
    cfg.variant = Variant::Nesterov;
    cfg.eta = 1.0;
    let pre = solver::solve(problem, &cfg)?;
    let eta = pre.state.alpha.norm_squared();
    Ok(if eta > 0.0 { eta } else { 0.1 * config.c * config.c })
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub(crate) fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Bias from the KKT conditions.
///
/// With `g_i = sum_j alpha_j y_j F_ij K_ij`, margin support vectors
/// (`1e-6 C < alpha_i < (1 - 1e-6) C`) give `b = y_i - g_i`, and the median
/// over them is returned. Without any, `b` is the midpoint of the interval
/// allowed by the bound-active points: `alpha_i = 0` needs `y_i (g_i + b) >= 1`
/// and `alpha_i = C` needs `y_i (g_i + b) <= 1`.
pub fn recover_bias(alpha: &DVector<f64>, y: &DVector<f64>, f: &AdaptiveMatrix, k: &GramMatrix, c: f64) -> f64 {
    let w = alpha.component_mul(y);
    let g = hadamard_apply(f.as_matrix(), k.as_matrix(), &w);
    let (lo_a, hi_a) = (1e-6 * c, (1.0 - 1e-6) * c);
    let mut margin: Vec<f64> = (0..alpha.len())
        .filter(|&i| alpha[i] > lo_a && alpha[i] < hi_a)
        .map(|i| y[i] - g[i])
        .collect();
    if !margin.is_empty() {
        return median(&mut margin);
    }
    let (lower, upper) = kkt_interval(alpha, y, &g, c);
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    }
}

/// `[lower, upper]` bounds on `b` implied by points at the box limits.
pub fn kkt_interval(alpha: &DVector<f64>, y: &DVector<f64>, g: &DVector<f64>, c: f64) -> (f64, f64) {
    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..alpha.len() {
        let r = y[i] - g[i];
        let at_zero = alpha[i] <= 1e-6 * c;
        let at_c = alpha[i] >= (1.0 - 1e-6) * c;
        // y = +1 at zero or y = -1 at C bound b from below
        if (at_zero && y[i] > 0.0) || (at_c && y[i] < 0.0) {
            lower = lower.max(r);
        } else if (at_zero && y[i] < 0.0) || (at_c && y[i] > 0.0) {
            upper = upper.min(r);
        }
    }
    (lower, upper)
}

/// Reciprocal nearest-neighbour scores `M_ij = 1 / (r s)` between training
/// rows (`n`) and test rows (`m`).
///
/// `r` is the rank of test row `j` among all test rows by distance to
/// training row `i`, and `s` the rank of training row `i` among all training
/// rows by distance to test row `j`; both are 1-based with distance ties
/// broken by index. Every entry is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocalSimilarity {
    pub m: DMatrix<f64>,
}

pub fn reciprocal_nn(x_train: &DMatrix<f64>, x_test: &DMatrix<f64>) -> Result<ReciprocalSimilarity> {
    if x_train.ncols() != x_test.ncols() {
        return Err(DankError::Shape(format!(
            "train has {} features but test has {}",
            x_train.ncols(),
            x_test.ncols()
        )));
    }
    let (n, m) = (x_train.nrows(), x_test.nrows());
    let d = DMatrix::from_fn(n, m, |i, j| kernel::row_sq_dist(x_train, i, x_test, j));
    // rank_r[(i, j)]: position of test j in train i's ordering
    let mut rank_r = DMatrix::<f64>::zeros(n, m);
    let mut order: Vec<usize> = (0..m).collect();
    for i in 0..n {
        order.sort_by(|&a, &b| d[(i, a)].total_cmp(&d[(i, b)]).then(a.cmp(&b)));
        for (pos, &j) in order.iter().enumerate() {
            rank_r[(i, j)] = (pos + 1) as f64;
        }
    }
    let mut out = DMatrix::zeros(n, m);
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..m {
        order.sort_by(|&a, &b| d[(a, j)].total_cmp(&d[(b, j)]).then(a.cmp(&b)));
        for (pos, &i) in order.iter().enumerate() {
            out[(i, j)] = 1.0 / (rank_r[(i, j)] * (pos + 1) as f64);
        }
    }
    Ok(ReciprocalSimilarity { m: out })
}

/// Index of the largest score in each column, smallest index on ties.
pub fn best_matches(sim: &ReciprocalSimilarity) -> Vec<usize> {
    sim.m
        .column_iter()
        .map(|col| {
            let mut best = 0;
            for i in 1..col.len() {
                if col[i] > col[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// `F'`: column `j` is column `argmax_i M_ij` of `F*`.
pub fn extend_f(f_star: &DMatrix<f64>, sim: &ReciprocalSimilarity) -> Result<DMatrix<f64>> {
    if f_star.nrows() != sim.m.nrows() {
        return Err(DankError::Shape(format!(
            "F has order {} but the similarity has {} rows",
            f_star.nrows(),
            sim.m.nrows()
        )));
    }
    Ok(f_star.select_columns(&best_matches(sim)))
}

/// `sum_i w_i F'_ij K'_ij + b` for every test column `j`.
pub(crate) fn expansion(w: &DVector<f64>, f_prime: &DMatrix<f64>, k_prime: &DMatrix<f64>, b: f64) -> DVector<f64> {
    DVector::from_fn(k_prime.ncols(), |j, _| {
        let mut s = 0.0;
        for i in 0..w.len() {
            s += w[i] * f_prime[(i, j)] * k_prime[(i, j)];
        }
        s + b
    })
}

fn check_training_input(x: &DMatrix<f64>, y_len: usize, sigma: f64) -> Result<()> {
    if x.nrows() != y_len {
        return Err(DankError::Shape(format!("{} rows but {} targets", x.nrows(), y_len)));
    }
    if x.nrows() < 2 {
        return Err(DankError::Data("at least two training points are required".into()));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(DankError::Parameter(format!("kernel width must be positive, got {sigma}")));
    }
    Ok(())
}

/// Scales the features, builds the Gaussian kernel, picks `eta`, solves, and
/// recovers the bias.
pub fn train(x: &DMatrix<f64>, y: &DVector<f64>, sigma: f64, options: &TrainOptions) -> Result<SvmModel> {
    check_training_input(x, y.len(), sigma)?;
    check_labels(y)?;
    let pos = y.iter().filter(|&&v| v > 0.0).count();
    if pos == 0 || pos == y.len() {
        return Err(DankError::Config(
            "training labels contain a single class; both +1 and -1 are required".into(),
        ));
    }
    let scaler = Scaler::fit(x)?;
    let xs = scaler.apply(x)?;
    let k = gaussian_gram(&xs, sigma)?;

    let mut config = options.solver.clone();
    if let Mode::Scalable { .. } = options.mode {
        config.tau = 0.0;
    }
    config.eta = match options.eta {
        Eta::Fixed(e) => e,
        Eta::Auto => auto_eta(&k, y, &config, matches!(options.mode, Mode::Scalable { .. }))?,
    };
    config.validate()?;

    let (alpha, adaptive, bias, info) = match options.mode {
        Mode::Exact => {
            let mut problem = SvmProblem::new(&k, y)?;
            if options.frozen {
                problem = problem.frozen();
            }
            let sol = solver::solve(problem, &config)?;
            let bias = recover_bias(&sol.state.alpha, y, &sol.adaptive, &k, config.c);
            let info = TrainInfo {
                iterations: sol.trace.iterations,
                final_objective: sol.trace.final_objective,
                warnings: sol.trace.warnings,
            };
            (sol.state.alpha, sol.adaptive, bias, info)
        }
        Mode::Scalable { clusters, seed } => {
            let partition = scale::kmeans_partition(&xs, clusters, seed)?;
            let blocks = scale::solve_blocks(&k, y, &partition, &config, options.frozen)?;
            let f = AdaptiveMatrix::from_sym(SymMatrix::symmetrize(blocks.f_bar_with_ones())?)?;
            let info = TrainInfo {
                iterations: blocks.blocks.iter().map(|b| b.iterations).max().unwrap_or(0),
                final_objective: blocks.objective,
                warnings: blocks.warnings.clone(),
            };
            (blocks.alpha, f, 0.0, info)
        }
    };

    Ok(SvmModel {
        x_train: x.clone(),
        y: y.clone(),
        alpha,
        adaptive,
        bias,
        sigma,
        config,
        frozen: options.frozen,
        mode: options.mode,
        scaler,
        info,
    })
}

impl SvmModel {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x_train.ncols()
    }

    /// Indices with `alpha_i > 1e-8`.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.alpha[i] > 1e-8).collect()
    }

    pub fn dual_state(&self) -> DualState {
        DualState {
            alpha: self.alpha.clone(),
            labels: self.y.clone(),
        }
    }

    pub fn scaled_training(&self) -> Result<DMatrix<f64>> {
        self.scaler.apply(&self.x_train)
    }

    pub fn gram(&self) -> Result<GramMatrix> {
        gaussian_gram(&self.scaled_training()?, self.sigma)
    }

    /// Decision values at the training points from the learned `F` and `K`.
    pub fn in_sample_decision(&self) -> Result<DVector<f64>> {
        let k = self.gram()?;
        let w = self.alpha.component_mul(&self.y);
        Ok(hadamard_apply(self.adaptive.as_matrix(), k.as_matrix(), &w).add_scalar(self.bias))
    }

    pub fn predict(&self, x_test: &DMatrix<f64>) -> Result<Prediction> {
        if x_test.ncols() != self.dim() {
            return Err(DankError::Shape(format!(
                "model expects {} features, input has {}",
                self.dim(),
                x_test.ncols()
            )));
        }
        let xs_train = self.scaled_training()?;
        let xs_test = self.scaler.apply(x_test)?;
        let k_prime = kernel::cross_gram(&xs_train, &xs_test, self.sigma)?;
        let sim = reciprocal_nn(&xs_train, &xs_test)?;
        let f_prime = extend_f(self.adaptive.as_matrix(), &sim)?;
        let w = self.alpha.component_mul(&self.y);
        let decision = expansion(&w, &f_prime, &k_prime.matrix, self.bias);
        let labels = decision.map(|d| if d >= 0.0 { 1.0 } else { -1.0 });
        Ok(Prediction { labels, decision })
    }

    /// Smallest and largest entry of `F`.
    pub fn f_range(&self) -> (f64, f64) {
        let m = self.adaptive.as_matrix();
        (m.min(), m.max())
    }

    /// Number of eigenvalues of `F` above `1e-6 lambda_max`.
    pub fn f_rank(&self) -> Result<usize> {
        linalg::numerical_rank(self.adaptive.as_sym(), 1e-6)
    }
}

/// Share of `predicted` equal to `truth`.
pub fn accuracy(predicted: &DVector<f64>, truth: &DVector<f64>) -> Result<f64> {
    if predicted.len() != truth.len() || truth.is_empty() {
        return Err(DankError::Shape(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    let hits = predicted.iter().zip(truth.iter()).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::solver::projection;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn two_point_toy_is_separated() {
        let x = col(&[0.0, 1.0]);
        let y = DVector::from_row_slice(&[-1.0, 1.0]);
        let model = train(&x, &y, 1.0, &TrainOptions::new(1.0, 0.0)).unwrap();
        assert_eq!(model.predict(&x).unwrap().labels, y);
    }

    #[test]
    fn symmetric_pair_has_zero_bias() {
        let x = col(&[-1.0, 1.0]);
        let y = DVector::from_row_slice(&[-1.0, 1.0]);
        let model = train(&x, &y, 0.5, &TrainOptions::new(1.0, 0.01)).unwrap();
        assert!(model.bias.abs() < 1e-12, "bias {}", model.bias);
    }

    #[test]
    fn reciprocal_hand_example() {
        let sim = reciprocal_nn(&col(&[0.0, 10.0]), &col(&[1.0])).unwrap();
        assert_eq!(sim.m, DMatrix::from_row_slice(2, 1, &[1.0, 0.5]));
        let f = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(extend_f(&f, &sim).unwrap(), col(&[1.0, 3.0]));
    }

    #[test]
    fn reciprocal_self_match_and_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = DMatrix::from_fn(12, 3, |_, _| rng.random_range(0.0..1.0));
        let sim = reciprocal_nn(&x, &x).unwrap();
        for i in 0..12 {
            assert_eq!(sim.m[(i, i)], 1.0);
        }
        assert!(sim.m.iter().all(|&v| v > 0.0));
        assert_eq!(best_matches(&sim), (0..12).collect::<Vec<_>>());

        let t = DMatrix::from_fn(5, 3, |_, _| rng.random_range(0.0..1.0));
        let perm = [3, 0, 4, 1, 2];
        let tp = t.select_rows(&perm);
        let a = reciprocal_nn(&x, &t).unwrap();
        let b = reciprocal_nn(&x, &tp).unwrap();
        assert_eq!(b.m, a.m.select_columns(&perm));
    }

    #[test]
    fn extension_with_single_test_column() {
        let sim = ReciprocalSimilarity {
            m: col(&[0.1, 0.2, 0.05, 0.9, 0.9]),
        };
        let f = DMatrix::from_fn(5, 5, |i, j| (i * 5 + j) as f64);
        assert_eq!(extend_f(&f, &sim).unwrap(), f.columns(3, 1).into_owned());
    }

    fn separable(n: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
        let x = DMatrix::from_fn(n, 2, |i, _| y[i] * 0.8 + rng.random_range(-0.5..0.5));
        (x, y)
    }

    #[test]
    fn frozen_bias_matches_reference_qp() {
        let (x, y) = separable(40, 2);
        let mut opts = TrainOptions::new(1.0, 0.0);
        opts.frozen = true;
        opts.eta = Eta::Fixed(1.0);
        opts.solver.tol = 1e-10;
        opts.solver.t_max = 20_000;
        let model = train(&x, &y, 0.5, &opts).unwrap();

        let k = model.gram().unwrap();
        let yy = DMatrix::from_diagonal(&y);
        let q = &yy * k.as_matrix() * &yy;
        let l = linalg::lambda_max(k.as_sym()).unwrap();
        let mut a = DVector::zeros(40);
        for _ in 0..100_000 {
            let g = DVector::from_element(40, 1.0) - &q * &a;
            a = projection::project_exact(&(&a + g / l), &y, 1.0);
        }
        let b = recover_bias(&a, &y, &AdaptiveMatrix::ones(40), &k, 1.0);
        assert!((model.bias - b).abs() < 1e-3, "{} vs {b}", model.bias);
    }

    #[test]
    fn bias_fallback_uses_kkt_interval() {
        let (x, y) = separable(20, 3);
        let mut opts = TrainOptions::new(1e-3, 0.0);
        opts.eta = Eta::Fixed(1.0);
        let model = train(&x, &y, 0.5, &opts).unwrap();
        assert!(model.alpha.iter().all(|&a| a >= (1.0 - 1e-6) * 1e-3));
        let k = model.gram().unwrap();
        let g = hadamard_apply(model.adaptive.as_matrix(), k.as_matrix(), &model.alpha.component_mul(&y));
        let (lo, hi) = kkt_interval(&model.alpha, &y, &g, 1e-3);
        assert!(lo <= model.bias && model.bias <= hi, "{lo} <= {} <= {hi}", model.bias);
        assert!((model.bias - 0.5 * (lo + hi)).abs() < 1e-12);
    }

    #[test]
    fn large_eta_agrees_with_standard_svm() {
        let ds = data::gen_two_class_toy(60, 4).unwrap();
        let mut opts = TrainOptions::new(1.0, 0.0);
        opts.eta = Eta::Fixed(1e8);
        let dank = train(&ds.x, &ds.y, 0.3, &opts).unwrap();
        opts.frozen = true;
        let svm = train(&ds.x, &ds.y, 0.3, &opts).unwrap();
        let test = data::gen_two_class_toy(80, 5).unwrap();
        let a = dank.predict(&test.x).unwrap();
        let b = svm.predict(&test.x).unwrap();
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn training_set_prediction_uses_f_star() {
        let ds = data::gen_two_class_toy(50, 6).unwrap();
        let model = train(&ds.x, &ds.y, 0.4, &TrainOptions::new(1.0, 0.01)).unwrap();
        let p = model.predict(&ds.x).unwrap();
        let direct = model.in_sample_decision().unwrap();
        assert!((p.decision - direct).amax() <= 1e-12);
        assert!(p.labels.iter().all(|&l| l == 1.0 || l == -1.0));
    }

    #[test]
    fn flipped_labels_negate_decisions() {
        let ds = data::gen_two_class_toy(40, 7).unwrap();
        let opts = TrainOptions::new(1.0, 0.01);
        let a = train(&ds.x, &ds.y, 0.4, &opts).unwrap();
        let b = train(&ds.x, &(-&ds.y), 0.4, &opts).unwrap();
        let test = data::gen_two_class_toy(30, 8).unwrap();
        let da = a.predict(&test.x).unwrap().decision;
        let db = b.predict(&test.x).unwrap().decision;
        assert!((da + db).amax() < 1e-6);
    }

    #[test]
    fn errors_on_bad_input() {
        let x = col(&[0.0, 1.0]);
        let one = DVector::from_row_slice(&[1.0, 1.0]);
        let opts = TrainOptions::new(1.0, 0.0);
        assert!(matches!(train(&x, &one, 1.0, &opts), Err(DankError::Config(_))));
        let y = DVector::from_row_slice(&[1.0, -1.0]);
        assert!(matches!(train(&x, &y, 0.0, &opts), Err(DankError::Parameter(_))));
        assert!(matches!(
            train(&col(&[0.0]), &DVector::from_row_slice(&[1.0]), 1.0, &opts),
            Err(DankError::Data(_))
        ));
        let model = train(&x, &y, 1.0, &opts).unwrap();
        assert!(matches!(model.predict(&DMatrix::zeros(1, 2)), Err(DankError::Shape(_))));
    }

    #[test]
    fn median_and_accuracy() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        let a = DVector::from_row_slice(&[1.0, -1.0, 1.0, 1.0]);
        let b = DVector::from_row_slice(&[1.0, 1.0, 1.0, -1.0]);
        assert_eq!(accuracy(&a, &b).unwrap(), 0.5);
    }
}
