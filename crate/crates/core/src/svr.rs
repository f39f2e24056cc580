//! Epsilon-insensitive regression with a learned adaptive kernel.
//!
//! The dual iterate is the concatenation `[a_hat; a_check]`; both halves
//! live in `[0, C]` and are tied by `1^T (a_hat - a_check) = 0`, the
//! multiplier of the bias.

use nalgebra::{DMatrix, DVector};

use crate::data::Scaler;
use crate::error::{DankError, Result};
use crate::kernel::{self, gaussian_gram, GramMatrix};
use crate::linalg::{self, SymMatrix};
use crate::solver::{
    adaptive_from_weights, gamma_weighted, hadamard_apply, maximize, projection, AdaptiveMatrix, DualProblem,
    Evaluation, IterationView, Projection, SolveTrace, SolverConfig, StepRule, Variant, lipschitz_tight,
};
use crate::svm::{self, Eta, TrainInfo};

/// Paired dual variables and the tube half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrDualState {
    pub alpha_hat: DVector<f64>,
    pub alpha_check: DVector<f64>,
    pub epsilon: f64,
}

impl SvrDualState {
    pub fn new(alpha_hat: DVector<f64>, alpha_check: DVector<f64>, epsilon: f64) -> Result<Self> {
        if alpha_hat.len() != alpha_check.len() {
            return Err(DankError::Shape(format!(
                "alpha_hat has {} entries, alpha_check {}",
                alpha_hat.len(),
                alpha_check.len()
            )));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(DankError::Parameter(format!("epsilon must be nonnegative, got {epsilon}")));
        }
        Ok(SvrDualState {
            alpha_hat,
            alpha_check,
            epsilon,
        })
    }

    pub fn len(&self) -> usize {
        self.alpha_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha_hat.is_empty()
    }

    /// `a_hat - a_check`
    pub fn difference(&self) -> DVector<f64> {
        &self.alpha_hat - &self.alpha_check
    }

    pub fn is_feasible(&self, c: f64) -> bool {
        let in_box = |v: &DVector<f64>| v.iter().all(|&a| (0.0..=c).contains(&a));
        let d = self.difference();
        in_box(&self.alpha_hat) && in_box(&self.alpha_check) && d.sum().abs() <= 1e-6 * d.norm().max(1.0)
    }

    /// Largest `min(a_hat_i, a_check_i)`; zero under complementarity.
    pub fn complementarity_gap(&self) -> f64 {
        self.alpha_hat
            .iter()
            .zip(self.alpha_check.iter())
            .map(|(a, b)| a.min(*b))
            .fold(0.0, f64::max)
    }

    fn stacked(&self) -> DVector<f64> {
        let n = self.len();
        DVector::from_fn(2 * n, |i, _| if i < n { self.alpha_hat[i] } else { self.alpha_check[i - n] })
    }

    fn from_stacked(x: &DVector<f64>, epsilon: f64) -> Self {
        let n = x.len() / 2;
        SvrDualState {
            alpha_hat: x.rows(0, n).into_owned(),
            alpha_check: x.rows(n, n).into_owned(),
            epsilon,
        }
    }
}

fn check_order(n: usize, k: &GramMatrix) -> Result<()> {
    if k.order() != n {
        return Err(DankError::Shape(format!(
            "kernel is {0}x{0} but there are {n} paired dual variables",
            k.order()
        )));
    }
    Ok(())
}

/// `diag(d) K diag(d) / (4 eta)` with `d = a_hat - a_check`.
pub fn svr_gamma(alpha_hat: &DVector<f64>, alpha_check: &DVector<f64>, k: &GramMatrix, eta: f64) -> Result<SymMatrix> {
    if alpha_hat.len() != alpha_check.len() {
        return Err(DankError::Shape("alpha_hat and alpha_check differ in length".into()));
    }
    check_order(alpha_hat.len(), k)?;
    Ok(gamma_weighted(&(alpha_hat - alpha_check), k, eta))
}

/// Inner minimizer `svt(11^T + Gamma, tau / 2)`.
pub fn svr_f(state: &SvrDualState, k: &GramMatrix, config: &SolverConfig) -> Result<AdaptiveMatrix> {
    check_order(state.len(), k)?;
    adaptive_from_weights(&state.difference(), k, config.tau, config.eta)
}

/// `2 (n + 9 n C^2 |K|_F^2 / (4 eta))`.
pub fn lipschitz_svr(n: usize, c: f64, k: &GramMatrix, eta: f64) -> f64 {
    let n = n as f64;
    2.0 * (n + 9.0 * n * c * c * k.frobenius_sq() / (4.0 * eta))
}

/// The regression dual as a [`DualProblem`] over `[a_hat; a_check]`.
struct SvrDual<'a> {
    kernel: &'a GramMatrix,
    targets: &'a DVector<f64>,
    epsilon: f64,
    c: f64,
    tau: f64,
    eta: f64,
    frozen: bool,
    projection: Projection,
    /// `+1` on the first half, `-1` on the second.
    signs: DVector<f64>,
}

impl<'a> SvrDual<'a> {
    fn new(
        kernel: &'a GramMatrix,
        targets: &'a DVector<f64>,
        epsilon: f64,
        config: &SolverConfig,
        frozen: bool,
    ) -> Self {
        let n = targets.len();
        SvrDual {
            kernel,
            targets,
            epsilon,
            c: config.c,
            tau: config.tau,
            eta: config.eta,
            frozen,
            projection: config.projection,
            signs: DVector::from_fn(2 * n, |i, _| if i < n { 1.0 } else { -1.0 }),
        }
    }

    fn difference(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.targets.len();
        x.rows(0, n) - x.rows(n, n)
    }
}

impl DualProblem for SvrDual<'_> {
    fn dim(&self) -> usize {
        2 * self.targets.len()
    }

    fn evaluate(&self, x: &DVector<f64>) -> Result<Evaluation> {
        let n = self.targets.len();
        let d = self.difference(x);
        let (adaptive, q) = if self.frozen {
            (AdaptiveMatrix::ones(n), self.kernel.as_matrix() * &d)
        } else {
            let f = adaptive_from_weights(&d, self.kernel, self.tau, self.eta)?;
            let q = hadamard_apply(f.as_matrix(), self.kernel.as_matrix(), &d);
            (f, q)
        };
        let value = -0.5 * d.dot(&q) + d.dot(self.targets) - self.epsilon * x.sum()
            + self.eta * adaptive.distance_to_ones_sq()
            + self.tau * self.eta * adaptive.nuclear_norm();
        let gradient = DVector::from_fn(2 * n, |i, _| {
            if i < n {
                -self.epsilon - q[i] + self.targets[i]
            } else {
                -self.epsilon + q[i - n] - self.targets[i - n]
            }
        });
        Ok(Evaluation {
            value,
            gradient,
            adaptive,
        })
    }

    fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        self.projection.apply(x, &self.signs, self.c)
    }

    fn step_norm(&self, prev: &DVector<f64>, next: &DVector<f64>) -> f64 {
        (self.difference(next) - self.difference(prev)).norm()
    }
}

/// `h(a_hat, a_check)`, the dual with `F` at its inner optimum.
pub fn svr_objective(state: &SvrDualState, k: &GramMatrix, y: &DVector<f64>, config: &SolverConfig) -> Result<f64> {
    check_order(state.len(), k)?;
    Ok(SvrDual::new(k, y, state.epsilon, config, false).evaluate(&state.stacked())?.value)
}

/// Partial gradients `(d h / d a_hat, d h / d a_check)`.
pub fn svr_grad(
    state: &SvrDualState,
    k: &GramMatrix,
    y: &DVector<f64>,
    config: &SolverConfig,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_order(state.len(), k)?;
    if y.len() != state.len() {
        return Err(DankError::Shape(format!("{} targets for {} dual pairs", y.len(), state.len())));
    }
    let g = SvrDual::new(k, y, state.epsilon, config, false).evaluate(&state.stacked())?.gradient;
    let n = state.len();
    Ok((g.rows(0, n).into_owned(), g.rows(n, n).into_owned()))
}

#[derive(Debug, Clone)]
pub struct SvrSolution {
    pub state: SvrDualState,
    pub adaptive: AdaptiveMatrix,
    pub trace: SolveTrace,
    /// The constant `L` of the run; steps are `1/(2L)` and `1/(4L)`.
    pub lipschitz: f64,
}

/// Options for [`svr_solve_with`].
#[derive(Default)]
pub struct SvrSolveOptions<'o> {
    /// Keep `F = 11^T`.
    pub frozen: bool,
    pub lipschitz: Option<f64>,
    pub observer: Option<&'o mut (dyn FnMut(&IterationView<'_>) + 'o)>,
}

/// Accelerated ascent on the regression dual from zero.
pub fn svr_solve(k: &GramMatrix, y: &DVector<f64>, config: &SolverConfig, epsilon: f64) -> Result<SvrSolution> {
    svr_solve_with(k, y, config, epsilon, SvrSolveOptions::default())
}

/// [`svr_solve`] with a frozen switch, a step override and an observer.
///
/// The frozen problem uses `L = lambda_max(K)`, its exact curvature.
pub fn svr_solve_with(
    k: &GramMatrix,
    y: &DVector<f64>,
    config: &SolverConfig,
    epsilon: f64,
    options: SvrSolveOptions<'_>,
) -> Result<SvrSolution> {
    config.validate()?;
    check_order(y.len(), k)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(DankError::Data("regression targets must be finite".into()));
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(DankError::Parameter(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let n = y.len();
    let lipschitz = match options.lipschitz {
        Some(l) if l > 0.0 && l.is_finite() => l,
        Some(l) => return Err(DankError::Parameter(format!("step constant must be positive, got {l}"))),
        None if options.frozen => linalg::lambda_max(k.as_sym())?.max(f64::MIN_POSITIVE),
        None => match config.step {
            StepRule::Theory => lipschitz_svr(n, config.c, k, config.eta),
            StepRule::Tight => 2.0 * lipschitz_tight(config.c, k, config.eta)?,
        },
    };
    let dual = SvrDual::new(k, y, epsilon, config, options.frozen);
    let run = maximize(
        &dual,
        DVector::zeros(2 * n),
        2.0 * lipschitz,
        config.variant,
        config.t_max,
        config.tol,
        options.observer,
    )?;
    let mut trace = run.trace;
    if !options.frozen && config.tau >= 2.0 * n as f64 {
        trace.warnings.push(format!(
            "tau = {} is at least 2n = {}; the adaptive matrix may collapse to zero",
            config.tau,
            2 * n
        ));
    }
    Ok(SvrSolution {
        state: SvrDualState::from_stacked(&run.x, epsilon),
        adaptive: run.last.adaptive,
        trace,
        lipschitz,
    })
}

/// Bias from the tube-edge conditions.
///
/// With `g = (F ⊙ K)(a_hat - a_check)`, a free `a_hat_i` gives
/// `b = y_i - g_i - eps` and a free `a_check_i` gives `b = y_i - g_i + eps`;
/// the median over those is used. Otherwise `b` is the midpoint of the
/// interval implied by the bound-active variables.
pub fn svr_bias(state: &SvrDualState, f: &AdaptiveMatrix, k: &GramMatrix, y: &DVector<f64>, c: f64) -> f64 {
    let d = state.difference();
    let g = hadamard_apply(f.as_matrix(), k.as_matrix(), &d);
    let eps = state.epsilon;
    let (lo_a, hi_a) = (1e-6 * c, (1.0 - 1e-6) * c);
    let free = |a: f64| a > lo_a && a < hi_a;
    let mut edge = Vec::new();
    for i in 0..y.len() {
        if free(state.alpha_hat[i]) {
            edge.push(y[i] - g[i] - eps);
        }
        if free(state.alpha_check[i]) {
            edge.push(y[i] - g[i] + eps);
        }
    }
    if !edge.is_empty() {
        return svm::median(&mut edge);
    }
    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..y.len() {
        let r = y[i] - g[i];
        if state.alpha_hat[i] <= lo_a {
            lower = lower.max(r - eps);
        } else {
            upper = upper.min(r - eps);
        }
        if state.alpha_check[i] <= lo_a {
            upper = upper.min(r + eps);
        } else {
            lower = lower.max(r + eps);
        }
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    }
}

/// `sum (pred - y)^2 / sum (y - mean(y))^2`.
pub fn rmse(predictions: &DVector<f64>, targets: &DVector<f64>) -> Result<f64> {
    if predictions.len() != targets.len() || targets.is_empty() {
        return Err(DankError::Shape(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    let mean = targets.mean();
    let denom: f64 = targets.iter().map(|t| (t - mean).powi(2)).sum();
    if denom == 0.0 {
        return Err(DankError::UndefinedMetric("targets are constant, relative error is undefined".into()));
    }
    Ok((predictions - targets).norm_squared() / denom)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrOptions {
    pub solver: SolverConfig,
    pub eta: Eta,
    /// Tube half-width on targets scaled to `[0, 1]`.
    pub epsilon: f64,
    pub frozen: bool,
}

impl SvrOptions {
    pub fn new(c: f64, tau: f64, epsilon: f64) -> Self {
        SvrOptions {
            solver: SolverConfig::new(c, tau, 1.0),
            eta: Eta::Auto,
            epsilon,
            frozen: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    pub x_train: DMatrix<f64>,
    /// Targets as given.
    pub y: DVector<f64>,
    pub alpha_hat: DVector<f64>,
    pub alpha_check: DVector<f64>,
    pub adaptive: AdaptiveMatrix,
    /// Bias on the scaled target range.
    pub bias: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub config: SolverConfig,
    pub frozen: bool,
    pub scaler: Scaler,
    /// Maps targets to `[0, 1]`.
    pub target_scaler: Scaler,
    pub info: TrainInfo,
}

fn target_column(y: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(y.len(), 1, y.as_slice())
}

/// Scales features and targets to `[0, 1]`, picks `eta`, solves, and
/// recovers the bias.
pub fn train(x: &DMatrix<f64>, y: &DVector<f64>, sigma: f64, options: &SvrOptions) -> Result<SvrModel> {
    if x.nrows() != y.len() {
        return Err(DankError::Shape(format!("{} rows but {} targets", x.nrows(), y.len())));
    }
    if x.nrows() < 2 {
        return Err(DankError::Data("at least two training points are required".into()));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(DankError::Parameter(format!("kernel width must be positive, got {sigma}")));
    }
    let scaler = Scaler::fit(x)?;
    let xs = scaler.apply(x)?;
    let target_scaler = Scaler::fit(&target_column(y))?;
    let ys = target_scaler.apply(&target_column(y))?.column(0).into_owned();
    let k = gaussian_gram(&xs, sigma)?;

    let mut config = options.solver.clone();
    config.eta = match options.eta {
        Eta::Fixed(e) => e,
        Eta::Auto => {
            let mut pre_cfg = config.clone();
            pre_cfg.eta = 1.0;
            pre_cfg.variant = Variant::Nesterov;
            let pre = svr_solve_with(
                &k,
                &ys,
                &pre_cfg,
                options.epsilon,
                SvrSolveOptions {
                    frozen: true,
                    ..Default::default()
                },
            )?;
            let e = pre.state.difference().norm_squared();
            if e > 0.0 {
                e
            } else {
                0.1 * config.c * config.c
            }
        }
    };
    let sol = svr_solve_with(
        &k,
        &ys,
        &config,
        options.epsilon,
        SvrSolveOptions {
            frozen: options.frozen,
            ..Default::default()
        },
    )?;
    let bias = svr_bias(&sol.state, &sol.adaptive, &k, &ys, config.c);
    Ok(SvrModel {
        x_train: x.clone(),
        y: y.clone(),
        alpha_hat: sol.state.alpha_hat,
        alpha_check: sol.state.alpha_check,
        adaptive: sol.adaptive,
        bias,
        sigma,
        epsilon: options.epsilon,
        config,
        frozen: options.frozen,
        scaler,
        target_scaler,
        info: TrainInfo {
            iterations: sol.trace.iterations,
            final_objective: sol.trace.final_objective,
            warnings: sol.trace.warnings,
        },
    })
}

impl SvrModel {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x_train.ncols()
    }

    pub fn dual_state(&self) -> SvrDualState {
        SvrDualState {
            alpha_hat: self.alpha_hat.clone(),
            alpha_check: self.alpha_check.clone(),
            epsilon: self.epsilon,
        }
    }

    fn unscale(&self, v: DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.target_scaler.inverse(&target_column(&v))?.column(0).into_owned())
    }

    /// Predictions in the original target units.
    pub fn predict(&self, x_test: &DMatrix<f64>) -> Result<DVector<f64>> {
        if x_test.ncols() != self.dim() {
            return Err(DankError::Shape(format!(
                "model expects {} features, input has {}",
                self.dim(),
                x_test.ncols()
            )));
        }
        let xs_train = self.scaler.apply(&self.x_train)?;
        let xs_test = self.scaler.apply(x_test)?;
        let k_prime = kernel::cross_gram(&xs_train, &xs_test, self.sigma)?;
        let sim = svm::reciprocal_nn(&xs_train, &xs_test)?;
        let f_prime = svm::extend_f(self.adaptive.as_matrix(), &sim)?;
        let d = &self.alpha_hat - &self.alpha_check;
        self.unscale(svm::expansion(&d, &f_prime, &k_prime.matrix, self.bias))
    }

    /// Training-point predictions from `F` and `K` directly.
    pub fn in_sample(&self) -> Result<DVector<f64>> {
        let xs = self.scaler.apply(&self.x_train)?;
        let k = gaussian_gram(&xs, self.sigma)?;
        let d = &self.alpha_hat - &self.alpha_check;
        self.unscale(hadamard_apply(self.adaptive.as_matrix(), k.as_matrix(), &d).add_scalar(self.bias))
    }
}

/// Exact projection onto the regression feasible set, exposed for tests.
pub fn project_pair(x_hat: &DVector<f64>, x_check: &DVector<f64>, c: f64) -> SvrDualState {
    let n = x_hat.len();
    let stacked = DVector::from_fn(2 * n, |i, _| if i < n { x_hat[i] } else { x_check[i - n] });
    let signs = DVector::from_fn(2 * n, |i, _| if i < n { 1.0 } else { -1.0 });
    SvrDualState::from_stacked(&projection::project_exact(&stacked, &signs, c), 0.0)
}
