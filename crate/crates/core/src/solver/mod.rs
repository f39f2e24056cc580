//! Saddle-point solver for kernel learning inside the SVM dual.
//!
//! For a fixed dual vector the optimal adaptive matrix has a closed form
//! (a spectral soft-threshold of `11^T + Gamma(alpha)`), so the outer problem
//! is the concave maximization of `h(alpha) = H(alpha, F(alpha))`, solved
//! here by accelerated projected gradient ascent.

mod engine;
pub mod projection;

use nalgebra::{DMatrix, DVector};

use crate::error::{DankError, Result};
use crate::kernel::GramMatrix;
use crate::linalg::{self, SymMatrix};

pub use engine::IterationView;
pub(crate) use engine::{maximize, DualProblem, Evaluation, Observer};
pub use projection::Projection;

/// How the step constant `L` is chosen when none is given explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// The closed-form constants [`lipschitz_svm`] and [`lipschitz_pgd`].
    /// They are valid but loose by orders of magnitude on dense kernels.
    #[default]
    Theory,
    /// [`lipschitz_tight`], a sharper bound that is still valid everywhere
    /// on the feasible set.
    Tight,
}

impl std::str::FromStr for StepRule {
    type Err = DankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory" => Ok(StepRule::Theory),
            "tight" => Ok(StepRule::Tight),
            other => Err(DankError::Config(format!("unknown step rule '{other}' (expected theory or tight)"))),
        }
    }
}

/// Update rule for the outer maximization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Nesterov acceleration with a dual-averaging sequence.
    #[default]
    Nesterov,
    /// Plain projected gradient ascent.
    Pgd,
    /// Nesterov with the gradient point replaced by the best of the previous
    /// gradient point, the new one and the current iterate.
    MonotoneNesterov,
}

impl std::str::FromStr for Variant {
    type Err = DankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nesterov" => Ok(Variant::Nesterov),
            "pgd" => Ok(Variant::Pgd),
            "monotone" | "monotone-nesterov" => Ok(Variant::MonotoneNesterov),
            other => Err(DankError::Config(format!(
                "unknown solver variant '{other}' (expected nesterov, pgd or monotone-nesterov)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Box bound on the dual variables.
    pub c: f64,
    /// Nuclear-norm weight.
    pub tau: f64,
    /// Weight of the Frobenius penalty `|F - 11^T|_F^2`.
    pub eta: f64,
    pub t_max: usize,
    /// Stop once consecutive iterates are this close; zero disables the test.
    pub tol: f64,
    pub projection: Projection,
    pub variant: Variant,
    pub step: StepRule,
}

impl SolverConfig {
    pub fn new(c: f64, tau: f64, eta: f64) -> Self {
        SolverConfig {
            c,
            tau,
            eta,
            t_max: 2000,
            tol: 1e-4,
            projection: Projection::Exact,
            variant: Variant::Nesterov,
            step: StepRule::Theory,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(DankError::Parameter(format!("{what} = {v}")));
        if !(self.c > 0.0) || !self.c.is_finite() {
            return bad("C must be positive and finite, got C", self.c);
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return bad("eta must be positive and finite, got eta", self.eta);
        }
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return bad("tau must be nonnegative and finite, got tau", self.tau);
        }
        if !(self.tol >= 0.0) || !self.tol.is_finite() {
            return bad("tol must be nonnegative, got tol", self.tol);
        }
        if self.t_max == 0 {
            return Err(DankError::Parameter("t_max must be at least 1".into()));
        }
        if let Projection::Alternating { rounds: 0 } = self.projection {
            return Err(DankError::Parameter("projection rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// Checks that every label is exactly `+1` or `-1`.
pub(crate) fn check_labels(y: &DVector<f64>) -> Result<()> {
    if let Some(i) = y.iter().position(|&v| v != 1.0 && v != -1.0) {
        return Err(DankError::Data(format!(
            "label {} at position {} is not +1 or -1",
            y[i],
            i + 1
        )));
    }
    Ok(())
}

/// Dual variables with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub alpha: DVector<f64>,
    pub labels: DVector<f64>,
}

impl DualState {
    pub fn new(alpha: DVector<f64>, labels: DVector<f64>) -> Result<Self> {
        if alpha.len() != labels.len() {
            return Err(DankError::Shape(format!(
                "{} dual variables but {} labels",
                alpha.len(),
                labels.len()
            )));
        }
        check_labels(&labels)?;
        Ok(DualState { alpha, labels })
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `alpha ⊙ y`
    pub fn weights(&self) -> DVector<f64> {
        self.alpha.component_mul(&self.labels)
    }

    /// Box holds exactly and `|alpha^T y| <= 1e-6 max(1, |alpha|)`.
    pub fn is_feasible(&self, c: f64) -> bool {
        self.in_box(c) && self.hyperplane_residual() <= 1e-6 * self.alpha.norm().max(1.0)
    }

    pub fn in_box(&self, c: f64) -> bool {
        self.alpha.iter().all(|&a| (0.0..=c).contains(&a))
    }

    pub fn hyperplane_residual(&self) -> f64 {
        self.alpha.dot(&self.labels).abs()
    }
}

/// The learned kernel reweighting `F`, with its nuclear norm.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveMatrix {
    matrix: SymMatrix,
    nuclear: f64,
}

impl AdaptiveMatrix {
    /// The all-ones matrix, i.e. no adaptation.
    pub fn ones(n: usize) -> Self {
        AdaptiveMatrix {
            matrix: SymMatrix::ones(n),
            nuclear: n as f64,
        }
    }

    /// Wraps an arbitrary symmetric matrix, computing its nuclear norm.
    pub fn from_sym(matrix: SymMatrix) -> Result<Self> {
        let nuclear = linalg::sym_eig(&matrix)?.values.iter().map(|v| v.abs()).sum();
        Ok(AdaptiveMatrix { matrix, nuclear })
    }

    /// Reassembles a matrix whose nuclear norm is already known, e.g. one
    /// read back from a model file.
    pub fn from_parts(matrix: SymMatrix, nuclear: f64) -> Self {
        AdaptiveMatrix { matrix, nuclear }
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        self.matrix.as_matrix()
    }

    pub fn into_sym(self) -> SymMatrix {
        self.matrix
    }

    pub fn nuclear_norm(&self) -> f64 {
        self.nuclear
    }

    /// `|F - 11^T|_F^2`
    pub fn distance_to_ones_sq(&self) -> f64 {
        self.as_matrix().iter().map(|&f| (f - 1.0).powi(2)).sum()
    }
}

/// What was learned by one solve, and how the solve went.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Termination {
    Tolerance,
    #[default]
    MaxIter,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub iterations: usize,
    /// `h` at the iterate each gradient was taken at, one per iteration.
    pub objective_history: Vec<f64>,
    /// `h` at the gradient point chosen by the monotone variant; empty otherwise.
    pub theta_objective_history: Vec<f64>,
    pub alpha_step_history: Vec<f64>,
    /// `h` at the returned iterate.
    pub final_objective: f64,
    pub terminated_by: Termination,
    pub warnings: Vec<String>,
}

/// `Gamma = diag(w) K diag(w) / (4 eta)` for a weight vector `w`.
pub(crate) fn gamma_weighted(w: &DVector<f64>, k: &GramMatrix, eta: f64) -> SymMatrix {
    let km = k.as_matrix();
    let s = 1.0 / (4.0 * eta);
    SymMatrix::from_lower_fn(w.len(), |i, j| s * w[i] * km[(i, j)] * w[j])
}

/// `F = svt(11^T + Gamma(w), tau / 2)`.
///
/// With `tau = 0` no shrinkage happens and the eigendecomposition is
/// skipped; `11^T + Gamma` is PSD for PSD `K`, so its nuclear norm is its
/// trace.
pub(crate) fn adaptive_from_weights(
    w: &DVector<f64>,
    k: &GramMatrix,
    tau: f64,
    eta: f64,
) -> Result<AdaptiveMatrix> {
    let km = k.as_matrix();
    let s = 1.0 / (4.0 * eta);
    let m = SymMatrix::from_lower_fn(w.len(), |i, j| 1.0 + s * w[i] * km[(i, j)] * w[j]);
    if tau == 0.0 {
        let nuclear = m.as_matrix().trace();
        return Ok(AdaptiveMatrix { matrix: m, nuclear });
    }
    let shrunk = linalg::svt_spectrum(&m, tau / 2.0)?;
    let nuclear = shrunk.nuclear_norm();
    Ok(AdaptiveMatrix {
        matrix: shrunk.matrix,
        nuclear,
    })
}

/// `(F ⊙ K) w` without forming the Hadamard product.
pub(crate) fn hadamard_apply(f: &DMatrix<f64>, k: &DMatrix<f64>, w: &DVector<f64>) -> DVector<f64> {
    let n = w.len();
    let mut out = DVector::zeros(n);
    for j in 0..n {
        let wj = w[j];
        if wj == 0.0 {
            continue;
        }
        let fc = f.column(j);
        let kc = k.column(j);
        for i in 0..n {
            out[i] += fc[i] * kc[i] * wj;
        }
    }
    out
}

fn check_order(n: usize, k: &GramMatrix) -> Result<()> {
    if k.order() != n {
        return Err(DankError::Shape(format!(
            "kernel is {0}x{0} but there are {n} dual variables",
            k.order()
        )));
    }
    Ok(())
}

/// `Gamma(alpha) = diag(alpha ⊙ y) K diag(alpha ⊙ y) / (4 eta)`.
pub fn gamma(state: &DualState, k: &GramMatrix, eta: f64) -> Result<SymMatrix> {
    check_order(state.len(), k)?;
    Ok(gamma_weighted(&state.weights(), k, eta))
}

/// Closed-form inner minimizer `F(alpha)`.
pub fn f_of_alpha(state: &DualState, k: &GramMatrix, config: &SolverConfig) -> Result<AdaptiveMatrix> {
    check_order(state.len(), k)?;
    adaptive_from_weights(&state.weights(), k, config.tau, config.eta)
}

/// `H(alpha, F)` for an arbitrary symmetric `F`.
pub fn saddle_value(state: &DualState, f: &AdaptiveMatrix, k: &GramMatrix, config: &SolverConfig) -> Result<f64> {
    check_order(state.len(), k)?;
    check_order(f.order(), k)?;
    let w = state.weights();
    let q = hadamard_apply(f.as_matrix(), k.as_matrix(), &w);
    Ok(state.alpha.sum() - 0.5 * w.dot(&q)
        + config.eta * f.distance_to_ones_sq()
        + config.tau * config.eta * f.nuclear_norm())
}

/// `h(alpha) = H(alpha, F(alpha))`.
pub fn objective_h(state: &DualState, k: &GramMatrix, config: &SolverConfig) -> Result<f64> {
    Ok(SvmDual::for_state(state, k, config).evaluate(&state.alpha)?.value)
}

/// `grad h(alpha) = 1 - Y (F(alpha) ⊙ K) Y alpha`.
pub fn grad_h(state: &DualState, k: &GramMatrix, config: &SolverConfig) -> Result<DVector<f64>> {
    Ok(SvmDual::for_state(state, k, config).evaluate(&state.alpha)?.gradient)
}

/// Gradient Lipschitz constant of `h`: `n + 3 n C^2 |K|_F^2 / (4 eta)`.
pub fn lipschitz_svm(n: usize, c: f64, k: &GramMatrix, eta: f64) -> f64 {
    let n = n as f64;
    n + 3.0 * n * c * c * k.frobenius_sq() / (4.0 * eta)
}

/// A sharper gradient Lipschitz constant of `h`, valid for any `tau >= 0`:
/// `lambda_max(K) (1 + C^2 k / (4 eta)) + C^2 r / (2 eta)`, where `k` is the
/// largest diagonal entry of `K` and `r` the largest row sum of `K ⊙ K`.
///
/// It follows from `F(alpha) ⪯ 11^T + Gamma(alpha)`, which bounds the
/// curvature at a fixed `F`, and from the soft-threshold being nonexpansive,
/// which bounds how fast `F(alpha)` moves.
pub fn lipschitz_tight(c: f64, k: &GramMatrix, eta: f64) -> Result<f64> {
    let km = k.as_matrix();
    let diag = km.diagonal().max();
    let rows = km.row_iter().map(|r| r.iter().map(|v| v * v).sum::<f64>()).fold(0.0, f64::max);
    let lmax = linalg::lambda_max(k.as_sym())?;
    Ok(lmax * (1.0 + c * c * diag / (4.0 * eta)) + c * c * rows / (2.0 * eta))
}

/// Step constant for plain projected gradient:
/// `n - tau/2 + n C^2 lambda_max(K) / (4 eta)`.
pub fn lipschitz_pgd(n: usize, c: f64, k: &GramMatrix, eta: f64, tau: f64) -> Result<f64> {
    let n = n as f64;
    Ok(n - tau / 2.0 + n * c * c * linalg::lambda_max(k.as_sym())? / (4.0 * eta))
}

/// Upper bound `8 L |alpha0 - alpha*|^2 / ((t+1)(t+2))` on the gap
/// `h(alpha*) - h(beta_t)`.
pub fn convergence_bound(lipschitz: f64, alpha0: &DVector<f64>, alpha_star: &DVector<f64>, t: usize) -> f64 {
    let t = t as f64;
    8.0 * lipschitz * (alpha0 - alpha_star).norm_squared() / ((t + 1.0) * (t + 2.0))
}

/// Alternating clip / hyperplane projection run for a fixed number of rounds.
pub fn project_feasible(alpha: &DVector<f64>, y: &DVector<f64>, c: f64, rounds: usize) -> Result<DualState> {
    if rounds == 0 {
        return Err(DankError::Parameter("projection rounds must be at least 1".into()));
    }
    DualState::new(projection::alternating(alpha, y, c, rounds), y.clone())
}

/// The SVM dual as a [`DualProblem`].
pub(crate) struct SvmDual<'a> {
    pub kernel: &'a GramMatrix,
    pub labels: &'a DVector<f64>,
    pub c: f64,
    pub tau: f64,
    pub eta: f64,
    pub frozen: bool,
    pub box_only: bool,
    pub projection: Projection,
}

impl<'a> SvmDual<'a> {
    fn for_state(state: &'a DualState, k: &'a GramMatrix, config: &SolverConfig) -> Self {
        SvmDual {
            kernel: k,
            labels: &state.labels,
            c: config.c,
            tau: config.tau,
            eta: config.eta,
            frozen: false,
            box_only: false,
            projection: config.projection,
        }
    }
}

impl DualProblem for SvmDual<'_> {
    fn dim(&self) -> usize {
        self.labels.len()
    }

    fn evaluate(&self, alpha: &DVector<f64>) -> Result<Evaluation> {
        check_order(alpha.len(), self.kernel)?;
        let w = alpha.component_mul(self.labels);
        let n = w.len();
        let (adaptive, q) = if self.frozen {
            (AdaptiveMatrix::ones(n), self.kernel.as_matrix() * &w)
        } else {
            let f = adaptive_from_weights(&w, self.kernel, self.tau, self.eta)?;
            let q = hadamard_apply(f.as_matrix(), self.kernel.as_matrix(), &w);
            (f, q)
        };
        let value = alpha.sum() - 0.5 * w.dot(&q)
            + self.eta * adaptive.distance_to_ones_sq()
            + self.tau * self.eta * adaptive.nuclear_norm();
        let gradient = DVector::from_fn(n, |i, _| 1.0 - self.labels[i] * q[i]);
        Ok(Evaluation {
            value,
            gradient,
            adaptive,
        })
    }

    fn project(&self, alpha: &DVector<f64>) -> DVector<f64> {
        if self.box_only {
            projection::clip_box(alpha, self.c)
        } else {
            self.projection.apply(alpha, self.labels, self.c)
        }
    }
}

/// Kernel and labels of one SVM training problem.
#[derive(Debug, Clone, Copy)]
pub struct SvmProblem<'a> {
    kernel: &'a GramMatrix,
    labels: &'a DVector<f64>,
    frozen: bool,
    box_only: bool,
}

impl<'a> SvmProblem<'a> {
    pub fn new(kernel: &'a GramMatrix, labels: &'a DVector<f64>) -> Result<Self> {
        check_order(labels.len(), kernel)?;
        check_labels(labels)?;
        Ok(SvmProblem {
            kernel,
            labels,
            frozen: false,
            box_only: false,
        })
    }

    /// Keep `F = 11^T` fixed, which gives the standard SVM dual.
    pub fn frozen(mut self) -> Self {
        self.frozen = true;
        self
    }

    /// Drop the equality constraint and keep only `0 <= alpha <= C`.
    pub fn box_only(mut self) -> Self {
        self.box_only = true;
        self
    }

    pub fn kernel(&self) -> &'a GramMatrix {
        self.kernel
    }

    pub fn labels(&self) -> &'a DVector<f64> {
        self.labels
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Step constant used when none is given. Under [`StepRule::Theory`] it
    /// is the variant's closed-form constant, or `|K|_F >= lambda_max(K)` for
    /// the frozen problem; under [`StepRule::Tight`] it is
    /// [`lipschitz_tight`], or `lambda_max(K)` when frozen.
    pub fn default_lipschitz(&self, config: &SolverConfig) -> Result<f64> {
        let n = self.labels.len();
        match (config.step, self.frozen) {
            (StepRule::Theory, true) => return Ok(self.kernel.frobenius_sq().sqrt()),
            (StepRule::Tight, true) => return Ok(linalg::lambda_max(self.kernel.as_sym())?.max(f64::MIN_POSITIVE)),
            (StepRule::Tight, false) => return lipschitz_tight(config.c, self.kernel, config.eta),
            (StepRule::Theory, false) => {}
        }
        match config.variant {
            Variant::Pgd => lipschitz_pgd(n, config.c, self.kernel, config.eta, config.tau),
            _ => Ok(lipschitz_svm(n, config.c, self.kernel, config.eta)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvmSolution {
    pub state: DualState,
    pub adaptive: AdaptiveMatrix,
    pub trace: SolveTrace,
    /// Step constant the run used.
    pub lipschitz: f64,
}

/// Configurable runner; [`solve`] covers the common case.
pub struct Solver<'a, 'o> {
    problem: SvmProblem<'a>,
    config: SolverConfig,
    lipschitz: Option<f64>,
    observer: Option<&'o mut Observer<'o>>,
}

impl<'a, 'o> Solver<'a, 'o> {
    pub fn new(problem: SvmProblem<'a>, config: SolverConfig) -> Self {
        Solver {
            problem,
            config,
            lipschitz: None,
            observer: None,
        }
    }

    /// Override the step constant.
    pub fn lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    /// Called once per iteration with the iterates of that iteration.
    pub fn observe(mut self, f: &'o mut (dyn FnMut(&IterationView<'_>) + 'o)) -> Self {
        self.observer = Some(f);
        self
    }

    pub fn run(self) -> Result<SvmSolution> {
        let Solver {
            problem,
            config,
            lipschitz,
            observer,
        } = self;
        config.validate()?;
        let n = problem.labels.len();
        if !problem.box_only {
            let pos = problem.labels.iter().filter(|&&v| v > 0.0).count();
            if pos == 0 || pos == n {
                return Err(DankError::Config(
                    "training labels contain a single class; both +1 and -1 are required".into(),
                ));
            }
        }
        let lipschitz = match lipschitz {
            Some(l) if l > 0.0 && l.is_finite() => l,
            Some(l) => return Err(DankError::Parameter(format!("step constant must be positive, got {l}"))),
            None => problem.default_lipschitz(&config)?,
        };
        let dual = SvmDual {
            kernel: problem.kernel,
            labels: problem.labels,
            c: config.c,
            tau: config.tau,
            eta: config.eta,
            frozen: problem.frozen,
            box_only: problem.box_only,
            projection: config.projection,
        };
        let run = maximize(
            &dual,
            DVector::zeros(n),
            lipschitz,
            config.variant,
            config.t_max,
            config.tol,
            observer,
        )?;
        let mut trace = run.trace;
        if !problem.frozen && config.tau >= 2.0 * n as f64 {
            trace.warnings.push(format!(
                "tau = {} is at least 2n = {}; the adaptive matrix may collapse to zero",
                config.tau,
                2 * n
            ));
        }
        Ok(SvmSolution {
            state: DualState {
                alpha: run.x,
                labels: problem.labels.clone(),
            },
            adaptive: run.last.adaptive,
            trace,
            lipschitz,
        })
    }
}

/// Solves the SVM saddle problem from `alpha = 0`.
pub fn solve(problem: SvmProblem<'_>, config: &SolverConfig) -> Result<SvmSolution> {
    Solver::new(problem, config.clone()).run()
}
