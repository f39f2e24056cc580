//! Accelerated projected gradient ascent shared by the SVM and SVR duals.

use nalgebra::DVector;

use super::{AdaptiveMatrix, SolveTrace, Termination, Variant};
use crate::error::Result;

/// Value, gradient and inner minimizer of a dual objective at one point.
pub(crate) struct Evaluation {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub adaptive: AdaptiveMatrix,
}

/// A concave dual `h` maximized over a convex feasible set.
pub(crate) trait DualProblem {
    fn dim(&self) -> usize;
    fn evaluate(&self, x: &DVector<f64>) -> Result<Evaluation>;
    fn project(&self, x: &DVector<f64>) -> DVector<f64>;
    /// Distance between consecutive iterates used by the stopping rule.
    fn step_norm(&self, prev: &DVector<f64>, next: &DVector<f64>) -> f64 {
        (next - prev).norm()
    }
}

/// What an observer sees at the end of iteration `t`.
#[derive(Debug)]
pub struct IterationView<'a> {
    pub t: usize,
    /// The iterate the gradient was taken at.
    pub alpha: &'a DVector<f64>,
    pub gradient: &'a DVector<f64>,
    /// `h` at `alpha`.
    pub objective: f64,
    pub theta: &'a DVector<f64>,
    /// Dual-averaging point; `None` for plain projected gradient.
    pub beta: Option<&'a DVector<f64>>,
    pub next: &'a DVector<f64>,
}

pub(crate) type Observer<'o> = dyn FnMut(&IterationView<'_>) + 'o;

pub(crate) struct Ascent {
    pub x: DVector<f64>,
    pub last: Evaluation,
    pub trace: SolveTrace,
}

/// Runs from `x0` with ascent step `1/lipschitz` (and `1/(2 lipschitz)` for
/// the averaged sequence).
pub(crate) fn maximize<P: DualProblem>(
    problem: &P,
    x0: DVector<f64>,
    lipschitz: f64,
    variant: Variant,
    t_max: usize,
    tol: f64,
    mut observer: Option<&mut Observer<'_>>,
) -> Result<Ascent> {
    let mut trace = SolveTrace::default();
    let mut x = x0.clone();
    let mut weighted_grads = DVector::zeros(problem.dim());
    let mut theta_prev: Option<(DVector<f64>, f64)> = None;
    trace.terminated_by = Termination::MaxIter;

    for t in 0..t_max {
        let ev = problem.evaluate(&x)?;
        trace.objective_history.push(ev.value);

        let ascent = problem.project(&(&x + &ev.gradient / lipschitz));
        let (theta, beta) = match variant {
            Variant::Pgd => (ascent, None),
            Variant::Nesterov | Variant::MonotoneNesterov => {
                let theta = if variant == Variant::MonotoneNesterov {
                    let h_ascent = problem.evaluate(&ascent)?.value;
                    let mut best = (ascent, h_ascent);
                    if let Some((prev, h_prev)) = theta_prev.take() {
                        if h_prev > best.1 {
                            best = (prev, h_prev);
                        }
                    }
                    if ev.value > best.1 {
                        best = (x.clone(), ev.value);
                    }
                    trace.theta_objective_history.push(best.1);
                    theta_prev = Some(best.clone());
                    best.0
                } else {
                    ascent
                };
                weighted_grads.axpy((t + 1) as f64, &ev.gradient, 1.0);
                let beta = problem.project(&(&x0 + &weighted_grads / (2.0 * lipschitz)));
                (theta, Some(beta))
            }
        };

        let next = match &beta {
            None => theta.clone(),
            Some(b) => (&theta * (t + 1) as f64 + b * 2.0) / (t + 3) as f64,
        };
        let step = problem.step_norm(&x, &next);
        trace.alpha_step_history.push(step);
        trace.iterations = t + 1;

        if let Some(obs) = observer.as_deref_mut() {
            obs(&IterationView {
                t,
                alpha: &x,
                gradient: &ev.gradient,
                objective: ev.value,
                theta: &theta,
                beta: beta.as_ref(),
                next: &next,
            });
        }

        x = next;
        if step <= tol {
            trace.terminated_by = Termination::Tolerance;
            break;
        }
    }

    let last = problem.evaluate(&x)?;
    trace.final_objective = last.value;
    Ok(Ascent { x, last, trace })
}
