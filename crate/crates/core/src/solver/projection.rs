//! Projections onto `{a : y^T a = 0, 0 <= a <= C}` and onto the box alone.

use nalgebra::DVector;

/// How iterates are mapped back onto the feasible set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// Euclidean projection, solved exactly through the hyperplane multiplier.
    Exact,
    /// Alternating box clip / hyperplane shift, repeated `rounds` times and
    /// followed by a final clip.
    Alternating { rounds: usize },
}

impl Default for Projection {
    fn default() -> Self {
        Projection::Exact
    }
}

impl Projection {
    pub fn apply(&self, alpha: &DVector<f64>, y: &DVector<f64>, c: f64) -> DVector<f64> {
        match *self {
            Projection::Exact => project_exact(alpha, y, c),
            Projection::Alternating { rounds } => alternating(alpha, y, c, rounds),
        }
    }
}

/// Clips every coordinate to `[0, c]`.
pub fn clip_box(alpha: &DVector<f64>, c: f64) -> DVector<f64> {
    alpha.map(|a| a.clamp(0.0, c))
}

/// `rounds` alternations of (clip to `[0, c]`, then `a <- a - (y^T a / n) y`),
/// finished by one more clip so the box holds exactly.
///
/// This is a feasibility heuristic: it lands close to the hyperplane but is
/// not the Euclidean projection in general.
pub fn alternating(alpha: &DVector<f64>, y: &DVector<f64>, c: f64, rounds: usize) -> DVector<f64> {
    let n = alpha.len() as f64;
    let mut a = alpha.clone();
    for _ in 0..rounds.max(1) {
        a.apply(|v| *v = v.clamp(0.0, c));
        let shift = y.dot(&a) / n;
        a.axpy(-shift, y, 1.0);
    }
    a.apply(|v| *v = v.clamp(0.0, c));
    a
}

/// `sum_i y_i clip(alpha_i - mu y_i, 0, c)`, non-increasing in `mu` for `y_i = +-1`.
fn hyperplane_residual(alpha: &DVector<f64>, y: &DVector<f64>, c: f64, mu: f64) -> f64 {
    alpha
        .iter()
        .zip(y.iter())
        .map(|(&a, &yi)| yi * (a - mu * yi).clamp(0.0, c))
        .sum()
}

/// Exact Euclidean projection onto `{a : y^T a = 0, 0 <= a <= c}` for
/// labels in `{-1, +1}`.
///
/// The KKT conditions give `a = clip(alpha - mu y, 0, c)` for the scalar
/// multiplier `mu` that zeroes the hyperplane residual. The residual is
/// piecewise linear in `mu` with breakpoints at `alpha_i y_i` and
/// `(alpha_i - c) y_i`, so the root is found by bisection over the sorted
/// breakpoints followed by linear interpolation on the bracketing segment.
pub fn project_exact(alpha: &DVector<f64>, y: &DVector<f64>, c: f64) -> DVector<f64> {
    let mut breaks: Vec<f64> = alpha
        .iter()
        .zip(y.iter())
        .flat_map(|(&a, &yi)| [a * yi, (a - c) * yi])
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let resid = |mu: f64| hyperplane_residual(alpha, y, c, mu);
    // resid(lowest) >= 0 >= resid(highest)
    let (mut lo, mut hi) = (0usize, breaks.len() - 1);
    if resid(breaks[lo]) <= 0.0 {
        return clamp_shift(alpha, y, c, breaks[lo]);
    }
    if resid(breaks[hi]) >= 0.0 {
        return clamp_shift(alpha, y, c, breaks[hi]);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if resid(breaks[mid]) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (m0, m1) = (breaks[lo], breaks[hi]);
    let (r0, r1) = (resid(m0), resid(m1));
    let mu = if r0 == r1 { m0 } else { m0 + r0 * (m1 - m0) / (r0 - r1) };
    clamp_shift(alpha, y, c, mu)
}

fn clamp_shift(alpha: &DVector<f64>, y: &DVector<f64>, c: f64, mu: f64) -> DVector<f64> {
    alpha.zip_map(y, |a, yi| (a - mu * yi).clamp(0.0, c))
}
