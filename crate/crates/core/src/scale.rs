//! Block-decomposed training for larger sets.
//!
//! The data are split by k-means, each cluster is solved on its own (box
//! constraint only, no bias and no nuclear-norm term), and the block
//! solutions are stitched into an approximation of the whole problem. The
//! quantities that control the approximation error are computed alongside.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{DankError, Result};
use crate::kernel::{self, GramMatrix};
use crate::solver::{self, hadamard_apply, AdaptiveMatrix, DualState, SolverConfig, SvmProblem, SvmSolution};

/// Cluster index per sample, with every cluster non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, v: usize) -> Result<Self> {
        let mut sizes = vec![0; v];
        for &a in &assignment {
            if a >= v {
                return Err(DankError::Parameter(format!("cluster index {a} out of range for {v} clusters")));
            }
            sizes[a] += 1;
        }
        if let Some(c) = sizes.iter().position(|&s| s == 0) {
            return Err(DankError::Parameter(format!("cluster {c} is empty")));
        }
        Ok(Partition { assignment, sizes })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_clusters(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Member indices of every cluster, ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (i, &a) in self.assignment.iter().enumerate() {
            out[a].push(i);
        }
        out
    }

    pub fn same(&self, i: usize, j: usize) -> bool {
        self.assignment[i] == self.assignment[j]
    }
}

fn sq_dist_to(x: &DMatrix<f64>, i: usize, c: &DMatrix<f64>, k: usize) -> f64 {
    kernel::row_sq_dist(x, i, c, k)
}

fn nearest(x: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for k in 0..centers.nrows() {
        let d = sq_dist_to(x, i, centers, k);
        if d < best.1 {
            best = (k, d);
        }
    }
    best.0
}

/// Lloyd's k-means from k-means++ seeding: at most 100 rounds, stopping
/// early once no centre moves by more than `1e-8`. A cluster that empties
/// takes the point of the largest cluster farthest from its centre.
pub fn kmeans_partition(x: &DMatrix<f64>, v: usize, seed: u64) -> Result<Partition> {
    let n = x.nrows();
    if v == 0 || v > n {
        return Err(DankError::Parameter(format!("need 1 <= clusters <= n = {n}, got {v}")));
    }
    let d = x.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centers = DMatrix::zeros(v, d);
    centers.row_mut(0).copy_from(&x.row(rng.random_range(0..n)));
    let mut dist: Vec<f64> = (0..n).map(|i| sq_dist_to(x, i, &centers, 0)).collect();
    for k in 1..v {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random_range(0.0..total);
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &di) in dist.iter().enumerate() {
                acc += di;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(k).copy_from(&x.row(pick));
        for (i, di) in dist.iter_mut().enumerate() {
            *di = di.min(sq_dist_to(x, i, &centers, k));
        }
    }

    let mut assignment = vec![0usize; n];
    for _ in 0..100 {
        for (i, a) in assignment.iter_mut().enumerate() {
            *a = nearest(x, i, &centers);
        }
        repair_empty(x, &mut assignment, &centers, v);
        let mut next = DMatrix::zeros(v, d);
        let mut counts = vec![0usize; v];
        for (i, &a) in assignment.iter().enumerate() {
            counts[a] += 1;
            let mut row = next.row_mut(a);
            row += x.row(i);
        }
        for k in 0..v {
            let mut row = next.row_mut(k);
            row /= counts[k] as f64;
        }
        let shift = (0..v)
            .map(|k| (next.row(k) - centers.row(k)).norm())
            .fold(0.0, f64::max);
        centers = next;
        if shift < 1e-8 {
            break;
        }
    }
    for (i, a) in assignment.iter_mut().enumerate() {
        *a = nearest(x, i, &centers);
    }
    repair_empty(x, &mut assignment, &centers, v);
    Partition::new(assignment, v)
}

fn repair_empty(x: &DMatrix<f64>, assignment: &mut [usize], centers: &DMatrix<f64>, v: usize) {
    loop {
        let mut sizes = vec![0usize; v];
        for &a in assignment.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let largest = (0..v).max_by_key(|&k| (sizes[k], std::cmp::Reverse(k))).unwrap_or(0);
        let far = (0..assignment.len())
            .filter(|&i| assignment[i] == largest)
            .max_by(|&a, &b| {
                sq_dist_to(x, a, centers, largest)
                    .total_cmp(&sq_dist_to(x, b, centers, largest))
                    .then(b.cmp(&a))
            })
            .expect("largest cluster has members");
        assignment[far] = empty;
    }
}

/// One solved cluster.
#[derive(Debug, Clone)]
pub struct Block {
    pub indices: Vec<usize>,
    pub alpha: DVector<f64>,
    pub adaptive: AdaptiveMatrix,
    pub iterations: usize,
    pub objective: f64,
    pub single_class: bool,
}

/// Concatenated block solutions.
#[derive(Debug, Clone)]
pub struct BlockSolution {
    /// Dual variables in the original sample order.
    pub alpha: DVector<f64>,
    pub blocks: Vec<Block>,
    /// Sum of the block objectives.
    pub objective: f64,
    pub single_class_blocks: usize,
    pub warnings: Vec<String>,
}

impl BlockSolution {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    fn assemble(&self, off_block: f64) -> DMatrix<f64> {
        let n = self.len();
        let mut f = DMatrix::from_element(n, n, off_block);
        for b in &self.blocks {
            let fb = b.adaptive.as_matrix();
            for (p, &i) in b.indices.iter().enumerate() {
                for (q, &j) in b.indices.iter().enumerate() {
                    f[(i, j)] = fb[(p, q)];
                }
            }
        }
        f
    }

    /// `F-bar` with off-block entries set to 1, the value they take at the
    /// optimum of the block-diagonal problem.
    pub fn f_bar_with_ones(&self) -> DMatrix<f64> {
        self.assemble(1.0)
    }

    /// Entries of `F-bar` inside the blocks.
    pub fn block_entries(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flat_map(|b| b.adaptive.as_matrix().iter().copied())
    }
}

/// Solves every cluster independently (in parallel) with the box constraint
/// only and `tau = 0`. Clusters holding one class are solved like the rest
/// and counted in `single_class_blocks`.
pub fn solve_blocks(
    k: &GramMatrix,
    y: &DVector<f64>,
    partition: &Partition,
    config: &SolverConfig,
    frozen: bool,
) -> Result<BlockSolution> {
    if partition.len() != y.len() || k.order() != y.len() {
        return Err(DankError::Shape(format!(
            "partition of {} points, {} labels, kernel of order {}",
            partition.len(),
            y.len(),
            k.order()
        )));
    }
    let mut cfg = config.clone();
    cfg.tau = 0.0;
    let clusters = partition.clusters();
    let blocks: Vec<Block> = clusters
        .into_par_iter()
        .map(|idx| -> Result<Block> {
            let sub_k = k.submatrix(&idx);
            let sub_y = DVector::from_iterator(idx.len(), idx.iter().map(|&i| y[i]));
            let pos = sub_y.iter().filter(|&&v| v > 0.0).count();
            let mut problem = SvmProblem::new(&sub_k, &sub_y)?.box_only();
            if frozen {
                problem = problem.frozen();
            }
            let sol = solver::solve(problem, &cfg)?;
            Ok(Block {
                single_class: pos == 0 || pos == idx.len(),
                indices: idx,
                alpha: sol.state.alpha,
                adaptive: sol.adaptive,
                iterations: sol.trace.iterations,
                objective: sol.trace.final_objective,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut alpha = DVector::zeros(y.len());
    for b in &blocks {
        for (p, &i) in b.indices.iter().enumerate() {
            alpha[i] = b.alpha[p];
        }
    }
    let single_class_blocks = blocks.iter().filter(|b| b.single_class).count();
    let mut warnings = Vec::new();
    if single_class_blocks > 0 {
        warnings.push(format!("{single_class_blocks} cluster(s) contain a single class"));
    }
    Ok(BlockSolution {
        alpha,
        objective: blocks.iter().map(|b| b.objective).sum(),
        blocks,
        single_class_blocks,
        warnings,
    })
}

/// The whole problem in the form the blocks approximate: box constraint,
/// no bias, `tau = 0`.
pub fn solve_whole(k: &GramMatrix, y: &DVector<f64>, config: &SolverConfig) -> Result<SvmSolution> {
    let mut cfg = config.clone();
    cfg.tau = 0.0;
    solver::solve(SvmProblem::new(k, y)?.box_only(), &cfg)
}

/// `K-bar`: `K` with cross-cluster entries zeroed.
pub fn block_kernel(k: &GramMatrix, partition: &Partition) -> Result<GramMatrix> {
    let km = k.as_matrix();
    let n = k.order();
    GramMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| {
        if partition.same(i, j) {
            km[(i, j)]
        } else {
            0.0
        }
    }))
}

/// `Q(pi)`: total `|K_ij|` over pairs in different clusters.
pub fn q_pi(k: &GramMatrix, partition: &Partition) -> f64 {
    let km = k.as_matrix();
    let n = k.order();
    let mut q = 0.0;
    for j in 0..n {
        for i in 0..n {
            if !partition.same(i, j) {
                q += km[(i, j)].abs();
            }
        }
    }
    q
}

/// `H(alpha, F) = 1^T alpha - 1/2 alpha^T Y (F ⊙ K) Y alpha + eta |F - 11^T|_F^2`
/// for a dense `F`.
pub fn saddle_value_dense(
    alpha: &DVector<f64>,
    y: &DVector<f64>,
    f: &DMatrix<f64>,
    k: &DMatrix<f64>,
    eta: f64,
) -> f64 {
    let w = alpha.component_mul(y);
    let q = hadamard_apply(f, k, &w);
    let penalty: f64 = f.iter().map(|v| (v - 1.0).powi(2)).sum();
    alpha.sum() - 0.5 * w.dot(&q) + eta * penalty
}

/// Non-support-vector screening results.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Screening {
    /// Indices meeting `grad_i <= -(B + B2) C (|K-bar_i|_1 + kappa)`.
    pub strict: Vec<usize>,
    /// Indices meeting the same test with a positive right-hand side.
    pub relaxed: Vec<usize>,
    /// Candidates considered (`alpha-bar_i = 0`).
    pub candidates: usize,
}

/// Screens samples with `alpha-bar_i = 0` using the block gradient
/// `1 - sum_j y_i y_j F-bar_ij K-bar_ij alpha-bar_j`.
pub fn screen_nonsupport(
    approx: &BlockSolution,
    k: &GramMatrix,
    y: &DVector<f64>,
    b: f64,
    b2: f64,
    c: f64,
    kappa: f64,
) -> Screening {
    let km = k.as_matrix();
    let mut out = Screening::default();
    for block in &approx.blocks {
        let w = DVector::from_iterator(block.indices.len(), block.indices.iter().map(|&i| approx.alpha[i] * y[i]));
        let sub_k = DMatrix::from_fn(block.indices.len(), block.indices.len(), |p, q| {
            km[(block.indices[p], block.indices[q])]
        });
        let q = hadamard_apply(block.adaptive.as_matrix(), &sub_k, &w);
        for (p, &i) in block.indices.iter().enumerate() {
            if approx.alpha[i] != 0.0 {
                continue;
            }
            out.candidates += 1;
            let grad = 1.0 - y[i] * q[p];
            let l1: f64 = sub_k.column(p).iter().map(|v| v.abs()).sum();
            let threshold = (b + b2) * c * (l1 + kappa);
            if grad <= -threshold {
                out.strict.push(i);
            }
            if grad <= threshold {
                out.relaxed.push(i);
            }
        }
    }
    out.strict.sort_unstable();
    out.relaxed.sort_unstable();
    out
}

/// Bounds on the decomposition error and, when an exact solution is
/// supplied, the measured errors.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub clusters: usize,
    pub q_pi: f64,
    pub b1: f64,
    pub b2: f64,
    pub b: f64,
    pub kappa: f64,
    /// `1/2 B C^2 Q`
    pub objective_gap_bound: f64,
    /// `B2 C^2 Q / (B1 |K|_F) + 2 B C^2 / B1`
    pub alpha_gap_bound: f64,
    pub f_gap_bound: f64,
    /// `n max(sqrt(B), B)`
    pub f_gap_exact_bound: f64,
    /// `|H(alpha*, F*) - H(alpha-bar, F-bar)|` on the full kernel.
    pub objective_gap: Option<f64>,
    /// `|H(alpha*, F*) - H-bar(alpha-bar, F-bar)|` on the block kernel.
    pub block_objective_gap: Option<f64>,
    pub alpha_gap: Option<f64>,
    pub f_gap: Option<f64>,
    pub screening: Screening,
    /// Screened indices with `alpha*_i > 1e-8`.
    pub strict_false_positives: Option<usize>,
    pub relaxed_false_positives: Option<usize>,
    /// Number of `alpha*_i <= 1e-8`.
    pub exact_nonsupport: Option<usize>,
    pub warnings: Vec<String>,
}

/// Computes `B1`, `B2`, `Q(pi)` and the bounds, plus measured gaps when
/// `exact` (a [`solve_whole`] result) is given.
///
/// `B1` and `B2` are the smallest and largest entries over `F*` and the
/// diagonal blocks of `F-bar`. Nonpositive entries break the bounds'
/// hypothesis; they are reported as a warning and `B1` falls back to the
/// smallest positive entry.
pub fn bound_report(
    exact: Option<&SvmSolution>,
    approx: &BlockSolution,
    k: &GramMatrix,
    y: &DVector<f64>,
    partition: &Partition,
    config: &SolverConfig,
    kappa: f64,
) -> Result<BoundReport> {
    let n = y.len();
    let c = config.c;
    let eta = config.eta;
    let mut entries: Vec<f64> = approx.block_entries().collect();
    if let Some(ex) = exact {
        entries.extend(ex.adaptive.as_matrix().iter().copied());
    }
    let mut warnings = Vec::new();
    let b2 = entries.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_entry = entries.iter().copied().fold(f64::INFINITY, f64::min);
    let b1 = if min_entry > 0.0 {
        min_entry
    } else {
        warnings.push(format!(
            "adaptive matrix has a nonpositive entry ({min_entry:.3e}); the bounds' hypothesis 0 < B1 fails"
        ));
        entries.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min)
    };
    let b = b2 - b1;
    let q = q_pi(k, partition);
    let kf = k.frobenius_sq().sqrt();
    let nf = n as f64;

    let objective_gap_bound = 0.5 * b * c * c * q;
    let alpha_gap_bound = b2 * c * c * q / (b1 * kf) + 2.0 * b * c * c / b1;
    let f_gap_bound =
        kf / (2.0 * eta) * (nf * b2 * q / (b1 * kf) + 2.0 * nf * b / b1).sqrt() * c * c + c * c * q / (4.0 * eta);
    let f_gap_exact_bound = nf * b.sqrt().max(b);

    let screening = screen_nonsupport(approx, k, y, b, b2, c, kappa);
    let f_bar = approx.f_bar_with_ones();

    let (mut objective_gap, mut block_objective_gap, mut alpha_gap, mut f_gap) = (None, None, None, None);
    let (mut sfp, mut rfp, mut nonsupport) = (None, None, None);
    if let Some(ex) = exact {
        let h_star = saddle_value_dense(&ex.state.alpha, y, ex.adaptive.as_matrix(), k.as_matrix(), eta);
        let h_bar_full = saddle_value_dense(&approx.alpha, y, &f_bar, k.as_matrix(), eta);
        objective_gap = Some((h_star - h_bar_full).abs());
        block_objective_gap = Some((h_star - approx.objective).abs());
        alpha_gap = Some((&ex.state.alpha - &approx.alpha).norm_squared());
        f_gap = Some((ex.adaptive.as_matrix() - &f_bar).norm());
        let is_sv = |i: &&usize| ex.state.alpha[**i] > 1e-8;
        sfp = Some(screening.strict.iter().filter(is_sv).count());
        rfp = Some(screening.relaxed.iter().filter(is_sv).count());
        nonsupport = Some(ex.state.alpha.iter().filter(|&&a| a <= 1e-8).count());
    }
    warnings.extend(approx.warnings.iter().cloned());

    Ok(BoundReport {
        clusters: partition.num_clusters(),
        q_pi: q,
        b1,
        b2,
        b,
        kappa,
        objective_gap_bound,
        alpha_gap_bound,
        f_gap_bound,
        f_gap_exact_bound,
        objective_gap,
        block_objective_gap,
        alpha_gap,
        f_gap,
        screening,
        strict_false_positives: sfp,
        relaxed_false_positives: rfp,
        exact_nonsupport: nonsupport,
        warnings,
    })
}

/// `DualState` view of a block solution, for evaluating it with solver tools.
pub fn as_dual_state(approx: &BlockSolution, y: &DVector<f64>) -> DualState {
    DualState {
        alpha: approx.alpha.clone(),
        labels: y.clone(),
    }
}
