//! Wasserstein and Lévy–Prokhorov distances between finitely supported
//! measures.
//!
//! Two ground spaces are supported: the real line (absolute-difference
//! metric, exact distances through the quantile coupling) and discretized
//! paths on `[0,1]` (supremum metric, exact distances through an assignment
//! solver on the cost matrix). An entropic solver is available as a scalable
//! approximation; it never replaces the exact solver in any check that pins
//! a tolerance.

pub mod assignment;
pub mod one_dim;
pub mod paths;
pub mod prokhorov;
pub mod sinkhorn;

pub use assignment::solve_assignment;
pub use one_dim::{wasserstein_1d, wasserstein_1d_vs_gaussian};
pub use paths::{flip_path, sup_distance, wasserstein_paths, PathGrid};
pub use prokhorov::{levy_prokhorov, subset_violation, LpResult};
pub use sinkhorn::{sinkhorn, SinkhornPlan};

use crate::rng::compensated_sum;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("Wasserstein order must satisfy q >= 1, got {0}")]
    InvalidOrder(f64),
    #[error("weights must be nonnegative, found {0}")]
    NegativeWeight(f64),
    #[error("weights must sum to 1 within 1e-12, off by {0:e}")]
    WeightSum(f64),
    #[error("points ({points}) and weights ({weights}) differ in length")]
    LengthMismatch { points: usize, weights: usize },
    #[error("measure must have at least one atom")]
    Empty,
    #[error("cost matrix must be square for the assignment solver, got {rows}x{cols}")]
    NonSquareCost { rows: usize, cols: usize },
    #[error("cost matrix entries must be finite and nonnegative")]
    InvalidCost,
    #[error("variance must be nonnegative, got {0}")]
    NegativeVariance(f64),
    #[error("entropic regularization must be positive, got {0}")]
    InvalidRegularization(f64),
    #[error(
        "Sinkhorn did not reach marginal tolerance {tol:e} within {iterations} iterations \
         (achieved {achieved:e})"
    )]
    SinkhornNotConverged {
        tol: f64,
        iterations: usize,
        achieved: f64,
    },
    #[error("path grids must match: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("path sample counts must match: {0} vs {1}")]
    CountMismatch(usize, usize),
    #[error("combined support size {0} exceeds the exhaustive Lévy–Prokhorov limit of {1}")]
    SupportTooLarge(usize, usize),
}

/// Ground metric for atoms of an empirical measure.
pub trait MetricPoint {
    fn distance(&self, other: &Self) -> f64;
}

impl MetricPoint for f64 {
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

/// A finitely supported probability measure: weighted atoms in a metric
/// space.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure<P> {
    points: Vec<P>,
    weights: Vec<f64>,
}

impl<P> EmpiricalMeasure<P> {
    /// Tolerance on `|Σ weights − 1|`.
    pub const WEIGHT_TOL: f64 = 1e-12;

    pub fn new(points: Vec<P>, weights: Vec<f64>) -> Result<Self, TransportError> {
        if points.is_empty() {
            return Err(TransportError::Empty);
        }
        if points.len() != weights.len() {
            return Err(TransportError::LengthMismatch {
                points: points.len(),
                weights: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| **w < 0.0 || !w.is_finite()) {
            return Err(TransportError::NegativeWeight(w));
        }
        let total = compensated_sum(&weights);
        if (total - 1.0).abs() > Self::WEIGHT_TOL {
            return Err(TransportError::WeightSum((total - 1.0).abs()));
        }
        Ok(Self { points, weights })
    }

    /// Uniform weights `1/m` on the given atoms.
    pub fn uniform(points: Vec<P>) -> Result<Self, TransportError> {
        let m = points.len();
        if m == 0 {
            return Err(TransportError::Empty);
        }
        let w = 1.0 / m as f64;
        Self::new(points, vec![w; m])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Pushforward under a map of the ground space.
    pub fn map<Q>(&self, f: impl Fn(&P) -> Q) -> EmpiricalMeasure<Q> {
        EmpiricalMeasure {
            points: self.points.iter().map(f).collect(),
            weights: self.weights.clone(),
        }
    }
}

impl EmpiricalMeasure<f64> {
    /// Atoms sorted by position, weights carried along.
    pub fn sorted(&self) -> (Vec<f64>, Vec<f64>) {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.points[a].total_cmp(&self.points[b]));
        (
            idx.iter().map(|&i| self.points[i]).collect(),
            idx.iter().map(|&i| self.weights[i]).collect(),
        )
    }
}

/// A coupling between two finitely supported measures together with its
/// attained transport cost `Σ π_ij c_ij`.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    n_source: usize,
    n_target: usize,
    /// Row-major `n_source × n_target` mass matrix.
    plan: Vec<f64>,
    /// Attained cost under the cost matrix the plan was built from.
    pub cost: f64,
}

impl TransportPlan {
    pub fn from_dense(
        plan: Vec<f64>,
        n_source: usize,
        n_target: usize,
        cost: f64,
    ) -> Self {
        debug_assert_eq!(plan.len(), n_source * n_target);
        Self {
            n_source,
            n_target,
            plan,
            cost,
        }
    }

    /// Permutation coupling with mass `1/m` on `(i, perm[i])`.
    pub fn from_permutation(perm: &[usize], cost: f64) -> Self {
        let m = perm.len();
        let mut plan = vec![0.0; m * m];
        let w = 1.0 / m as f64;
        for (i, &j) in perm.iter().enumerate() {
            plan[i * m + j] = w;
        }
        Self {
            n_source: m,
            n_target: m,
            plan,
            cost,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_source, self.n_target)
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.n_target + j]
    }

    /// Row and column sums.
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let mut rows = vec![0.0; self.n_source];
        let mut cols = vec![0.0; self.n_target];
        for i in 0..self.n_source {
            for j in 0..self.n_target {
                let m = self.plan[i * self.n_target + j];
                rows[i] += m;
                cols[j] += m;
            }
        }
        (rows, cols)
    }

    /// Largest absolute deviation of the marginals from the prescribed
    /// weights.
    pub fn marginal_error(&self, source: &[f64], target: &[f64]) -> f64 {
        let (rows, cols) = self.marginals();
        let er = rows
            .iter()
            .zip(source)
            .map(|(r, s)| (r - s).abs())
            .fold(0.0, f64::max);
        let ec = cols
            .iter()
            .zip(target)
            .map(|(c, t)| (c - t).abs())
            .fold(0.0, f64::max);
        er.max(ec)
    }

    /// Number of entries carrying mass above `tol`.
    pub fn support_size(&self, tol: f64) -> usize {
        self.plan.iter().filter(|&&m| m > tol).count()
    }

    /// Order-`q` distance when the plan's cost matrix held `d(x,y)^q`.
    pub fn distance(&self, q: f64) -> f64 {
        self.cost.max(0.0).powf(1.0 / q)
    }
}

/// Dense row-major cost matrix.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, TransportError> {
        if data.len() != rows * cols {
            return Err(TransportError::InvalidCost);
        }
        if data.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(TransportError::InvalidCost);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds `c_ij = d(a_i, b_j)^q` from two atom lists.
    pub fn from_points<P: MetricPoint + Sync>(
        a: &[P],
        b: &[P],
        q: f64,
    ) -> Result<Self, TransportError> {
        if q < 1.0 {
            return Err(TransportError::InvalidOrder(q));
        }
        use rayon::prelude::*;
        let cols = b.len();
        let data: Vec<f64> = a
            .par_iter()
            .flat_map_iter(|ai| b.iter().map(move |bj| pow_q(ai.distance(bj), q)))
            .collect();
        Self::new(a.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn median(&self) -> f64 {
        let mut v = self.data.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

/// `x^q` with exact fast paths for the common integer orders.
pub(crate) fn pow_q(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        x
    } else if q == 2.0 {
        x * x
    } else {
        x.powf(q)
    }
}
