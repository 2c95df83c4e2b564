//! Path-space transport: discretized continuous functions on `[0,1]` under
//! the supremum metric.

use super::{solve_assignment, CostMatrix, MetricPoint, TransportError, TransportPlan};

/// A continuous function on `[0,1]` sampled at `G+1` uniform times; the
/// supremum distance between two grids is the max of pointwise absolute
/// differences.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    values: Vec<f64>,
}

impl PathGrid {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(values.len() >= 2, "a path grid needs at least two nodes");
        Self { values }
    }

    /// Number of segments `G`; nodes sit at `j/G`.
    pub fn grid_size(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

impl MetricPoint for PathGrid {
    fn distance(&self, other: &Self) -> f64 {
        sup_distance(self, other)
    }
}

/// `d_C(u, v) = max_j |u_j − v_j|` on a shared grid.
pub fn sup_distance(a: &PathGrid, b: &PathGrid) -> f64 {
    debug_assert_eq!(a.values.len(), b.values.len());
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Time reversal around the endpoint: `g(u)(t) = u(1) − u(1−t)`.
///
/// `g` is an involution, fixes the zero path, and always has `g(u)(0) = 0`.
pub fn flip_path(u: &PathGrid) -> PathGrid {
    let g = u.grid_size();
    let last = u.values[g];
    let values = (0..=g).map(|j| last - u.values[g - j]).collect();
    PathGrid { values }
}

/// Exact `W_q` between two equal-size sets of paths on a common grid.
///
/// Builds the full `d_C^q` cost matrix and solves the assignment problem.
pub fn wasserstein_paths(
    a: &[PathGrid],
    b: &[PathGrid],
    q: f64,
) -> Result<(TransportPlan, f64), TransportError> {
    if a.is_empty() || b.is_empty() {
        return Err(TransportError::Empty);
    }
    if a.len() != b.len() {
        return Err(TransportError::CountMismatch(a.len(), b.len()));
    }
    let g = a[0].grid_size();
    for p in a.iter().chain(b.iter()) {
        if p.grid_size() != g {
            return Err(TransportError::GridMismatch(g, p.grid_size()));
        }
    }
    let cost = CostMatrix::from_points(a, b, q)?;
    let plan = solve_assignment(&cost, q)?;
    let dist = plan.distance(q);
    Ok((plan, dist))
}
