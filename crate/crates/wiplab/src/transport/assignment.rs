//! Exact assignment solver for equal-size, uniform-weight measures.
//!
//! Shortest-augmenting-path Hungarian method with dual potentials, O(m³).
//! The optimum over couplings of two uniform m-point measures is attained at
//! a permutation (a vertex of the Birkhoff polytope), so this is exact for
//! `W_q`.

use super::{CostMatrix, TransportError, TransportPlan};

/// Minimum-cost perfect matching on a square cost matrix.
///
/// Returns the coupling with mass `1/m` on each matched pair and
/// `cost = (1/m) Σ_i c[i][σ(i)]`, so `plan.distance(q)` is the order-`q`
/// distance when entries are `d(x_i, y_j)^q`.
pub fn solve_assignment(cost: &CostMatrix, q: f64) -> Result<TransportPlan, TransportError> {
    if q < 1.0 {
        return Err(TransportError::InvalidOrder(q));
    }
    if cost.rows() != cost.cols() {
        return Err(TransportError::NonSquareCost {
            rows: cost.rows(),
            cols: cost.cols(),
        });
    }
    let perm = min_cost_permutation(cost);
    let m = perm.len();
    let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost.at(i, j)).sum();
    Ok(TransportPlan::from_permutation(&perm, total / m as f64))
}

/// The optimal row-to-column permutation.
pub fn min_cost_permutation(cost: &CostMatrix) -> Vec<usize> {
    let n = cost.rows();
    // 1-based arrays with a virtual column 0, the classical formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1]; // row assigned to column j (0 = free)
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost.at(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[row_of[j] - 1] = j - 1;
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: usize, cols: usize, data: Vec<f64>) -> CostMatrix {
        CostMatrix::new(rows, cols, data).unwrap()
    }

    #[test]
    fn one_by_one() {
        let plan = solve_assignment(&cm(1, 1, vec![0.49]), 2.0).unwrap();
        assert!((plan.cost - 0.49).abs() < 1e-15);
        assert!((plan.distance(2.0) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_prefers_diagonal() {
        let plan = solve_assignment(&cm(2, 2, vec![0.0, 1.0, 1.0, 0.0]), 1.0).unwrap();
        assert!(plan.cost.abs() < 1e-15);
        assert!(plan.mass(0, 0) > 0.0 && plan.mass(1, 1) > 0.0);
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            solve_assignment(&cm(2, 3, vec![0.0; 6]), 1.0),
            Err(TransportError::NonSquareCost { .. })
        ));
    }

    /// Exhaustive check against all permutations for small m.
    #[test]
    fn matches_factorial_enumeration() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(42, 0);
        for m in 2..=6 {
            for _ in 0..20 {
                let data: Vec<f64> = (0..m * m).map(|_| rng.random::<f64>()).collect();
                let cost = cm(m, m, data);
                let perm = min_cost_permutation(&cost);
                let got: f64 = perm.iter().enumerate().map(|(i, &j)| cost.at(i, j)).sum();
                let best = brute_force_min(&cost);
                assert!(
                    (got - best).abs() < 1e-10,
                    "m={m}: solver {got} vs brute force {best}"
                );
            }
        }
    }

    fn brute_force_min(cost: &CostMatrix) -> f64 {
        let n = cost.rows();
        let mut cols: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut cols, 0, &mut |perm| {
            let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost.at(i, j)).sum();
            if total < best {
                best = total;
            }
        });
        best
    }

    fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            visit(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, visit);
            items.swap(k, i);
        }
    }
}
