//! Entropic-regularized transport with log-domain updates.

use super::{CostMatrix, TransportError, TransportPlan};

/// Result of a converged Sinkhorn run.
#[derive(Debug, Clone)]
pub struct SinkhornPlan {
    pub plan: TransportPlan,
    /// Cost including the entropy term: `Σ π c + reg Σ π (ln π/(a⊗b) − 1)`
    /// evaluated on the returned plan.
    pub regularized_cost: f64,
    /// Largest marginal violation at termination.
    pub marginal_error: f64,
    pub iterations: usize,
}

/// Default regularization as a fraction of the median cost.
pub fn default_regularization(cost: &CostMatrix) -> f64 {
    (0.05 * cost.median()).max(1e-12)
}

/// Entropic OT between weighted marginals `a` and `b`.
///
/// Updates run on the dual potentials in log space, so small `reg` is
/// stable. Convergence is declared when every marginal matches within
/// `tol` (sup norm); otherwise the run errors out with the achieved
/// violation.
pub fn sinkhorn(
    cost: &CostMatrix,
    a: &[f64],
    b: &[f64],
    reg: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SinkhornPlan, TransportError> {
    if reg <= 0.0 {
        return Err(TransportError::InvalidRegularization(reg));
    }
    if a.len() != cost.rows() || b.len() != cost.cols() {
        return Err(TransportError::LengthMismatch {
            points: a.len(),
            weights: b.len(),
        });
    }
    let (n, m) = (cost.rows(), cost.cols());
    let log_a: Vec<f64> = a.iter().map(|w| w.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|w| w.ln()).collect();
    let mut f = vec![0.0f64; n];
    let mut g = vec![0.0f64; m];
    let mut iterations = 0;
    let mut err = f64::INFINITY;

    while iterations < max_iter {
        // f_i = reg [ln a_i − LSE_j((g_j − C_ij)/reg)]
        for i in 0..n {
            let lse = log_sum_exp((0..m).map(|j| (g[j] - cost.at(i, j)) / reg));
            f[i] = reg * (log_a[i] - lse);
        }
        for j in 0..m {
            let lse = log_sum_exp((0..n).map(|i| (f[i] - cost.at(i, j)) / reg));
            g[j] = reg * (log_b[j] - lse);
        }
        iterations += 1;
        // After a g-update the column marginals are exact; only rows can be off.
        err = row_marginal_error(cost, &f, &g, a, reg);
        if err <= tol {
            break;
        }
    }

    if err > tol {
        return Err(TransportError::SinkhornNotConverged {
            tol,
            iterations,
            achieved: err,
        });
    }

    let mut plan = vec![0.0f64; n * m];
    let mut transport_cost = 0.0;
    let mut entropy_term = 0.0;
    for i in 0..n {
        for j in 0..m {
            let log_pi = (f[i] + g[j] - cost.at(i, j)) / reg;
            let pi = log_pi.exp();
            plan[i * m + j] = pi;
            transport_cost += pi * cost.at(i, j);
            if pi > 0.0 {
                entropy_term += pi * (log_pi - log_a[i] - log_b[j] - 1.0);
            }
        }
    }
    Ok(SinkhornPlan {
        plan: TransportPlan::from_dense(plan, n, m, transport_cost),
        regularized_cost: transport_cost + reg * entropy_term,
        marginal_error: err,
        iterations,
    })
}

fn row_marginal_error(cost: &CostMatrix, f: &[f64], g: &[f64], a: &[f64], reg: f64) -> f64 {
    let (n, m) = (cost.rows(), cost.cols());
    let mut worst = 0.0f64;
    for i in 0..n {
        let row: f64 = (0..m)
            .map(|j| ((f[i] + g[j] - cost.at(i, j)) / reg).exp())
            .sum();
        worst = worst.max((row - a[i]).abs());
    }
    worst
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.map(|x| (x - max).exp()).sum();
    max + sum.ln()
}
