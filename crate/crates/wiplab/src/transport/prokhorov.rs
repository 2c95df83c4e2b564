//! Lévy–Prokhorov distance for small finite measures by exhaustive subset
//! search.
//!
//! For finitely supported measures the infimum over closed sets reduces to
//! subsets of the support, and ε-neighborhoods are closed balls around the
//! atoms. The distance is symmetrized: both one-sided conditions are
//! enforced (the classical two-sided definition; the one-sided bound of the
//! metric-comparison inequality holds a fortiori).

use super::{EmpiricalMeasure, MetricPoint, TransportError};

/// Largest combined support size accepted by the exhaustive search.
pub const MAX_SUPPORT: usize = 16;

const BISECTION_TOL: f64 = 1e-9;

/// Which measure the certificate subset indexes into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateSide {
    First,
    Second,
}

/// Outcome of the exhaustive Lévy–Prokhorov computation.
#[derive(Debug, Clone)]
pub struct LpResult {
    /// The distance, located by bisection to 1e-9.
    pub pi_distance: f64,
    /// Atom indices of the subset whose constraint is binding just below
    /// the optimum.
    pub certificate: Vec<usize>,
    pub certificate_side: CertificateSide,
}

/// Lévy–Prokhorov distance between two finitely supported measures.
pub fn levy_prokhorov<P: MetricPoint>(
    a: &EmpiricalMeasure<P>,
    b: &EmpiricalMeasure<P>,
) -> Result<LpResult, TransportError> {
    let (na, nb) = (a.len(), b.len());
    if na + nb > MAX_SUPPORT {
        return Err(TransportError::SupportTooLarge(na + nb, MAX_SUPPORT));
    }
    // cross[i][j] = d(a_i, b_j)
    let cross: Vec<Vec<f64>> = a
        .points()
        .iter()
        .map(|p| b.points().iter().map(|q| p.distance(q)).collect())
        .collect();
    let diameter = cross
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &d| acc.max(d));

    // ε = min(1, diameter) is always feasible: either every neighborhood
    // covers the other support, or the additive slack alone does.
    let mut lo = 0.0f64;
    let mut hi = diameter.min(1.0);
    if violating_subset(a, b, &cross, hi).is_none() {
        // feasible at hi; tighten
    } else {
        hi = 1.0;
    }
    if violating_subset(a, b, &cross, lo).is_none() {
        return Ok(LpResult {
            pi_distance: 0.0,
            certificate: Vec::new(),
            certificate_side: CertificateSide::First,
        });
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if violating_subset(a, b, &cross, mid).is_none() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (certificate, certificate_side) = violating_subset(a, b, &cross, lo)
        .expect("lo side of the bisection must still violate");
    Ok(LpResult {
        pi_distance: hi,
        certificate,
        certificate_side,
    })
}

/// Amount by which subset `set` (of the measure picked by `side`) violates
/// the ε-feasibility condition; positive means infeasible.
pub fn subset_violation<P: MetricPoint>(
    a: &EmpiricalMeasure<P>,
    b: &EmpiricalMeasure<P>,
    set: &[usize],
    side: CertificateSide,
    eps: f64,
) -> f64 {
    let (own, other) = match side {
        CertificateSide::First => (a.points(), b.points()),
        CertificateSide::Second => (b.points(), a.points()),
    };
    let (own_w, other_w) = match side {
        CertificateSide::First => (a.weights(), b.weights()),
        CertificateSide::Second => (b.weights(), a.weights()),
    };
    let mass: f64 = set.iter().map(|&i| own_w[i]).sum();
    let mut fattened = 0.0;
    for (j, q) in other.iter().enumerate() {
        if set.iter().any(|&i| own[i].distance(q) <= eps) {
            fattened += other_w[j];
        }
    }
    mass - fattened - eps
}

fn violating_subset<P: MetricPoint>(
    a: &EmpiricalMeasure<P>,
    b: &EmpiricalMeasure<P>,
    cross: &[Vec<f64>],
    eps: f64,
) -> Option<(Vec<usize>, CertificateSide)> {
    if let Some(set) = one_sided_violation(a.weights(), b.weights(), cross, eps, false) {
        return Some((set, CertificateSide::First));
    }
    one_sided_violation(b.weights(), a.weights(), cross, eps, true)
        .map(|set| (set, CertificateSide::Second))
}

/// Checks `μ(A) ≤ ν(A^ε) + ε` over all nonempty subsets A of μ's support.
/// `transposed` flips the indexing of the cross-distance table.
fn one_sided_violation(
    own_w: &[f64],
    other_w: &[f64],
    cross: &[Vec<f64>],
    eps: f64,
    transposed: bool,
) -> Option<Vec<usize>> {
    let n = own_w.len();
    let m = other_w.len();
    // near[i] = bitmask of the other measure's atoms within eps of atom i.
    let near: Vec<u32> = (0..n)
        .map(|i| {
            let mut mask = 0u32;
            for j in 0..m {
                let d = if transposed { cross[j][i] } else { cross[i][j] };
                if d <= eps {
                    mask |= 1 << j;
                }
            }
            mask
        })
        .collect();
    let slack = eps + 1e-15;
    for subset in 1u32..(1 << n) {
        let mut mass = 0.0;
        let mut cover = 0u32;
        for (i, w) in own_w.iter().enumerate() {
            if subset & (1 << i) != 0 {
                mass += w;
                cover |= near[i];
            }
        }
        let mut fattened = 0.0;
        for (j, w) in other_w.iter().enumerate() {
            if cover & (1 << j) != 0 {
                fattened += w;
            }
        }
        if mass > fattened + slack {
            let set = (0..n).filter(|i| subset & (1 << i) != 0).collect();
            return Some(set);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirac(x: f64) -> EmpiricalMeasure<f64> {
        EmpiricalMeasure::uniform(vec![x]).unwrap()
    }

    #[test]
    fn point_masses_at_unit_distance() {
        let res = levy_prokhorov(&dirac(0.0), &dirac(1.0)).unwrap();
        assert!((res.pi_distance - 1.0).abs() < 1e-8, "{}", res.pi_distance);
    }

    #[test]
    fn identical_measures_are_at_zero() {
        let a = EmpiricalMeasure::uniform(vec![0.0, 0.5, 2.0]).unwrap();
        let res = levy_prokhorov(&a, &a).unwrap();
        assert_eq!(res.pi_distance, 0.0);
    }

    #[test]
    fn half_mass_split() {
        // uniform{0,1} vs δ_0: binding set A = {1} forces ε = 1/2.
        let a = EmpiricalMeasure::uniform(vec![0.0, 1.0]).unwrap();
        let b = dirac(0.0);
        let res = levy_prokhorov(&a, &b).unwrap();
        assert!((res.pi_distance - 0.5).abs() < 1e-8, "{}", res.pi_distance);
        // The certificate violates just below and satisfies just above.
        let below = subset_violation(
            &a,
            &b,
            &res.certificate,
            res.certificate_side,
            res.pi_distance - 1e-6,
        );
        assert!(below > 0.0, "certificate must violate below the optimum");
        let above = subset_violation(
            &a,
            &b,
            &res.certificate,
            res.certificate_side,
            res.pi_distance + 1e-6,
        );
        assert!(above <= 0.0, "certificate must be satisfied above");
    }

    #[test]
    fn support_cap_is_enforced() {
        let big: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let a = EmpiricalMeasure::uniform(big.clone()).unwrap();
        let b = EmpiricalMeasure::uniform(big).unwrap();
        assert!(matches!(
            levy_prokhorov(&a, &b),
            Err(TransportError::SupportTooLarge(24, _))
        ));
    }
}
