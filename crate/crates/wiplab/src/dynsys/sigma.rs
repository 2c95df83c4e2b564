//! Limiting-variance estimation and partial-sum diagnostics.

use super::{DynError, MapSystem, Observable, OrbitBatch};

/// Estimation strategy for the limiting variance of `n^{-1/2} v_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaMethod {
    /// Integrated autocovariance truncated at this lag.
    GreenKubo { lag_cutoff: usize },
    /// Variance of normalized block sums of this length.
    BatchMeans { block_len: usize },
}

#[derive(Debug, Clone)]
pub struct SigmaEstimate {
    pub sigma2: f64,
    pub stderr: f64,
    pub method: SigmaMethod,
    /// `|c_K| / c_0` when the lag-cutoff correlation has not decayed below
    /// 1% of the variance — the cutoff is too small.
    pub truncation_warning: Option<f64>,
}

const BLOCKS: usize = 32;

/// Monte Carlo estimate of the limiting variance from one long stationary
/// orbit of `budget` steps, blocked into independent-enough segments for a
/// standard error.
pub fn estimate_sigma2(
    sys: &MapSystem,
    obs: &Observable,
    method: SigmaMethod,
    budget: usize,
    seed: u64,
) -> Result<SigmaEstimate, DynError> {
    if budget < 1000 {
        return Err(DynError::EmptyHorizon);
    }
    let mut rng = crate::rng::stream_rng(seed, 0);
    let mut x = sys.sample_invariant(&mut rng);
    let mut series = Vec::with_capacity(budget);
    for _ in 0..budget {
        series.push(obs.eval(x));
        x = sys.orbit_step(x, &mut rng);
    }

    match method {
        SigmaMethod::GreenKubo { lag_cutoff } => {
            let seg = budget / BLOCKS;
            let mut estimates = Vec::with_capacity(BLOCKS);
            for b in 0..BLOCKS {
                let chunk = &series[b * seg..(b + 1) * seg];
                let (sigma2, _) = green_kubo(chunk, lag_cutoff);
                estimates.push(sigma2);
            }
            let (mean, stderr) = mean_stderr(&estimates);
            // Cutoff check on the full series, where the noise floor of the
            // lag-K autocovariance is ~c_0/√budget.
            let c0 = autocovariance(&series, 0);
            let ck = autocovariance(&series, lag_cutoff.min(budget / 2));
            let tail_ratio = if c0 > 0.0 { (ck / c0).abs() } else { 0.0 };
            let threshold = 0.02f64.max(4.0 / (budget as f64).sqrt());
            Ok(SigmaEstimate {
                sigma2: mean.max(0.0),
                stderr,
                method,
                truncation_warning: (tail_ratio > threshold).then_some(tail_ratio),
            })
        }
        SigmaMethod::BatchMeans { block_len } => {
            let blocks = budget / block_len;
            let scale = 1.0 / (block_len as f64).sqrt();
            let zs: Vec<f64> = (0..blocks)
                .map(|b| {
                    series[b * block_len..(b + 1) * block_len]
                        .iter()
                        .sum::<f64>()
                        * scale
                })
                .collect();
            let sq: Vec<f64> = zs.iter().map(|z| z * z).collect();
            let (mean, stderr) = mean_stderr(&sq);
            Ok(SigmaEstimate {
                sigma2: mean.max(0.0),
                stderr,
                method,
                truncation_warning: None,
            })
        }
    }
}

/// Truncated Green–Kubo sum on one segment; returns the estimate and the
/// ratio `|c_K| / c_0`.
fn green_kubo(series: &[f64], lag_cutoff: usize) -> (f64, f64) {
    let n = series.len();
    let c0 = autocovariance(series, 0);
    let mut sigma2 = c0;
    let mut last = c0;
    for k in 1..=lag_cutoff.min(n / 2) {
        last = autocovariance(series, k);
        sigma2 += 2.0 * last;
    }
    let ratio = if c0 > 0.0 { (last / c0).abs() } else { 0.0 };
    (sigma2, ratio)
}

fn autocovariance(series: &[f64], lag: usize) -> f64 {
    let n = series.len() - lag;
    let mut acc = 0.0;
    for i in 0..n {
        acc += series[i] * series[i + lag];
    }
    acc / n as f64
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Block-maximum statistic over windows of length `⌈√n⌉`:
/// `max_{0 ≤ i,l ≤ ⌈√n⌉} |Σ_{j=ib}^{ib+l−1} v_j|` with indices clipped to
/// `n`.
pub fn block_max_z(row: &[f64], n: usize) -> Result<f64, DynError> {
    if row.len() < n {
        return Err(DynError::RowTooShort {
            have: row.len(),
            want: n,
        });
    }
    let b = (n as f64).sqrt().ceil() as usize;
    // Left-to-right accumulation per window start, so the result is bit
    // identical to a fresh summation of each clipped block.
    let mut best = 0.0f64;
    for i in 0..=b {
        let start = (i * b).min(n);
        let mut acc = 0.0;
        for l in 1..=b {
            let j = start + l - 1;
            if j >= n {
                break;
            }
            acc += row[j];
            best = best.max(acc.abs());
        }
    }
    Ok(best)
}

/// Monte Carlo `L^q` norm of the running-maximum statistic
/// `max_{k ≤ n} |v_k|` over the batch.
pub fn max_partial_sum_diag(batch: &OrbitBatch, q: f64) -> Result<f64, DynError> {
    if q < 1.0 {
        return Err(DynError::EmptyHorizon);
    }
    let mut acc = 0.0;
    for row in batch.rows() {
        let mut running = 0.0f64;
        let mut max_abs = 0.0f64;
        for &v in row {
            running += v;
            max_abs = max_abs.max(running.abs());
        }
        acc += max_abs.powf(q);
    }
    Ok((acc / batch.m as f64).powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{Centering, MapSystem, Observable};

    fn zero_observable() -> Observable {
        let kind = Observable::table(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        Observable::centered(
            kind,
            &MapSystem::doubling(),
            Centering::Analytic,
            0,
        )
        .unwrap()
    }

    #[test]
    fn zero_observable_has_zero_variance() {
        let sys = MapSystem::doubling();
        let est = estimate_sigma2(
            &sys,
            &zero_observable(),
            SigmaMethod::GreenKubo { lag_cutoff: 16 },
            10_000,
            0,
        )
        .unwrap();
        assert_eq!(est.sigma2, 0.0);
    }

    #[test]
    fn doubling_linear_observable_matches_transfer_operator_series() {
        // geometric series of lag correlations: σ² = 1/12 + 2 Σ 2^{-k}/12 = 1/4
        let sys = MapSystem::doubling();
        let obs = Observable::centered_linear();
        let est = estimate_sigma2(
            &sys,
            &obs,
            SigmaMethod::GreenKubo { lag_cutoff: 48 },
            2_000_000,
            3,
        )
        .unwrap();
        assert!(
            (est.sigma2 - 0.25).abs() < 0.01,
            "sigma2 {} stderr {}",
            est.sigma2,
            est.stderr
        );
        assert!(est.truncation_warning.is_none());
    }

    #[test]
    fn doubling_cosine_has_no_correlations() {
        // Fourier orthogonality: all lag terms vanish, σ² = ∫cos² = 1/2
        let sys = MapSystem::doubling();
        let obs = Observable::cosine();
        let est = estimate_sigma2(
            &sys,
            &obs,
            SigmaMethod::GreenKubo { lag_cutoff: 48 },
            2_000_000,
            4,
        )
        .unwrap();
        assert!((est.sigma2 - 0.5).abs() < 0.01, "sigma2 {}", est.sigma2);
    }

    #[test]
    fn methods_agree_within_combined_stderr() {
        let sys = MapSystem::doubling();
        for obs in [Observable::centered_linear(), Observable::cosine()] {
            let gk = estimate_sigma2(
                &sys,
                &obs,
                SigmaMethod::GreenKubo { lag_cutoff: 48 },
                2_000_000,
                5,
            )
            .unwrap();
            let bm = estimate_sigma2(
                &sys,
                &obs,
                SigmaMethod::BatchMeans { block_len: 4096 },
                2_000_000,
                6,
            )
            .unwrap();
            let combined = (gk.stderr.powi(2) + bm.stderr.powi(2)).sqrt();
            assert!(
                (gk.sigma2 - bm.sigma2).abs() <= 3.0 * combined,
                "GK {} vs batch means {} (3x combined stderr {})",
                gk.sigma2,
                bm.sigma2,
                3.0 * combined
            );
        }
    }

    #[test]
    fn short_lag_cutoff_warns() {
        let sys = MapSystem::doubling();
        let obs = Observable::centered_linear();
        let est = estimate_sigma2(
            &sys,
            &obs,
            SigmaMethod::GreenKubo { lag_cutoff: 1 },
            200_000,
            7,
        )
        .unwrap();
        assert!(est.truncation_warning.is_some());
    }

    #[test]
    fn block_max_of_zero_is_zero() {
        assert_eq!(block_max_z(&[0.0; 64], 64).unwrap(), 0.0);
    }

    #[test]
    fn block_max_constant_trace() {
        let c = -0.3;
        let row = vec![c; 16];
        // ⌈√16⌉ = 4 complete blocks of length 4
        assert!((block_max_z(&row, 16).unwrap() - 4.0 * c.abs()).abs() < 1e-12);
    }

    #[test]
    fn block_max_matches_exhaustive_oracle() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(8, 0);
        for n in [7usize, 64, 100, 1024] {
            let row: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let got = block_max_z(&row, n).unwrap();
            // brute-force double loop over (i, l)
            let b = (n as f64).sqrt().ceil() as usize;
            let mut best = 0.0f64;
            for i in 0..=b {
                for l in 0..=b {
                    let start = (i * b).min(n);
                    let end = (start + l).min(n);
                    let s: f64 = row[start..end].iter().sum();
                    best = best.max(s.abs());
                }
            }
            assert_eq!(got, best, "n={n}");
        }
    }

    #[test]
    fn max_partial_sum_examples() {
        let sys = MapSystem::doubling();
        let obs = Observable::centered_linear();
        // single sample, n = 2: max(|v0|, |v0+v1|) by definition
        let batch = OrbitBatch::generate(&sys, &obs, 9, 2, 1).unwrap();
        let row = batch.row(0);
        let expect = row[0].abs().max((row[0] + row[1]).abs());
        let got = max_partial_sum_diag(&batch, 2.0).unwrap();
        assert!((got - expect).abs() < 1e-14);
    }

    #[test]
    fn normalized_max_partial_sum_is_scale_stable() {
        // two-scale self-consistency: value/√n within a factor 2 across n
        let sys = MapSystem::doubling();
        let obs = Observable::centered_linear();
        let m = 2000;
        let small = OrbitBatch::generate(&sys, &obs, 10, 256, m).unwrap();
        let large = OrbitBatch::generate(&sys, &obs, 11, 4096, m).unwrap();
        let r_small = max_partial_sum_diag(&small, 2.0).unwrap() / 256f64.sqrt();
        let r_large = max_partial_sum_diag(&large, 2.0).unwrap() / 4096f64.sqrt();
        let ratio = (r_small / r_large).max(r_large / r_small);
        assert!(ratio <= 2.0, "ratio {ratio}");
    }
}
