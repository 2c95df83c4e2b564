//! Transfer-operator machinery for the full-branch doubling map: the
//! martingale–coboundary decomposition `v = m + χ∘T − χ`, conditional
//! variances, and the time-changed martingale path process.
//!
//! The transfer operator of the two-branch slope-2 map averages a function
//! over the branch preimages; Lipschitz observables contract geometrically
//! under it, so the coboundary `χ = Σ_{k≥1} L^k v` is computable by a
//! truncated series on a grid. The martingale part `m` then satisfies
//! `E(m | T^{-1}M) = (Lm)∘T = 0` up to the recorded truncation tail.

use crate::dynsys::{MapSystem, PathSample};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MartcobError {
    #[error("transfer operator requires the two-full-branch case (γ = 0)")]
    RequiresDoubling,
    #[error(
        "transfer iterates are not contracting (‖L^K v‖ = {tail:e} after K = {k}); \
         is the observable centered?"
    )]
    NotContracting { k: usize, tail: f64 },
    #[error(
        "degenerate time-change segment at step {step}: zero conditional variance \
         with a nonzero martingale increment {zeta:e}"
    )]
    DegenerateSegment { step: usize, zeta: f64 },
    #[error("orbit of length {have} is too short, need {want}")]
    OrbitTooShort { have: usize, want: usize },
    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
}

/// Default midpoint-grid resolution.
pub const DEFAULT_GRID: usize = 1 << 14;

/// Default truncation order of the coboundary series.
pub const DEFAULT_TRUNCATION: usize = 48;

/// A function on `[0,1]` stored at midpoint-grid nodes `x_k = (k+1/2)/N`
/// with linear interpolation, linearly extended past the end nodes so that
/// globally affine functions are represented exactly.
#[derive(Debug, Clone)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(values: Vec<f64>) -> Self {
        assert!(values.len() >= 2);
        Self { values }
    }

    /// Samples `f` at the midpoint nodes.
    pub fn sample(n_grid: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..n_grid).map(|k| f(Self::node_of(n_grid, k))).collect();
        Self { values }
    }

    pub fn node_of(n_grid: usize, k: usize) -> f64 {
        (k as f64 + 0.5) / n_grid as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, k: usize) -> f64 {
        Self::node_of(self.values.len(), k)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation in the interior, linear extrapolation from the
    /// outermost node pairs.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let s = x * n as f64 - 0.5;
        let k = (s.floor() as isize).clamp(0, n as isize - 2) as usize;
        let w = s - k as f64;
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Midpoint-rule integral over `[0,1]`, exact for the interpolant on
    /// cell-aligned integrands.
    pub fn integral(&self) -> f64 {
        crate::rng::compensated_sum(&self.values) / self.values.len() as f64
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

/// One application of the transfer operator of the doubling map:
/// `(Lf)(x) = ½ [ f(x/2) + f((x+1)/2) ]` on the grid.
pub fn transfer_apply(sys: &MapSystem, f: &GridFunction) -> Result<GridFunction, MartcobError> {
    if !sys.is_uniformly_expanding() {
        return Err(MartcobError::RequiresDoubling);
    }
    let n = f.len();
    let values = (0..n)
        .map(|k| {
            let x = GridFunction::node_of(n, k);
            0.5 * (f.eval(0.5 * x) + f.eval(0.5 * (x + 1.0)))
        })
        .collect();
    Ok(GridFunction::from_values(values))
}

/// The martingale–coboundary decomposition of a centered observable.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub chi: GridFunction,
    pub m: GridFunction,
    pub truncation_k: usize,
    /// Geometric bound on the dropped series tail in sup norm.
    pub tail_bound: f64,
}

impl Decomposition {
    pub fn mean_m(&self) -> f64 {
        self.m.integral()
    }

    pub fn mean_m_sq(&self) -> f64 {
        self.m.values().iter().map(|v| v * v).sum::<f64>() / self.m.len() as f64
    }

    /// `E[m²]^{1/2}` by grid quadrature: the variance normalization that
    /// keeps the conditional time change self-consistent.
    pub fn sigma_m(&self) -> f64 {
        self.mean_m_sq().sqrt()
    }

    /// Sup-norm residual of `v − (m + χ∘T − χ)` at the grid nodes.
    pub fn identity_residual(&self, sys: &MapSystem, v: &GridFunction) -> f64 {
        let n = v.len();
        let mut worst = 0.0f64;
        for k in 0..n {
            let x = GridFunction::node_of(n, k);
            let tx = sys.step_unchecked(x);
            let lhs = v.values()[k];
            let rhs = self.m.values()[k] + self.chi.eval(tx) - self.chi.values()[k];
            worst = worst.max((lhs - rhs).abs());
        }
        worst
    }
}

/// Solves `v = m + χ∘T − χ` with `χ = Σ_{k=1}^{K} L^k v`.
///
/// The tail bound extrapolates the observed contraction ratio of the last
/// series terms; a non-contracting sequence of iterates (an uncentered
/// observable) is rejected.
pub fn solve_coboundary(
    sys: &MapSystem,
    v: &GridFunction,
    truncation_k: usize,
) -> Result<Decomposition, MartcobError> {
    if !sys.is_uniformly_expanding() {
        return Err(MartcobError::RequiresDoubling);
    }
    let n = v.len();
    let mut chi = GridFunction::from_values(vec![0.0; n]);
    let mut iterate = v.clone();
    let mut prev_norm = iterate.sup_norm();
    let mut last_norm = prev_norm;
    for _ in 0..truncation_k {
        iterate = transfer_apply(sys, &iterate)?;
        chi = chi.zip_with(&iterate, |a, b| a + b);
        prev_norm = last_norm;
        last_norm = iterate.sup_norm();
    }
    let v_norm = v.sup_norm();
    // Iterates of a centered Lipschitz observable decay geometrically until
    // they hit the grid-interpolation noise floor (O(h²)); only a stalled
    // tail above that floor signals an uncentered input.
    let h = 1.0 / n as f64;
    let noise_floor = (16.0 * h * h).max(1e-12) * v_norm.max(1.0);
    if last_norm > noise_floor && v_norm > 0.0 {
        let stalled = last_norm > 0.5 * v_norm || (prev_norm > 0.0 && last_norm / prev_norm > 0.95);
        if stalled {
            return Err(MartcobError::NotContracting {
                k: truncation_k,
                tail: last_norm,
            });
        }
    }
    let ratio = if prev_norm > 0.0 {
        (last_norm / prev_norm).min(0.9)
    } else {
        0.0
    };
    let tail_bound = if last_norm == 0.0 {
        0.0
    } else {
        last_norm * ratio / (1.0 - ratio)
    };

    // m(x) = v(x) − χ(Tx) + χ(x) at the nodes
    let m_values = (0..n)
        .map(|k| {
            let x = GridFunction::node_of(n, k);
            let tx = sys.step_unchecked(x);
            v.values()[k] - chi.eval(tx) + chi.values()[k]
        })
        .collect();
    Ok(Decomposition {
        chi,
        m: GridFunction::from_values(m_values),
        truncation_k,
        tail_bound,
    })
}

/// Weak martingale residual: `max_w |∫ m · (w∘T) dLeb|` by grid quadrature,
/// a proxy for `‖Lm‖`.
pub fn martingale_residual(
    sys: &MapSystem,
    decomp: &Decomposition,
    probes: &[GridFunction],
) -> f64 {
    let n = decomp.m.len();
    let mut worst = 0.0f64;
    for w in probes {
        let mut acc = crate::rng::KahanSum::new();
        for k in 0..n {
            let x = GridFunction::node_of(n, k);
            acc.add(decomp.m.values()[k] * w.eval(sys.step_unchecked(x)));
        }
        worst = worst.max((acc.value() / n as f64).abs());
    }
    worst
}

/// The martingale-difference array, conditional variance, and time-changed
/// path built from one orbit read in reverse.
#[derive(Debug, Clone)]
pub struct TimeChangedPath {
    /// `ζ_{n,j} = m(T^{n−j} x₀)/(√n σ)`, j = 1..n.
    pub zeta: Vec<f64>,
    /// Nondecreasing conditional variance `V_{n,l}`, l = 0..n, `V_{n,0} = 0`.
    pub v: Vec<f64>,
    prefix: Vec<f64>,
    sigma: f64,
}

impl TimeChangedPath {
    pub fn n(&self) -> usize {
        self.zeta.len()
    }

    /// Total conditional variance `V_{n,n}` (≈ 1 by self-consistent σ).
    pub fn total_variance(&self) -> f64 {
        *self.v.last().unwrap()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Evaluation of the time-changed process: on
    /// `V_k ≤ t V_n < V_{k+1}` the value interpolates the (k+1)-st
    /// martingale increment proportionally to elapsed conditional variance.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.n();
        let target = t.clamp(0.0, 1.0) * self.total_variance();
        if target >= self.total_variance() {
            return self.prefix[n];
        }
        // v is nondecreasing; find k with v[k] <= target < v[k+1]
        let k = match self
            .v
            .binary_search_by(|probe| probe.partial_cmp(&target).unwrap())
        {
            Ok(mut idx) => {
                // land on the left edge of the segment holding `target`
                while idx + 1 < self.v.len() && self.v[idx + 1] == target {
                    idx += 1;
                }
                idx
            }
            Err(ins) => ins - 1,
        };
        let k = k.min(n - 1);
        let denom = self.v[k + 1] - self.v[k];
        let frac = if denom > 0.0 {
            (target - self.v[k]) / denom
        } else {
            0.0
        };
        self.prefix[k] + frac * self.zeta[k]
    }

    /// Samples onto `grid_size` uniform breakpoints.
    pub fn to_path_sample(&self, grid_size: usize) -> PathSample {
        PathSample::from_values(
            (0..=grid_size)
                .map(|g| self.eval(g as f64 / grid_size as f64))
                .collect(),
        )
    }
}

/// Builds the time-changed martingale path from a forward orbit of length
/// at least `n + 1`.
///
/// The reversed indexing `m∘T^{n−j}` is a deterministic relabeling of the
/// same orbit data; `V` accumulates `E(m²|T^{-1}M) = (Lm²)∘T` along the
/// reversed orbit.
pub fn build_time_changed(
    decomp: &Decomposition,
    sys: &MapSystem,
    orbit: &[f64],
    n: usize,
    sigma: f64,
) -> Result<TimeChangedPath, MartcobError> {
    if sigma <= 0.0 {
        return Err(MartcobError::NonPositiveSigma(sigma));
    }
    if orbit.len() < n + 1 {
        return Err(MartcobError::OrbitTooShort {
            have: orbit.len(),
            want: n + 1,
        });
    }
    let m_sq = GridFunction::from_values(decomp.m.values().iter().map(|v| v * v).collect());
    let cond_var = transfer_apply(sys, &m_sq)?;

    let norm = (n as f64).sqrt() * sigma;
    let var_norm = n as f64 * sigma * sigma;
    let mut zeta = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n + 1);
    v.push(0.0);
    for j in 1..=n {
        let x = orbit[n - j];
        zeta.push(decomp.m.eval(x) / norm);
        // (L m²)(T x) with T x read from the orbit itself
        let increment = cond_var.eval(orbit[n - j + 1]) / var_norm;
        let prev = *v.last().unwrap();
        v.push(prev + increment.max(0.0));
        if increment <= 0.0 && zeta[j - 1] != 0.0 {
            return Err(MartcobError::DegenerateSegment {
                step: j,
                zeta: zeta[j - 1],
            });
        }
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for (j, z) in zeta.iter().enumerate() {
        prefix.push(prefix[j] + z);
    }
    Ok(TimeChangedPath {
        zeta,
        v,
        prefix,
        sigma,
    })
}
