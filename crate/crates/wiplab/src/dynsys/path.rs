//! Piecewise-linear path samples and the rescaled partial-sum process.

use super::{DynError, MapSystem, Observable};
use crate::transport::PathGrid;
use rand::Rng;

/// A continuous function on `[0,1]` given by values at `n+1` uniform
/// breakpoints with linear interpolation in between.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    values: Vec<f64>,
}

impl PathSample {
    pub fn from_values(values: Vec<f64>) -> Self {
        assert!(values.len() >= 2, "need at least two breakpoints");
        Self { values }
    }

    /// The rescaled partial-sum path of one observation row:
    /// breakpoint `j` holds `n^{-1/2} Σ_{i<j} v_i`, and linear interpolation
    /// reproduces the fractional-part term of the defining formula.
    pub fn wip(observations: &[f64]) -> Self {
        let n = observations.len();
        assert!(n >= 1, "horizon must be at least 1");
        let scale = 1.0 / (n as f64).sqrt();
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for &v in observations {
            acc += v;
            values.push(acc * scale);
        }
        Self { values }
    }

    /// Number of segments.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Evaluation at `t ∈ [0,1]`; exact at breakpoints, affine in between.
    pub fn evaluate(&self, t: f64) -> f64 {
        let n = self.n() as f64;
        let s = (t.clamp(0.0, 1.0)) * n;
        // snap to the node when t was formed as j/n
        let r = s.round();
        let s = if (s - r).abs() <= n * 1e-13 { r } else { s };
        let k = (s.floor() as usize).min(self.n() - 1);
        let frac = s - k as f64;
        if frac == 0.0 {
            self.values[k]
        } else if k + 1 == self.values.len() - 1 && frac >= 1.0 {
            self.values[k + 1]
        } else {
            self.values[k] + frac * (self.values[k + 1] - self.values[k])
        }
    }

    /// Resamples onto a `G`-segment uniform grid for path-space transport.
    pub fn to_grid(&self, grid_size: usize) -> PathGrid {
        PathGrid::new(
            (0..=grid_size)
                .map(|j| self.evaluate(j as f64 / grid_size as f64))
                .collect(),
        )
    }

    /// Supremum distance to another path on the shared breakpoint grid.
    pub fn sup_distance_on_grid(&self, other: &PathSample) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The path process of one orbit started at `x0`.
///
/// `rng` supplies the mantissa-refresh bits of the γ = 0 orbit (see the
/// module docs); the result is a pure function of `(sys, obs, x0, n)` and
/// the generator state.
pub fn wip_path(
    sys: &MapSystem,
    obs: &Observable,
    x0: f64,
    n: usize,
    rng: &mut impl Rng,
) -> Result<PathSample, DynError> {
    if n == 0 {
        return Err(DynError::EmptyHorizon);
    }
    let mut x = x0;
    let mut observations = Vec::with_capacity(n);
    for _ in 0..n {
        observations.push(obs.eval(x));
        x = sys.orbit_step(x, rng);
    }
    Ok(PathSample::wip(&observations))
}
