//! Hölder observables with mean-zero centering.

use super::{DynError, MapSystem};
use std::f64::consts::TAU;
use std::path::Path;

/// The underlying function before centering.
#[derive(Debug, Clone)]
pub enum ObservableKind {
    /// `x − 1/2`, mean zero under Lebesgue.
    CenteredLinear,
    /// `cos(2πx)`, mean zero under Lebesgue.
    Cosine,
    /// Piecewise-linear interpolation through `(x_i, v_i)` with a strictly
    /// increasing grid; constant beyond the table ends.
    UserTable { xs: Vec<f64>, vs: Vec<f64> },
}

impl ObservableKind {
    fn raw(&self, x: f64) -> f64 {
        match self {
            Self::CenteredLinear => x - 0.5,
            Self::Cosine => (TAU * x).cos(),
            Self::UserTable { xs, vs } => {
                if x <= xs[0] {
                    return vs[0];
                }
                if x >= xs[xs.len() - 1] {
                    return vs[vs.len() - 1];
                }
                let k = xs.partition_point(|&t| t <= x) - 1;
                let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
                vs[k] + w * (vs[k + 1] - vs[k])
            }
        }
    }

    /// Lebesgue mean, used for analytic centering. Trapezoid rule for tables
    /// (exact for the piecewise-linear interpolant on its own grid).
    fn lebesgue_mean(&self) -> f64 {
        match self {
            Self::CenteredLinear | Self::Cosine => 0.0,
            Self::UserTable { xs, vs } => {
                let mut acc = 0.0;
                // constant extensions outside the table
                acc += vs[0] * xs[0].clamp(0.0, 1.0);
                acc += vs[vs.len() - 1] * (1.0 - xs[xs.len() - 1]).clamp(0.0, 1.0);
                for k in 0..xs.len() - 1 {
                    let (lo, hi) = (xs[k].max(0.0), xs[k + 1].min(1.0));
                    if hi > lo {
                        acc += 0.5 * (self.raw(lo) + self.raw(hi)) * (hi - lo);
                    }
                }
                acc
            }
        }
    }
}

/// How the mean-zero condition is enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Centering {
    /// Closed-form invariant mean (Lebesgue; γ = 0 only).
    Analytic,
    /// Subtract the time average of one seeded orbit of this length.
    Empirical { orbit_len: usize },
}

/// A centered Hölder observable.
#[derive(Debug, Clone)]
pub struct Observable {
    kind: ObservableKind,
    pub holder_exponent: f64,
    pub centering: Centering,
    offset: f64,
    /// Mean over an independent check orbit, recorded at construction for
    /// empirical centering; zero for analytic.
    pub centering_residual: f64,
}

impl Observable {
    /// `x − 1/2` with its analytic Lebesgue centering.
    pub fn centered_linear() -> Self {
        Self {
            kind: ObservableKind::CenteredLinear,
            holder_exponent: 1.0,
            centering: Centering::Analytic,
            offset: 0.0,
            centering_residual: 0.0,
        }
    }

    /// `cos(2πx)` with its analytic Lebesgue centering.
    pub fn cosine() -> Self {
        Self {
            kind: ObservableKind::Cosine,
            holder_exponent: 1.0,
            centering: Centering::Analytic,
            offset: 0.0,
            centering_residual: 0.0,
        }
    }

    /// Centers `kind` for `sys`. Analytic centering needs the Lebesgue
    /// invariant case (γ = 0); empirical centering time-averages a seeded
    /// orbit and records the residual mean of an independent check orbit.
    pub fn centered(
        kind: ObservableKind,
        sys: &MapSystem,
        centering: Centering,
        seed: u64,
    ) -> Result<Self, DynError> {
        let (offset, residual) = match centering {
            Centering::Analytic => {
                if !sys.is_uniformly_expanding() {
                    return Err(DynError::AnalyticCenteringUnavailable);
                }
                (kind.lebesgue_mean(), 0.0)
            }
            Centering::Empirical { orbit_len } => {
                let offset = orbit_mean(&kind, sys, orbit_len, seed, 0);
                let check = orbit_mean(&kind, sys, orbit_len, seed, 1) - offset;
                (offset, check)
            }
        };
        Ok(Self {
            kind,
            holder_exponent: 1.0,
            centering,
            offset,
            centering_residual: residual,
        })
    }

    pub fn with_holder_exponent(mut self, eta: f64) -> Self {
        assert!(eta > 0.0 && eta <= 1.0, "Hölder exponent must be in (0,1]");
        self.holder_exponent = eta;
        self
    }

    /// Reads a two-column CSV `x,v(x)` into an uncentered table observable.
    pub fn user_table_from_csv(path: &Path) -> Result<ObservableKind, DynError> {
        let text = std::fs::read_to_string(path)?;
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |field: Option<&str>| -> Result<f64, DynError> {
                field
                    .ok_or_else(|| DynError::TableFormat {
                        line: idx + 1,
                        reason: "expected two comma-separated columns".into(),
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| DynError::TableFormat {
                        line: idx + 1,
                        reason: e.to_string(),
                    })
            };
            xs.push(parse(parts.next())?);
            vs.push(parse(parts.next())?);
        }
        Self::table(xs, vs)
    }

    /// Builds a table kind, validating the monotone grid.
    pub fn table(xs: Vec<f64>, vs: Vec<f64>) -> Result<ObservableKind, DynError> {
        if xs.len() < 2 || xs.len() != vs.len() || xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DynError::TableNotMonotone);
        }
        Ok(ObservableKind::UserTable { xs, vs })
    }

    /// The centered value `v(x)`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.kind.raw(x) - self.offset
    }

    pub fn kind(&self) -> &ObservableKind {
        &self.kind
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

fn orbit_mean(
    kind: &ObservableKind,
    sys: &MapSystem,
    orbit_len: usize,
    seed: u64,
    stream: u64,
) -> f64 {
    let mut rng = crate::rng::stream_rng(seed, stream);
    let mut x = sys.sample_invariant(&mut rng);
    let mut acc = crate::rng::KahanSum::new();
    for _ in 0..orbit_len {
        acc.add(kind.raw(x));
        x = sys.orbit_step(x, &mut rng);
    }
    acc.value() / orbit_len as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stock_observables_are_centered_for_doubling() {
        let v = Observable::centered_linear();
        assert_eq!(v.eval(0.5), 0.0);
        assert_eq!(v.eval(1.0), 0.5);
        let c = Observable::cosine();
        assert!((c.eval(0.0) - 1.0).abs() < 1e-15);
        assert!((c.eval(0.25)).abs() < 1e-15);
    }

    #[test]
    fn analytic_centering_rejected_for_intermittent_maps() {
        let sys = MapSystem::pomeau_manneville(0.2).unwrap();
        assert!(matches!(
            Observable::centered(ObservableKind::CenteredLinear, &sys, Centering::Analytic, 0),
            Err(DynError::AnalyticCenteringUnavailable)
        ));
    }

    #[test]
    fn empirical_centering_zeroes_the_orbit_mean() {
        let sys = MapSystem::pomeau_manneville(0.1).unwrap();
        let obs = Observable::centered(
            ObservableKind::CenteredLinear,
            &sys,
            Centering::Empirical { orbit_len: 100_000 },
            42,
        )
        .unwrap();
        // the recorded residual comes from an independent orbit
        assert!(
            obs.centering_residual.abs() < 0.01,
            "residual {}",
            obs.centering_residual
        );
        // intermittency shifts invariant mass toward the neutral fixed
        // point, so the raw mean of x − 1/2 sits slightly below zero
        assert!(obs.offset() > -0.2 && obs.offset() < 0.0, "{}", obs.offset());
    }

    #[test]
    fn table_validation_and_interpolation() {
        assert!(Observable::table(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        let kind = Observable::table(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        let sys = MapSystem::doubling();
        let obs = Observable::centered(kind, &sys, Centering::Analytic, 0).unwrap();
        // tent function has Lebesgue mean 1/2
        assert!((obs.offset() - 0.5).abs() < 1e-12);
        assert!((obs.eval(0.25) - (0.5 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn table_csv_round_trip() {
        let dir = std::env::temp_dir().join("wiplab-obs-test");
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("table.csv");
        std::fs::write(&file, "# x, v\n0.0, 1.0\n0.5, 3.0\n1.0, 1.0\n").unwrap();
        let kind = Observable::user_table_from_csv(&file).unwrap();
        match &kind {
            ObservableKind::UserTable { xs, .. } => assert_eq!(xs.len(), 3),
            _ => panic!("expected a table"),
        }
    }
}
