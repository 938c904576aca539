use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};

/// Drift statistics of one invariant along a bundle of trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Value at the first valid sample.
    pub reference: f64,
    /// max |F(t) − F(t₀)| over valid samples.
    pub drift: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Samples where the invariant could not be evaluated.
    pub flagged: Vec<(f64, String)>,
}

/// Evaluates `invariant` on the bundle at the given times.
pub fn monitor_on_grid<const N: usize>(
    name: &str,
    bundle: &[&Trajectory<N>],
    invariant: &dyn Fn(&[[f64; N]]) -> Result<f64>,
    times: &[f64],
    tolerance: f64,
) -> Result<InvariantReport> {
    if bundle.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory bundle".into()));
    }
    let mut report = InvariantReport {
        name: name.to_string(),
        times: Vec::new(),
        values: Vec::new(),
        reference: f64::NAN,
        drift: 0.0,
        tolerance,
        pass: false,
        flagged: Vec::new(),
    };
    for &t in times {
        let states: Result<Vec<[f64; N]>> = bundle.iter().map(|tr| tr.eval(t)).collect();
        match states.and_then(|s| invariant(&s)) {
            Ok(v) if v.is_finite() => {
                report.times.push(t);
                report.values.push(v);
            }
            Ok(v) => report.flagged.push((t, format!("non-finite value {v}"))),
            Err(e) => report.flagged.push((t, e.to_string())),
        }
    }
    if let Some(&f0) = report.values.first() {
        report.reference = f0;
        report.drift = report.values.iter().fold(0.0f64, |m, v| m.max((v - f0).abs()));
        report.pass = report.drift <= tolerance;
    }
    Ok(report)
}

/// Samples the invariant at the accepted steps of the first trajectory that
/// fall inside the common window; the others are resampled by dense output.
pub fn monitor<const N: usize>(
    name: &str,
    bundle: &[&Trajectory<N>],
    invariant: &dyn Fn(&[[f64; N]]) -> Result<f64>,
    tolerance: f64,
) -> Result<InvariantReport> {
    let first = bundle
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory bundle".into()))?;
    let lo = bundle.iter().map(|t| t.t_start()).fold(f64::MIN, f64::max);
    let hi = bundle.iter().map(|t| t.t_end()).fold(f64::MAX, f64::min);
    let grid: Vec<f64> = first.times.iter().copied().filter(|&t| t >= lo && t <= hi).collect();
    monitor_on_grid(name, bundle, invariant, &grid, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, IntegratorOptions};

    fn rotation(w: f64, y0: [f64; 2]) -> Trajectory<2> {
        integrate(move |_, y: &[f64; 2]| Ok([-w * y[1], w * y[0]]), y0, 0.0, 5.0, &IntegratorOptions::default()).unwrap()
    }

    #[test]
    fn conserved_radius() {
        let tr = rotation(1.0, [1.0, 0.5]);
        let r = monitor("radius", &[&tr], &|s| Ok(s[0][0].hypot(s[0][1])), 1e-8).unwrap();
        assert!(r.pass && r.drift < 1e-8);
    }

    #[test]
    fn point_free_constant_has_zero_drift() {
        let tr = rotation(1.0, [1.0, 0.0]);
        let r = monitor("F1", &[&tr], &|_| Ok(-0.25), 0.0).unwrap();
        assert_eq!(r.drift, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn mismatched_grids_are_resampled() {
        let a = rotation(1.0, [1.0, 0.0]);
        let b = rotation(2.3, [0.2, 0.7]);
        let inv = |s: &[[f64; 2]]| Ok(s[0][0].hypot(s[0][1]) * s[1][0].hypot(s[1][1]));
        let r1 = monitor("ab", &[&a, &b], &inv, 1e-7).unwrap();
        let r2 = monitor("ba", &[&b, &a], &inv, 1e-7).unwrap();
        assert!((r1.reference - r2.reference).abs() < 1e-9);
        assert!((r1.drift - r2.drift).abs() < 1e-9);
    }

    #[test]
    fn failures_are_flagged_not_fatal() {
        let tr = rotation(1.0, [1.0, 0.0]);
        let inv = |s: &[[f64; 2]]| {
            if s[0][1] > 0.9 {
                Err(Error::Domain("excluded".into()))
            } else {
                Ok(1.0)
            }
        };
        let r = monitor("partial", &[&tr], &inv, 1e-12).unwrap();
        assert!(!r.flagged.is_empty() && r.pass);
    }
}
