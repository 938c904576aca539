use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A coefficient as a function of time.
///
/// In JSON a bare number is a constant; otherwise the object carries a
/// `kind` tag, e.g. `{"kind": "sinusoid", "amplitude": 0.2, "omega": 1.3}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(try_from = "Repr")]
pub enum TimeFunction {
    Constant {
        value: f64,
    },
    /// Σ cₖ tᵏ
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// offset + amplitude·sin(omega·t + phase)
    Sinusoid {
        offset: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    /// Linear interpolation through (t, value) pairs, constant outside.
    PiecewiseLinear {
        points: Vec<[f64; 2]>,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Number(f64),
    Tagged(Tagged),
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Tagged {
    Constant {
        value: f64,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    Sinusoid {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    PiecewiseLinear {
        points: Vec<[f64; 2]>,
    },
}

impl TryFrom<Repr> for TimeFunction {
    type Error = Error;

    fn try_from(r: Repr) -> Result<Self> {
        let f = match r {
            Repr::Number(value) => TimeFunction::Constant { value },
            Repr::Tagged(Tagged::Constant { value }) => TimeFunction::Constant { value },
            Repr::Tagged(Tagged::Polynomial { coeffs }) => TimeFunction::Polynomial { coeffs },
            Repr::Tagged(Tagged::Sinusoid { offset, amplitude, omega, phase }) => {
                TimeFunction::Sinusoid { offset, amplitude, omega, phase }
            }
            Repr::Tagged(Tagged::PiecewiseLinear { points }) => TimeFunction::PiecewiseLinear { points },
        };
        f.validate()?;
        Ok(f)
    }
}

impl TimeFunction {
    pub fn constant(value: f64) -> Self {
        TimeFunction::Constant { value }
    }

    pub fn sinusoid(offset: f64, amplitude: f64, omega: f64, phase: f64) -> Self {
        TimeFunction::Sinusoid { offset, amplitude, omega, phase }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let ok = match self {
            TimeFunction::Constant { value } => value.is_finite(),
            TimeFunction::Polynomial { coeffs } => finite(coeffs),
            TimeFunction::Sinusoid { offset, amplitude, omega, phase } => {
                finite(&[*offset, *amplitude, *omega, *phase])
            }
            TimeFunction::PiecewiseLinear { points } => {
                if points.is_empty() {
                    return Err(Error::InvalidArgument("piecewise_linear needs at least one point".into()));
                }
                if points.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                    return Err(Error::InvalidArgument(
                        "piecewise_linear times must be strictly increasing".into(),
                    ));
                }
                points.iter().all(|p| finite(p))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("non-finite time-function parameters in {self:?}")))
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Constant { value } => *value,
            TimeFunction::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            TimeFunction::Sinusoid { offset, amplitude, omega, phase } => {
                offset + amplitude * (omega * t + phase).sin()
            }
            TimeFunction::PiecewiseLinear { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if t <= first[0] {
                    return first[1];
                }
                if t >= last[0] {
                    return last[1];
                }
                let i = points.partition_point(|p| p[0] <= t);
                let (a, b) = (points[i - 1], points[i]);
                a[1] + (b[1] - a[1]) * (t - a[0]) / (b[0] - a[0])
            }
        }
    }

    /// Smooth presets have closed-form derivatives; piecewise-linear does not.
    pub fn is_analytic(&self) -> bool {
        !matches!(self, TimeFunction::PiecewiseLinear { .. })
    }

    pub fn derivative(&self) -> Option<TimeFunction> {
        Some(match self {
            TimeFunction::Constant { .. } => TimeFunction::constant(0.0),
            TimeFunction::Polynomial { coeffs } => TimeFunction::Polynomial {
                coeffs: coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect(),
            },
            TimeFunction::Sinusoid { amplitude, omega, phase, .. } => TimeFunction::Sinusoid {
                offset: 0.0,
                amplitude: amplitude * omega,
                omega: *omega,
                phase: phase + FRAC_PI_2,
            },
            TimeFunction::PiecewiseLinear { .. } => return None,
        })
    }
}

impl Default for TimeFunction {
    fn default() -> Self {
        TimeFunction::constant(0.0)
    }
}

/// The three coefficients b₁(t), b₂(t), b₃(t).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientSet {
    #[serde(default)]
    pub b1: TimeFunction,
    #[serde(default)]
    pub b2: TimeFunction,
    #[serde(default)]
    pub b3: TimeFunction,
}

impl CoefficientSet {
    pub fn new(b1: TimeFunction, b2: TimeFunction, b3: TimeFunction) -> Self {
        Self { b1, b2, b3 }
    }

    pub fn constant(b: [f64; 3]) -> Self {
        Self::new(TimeFunction::constant(b[0]), TimeFunction::constant(b[1]), TimeFunction::constant(b[2]))
    }

    pub fn eval(&self, t: f64) -> [f64; 3] {
        [self.b1.eval(t), self.b2.eval(t), self.b3.eval(t)]
    }

    pub fn is_analytic(&self) -> bool {
        self.b1.is_analytic() && self.b2.is_analytic() && self.b3.is_analytic()
    }

    pub fn derivative(&self) -> Option<CoefficientSet> {
        Some(Self::new(self.b1.derivative()?, self.b2.derivative()?, self.b3.derivative()?))
    }

    pub fn validate(&self) -> Result<()> {
        self.b1.validate()?;
        self.b2.validate()?;
        self.b3.validate()
    }
}
