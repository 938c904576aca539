//! Dormand–Prince 5(4) with dense output, plus fixed-step modes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// States beyond this norm are treated as an escape to infinity.
const BLOW_UP_NORM: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StepMode {
    Adaptive,
    FixedDopri5 { h: f64 },
    FixedRk4 { h: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub mode: StepMode,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, mode: StepMode::Adaptive, max_steps: 2_000_000 }
    }
}

impl IntegratorOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    pub fn fixed_dopri5(h: f64) -> Self {
        Self { mode: StepMode::FixedDopri5 { h }, ..Self::default() }
    }

    pub fn fixed_rk4(h: f64) -> Self {
        Self { mode: StepMode::FixedRk4 { h }, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("tolerances must be positive");
        }
        match self.mode {
            StepMode::FixedDopri5 { h } | StepMode::FixedRk4 { h } if !(h > 0.0) => bad("fixed step must be positive"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub max_error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// The domain predicate failed; the trajectory ends at the located exit time.
    DomainExit { t: f64 },
    /// Step-size underflow or escape to infinity.
    BlowUp { t: f64 },
    /// The right-hand side could not be evaluated.
    RhsFailure { t: f64, message: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Segment<const N: usize> {
    /// Hairer's continuous extension of DOPRI5.
    Dopri { t0: f64, h: f64, r: [[f64; N]; 5] },
    /// Cubic Hermite interpolation for RK4 steps.
    Hermite { t0: f64, h: f64, y0: [f64; N], y1: [f64; N], f0: [f64; N], f1: [f64; N] },
}

impl<const N: usize> Segment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        match self {
            Segment::Dopri { t0, h, r } => {
                let th = (t - t0) / h;
                let th1 = 1.0 - th;
                let mut y = [0.0; N];
                for i in 0..N {
                    y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
                }
                y
            }
            Segment::Hermite { t0, h, y0, y1, f0, f1 } => {
                let s = (t - t0) / h;
                let (s2, s3) = (s * s, s * s * s);
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                let mut y = [0.0; N];
                for i in 0..N {
                    y[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
                }
                y
            }
        }
    }
}

/// Accepted steps of an integration with dense output between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub stats: IntegratorStats,
    pub termination: Termination,
    segments: Vec<Segment<N>>,
}

impl<const N: usize> Trajectory<N> {
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectories are never empty")
    }

    pub fn is_complete(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn final_state(&self) -> [f64; N] {
        *self.states.last().expect("trajectories are never empty")
    }

    /// Dense-output state at t inside the covered window.
    pub fn eval(&self, t: f64) -> Result<[f64; N]> {
        let (a, b) = (self.t_start(), self.t_end());
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if !(t >= a - slack && t <= b + slack) {
            return Err(Error::InvalidArgument(format!("t = {t} outside trajectory window [{a}, {b}]")));
        }
        if self.segments.is_empty() {
            return Ok(self.states[0]);
        }
        let i = self.times.partition_point(|&s| s <= t).clamp(1, self.segments.len()) - 1;
        Ok(self.segments[i].eval(t))
    }

    pub fn resample(&self, times: &[f64]) -> Result<Vec<[f64; N]>> {
        times.iter().map(|&t| self.eval(t)).collect()
    }

    /// `n` equally spaced sample times covering the window.
    pub fn uniform_times(&self, n: usize) -> Vec<f64> {
        let (a, b) = (self.t_start(), self.t_end());
        if n < 2 {
            return vec![a];
        }
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

fn norm_inf<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

struct DopriStep<const N: usize> {
    y1: [f64; N],
    k7: [f64; N],
    err: f64,
    segment: Segment<N>,
}

fn dopri_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64, opts: &IntegratorOptions) -> Result<DopriStep<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k2 = f(t + C2 * h, &axpy(y, &[(h * A21, k1)]))?;
    let k3 = f(t + C3 * h, &axpy(y, &[(h * A31, k1), (h * A32, &k2)]))?;
    let k4 = f(t + C4 * h, &axpy(y, &[(h * A41, k1), (h * A42, &k2), (h * A43, &k3)]))?;
    let k5 = f(t + C5 * h, &axpy(y, &[(h * A51, k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]))?;
    let k6 = f(
        t + h,
        &axpy(y, &[(h * A61, k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)]),
    )?;
    let y1 = axpy(y, &[(h * A71, k1), (h * A73, &k3), (h * A74, &k4), (h * A75, &k5), (h * A76, &k6)]);
    let k7 = f(t + h, &y1)?;
    let mut acc = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
        acc += (e / sc).powi(2);
    }
    let err = (acc / N as f64).sqrt();
    let mut r = [[0.0; N]; 5];
    for i in 0..N {
        let dy = y1[i] - y[i];
        let bspl = h * k1[i] - dy;
        r[0][i] = y[i];
        r[1][i] = dy;
        r[2][i] = bspl;
        r[3][i] = dy - h * k7[i] - bspl;
        r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Ok(DopriStep { y1, k7, err, segment: Segment::Dopri { t0: t, h, r } })
}

fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k2 = f(t + 0.5 * h, &axpy(y, &[(0.5 * h, k1)]))?;
    let k3 = f(t + 0.5 * h, &axpy(y, &[(0.5 * h, &k2)]))?;
    let k4 = f(t + h, &axpy(y, &[(h, &k3)]))?;
    Ok(axpy(y, &[(h / 6.0, k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)]))
}

/// `n` classical RK4 steps of size `h` (negative `h` integrates backwards).
pub fn rk4_fixed<const N: usize, F>(f: F, t0: f64, y0: [f64; N], h: f64, n: usize) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let (mut t, mut y) = (t0, y0);
    for _ in 0..n {
        let k1 = f(t, &y)?;
        y = rk4_step(&f, t, &y, &k1, h)?;
        t += h;
    }
    Ok(y)
}

fn initial_step<const N: usize>(y0: &[f64; N], f0: &[f64; N], span: f64, opts: &IntegratorOptions) -> f64 {
    let sc = |i: usize| opts.atol + opts.rtol * y0[i].abs();
    let d0 = (0..N).map(|i| (y0[i] / sc(i)).powi(2)).sum::<f64>().sqrt();
    let d1 = (0..N).map(|i| (f0[i] / sc(i)).powi(2)).sum::<f64>().sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(0.1 * span).max(1e-10 * span)
}

/// Locates the first violation of `inside` within a segment by bisection.
fn locate_exit<const N: usize>(seg: &Segment<N>, t0: f64, t1: f64, inside: &dyn Fn(&[f64; N]) -> bool) -> (f64, [f64; N]) {
    let (mut lo, mut hi) = (t0, t1);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if inside(&seg.eval(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, seg.eval(lo))
}

/// Integrates and always returns the (possibly partial) trajectory.
pub fn integrate_partial<const N: usize, F>(
    f: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    opts: &IntegratorOptions,
    inside: &dyn Fn(&[f64; N]) -> bool,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    opts.validate()?;
    if !(t1 > t0) {
        return Err(Error::InvalidArgument(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    if !y0.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite initial state".into()));
    }
    if !inside(&y0) {
        return Err(Error::Domain("initial state outside the domain".into()));
    }
    let span = t1 - t0;
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0],
        stats: IntegratorStats::default(),
        termination: Termination::Completed,
        segments: Vec::new(),
    };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    traj.stats.evaluations += 1;
    let mut h = match opts.mode {
        StepMode::Adaptive => initial_step(&y, &k1, span, opts),
        StepMode::FixedDopri5 { h } | StepMode::FixedRk4 { h } => h,
    };
    let mut last_rhs_error: Option<Error> = None;
    while t1 - t > 1e-14 * span {
        if traj.stats.steps + traj.stats.rejected >= opts.max_steps {
            traj.termination = Termination::BlowUp { t };
            return Ok(traj);
        }
        let mut step_h = h.min(t1 - t);
        if t + step_h > t1 || t1 - (t + step_h) < 1e-14 * span {
            step_h = t1 - t;
        }
        let hmin = 1e-14 * t.abs().max(1.0);
        if step_h < hmin {
            traj.termination = match last_rhs_error.take() {
                Some(e) => Termination::RhsFailure { t, message: e.to_string() },
                None => Termination::BlowUp { t },
            };
            return Ok(traj);
        }
        let fixed = !matches!(opts.mode, StepMode::Adaptive);
        let attempt = match opts.mode {
            StepMode::FixedRk4 { .. } => rk4_step(&f, t, &y, &k1, step_h).and_then(|y1| {
                let f1 = f(t + step_h, &y1)?;
                Ok(DopriStep {
                    y1,
                    k7: f1,
                    err: 0.0,
                    segment: Segment::Hermite { t0: t, h: step_h, y0: y, y1, f0: k1, f1 },
                })
            }),
            _ => dopri_step(&f, t, &y, &k1, step_h, opts),
        };
        traj.stats.evaluations += if matches!(opts.mode, StepMode::FixedRk4 { .. }) { 4 } else { 6 };
        let step = match attempt {
            Ok(s) if s.y1.iter().all(|v| v.is_finite()) && s.err.is_finite() => s,
            Ok(_) => {
                if fixed {
                    traj.termination = Termination::BlowUp { t };
                    return Ok(traj);
                }
                traj.stats.rejected += 1;
                h = 0.25 * step_h;
                continue;
            }
            Err(e) => {
                if fixed {
                    traj.termination = Termination::RhsFailure { t, message: e.to_string() };
                    return Ok(traj);
                }
                last_rhs_error = Some(e);
                traj.stats.rejected += 1;
                h = 0.25 * step_h;
                continue;
            }
        };
        if !fixed && step.err > 1.0 {
            traj.stats.rejected += 1;
            h = step_h * (0.9 * step.err.powf(-0.2)).clamp(0.2, 1.0);
            continue;
        }
        last_rhs_error = None;
        traj.stats.max_error_estimate = traj.stats.max_error_estimate.max(step.err);
        let t_new = if step_h == t1 - t { t1 } else { t + step_h };
        if !inside(&step.y1) {
            let (te, ye) = locate_exit(&step.segment, t, t_new, inside);
            if te > t {
                traj.times.push(te);
                traj.states.push(ye);
                traj.segments.push(step.segment);
            }
            traj.termination = Termination::DomainExit { t: te };
            return Ok(traj);
        }
        traj.stats.steps += 1;
        traj.times.push(t_new);
        traj.states.push(step.y1);
        traj.segments.push(step.segment);
        t = t_new;
        y = step.y1;
        k1 = step.k7;
        if norm_inf(&y) > BLOW_UP_NORM {
            traj.termination = Termination::BlowUp { t };
            return Ok(traj);
        }
        if !fixed {
            let fac = if step.err == 0.0 { 5.0 } else { (0.9 * step.err.powf(-0.2)).clamp(0.2, 5.0) };
            h = step_h * fac;
        }
    }
    Ok(traj)
}

/// As [`integrate_partial`], with blow-up and right-hand-side failures as errors.
/// Domain exits still return the truncated trajectory.
pub fn integrate_with_domain<const N: usize, F>(
    f: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    opts: &IntegratorOptions,
    inside: &dyn Fn(&[f64; N]) -> bool,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let traj = integrate_partial(f, y0, t0, t1, opts, inside)?;
    match &traj.termination {
        Termination::BlowUp { t } => Err(Error::BlowUp { t: *t, state: traj.final_state().to_vec() }),
        Termination::RhsFailure { message, .. } => Err(Error::Domain(message.clone())),
        _ => Ok(traj),
    }
}

pub fn integrate<const N: usize, F>(f: F, y0: [f64; N], t0: f64, t1: f64, opts: &IntegratorOptions) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    integrate_with_domain(f, y0, t0, t1, opts, &|_| true)
}
