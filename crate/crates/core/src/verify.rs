//! Property checks over seeded samples, grouped into suites.
//!
//! Every check reduces a family of residuals to its worst value and compares it
//! with a fixed threshold. Sampling is keyed by the seed and the check name, so
//! reports do not depend on scheduling.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::applications::{AppSystem, Application, ModelParams, ParentClass};
use crate::class_i4::{
    i4_F2, i4_F2_13, i4_F2_23, i4_F3, i4_constants, i4_fields, i4_hamiltonians, i4_perturbed_rhs_b,
    i4_rhs, i4_rhs_b, i4_superpose, i4_superpose_flat, i4_weight, riccati_mu, riccati_rhs, riccati_superpose,
    riccati_superpose_flat, select_branch, Branch, I4System,
};
use crate::class_p2::{
    p2_F2, p2_F2_13, p2_F2_23, p2_F3, p2_c13, p2_constants, p2_fields, p2_hamiltonians, p2_perturbed_rhs_b,
    p2_rhs, p2_rhs_b, p2_superpose_flat_candidates, p2_superpose_galilean, p2_superpose_nonrel, p2_weight,
    P2System, P2Variant,
};
use crate::conformal::{
    bracket_residual, bracket_residual_1d, conf_factor_xy, conf_field_xy, killing_residual, ConformalGenerator,
    ConformalGenerator1D,
};
use crate::dynamics::{integrate_partial, monitor, CoefficientSet, IntegratorOptions, TimeFunction, Trajectory};
use crate::error::{Error, Result};
use crate::fields::{gradient_fd, Point, TangentVector};
use crate::ktrig::{identity_residuals, wrap_angle, KappaSignature};
use crate::symplectic::{invariance_residual, vg_bracket_residual, LieHamiltonSystem, SymplecticWeight};
use crate::tables::{evaluate_table, TableId, TABLE_TOLERANCE};

pub const BRACKET_TOLERANCE: f64 = 1e-6;
pub const KILLING_TOLERANCE: f64 = 1e-7;
pub const PAIRING_TOLERANCE: f64 = 1e-8;
pub const CASIMIR_TOLERANCE: f64 = 1e-10;
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
pub const DRIFT_TOLERANCE: f64 = 1e-7;
pub const SUPERPOSITION_TOLERANCE: f64 = 1e-6;
pub const PUSHFORWARD_TOLERANCE: f64 = 1e-7;
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-10;
pub const REDUCTION_TOLERANCE: f64 = 1e-5;
/// Accepted log–log slope windows.
pub const LINEAR_SLOPE: (f64, f64) = (0.9, 1.1);
pub const QUADRATIC_SLOPE: (f64, f64) = (1.8, 2.2);

/// I₄ curvatures used throughout.
pub const I4_KAPPAS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
/// Integration window of the dynamical checks.
pub const WINDOW: (f64, f64) = (0.0, 5.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Brackets,
    Poisson,
    Hamiltonian,
    Killing,
    Pushforward,
    Identities,
    Contraction,
    Conservation,
    Superposition,
    Reduction,
    Tables,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Brackets,
        Suite::Poisson,
        Suite::Hamiltonian,
        Suite::Killing,
        Suite::Pushforward,
        Suite::Identities,
        Suite::Contraction,
        Suite::Conservation,
        Suite::Superposition,
        Suite::Reduction,
        Suite::Tables,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Brackets => "brackets",
            Suite::Poisson => "poisson",
            Suite::Hamiltonian => "hamiltonian",
            Suite::Killing => "killing",
            Suite::Pushforward => "pushforward",
            Suite::Identities => "identities",
            Suite::Contraction => "contraction",
            Suite::Conservation => "conservation",
            Suite::Superposition => "superposition",
            Suite::Reduction => "reduction",
            Suite::Tables => "tables",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random points per check.
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 42, samples: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Number of evaluated samples (points, times or sweep members).
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, threshold: f64, samples: usize) -> Check {
        Check { name: name.into(), residual, threshold, pass: residual <= threshold, samples, note: None }
    }

    fn failed(name: impl Into<String>, threshold: f64, why: String) -> Check {
        Check { name: name.into(), residual: f64::INFINITY, threshold, pass: false, samples: 0, note: Some(why) }
    }

    fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }

    /// Worst residual of a batch; any evaluation error fails the check.
    fn aggregate(name: impl Into<String>, threshold: f64, results: Vec<Result<f64>>) -> Check {
        let name = name.into();
        let n = results.len();
        let mut worst = 0.0f64;
        let mut errors = 0;
        let mut first = None;
        for r in results {
            match r {
                Ok(v) if v.is_finite() => worst = worst.max(v),
                Ok(v) => {
                    errors += 1;
                    first.get_or_insert_with(|| format!("non-finite residual {v}"));
                }
                Err(e) => {
                    errors += 1;
                    first.get_or_insert_with(|| e.to_string());
                }
            }
        }
        if n == 0 {
            return Check::failed(name, threshold, "no samples".into());
        }
        let mut c = Check::new(name, worst, threshold, n);
        if errors > 0 {
            c.pass = false;
            c.note = Some(format!("{errors} of {n} samples failed: {}", first.unwrap_or_default()));
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

type Task = Box<dyn Fn() -> Check + Send + Sync>;

fn run(tasks: Vec<Task>) -> Vec<Check> {
    tasks.par_iter().map(|t| t()).collect()
}

fn rng_for(name: &str, seed: u64) -> ChaCha8Rng {
    // FNV-1a of the check name.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

/// Uniform points in `bx` accepted by `accept`, deterministic in (seed, name).
pub fn sample_points(name: &str, seed: u64, n: usize, bx: [[f64; 2]; 2], accept: &dyn Fn(Point) -> bool) -> Vec<Point> {
    let mut rng = rng_for(name, seed);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n && tries < 1000 * n.max(1) {
        tries += 1;
        let p = [rng.gen_range(bx[0][0]..=bx[0][1]), rng.gen_range(bx[1][0]..=bx[1][1])];
        if accept(p) {
            out.push(p);
        }
    }
    out
}

const I4_BOX: [[f64; 2]; 2] = [[-1.2, 1.2], [-1.2, 1.2]];
const P2_BOX: [[f64; 2]; 2] = [[-1.0, 1.0], [-1.2, 1.2]];
const UNIT_BOX: [[f64; 2]; 2] = [[-1.0, 1.0], [-1.0, 1.0]];

fn i4_accept(p: Point) -> bool {
    (p[0] - p[1]).abs() > 0.1
}

fn p2_accept(p: Point) -> bool {
    p[1].abs() > 0.2
}

fn app_params() -> ModelParams {
    ModelParams { lambda: 0.8 }
}

/// A Lie–Hamilton system with a sampling region.
#[derive(Clone)]
pub struct Subject {
    pub system: Arc<dyn LieHamiltonSystem>,
    pub sample_box: [[f64; 2]; 2],
    pub accept: Arc<dyn Fn(Point) -> bool + Send + Sync>,
}

/// Every shipped (X, h, ω) triple: I₄ at five curvatures, P₂ on the nine spaces,
/// and the six applications at the matching curvatures.
pub fn subjects() -> Vec<Subject> {
    let mut out = Vec::new();
    for kappa in I4_KAPPAS {
        out.push(Subject { system: Arc::new(I4System { kappa }), sample_box: I4_BOX, accept: Arc::new(i4_accept) });
    }
    for k in KappaSignature::normalized() {
        out.push(Subject { system: Arc::new(P2System { kappas: k }), sample_box: P2_BOX, accept: Arc::new(p2_accept) });
    }
    for sys in app_systems() {
        out.push(Subject {
            system: Arc::new(sys),
            sample_box: sys.sample_box(),
            accept: Arc::new(move |p| sys.in_source_domain(p)),
        });
    }
    out
}

/// Each application at every curvature its class is checked at.
pub fn app_systems() -> Vec<AppSystem> {
    let mut out = Vec::new();
    for app in Application::ALL {
        match app.parent() {
            ParentClass::I4 => {
                for kappa in I4_KAPPAS {
                    out.push(AppSystem::i4(app, kappa, app_params()).expect("valid parameters"));
                }
            }
            ParentClass::P2 => {
                for k in KappaSignature::normalized() {
                    out.push(AppSystem::new(app, k, app_params()).expect("valid parameters"));
                }
            }
        }
    }
    out
}

fn subject_tasks(
    opts: &VerifyOptions,
    prefix: &'static str,
    threshold: f64,
    f: fn(&dyn LieHamiltonSystem, Point) -> Result<f64>,
) -> Vec<Task> {
    let opts = *opts;
    subjects()
        .into_iter()
        .map(|s| {
            Box::new(move || {
                let name = format!("{prefix}/{}", s.system.label());
                let pts = sample_points(&name, opts.seed, opts.samples, s.sample_box, &*s.accept);
                let res = pts.iter().map(|&p| f(&*s.system, p)).collect();
                Check::aggregate(name, threshold, res)
            }) as Task
        })
        .collect()
}

// ---------------------------------------------------------------- identities

/// κ-trigonometric identities on a 10×10×7 grid of (u, v, κ).
pub fn identity_checks(_opts: &VerifyOptions) -> Vec<Check> {
    let kappas = [-1.0, -0.5, -1e-9, 0.0, 1e-9, 0.5, 1.0];
    let grid: Vec<f64> = (0..10).map(|i| -1.2 + 2.4 * i as f64 / 9.0).collect();
    kappas
        .par_iter()
        .map(|&k| {
            let mut res = Vec::new();
            let mut worst_name = "";
            let mut worst = 0.0;
            let mut skipped = 0;
            for &u in &grid {
                for &v in &grid {
                    match identity_residuals(k, u, v) {
                        Ok(r) => {
                            skipped += r.skipped.len();
                            for (n, x) in &r.residuals {
                                if *x > worst {
                                    worst = *x;
                                    worst_name = n;
                                }
                            }
                            res.push(Ok(r.max_residual));
                        }
                        Err(e) => res.push(Err(e)),
                    }
                }
            }
            let c = Check::aggregate(format!("identities/kappa={k:e}"), IDENTITY_TOLERANCE, res);
            let note = match &c.note {
                Some(n) => n.clone(),
                None => format!("worst identity {worst_name}; {skipped} evaluations skipped at poles or for κ-division"),
            };
            c.with_note(note)
        })
        .collect()
}

// ------------------------------------------------------------------ brackets

/// The fifteen conformal brackets on each normalized space and the three 1D ones.
pub fn conformal_bracket_checks(opts: &VerifyOptions) -> Vec<Check> {
    let mut tasks: Vec<Task> = Vec::new();
    let o = *opts;
    for k in KappaSignature::normalized() {
        tasks.push(Box::new(move || {
            let name = format!("conformal/{}", k.label());
            let pts = sample_points(&name, o.seed, o.samples, UNIT_BOX, &|_| true);
            let g = ConformalGenerator::ALL;
            let mut res = Vec::new();
            for &p in &pts {
                let mut worst: Result<f64> = Ok(0.0);
                for i in 0..6 {
                    for j in i + 1..6 {
                        worst = worst.and_then(|w| Ok(w.max(bracket_residual(k, g[i], g[j], p)?)));
                    }
                }
                res.push(worst);
            }
            Check::aggregate(name, BRACKET_TOLERANCE, res).with_note("15 brackets per point")
        }));
    }
    for kappa in [-1.0, 0.0, 1.0] {
        tasks.push(Box::new(move || {
            let name = format!("conformal_1d/kappa={kappa}");
            let pts = sample_points(&name, o.seed, o.samples, UNIT_BOX, &|_| true);
            let g = ConformalGenerator1D::ALL;
            let res = pts
                .iter()
                .map(|p| {
                    let mut w = 0.0f64;
                    for i in 0..3 {
                        for j in i + 1..3 {
                            w = w.max(bracket_residual_1d(kappa, g[i], g[j], p[0])?);
                        }
                    }
                    Ok(w)
                })
                .collect();
            Check::aggregate(name, BRACKET_TOLERANCE, res)
        }));
    }
    run(tasks)
}

/// Vessiot–Guldberg relations of every shipped field triple, plus the space-like P₂ variant.
pub fn vg_bracket_checks(opts: &VerifyOptions) -> Vec<Check> {
    let mut tasks = subject_tasks(opts, "vg", BRACKET_TOLERANCE, |s, p| {
        vg_bracket_residual(&|q| s.fields(q), s.algebra_kappa(), 1.0, p)
    });
    let o = *opts;
    for k in KappaSignature::normalized() {
        tasks.push(Box::new(move || {
            let name = format!("vg/class_p2_space_like({})", k.label());
            let pts = sample_points(&name, o.seed, o.samples, P2_BOX, &p2_accept);
            let c13 = p2_c13(k, P2Variant::SpaceLike);
            let res = pts
                .iter()
                .map(|&p| vg_bracket_residual(&|q| p2_fields(k, q, P2Variant::SpaceLike), k.kappa1, c13, p))
                .collect();
            Check::aggregate(name, BRACKET_TOLERANCE, res)
        }));
    }
    run(tasks)
}

// ------------------------------------------------------------------- killing

/// ℒ_X g = μ_X g for the six generators; κ₂ = 0 spaces only check the (x, x) component.
pub fn killing_checks(opts: &VerifyOptions) -> Vec<Check> {
    let o = *opts;
    let mut tasks: Vec<Task> = Vec::new();
    for k in KappaSignature::normalized() {
        for gen in ConformalGenerator::ALL {
            tasks.push(Box::new(move || {
                let name = format!("killing/{}/{}", k.label(), gen.name());
                let pts = sample_points(&name, o.seed, o.samples, UNIT_BOX, &|_| true);
                let field = move |q: Point| conf_field_xy(k, gen, q);
                let mu = move |q: Point| conf_factor_xy(k, gen, q);
                let res = pts.iter().map(|&p| Ok(killing_residual(k, &field, &mu, p)?.residual)).collect();
                let c = Check::aggregate(name, KILLING_TOLERANCE, res);
                if k.kappa2 == 0.0 {
                    c.with_note("degenerate metric: (x, x) component only")
                } else {
                    c
                }
            }));
        }
    }
    run(tasks)
}

// --------------------------------------------------------- poisson, casimir

pub fn poisson_checks(opts: &VerifyOptions) -> Vec<Check> {
    run(subject_tasks(opts, "poisson", CASIMIR_TOLERANCE, |s, p| {
        let h = s.hamiltonians(p)?;
        let scale = 1.0 + h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(s.poisson_residual(p)? / scale)
    }))
}

/// The Casimir evaluated on the Hamiltonians equals its constant value.
pub fn casimir_checks(opts: &VerifyOptions) -> Vec<Check> {
    run(subject_tasks(opts, "casimir", CASIMIR_TOLERANCE, |s, p| {
        Ok((s.casimir_at(p)? - s.casimir_value()).abs())
    }))
}

// --------------------------------------------------------------- hamiltonian

pub fn pairing_checks(opts: &VerifyOptions) -> Vec<Check> {
    run(subject_tasks(opts, "pairing", PAIRING_TOLERANCE, |s, p| s.pairing_residual(p)))
}

/// Closed-form gradients against central differences of the Hamiltonians.
pub fn gradient_checks(opts: &VerifyOptions) -> Vec<Check> {
    run(subject_tasks(opts, "gradient", BRACKET_TOLERANCE, |s, p| {
        let g = s.hamiltonian_gradients(p)?;
        let mut w = 0.0f64;
        for (i, gi) in g.iter().enumerate() {
            let fd = gradient_fd(&|q| Ok(s.hamiltonians(q)?[i]), p)?;
            let scale = 1.0 + gi[0].abs().max(gi[1].abs());
            w = w.max((fd[0] - gi[0]).abs().max((fd[1] - gi[1]).abs()) / scale);
        }
        Ok(w)
    }))
}

/// ℒ_{Xᵢ}ω = 0, relative to |W|‖Xᵢ‖.
pub fn invariance_checks(opts: &VerifyOptions) -> Vec<Check> {
    let o = *opts;
    let tasks = subjects()
        .into_iter()
        .map(|s| {
            Box::new(move || {
                let name = format!("invariance/{}", s.system.label());
                let pts = sample_points(&name, o.seed, o.samples, s.sample_box, &*s.accept);
                let sys = s.system.clone();
                let w = SymplecticWeight::new(move |q| sys.weight(q));
                let res = pts
                    .iter()
                    .map(|&p| {
                        let x = s.system.fields(p)?;
                        let wp = s.system.weight(p)?.abs();
                        let mut worst = 0.0f64;
                        for (i, xi) in x.iter().enumerate() {
                            let sys = s.system.clone();
                            let field = move |q: Point| Ok::<TangentVector, Error>(sys.fields(q)?[i]);
                            let r = invariance_residual(&w, &field, p)?;
                            worst = worst.max(r / (1.0 + wp * xi.norm()));
                        }
                        Ok(worst)
                    })
                    .collect();
                Check::aggregate(name, BRACKET_TOLERANCE, res)
            }) as Task
        })
        .collect();
    run(tasks)
}

// --------------------------------------------------------------- pushforward

/// Quoted application fields pushed to their class, curved and Euclidean, and inverse round trips.
pub fn pushforward_checks(opts: &VerifyOptions) -> Vec<Check> {
    let o = *opts;
    let mut tasks: Vec<Task> = Vec::new();
    for sys in app_systems() {
        tasks.push(Box::new(move || {
            let name = format!("pushforward/{}", sys.label());
            let cc = sys.coordinate_change();
            let pts = sample_points(&name, o.seed, o.samples, sys.sample_box(), &|p| sys.in_source_domain(p));
            let res = pts
                .iter()
                .map(|&p| {
                    crate::applications::pushforward_residual(&cc, &|q| sys.curved_fields(q), &|q| sys.class_fields(q), p)
                })
                .collect();
            Check::aggregate(name, PUSHFORWARD_TOLERANCE, res)
        }));
        tasks.push(Box::new(move || {
            let name = format!("round_trip/{}", sys.label());
            let cc = sys.coordinate_change();
            let pts = sample_points(&name, o.seed, o.samples, sys.sample_box(), &|p| sys.in_source_domain(p));
            let res = pts.iter().map(|&p| cc.round_trip_residual(p)).collect();
            Check::aggregate(name, ROUND_TRIP_TOLERANCE, res).with_note(format!("inverse sheet: {}", sys.sheet()))
        }));
    }
    for app in Application::ALL {
        tasks.push(Box::new(move || {
            let sys = AppSystem::new(app, KappaSignature::new(0.0, 1.0), app_params()).expect("valid parameters");
            let name = format!("pushforward_euclidean/{}", app.name());
            let cc = sys.coordinate_change();
            let pts = sample_points(&name, o.seed, o.samples, sys.sample_box(), &|p| sys.in_source_domain(p));
            let res = pts
                .iter()
                .map(|&p| {
                    crate::applications::pushforward_residual(
                        &cc,
                        &|q| sys.euclidean_fields(q),
                        &|q| sys.euclidean_class_fields(q),
                        p,
                    )
                })
                .collect();
            Check::aggregate(name, PUSHFORWARD_TOLERANCE, res)
        }));
    }
    run(tasks)
}

// ---------------------------------------------------------------- contraction

/// The sweep κ ∈ {1e−2, …, 1e−8}.
pub fn contraction_sweep() -> Vec<f64> {
    (2..=8).map(|e| 10f64.powi(-e)).collect()
}

/// log₁₀κ steps of ½ over [1e−5, 1e−3]. Above 1e−3 third-order terms of the
/// diagonal Galilei sweep still bias the fitted slope by more than 0.1.
pub fn perturbation_sweep() -> Vec<f64> {
    (0..5).map(|i| 10f64.powf(-3.0 - 0.5 * i as f64)).collect()
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

/// Differences at or below this are treated as unresolved by the slope fits.
pub const RESOLUTION_FLOOR: f64 = 1e-13;

/// Outcome of fitting one difference sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fit", rename_all = "snake_case")]
pub enum SlopeFit {
    /// Identically zero along the sweep.
    Exact,
    /// Fewer than three values above [`RESOLUTION_FLOOR`].
    Unresolved,
    Fitted { slope: f64, points: usize },
}

pub fn fit_slope(sweep: &[f64], diffs: &[f64]) -> SlopeFit {
    if diffs.iter().all(|&v| v == 0.0) {
        return SlopeFit::Exact;
    }
    let (ks, d): (Vec<f64>, Vec<f64>) = sweep.iter().zip(diffs).filter(|(_, &v)| v > RESOLUTION_FLOOR).unzip();
    if d.len() < 3 {
        return SlopeFit::Unresolved;
    }
    SlopeFit::Fitted { slope: loglog_slope(&ks, &d), points: d.len() }
}

/// Slope test over a set of component sequences `diffs[component][sweep index]`.
/// Components that vanish identically along the sweep pass exactly.
fn slope_check(name: String, sweep: &[f64], diffs: Vec<Result<Vec<f64>>>, window: (f64, f64)) -> Check {
    let target = 0.5 * (window.0 + window.1);
    let half = 0.5 * (window.1 - window.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    let mut exact = 0;
    let mut unresolved = 0;
    let mut fitted = 0;
    let mut bound = 0.0f64;
    for d in diffs {
        let d = match d {
            Ok(d) => d,
            Err(e) => return Check::failed(name, half, e.to_string()),
        };
        if d.iter().all(|&v| v == 0.0) {
            exact += 1;
            continue;
        }
        if d.iter().any(|&v| !v.is_finite()) {
            return Check::failed(name, half, format!("difference sequence {d:?} is not finite"));
        }
        // Differences at the roundoff level carry no order information.
        let (ks, d): (Vec<f64>, Vec<f64>) = sweep.iter().zip(&d).filter(|(_, &v)| v > RESOLUTION_FLOOR).unzip();
        if d.len() < 3 {
            unresolved += 1;
            continue;
        }
        let s = loglog_slope(&ks, &d);
        let order = target.round() as i32;
        bound = bound.max(d.iter().zip(&ks).map(|(v, k)| v / k.powi(order)).fold(0.0, f64::max));
        lo = lo.min(s);
        hi = hi.max(s);
        worst = worst.max((s - target).abs());
        fitted += 1;
    }
    let mut c = Check::new(name, worst, half, fitted + exact + unresolved);
    if fitted == 0 && unresolved > 0 {
        c.pass = false;
    }
    c.note = Some(if fitted > 0 {
        format!(
            "slopes in [{lo:.4}, {hi:.4}] over {fitted} components ({exact} exactly zero, {unresolved} below {RESOLUTION_FLOOR:e}); max |diff|/κ^n = {bound:.3e}"
        )
    } else {
        format!("all {exact} components exactly zero")
    });
    c
}

pub const QUANTITY_NAMES: [&str; 11] = ["X1_x", "X1_y", "X2_x", "X2_y", "X3_x", "X3_y", "h1", "h2", "h3", "W", "F2"];

type Quantities = fn(f64, Point, Point) -> Result<Vec<f64>>;

/// Field components, Hamiltonians, weight at p and F⁽²⁾(p, q), in [`QUANTITY_NAMES`] order.
pub fn i4_quantities(kappa: f64, p: Point, q: Point) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = i4_fields(kappa, p).iter().flat_map(|x| x.as_array()).collect();
    v.extend(i4_hamiltonians(kappa, p)?);
    v.push(i4_weight(kappa, p)?);
    v.push(i4_F2(kappa, p, q)?);
    Ok(v)
}

pub fn p2_quantities(k: KappaSignature, p: Point, q: Point) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = p2_fields(k, p, P2Variant::TimeLike)?.iter().flat_map(|x| x.as_array()).collect();
    v.extend(p2_hamiltonians(k, p)?);
    v.push(p2_weight(k, p)?);
    v.push(p2_F2(k, p, q)?);
    Ok(v)
}

fn contraction_task(o: VerifyOptions, name: String, bx: [[f64; 2]; 2], accept: fn(Point) -> bool, q: Quantities) -> Task {
    Box::new(move || {
        let n = (o.samples / 20).max(3);
        let pts = sample_points(&name, o.seed, 2 * n, bx, &accept);
        let sweep = contraction_sweep();
        let mut diffs = Vec::new();
        for pair in pts.chunks_exact(2) {
            let (p, r) = (pair[0], pair[1]);
            let flat = match q(0.0, p, r) {
                Ok(f) => f,
                Err(e) => return Check::failed(name.clone(), 0.1, e.to_string()),
            };
            let curved: Result<Vec<Vec<f64>>> = sweep.iter().map(|&k| q(k, p, r)).collect();
            match curved {
                Ok(c) => {
                    for j in 0..flat.len() {
                        diffs.push(Ok(c.iter().map(|row| (row[j] - flat[j]).abs()).collect()));
                    }
                }
                Err(e) => diffs.push(Err(e)),
            }
        }
        slope_check(name.clone(), &sweep, diffs, LINEAR_SLOPE)
    })
}

/// |curved − flat| = O(κ) for fields, Hamiltonians, weights and F⁽²⁾ of both classes.
pub fn contraction_checks(opts: &VerifyOptions) -> Vec<Check> {
    let o = *opts;
    let mut tasks: Vec<Task> = Vec::new();
    fn i4p(k: f64, p: Point, q: Point) -> Result<Vec<f64>> {
        i4_quantities(k, p, q)
    }
    fn i4m(k: f64, p: Point, q: Point) -> Result<Vec<f64>> {
        i4_quantities(-k, p, q)
    }
    tasks.push(contraction_task(o, "contraction/class_i4/kappa->0+".into(), I4_BOX, i4_accept, i4p));
    tasks.push(contraction_task(o, "contraction/class_i4/kappa->0-".into(), I4_BOX, i4_accept, i4m));
    macro_rules! p2_sweep {
        ($name:expr, $k:expr) => {{
            fn q(t: f64, p: Point, r: Point) -> Result<Vec<f64>> {
                let (k1, k2): (f64, f64) = $k(t);
                p2_quantities(KappaSignature::new(k1, k2), p, r)
            }
            tasks.push(contraction_task(o, $name.into(), P2_BOX, p2_accept, q));
        }};
    }
    p2_sweep!("contraction/class_p2/kappa1->0+,kappa2=1", |t| (t, 1.0));
    p2_sweep!("contraction/class_p2/kappa1->0-,kappa2=1", |t: f64| (-t, 1.0));
    p2_sweep!("contraction/class_p2/kappa1->0+,kappa2=-1", |t| (t, -1.0));
    p2_sweep!("contraction/class_p2/kappa1->0-,kappa2=-1", |t: f64| (-t, -1.0));
    p2_sweep!("contraction/class_p2/kappa2->0+,kappa1=1", |t| (1.0, t));
    p2_sweep!("contraction/class_p2/kappa2->0-,kappa1=1", |t: f64| (1.0, -t));
    p2_sweep!("contraction/class_p2/kappa2->0+,kappa1=-1", |t| (-1.0, t));
    p2_sweep!("contraction/class_p2/kappa2->0-,kappa1=-1", |t: f64| (-1.0, -t));
    run(tasks)
}

/// A truncated-in-κ system compared with its exact counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationTarget {
    /// First-order curved I₄ system, b = (0.7, −0.4, 0.9).
    ClassI4,
    /// First-order c < 0 Ermakov system, λ = 1, Ω² = 0.8.
    ErmakovNeg,
    /// Galilei expansion, sweeping κ₁ at κ₂ = 0.
    GalileiKappa1,
    /// Galilei expansion along κ₁ = κ₂.
    GalileiDiagonal,
}

impl PerturbationTarget {
    pub const ALL: [PerturbationTarget; 4] = [
        PerturbationTarget::ClassI4,
        PerturbationTarget::ErmakovNeg,
        PerturbationTarget::GalileiKappa1,
        PerturbationTarget::GalileiDiagonal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PerturbationTarget::ClassI4 => "class_i4",
            PerturbationTarget::ErmakovNeg => "ermakov_neg",
            PerturbationTarget::GalileiKappa1 => "class_p2/kappa1",
            PerturbationTarget::GalileiDiagonal => "class_p2/kappa1=kappa2",
        }
    }

    pub fn sample_box(self) -> [[f64; 2]; 2] {
        match self {
            PerturbationTarget::ClassI4 => I4_BOX,
            PerturbationTarget::ErmakovNeg => [[0.7, 2.0], [-1.0, 1.0]],
            _ => P2_BOX,
        }
    }

    pub fn accepts(self, p: Point) -> bool {
        match self {
            PerturbationTarget::ClassI4 => i4_accept(p),
            PerturbationTarget::ErmakovNeg => p[0] > 0.0,
            _ => p2_accept(p),
        }
    }
}

const PERTURBATION_B: [f64; 3] = [0.7, -0.4, 0.9];
const PERTURBATION_OMEGA_SQ: f64 = 0.8;

/// Exact minus truncated right-hand side at deformation parameter κ.
pub fn perturbation_residual(target: PerturbationTarget, kappa: f64, p: Point) -> Result<[f64; 2]> {
    let b = PERTURBATION_B;
    let (e, a) = match target {
        PerturbationTarget::ClassI4 => (i4_rhs_b(kappa, b, p), i4_perturbed_rhs_b(kappa, b, p)),
        PerturbationTarget::ErmakovNeg => {
            let params = ModelParams::default();
            let sys = AppSystem::i4(Application::ErmakovNeg, kappa, params)?;
            let c = params.c(Application::ErmakovNeg);
            (
                sys.rhs_b([PERTURBATION_OMEGA_SQ, 0.0, 1.0], p)?,
                crate::applications::ermakov_perturbed_rhs(kappa, c, PERTURBATION_OMEGA_SQ, p)?,
            )
        }
        PerturbationTarget::GalileiKappa1 | PerturbationTarget::GalileiDiagonal => {
            let k2 = if target == PerturbationTarget::GalileiDiagonal { kappa } else { 0.0 };
            let k = KappaSignature::new(kappa, k2);
            (p2_rhs_b(k, b, p)?, p2_perturbed_rhs_b(k, b, p))
        }
    };
    Ok([e[0] - a[0], e[1] - a[1]])
}

/// Truncated-in-κ systems deviate from the exact ones at second order.
pub fn perturbation_checks(opts: &VerifyOptions) -> Vec<Check> {
    let o = *opts;
    PerturbationTarget::ALL
        .par_iter()
        .map(|&target| {
            let name = format!("perturbation/{}", target.name());
            let n = (o.samples / 10).max(3);
            let pts = sample_points(&name, o.seed, n, target.sample_box(), &|p| target.accepts(p));
            let sweep = perturbation_sweep();
            let diffs = pts
                .iter()
                .flat_map(|&p| {
                    let sweep = &sweep;
                    (0..2).map(move |j| {
                        sweep.iter().map(|&k| Ok(perturbation_residual(target, k, p)?[j].abs())).collect::<Result<Vec<f64>>>()
                    })
                })
                .collect();
            slope_check(name, &sweep, diffs, QUADRATIC_SLOPE)
        })
        .collect()
}

// ----------------------------------------------------------- dynamics presets

/// Sinusoidal coefficients with b₁b₃ < 0: flat Riccati flows stay bounded.
pub fn hyperbolic_preset() -> CoefficientSet {
    CoefficientSet::new(
        TimeFunction::sinusoid(-0.3, 0.1, 1.1, 0.0),
        TimeFunction::sinusoid(0.0, 0.25, 0.9, 0.5),
        TimeFunction::sinusoid(0.3, 0.1, 0.7, 0.0),
    )
}

/// Sinusoidal coefficients with b₁b₃ > 0: rotation about a fixed point of the half plane.
pub fn elliptic_preset() -> CoefficientSet {
    CoefficientSet::new(
        TimeFunction::sinusoid(0.6, 0.2, 1.1, 0.0),
        TimeFunction::sinusoid(0.0, 0.25, 0.9, 0.5),
        TimeFunction::sinusoid(0.5, 0.15, 0.7, 0.0),
    )
}

/// The preset used for P₂ dynamics. With b₁b₃ > 0 the orbits escape to infinity
/// on the hyperbolic, anti-de Sitter, de Sitter and κ₂ ≤ 0 flat spaces within the window.
pub fn p2_preset(_k: KappaSignature) -> CoefficientSet {
    hyperbolic_preset()
}

pub const I4_STATES: [Point; 3] = [[0.35, -0.45], [-0.25, 0.55], [0.15, -0.7]];
pub const P2_STATES: [Point; 3] = [[0.3, 0.6], [-0.2, 0.9], [0.1, 0.4]];
/// Outgoing states of the c < 0 Ermakov flow that stay off u = 0 over the window.
pub const ERMAKOV_STATES: [Point; 2] = [[1.0, 0.9], [1.3, 0.7]];
/// States for κ₂ ≤ 0, inside the light cone |x| + |y| < 1 of the hyperbolic preset.
pub const P2_STATES_LORENTZIAN: [Point; 3] = [[0.1, 0.3], [-0.15, 0.25], [0.05, 0.45]];

pub fn p2_states(k: KappaSignature) -> [Point; 3] {
    if k.kappa2 > 0.0 {
        P2_STATES
    } else {
        P2_STATES_LORENTZIAN
    }
}

fn opts_acceptance() -> IntegratorOptions {
    IntegratorOptions::with_tolerances(1e-10, 1e-12)
}

fn integrate_full<F>(f: F, y0: Point, inside: &dyn Fn(&[f64; 2]) -> bool) -> Result<Trajectory<2>>
where
    F: Fn(f64, &[f64; 2]) -> Result<[f64; 2]>,
{
    let tr = integrate_partial(f, y0, WINDOW.0, WINDOW.1, &opts_acceptance(), inside)?;
    if !tr.is_complete() {
        return Err(Error::Domain(format!("integration stopped early: {:?}", tr.termination)));
    }
    Ok(tr)
}

fn i4_trajectories(kappa: f64, states: &[Point]) -> Result<Vec<Trajectory<2>>> {
    let co = hyperbolic_preset();
    states
        .iter()
        .map(|&s| integrate_full(|t, y| Ok(i4_rhs(kappa, &co, t, *y)), s, &|y| y[0] != y[1]))
        .collect()
}

fn p2_trajectories(k: KappaSignature, states: &[Point]) -> Result<Vec<Trajectory<2>>> {
    let co = p2_preset(k);
    states
        .iter()
        .map(|&s| integrate_full(|t, y| p2_rhs(k, &co, t, *y), s, &|y| y[1] > 0.0))
        .collect()
}

type Invariant = Box<dyn Fn(&[[f64; 2]]) -> Result<f64> + Send + Sync>;

fn drift_checks(prefix: String, bundle: Result<Vec<Trajectory<2>>>, invariants: Vec<(&'static str, Invariant)>) -> Vec<Check> {
    let bundle = match bundle {
        Ok(b) => b,
        Err(e) => {
            return invariants
                .iter()
                .map(|(n, _)| Check::failed(format!("{prefix}/{n}"), DRIFT_TOLERANCE, e.to_string()))
                .collect()
        }
    };
    let refs: Vec<&Trajectory<2>> = bundle.iter().collect();
    invariants
        .iter()
        .map(|(n, f)| {
            let name = format!("{prefix}/{n}");
            match monitor(&name, &refs, &**f, DRIFT_TOLERANCE) {
                Ok(r) => {
                    let mut c = Check::new(name, r.drift, DRIFT_TOLERANCE, r.values.len());
                    if !r.flagged.is_empty() {
                        c.pass = false;
                        c.note = Some(format!("{} samples flagged: {}", r.flagged.len(), r.flagged[0].1));
                    } else {
                        c.note = Some(format!("F(t0) = {:.12}", r.reference));
                    }
                    c
                }
                Err(e) => Check::failed(name, DRIFT_TOLERANCE, e.to_string()),
            }
        })
        .collect()
}

// --------------------------------------------------------------- conservation

/// Drift of F⁽²⁾, its permutations, F⁽³⁾ and the Milne–Pinney invariant over the window.
pub fn conservation_checks(_opts: &VerifyOptions) -> Vec<Check> {
    let mut jobs: Vec<Box<dyn Fn() -> Vec<Check> + Send + Sync>> = Vec::new();
    for kappa in I4_KAPPAS {
        jobs.push(Box::new(move || {
            let inv: Vec<(&'static str, Invariant)> = vec![
                ("F2", Box::new(move |s| i4_F2(kappa, s[0], s[1]))),
                ("F2_13", Box::new(move |s| i4_F2_13(kappa, s[0], s[1], s[2]))),
                ("F2_23", Box::new(move |s| i4_F2_23(kappa, s[0], s[1], s[2]))),
                ("F3", Box::new(move |s| i4_F3(kappa, s[0], s[1], s[2]))),
            ];
            drift_checks(format!("conservation/class_i4(kappa={kappa})"), i4_trajectories(kappa, &I4_STATES), inv)
        }));
    }
    for k in KappaSignature::normalized() {
        jobs.push(Box::new(move || {
            let inv: Vec<(&'static str, Invariant)> = vec![
                ("F2", Box::new(move |s| p2_F2(k, s[0], s[1]))),
                ("F2_13", Box::new(move |s| p2_F2_13(k, s[0], s[1], s[2]))),
                ("F2_23", Box::new(move |s| p2_F2_23(k, s[0], s[1], s[2]))),
                ("F3", Box::new(move |s| p2_F3(k, s[0], s[1], s[2]))),
            ];
            drift_checks(format!("conservation/class_p2({})", k.label()), p2_trajectories(k, &p2_states(k)), inv)
        }));
    }
    for kappa in I4_KAPPAS {
        jobs.push(Box::new(move || {
            let params = ModelParams::default();
            let omega = TimeFunction::sinusoid(0.2, 0.05, 1.0, 0.0);
            let bundle = AppSystem::i4(Application::ErmakovNeg, kappa, params).and_then(|sys| {
                ERMAKOV_STATES
                    .iter()
                    .map(|&s| {
                        integrate_full(
                            |t, y| {
                                let w = omega.eval(t);
                                sys.rhs_b([w * w, 0.0, 1.0], *y)
                            },
                            s,
                            &|y| sys.in_source_domain(*y),
                        )
                    })
                    .collect()
            });
            let inv: Vec<(&'static str, Invariant)> = vec![(
                "milne_pinney",
                Box::new(move |s| crate::applications::milne_pinney_invariant(kappa, params, s[0], s[1])),
            )];
            drift_checks(format!("conservation/ermakov_neg(kappa={kappa})"), bundle, inv)
        }));
    }
    jobs.par_iter().flat_map_iter(|j| j()).collect()
}

// -------------------------------------------------------------- superposition

fn sample_times(n: usize) -> Vec<f64> {
    (0..n).map(|i| WINDOW.0 + (WINDOW.1 - WINDOW.0) * i as f64 / (n - 1) as f64).collect()
}

fn wrapped_max(kappa: f64, a: Point, b: Point) -> f64 {
    wrap_angle(kappa, a[0] - b[0]).abs().max(wrap_angle(kappa, a[1] - b[1]).abs())
}

/// Reconstruction along a time grid. `reconstruct(t, previous)` returns the candidate nearest
/// to the previous reconstruction; gaps (no real solution, degenerate configuration) are skipped.
fn superposition_check(
    name: String,
    times: &[f64],
    hidden: &dyn Fn(f64) -> Result<Point>,
    reconstruct: &dyn Fn(f64, Point) -> Result<Point>,
    distance: &dyn Fn(Point, Point) -> f64,
) -> Check {
    let mut prev = match hidden(times[0]) {
        Ok(p) => p,
        Err(e) => return Check::failed(name, SUPERPOSITION_TOLERANCE, e.to_string()),
    };
    let mut worst = 0.0f64;
    let mut gaps = 0;
    let mut used = 0;
    for &t in times {
        let truth = match hidden(t) {
            Ok(p) => p,
            Err(e) => return Check::failed(name, SUPERPOSITION_TOLERANCE, e.to_string()),
        };
        match reconstruct(t, prev) {
            Ok(r) => {
                worst = worst.max(distance(r, truth));
                prev = r;
                used += 1;
            }
            Err(Error::NoRealSolution(_)) | Err(Error::DegenerateConfiguration(_)) => gaps += 1,
            Err(e) => return Check::failed(name, SUPERPOSITION_TOLERANCE, e.to_string()),
        }
    }
    if used == 0 {
        return Check::failed(name, SUPERPOSITION_TOLERANCE, "every sample fell in a gap".into());
    }
    let c = Check::new(name, worst, SUPERPOSITION_TOLERANCE, used);
    if gaps > 0 {
        c.with_note(format!("{gaps} samples in gaps"))
    } else {
        c
    }
}

fn nearest(cands: Vec<Point>, prev: Point, dist: &dyn Fn(Point, Point) -> f64) -> Result<Point> {
    cands
        .into_iter()
        .min_by(|a, b| dist(*a, prev).total_cmp(&dist(*b, prev)))
        .ok_or_else(|| Error::NoRealSolution("no branch".into()))
}

const SUPERPOSITION_SAMPLES: usize = 201;

/// Each rule rebuilds a hidden solution from two (or three) integrated particular solutions.
pub fn superposition_checks(_opts: &VerifyOptions) -> Vec<Check> {
    let mut tasks: Vec<Task> = Vec::new();
    let times = sample_times(SUPERPOSITION_SAMPLES);
    for kappa in I4_KAPPAS {
        let times = times.clone();
        tasks.push(Box::new(move || {
            let name = format!("superposition/class_i4(kappa={kappa})");
            let tr = match i4_trajectories(kappa, &I4_STATES) {
                Ok(t) => t,
                Err(e) => return Check::failed(name, SUPERPOSITION_TOLERANCE, e.to_string()),
            };
            let [s1, s2, s3] = I4_STATES;
            let mu = match i4_constants(kappa, s1, s2, s3) {
                Ok(m) => m,
                Err(e) => return Check::failed(name, SUPERPOSITION_TOLERANCE, e.to_string()),
            };
            let dist = move |a: Point, b: Point| wrapped_max(kappa, a, b);
            let rec = |t: f64, prev: Point| -> Result<Point> {
                let (a, b) = (tr[1].eval(t)?, tr[2].eval(t)?);
                let br = select_branch(kappa, a, b, mu.mu1, mu.mu2, prev)?;
                i4_superpose(kappa, a, b, mu.mu1, mu.mu2, br)
            };
            superposition_check(name, &times, &|t| tr[0].eval(t), &rec, &dist)
        }));
    }
    {
        let times = times.clone();
        tasks.push(Box::new(move || {
            let name = "superposition/class_i4_flat_rule".to_string();
            let tr = match i4_trajectories(0.0, &I4_STATES) {
                Ok(t) => t,
                Err(e) => return Check::failed(name, SUPERPOSITION_TOLERANCE, e.to_string()),
            };
            let [s1, s2, s3] = I4_STATES;
            let mu = match i4_constants(0.0, s1, s2, s3) {
                Ok(m) => m,
                Err(e) => return Check::failed(name, SUPERPOSITION_TOLERANCE, e.to_string()),
            };
            let dist = |a: Point, b: Point| wrapped_max(0.0, a, b);
            let rec = |t: f64, prev: Point| -> Result<Point> {
                let (a, b) = (tr[1].eval(t)?, tr[2].eval(t)?);
                let c = Branch::BOTH.iter().filter_map(|&br| i4_superpose_flat(a, b, mu.mu1, mu.mu2, br).ok()).collect();
                nearest(c, prev, &dist)
            };
            superposition_check(name, &times, &|t| tr[0].eval(t), &rec, &dist)
        }));
    }
    for kappa in I4_KAPPAS {
        let times = times.clone();
        tasks.push(Box::new(move || {
            let rule = if kappa == 0.0 { "flat" } else { "curved" };
            let name = format!("superposition/riccati_1d_{rule}(kappa={kappa})");
            let co = hyperbolic_preset();
            let x0 = [0.05, 0.4, -0.3, 0.2];
            let tr: Result<Vec<Trajectory<1>>> = x0
                .iter()
                .map(|&x| {
                    let t = integrate_partial(
                        |t, y: &[f64; 1]| Ok([riccati_rhs(kappa, co.eval(t), y[0])]),
                        [x],
                        WINDOW.0,
                        WINDOW.1,
                        &opts_acceptance(),
                        &|_| true,
                    )?;
                    if t.is_complete() {
                        Ok(t)
                    } else {
                        Err(Error::Domain(format!("integration stopped early: {:?}", t.termination)))
                    }
                })
                .collect();
            let tr = match tr {
                Ok(t) => t,
                Err(e) => return Check::failed(name, SUPERPOSITION_TOLERANCE, e.to_string()),
            };
            let mu1 = match riccati_mu(kappa, x0[0], x0[1], x0[2], x0[3]) {
                Ok(m) => m,
                Err(e) => return Check::failed(name, SUPERPOSITION_TOLERANCE, e.to_string()),
            };
            let dist = move |a: Point, b: Point| wrap_angle(kappa, a[0] - b[0]).abs();
            let rec = |t: f64, _: Point| -> Result<Point> {
                let (a, b, c) = (tr[1].eval(t)?[0], tr[2].eval(t)?[0], tr[3].eval(t)?[0]);
                let x = if kappa == 0.0 {
                    riccati_superpose_flat(a, b, c, mu1)?
                } else {
                    riccati_superpose(kappa, a, b, c, mu1)?
                };
                Ok([x, 0.0])
            };
            superposition_check(name, &times, &|t| Ok([tr[0].eval(t)?[0], 0.0]), &rec, &dist)
        }));
    }
    for kappa2 in [1.0, 0.0, -1.0] {
        let times = times.clone();
        tasks.push(Box::new(move || {
            let k = KappaSignature::new(0.0, kappa2);
            let name = format!("superposition/class_p2_flat_rule({})", k.label());
            p2_superposition(name, k, &times, &|a, b, mu1, mu2, prev| {
                let c = p2_superpose_flat_candidates(kappa2, a, b, mu1, mu2, 1e-6).into_iter().map(|(_, _, s)| s).collect();
                nearest(c, prev, &p2_distance)
            })
        }));
    }
    {
        let times = times.clone();
        tasks.push(Box::new(move || {
            let k = KappaSignature::new(0.0, 0.0);
            p2_superposition("superposition/class_p2_galilean_rule".into(), k, &times, &|a, b, mu1, mu2, prev| {
                let c = Branch::BOTH.iter().filter_map(|&br| p2_superpose_galilean(a, b, mu1, mu2, br).ok()).collect();
                nearest(c, prev, &p2_distance)
            })
        }));
    }
    for kappa1 in [1.0, -1.0] {
        let times = times.clone();
        tasks.push(Box::new(move || {
            let k = KappaSignature::new(kappa1, 0.0);
            let name = format!("superposition/class_p2_nonrelativistic_rule({})", k.label());
            p2_superposition(name, k, &times, &|a, b, mu1, mu2, prev| {
                let c = Branch::BOTH.iter().filter_map(|&br| p2_superpose_nonrel(kappa1, a, b, mu1, mu2, br).ok()).collect();
                nearest(c, prev, &p2_distance)
            })
        }));
    }
    run(tasks)
}

fn p2_distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

type P2Rule<'a> = &'a dyn Fn(Point, Point, f64, f64, Point) -> Result<Point>;

fn p2_superposition(name: String, k: KappaSignature, times: &[f64], rule: P2Rule) -> Check {
    let states = p2_states(k);
    let tr = match p2_trajectories(k, &states) {
        Ok(t) => t,
        Err(e) => return Check::failed(name, SUPERPOSITION_TOLERANCE, e.to_string()),
    };
    let [s1, s2, s3] = states;
    let mu = match p2_constants(k, s1, s2, s3) {
        Ok(m) => m,
        Err(e) => return Check::failed(name, SUPERPOSITION_TOLERANCE, e.to_string()),
    };
    let rec = |t: f64, prev: Point| -> Result<Point> { rule(tr[1].eval(t)?, tr[2].eval(t)?, mu.mu1, mu.mu2, prev) };
    superposition_check(name, times, &|t| tr[0].eval(t), &rec, &p2_distance)
}

// ------------------------------------------------------------------ reduction

/// Analytic coefficients with b₃ bounded away from zero.
pub fn reduction_preset(kappa2: f64) -> CoefficientSet {
    if kappa2 > 0.0 {
        elliptic_preset()
    } else {
        hyperbolic_preset()
    }
}


/// Integrated flat complex Riccati solutions satisfy the second-order reduced equation.
pub fn reduction_checks(_opts: &VerifyOptions) -> Vec<Check> {
    [-1.0, 0.0, 1.0]
        .par_iter()
        .map(|&kappa2| {
            let name = format!("reduction(kappa2={kappa2})");
            let k = KappaSignature::new(0.0, kappa2);
            let co = reduction_preset(kappa2);
            let tr = match integrate_full(|t, y| p2_rhs(k, &co, t, *y), p2_states(k)[0], &|y| y[1] > 0.0) {
                Ok(t) => t,
                Err(e) => return Check::failed(name, REDUCTION_TOLERANCE, e.to_string()),
            };
            let h = 1e-3;
            let res = (1..50)
                .map(|i| {
                    let t = 0.1 * i as f64;
                    let s = tr.eval(t)?;
                    crate::applications::complex_riccati_reduction_residual(kappa2, &co, t, s, h)
                })
                .collect();
            Check::aggregate(name, REDUCTION_TOLERANCE, res)
        })
        .collect()
}

// --------------------------------------------------------------------- tables

pub fn table_checks(opts: &VerifyOptions) -> Vec<Check> {
    let o = *opts;
    [TableId::Table1, TableId::Table2, TableId::Table3]
        .par_iter()
        .map(|&t| {
            let name = format!("tables/{t:?}").to_lowercase();
            let pts = sample_points(&name, o.seed, o.samples, P2_BOX, &|p| p2_accept(p) && i4_accept(p));
            let mut worst = 0.0f64;
            let mut skipped = 0;
            let mut evaluated = 0;
            let mut pass = true;
            for &p in &pts {
                let r = evaluate_table(t, p);
                pass &= r.pass;
                evaluated += r.evaluated;
                skipped += r.rows.len() - r.evaluated;
                for row in r.rows.iter().filter(|row| row.skipped.is_none()) {
                    worst = worst.max(row.max_deviation);
                }
            }
            let mut c = Check::new(name, worst, TABLE_TOLERANCE, evaluated);
            c.pass &= pass && evaluated > 0;
            c.with_note(format!("{evaluated} row evaluations, {skipped} skipped outside row domains"))
        })
        .collect()
}

// --------------------------------------------------------------------- suites

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let checks = match suite {
        Suite::Brackets => [conformal_bracket_checks(opts), vg_bracket_checks(opts)].concat(),
        Suite::Poisson => [poisson_checks(opts), casimir_checks(opts)].concat(),
        Suite::Hamiltonian => [pairing_checks(opts), gradient_checks(opts), invariance_checks(opts)].concat(),
        Suite::Killing => killing_checks(opts),
        Suite::Pushforward => pushforward_checks(opts),
        Suite::Identities => identity_checks(opts),
        Suite::Contraction => [contraction_checks(opts), perturbation_checks(opts)].concat(),
        Suite::Conservation => conservation_checks(opts),
        Suite::Superposition => superposition_checks(opts),
        Suite::Reduction => reduction_checks(opts),
        Suite::Tables => table_checks(opts),
    };
    let pass = checks.iter().all(|c| c.pass);
    SuiteReport { suite, seed: opts.seed, samples: opts.samples, checks, pass }
}
