//! `cklh simulate`: integrate a configured scenario and record trajectories and invariants.

use std::path::Path;

use serde::Serialize;

use super::config::{ScenarioConfig, SystemId};
use super::output::{svg_polylines, write_csv, write_json};
use super::CliError;
use crate::applications::milne_pinney_invariant;
use crate::class_i4::{i4_F2, i4_F3, i4_rhs, riccati_rhs};
use crate::class_p2::{p2_F2, p2_F3, p2_rhs};
use crate::dynamics::{integrate_partial, monitor, IntegratorStats, InvariantReport, Termination, Trajectory};
use crate::error::Result;
use crate::verify::DRIFT_TOLERANCE;

type Rhs<'a> = Box<dyn Fn(f64, &[f64; 2]) -> Result<[f64; 2]> + 'a>;
type Invariant<'a> = Box<dyn Fn(&[[f64; 2]]) -> Result<f64> + 'a>;

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub initial_state: Vec<f64>,
    pub t_end: f64,
    pub final_state: Vec<f64>,
    pub termination: Termination,
    pub stats: IntegratorStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantSummary {
    pub name: String,
    pub reference: f64,
    pub drift: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub samples: usize,
    pub flagged: usize,
}

impl From<&InvariantReport> for InvariantSummary {
    fn from(r: &InvariantReport) -> Self {
        Self {
            name: r.name.clone(),
            reference: r.reference,
            drift: r.drift,
            tolerance: r.tolerance,
            pass: r.pass,
            samples: r.values.len(),
            flagged: r.flagged.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationManifest {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: ScenarioConfig,
    pub trajectories: Vec<TrajectorySummary>,
    pub invariants: Vec<InvariantSummary>,
    pub files: Vec<String>,
    pub pass: bool,
}

fn side(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Right-hand side and domain predicate for the state `s0`.
fn vector_field<'a>(cfg: &'a ScenarioConfig, s0: [f64; 2]) -> (Rhs<'a>, Box<dyn Fn(&[f64; 2]) -> bool + 'a>) {
    let co = &cfg.coefficients;
    let k = cfg.kappa_signature();
    match cfg.system {
        SystemId::ClassI4 => {
            let kappa = k.kappa1;
            let s = side(s0[0] - s0[1]);
            (Box::new(move |t, y| Ok(i4_rhs(kappa, co, t, *y))), Box::new(move |y| side(y[0] - y[1]) == s && y[0] != y[1]))
        }
        SystemId::ClassP2 => {
            let s = side(s0[1]);
            (Box::new(move |t, y| p2_rhs(k, co, t, *y)), Box::new(move |y| side(y[1]) == s && y[1] != 0.0))
        }
        SystemId::Riccati1d => {
            let kappa = k.kappa1;
            (Box::new(move |t, y| Ok([riccati_rhs(kappa, co.eval(t), y[0]), 0.0])), Box::new(|_| true))
        }
        _ => {
            let sys = cfg.app_system().expect("validated application system");
            (Box::new(move |t, y| sys.rhs(co, t, *y)), Box::new(move |y| sys.in_source_domain(*y)))
        }
    }
}

fn invariants(cfg: &ScenarioConfig, n: usize) -> Vec<(String, Invariant<'_>)> {
    let k = cfg.kappa_signature();
    let mut out: Vec<(String, Invariant)> = Vec::new();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    match cfg.system {
        SystemId::ClassI4 => {
            let kappa = k.kappa1;
            for &(i, j) in &pairs {
                out.push((format!("F2({},{})", i + 1, j + 1), Box::new(move |s| i4_F2(kappa, s[i], s[j]))));
            }
            if n == 3 {
                out.push(("F3".into(), Box::new(move |s| i4_F3(kappa, s[0], s[1], s[2]))));
            }
        }
        SystemId::ClassP2 => {
            for &(i, j) in &pairs {
                out.push((format!("F2({},{})", i + 1, j + 1), Box::new(move |s| p2_F2(k, s[i], s[j]))));
            }
            if n == 3 {
                out.push(("F3".into(), Box::new(move |s| p2_F3(k, s[0], s[1], s[2]))));
            }
        }
        SystemId::Riccati1d => {}
        _ => {
            let sys = cfg.app_system().expect("validated application system");
            for &(i, j) in &pairs {
                out.push((format!("F2({},{})", i + 1, j + 1), Box::new(move |s| sys.F2(s[i], s[j]))));
            }
            if cfg.system == SystemId::ErmakovNeg {
                let params = cfg.model_params();
                for &(i, j) in &pairs {
                    out.push((
                        format!("milne_pinney({},{})", i + 1, j + 1),
                        Box::new(move |s| milne_pinney_invariant(k.kappa1, params, s[i], s[j])),
                    ));
                }
            }
        }
    }
    out
}

pub fn run(cfg: &ScenarioConfig, out: &Path, svg: bool) -> std::result::Result<SimulationManifest, CliError> {
    let states = cfg.states();
    let opts = cfg.tolerances.options();
    let (t0, t1) = (cfg.time.t0, cfg.time.t1);
    let trajectories: Vec<Trajectory<2>> = states
        .iter()
        .map(|&s| {
            let (f, inside) = vector_field(cfg, s);
            integrate_partial(f, s, t0, t1, &opts, &*inside)
        })
        .collect::<Result<_>>()
        .map_err(|e| CliError::Run(e.to_string()))?;

    let dim = cfg.system.dimension();
    let grid = cfg.time.grid();
    let mut header = vec!["t".to_string()];
    for i in 1..=states.len() {
        if dim == 1 {
            header.push(format!("x{i}"));
        } else {
            header.push(format!("x{i}"));
            header.push(format!("y{i}"));
        }
    }
    let rows: Vec<Vec<Option<f64>>> = grid
        .iter()
        .map(|&t| {
            let mut row = vec![Some(t)];
            for tr in &trajectories {
                let v = if t <= tr.t_end() { tr.eval(t).ok() } else { None };
                row.push(v.map(|s| s[0]));
                if dim == 2 {
                    row.push(v.map(|s| s[1]));
                }
            }
            row
        })
        .collect();

    let mut reports = Vec::new();
    if cfg.outputs.invariants && states.len() >= 2 {
        let bundle: Vec<&Trajectory<2>> = trajectories.iter().collect();
        for (name, f) in invariants(cfg, states.len()) {
            let r = monitor(&name, &bundle, &*f, DRIFT_TOLERANCE).map_err(|e| CliError::Run(e.to_string()))?;
            reports.push(InvariantSummary::from(&r));
        }
    }

    let mut files = Vec::new();
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", out.display()));
    if cfg.outputs.csv {
        write_csv(&out.join("trajectory.csv"), &header, &rows).map_err(io)?;
        files.push("trajectory.csv".to_string());
    }
    if svg || cfg.outputs.svg {
        let lines: Vec<Vec<[f64; 2]>> = trajectories
            .iter()
            .map(|tr| {
                grid.iter()
                    .filter(|&&t| t <= tr.t_end())
                    .filter_map(|&t| tr.eval(t).ok().map(|s| if dim == 1 { [t, s[0]] } else { s }))
                    .collect()
            })
            .collect();
        let (xl, yl) = if dim == 1 { ("t", "x") } else { ("x", "y") };
        let doc = svg_polylines(&format!("{} {}", cfg.system.name(), cfg.kappa_signature().label()), xl, yl, &lines);
        std::fs::write(out.join("trajectory.svg"), doc).map_err(io)?;
        files.push("trajectory.svg".to_string());
    }

    let summaries: Vec<TrajectorySummary> = trajectories
        .iter()
        .zip(&cfg.initial_states)
        .map(|(tr, s0)| TrajectorySummary {
            initial_state: s0.clone(),
            t_end: tr.t_end(),
            final_state: tr.final_state()[..dim].to_vec(),
            termination: tr.termination.clone(),
            stats: tr.stats,
        })
        .collect();
    let pass = trajectories.iter().all(|t| t.is_complete()) && reports.iter().all(|r| r.pass);
    if cfg.outputs.manifest {
        files.push("manifest.json".to_string());
    }
    let manifest = SimulationManifest {
        schema_version: super::config::SCHEMA_VERSION,
        command: "simulate",
        config: cfg.clone(),
        trajectories: summaries,
        invariants: reports,
        files,
        pass,
    };
    if cfg.outputs.manifest {
        write_json(&out.join("manifest.json"), &manifest).map_err(io)?;
    }
    Ok(manifest)
}
