//! `cklh superpose`: rebuild a solution from integrated particular solutions.

use std::path::Path;

use serde::Serialize;

use super::config::{SuperposeConfig, SuperposeSystem};
use super::output::{write_csv, write_json};
use super::CliError;
use crate::class_i4::{
    i4_constants, i4_rhs, i4_superpose, i4_superpose_flat, riccati_mu, riccati_rhs, riccati_superpose,
    riccati_superpose_flat, Branch,
};
use crate::class_p2::{p2_constants, p2_rhs, p2_superpose_flat_candidates, p2_superpose_nonrel};
use crate::dynamics::{integrate_partial, Trajectory};
use crate::error::{Error, Result};
use crate::ktrig::wrap_angle;
use crate::verify::SUPERPOSITION_TOLERANCE;
use crate::Point;

#[derive(Debug, Clone, Serialize)]
pub struct SuperpositionReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: SuperposeConfig,
    pub rule: &'static str,
    pub mu: Vec<f64>,
    pub samples: usize,
    pub reconstructed: usize,
    pub gaps: Vec<f64>,
    /// Present only when a hidden solution was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

fn rule_name(cfg: &SuperposeConfig) -> &'static str {
    let k = cfg.kappa_signature();
    match cfg.system {
        SuperposeSystem::ClassI4 if k.kappa1 == 0.0 => "class_i4_flat",
        SuperposeSystem::ClassI4 => "class_i4_curved",
        SuperposeSystem::Riccati1d if k.kappa1 == 0.0 => "riccati_1d_flat",
        SuperposeSystem::Riccati1d => "riccati_1d_curved",
        SuperposeSystem::ClassP2 if k.kappa1 == 0.0 => "class_p2_flat",
        SuperposeSystem::ClassP2 => "class_p2_nonrelativistic",
    }
}

fn pad(s: &[f64]) -> Point {
    if s.len() == 1 {
        [s[0], 0.0]
    } else {
        [s[0], s[1]]
    }
}

/// Labelled candidates of the rule at one instant, from the particular states.
fn candidates(cfg: &SuperposeConfig, parts: &[Point], mu: &[f64]) -> Result<Vec<(Branch, Point)>> {
    let k = cfg.kappa_signature();
    match cfg.system {
        SuperposeSystem::ClassI4 => {
            let mut out = Vec::new();
            let mut err = None;
            for b in Branch::BOTH {
                let r = if k.kappa1 == 0.0 {
                    i4_superpose_flat(parts[0], parts[1], mu[0], mu[1], b)
                } else {
                    i4_superpose(k.kappa1, parts[0], parts[1], mu[0], mu[1], b)
                };
                match r {
                    Ok(s) => out.push((b, s)),
                    Err(e) => err = Some(e),
                }
            }
            if out.is_empty() {
                return Err(err.unwrap_or_else(|| Error::NoRealSolution("no branch".into())));
            }
            Ok(out)
        }
        SuperposeSystem::Riccati1d => {
            let (a, b, c) = (parts[0][0], parts[1][0], parts[2][0]);
            let x = if k.kappa1 == 0.0 {
                riccati_superpose_flat(a, b, c, mu[0])?
            } else {
                riccati_superpose(k.kappa1, a, b, c, mu[0])?
            };
            Ok(vec![(Branch::Plus, [x, 0.0])])
        }
        SuperposeSystem::ClassP2 if k.kappa1 == 0.0 => {
            let c: Vec<(Branch, Point)> = p2_superpose_flat_candidates(k.kappa2, parts[0], parts[1], mu[0], mu[1], SUPERPOSITION_TOLERANCE)
                .into_iter()
                .map(|(yb, _, s)| (yb, s))
                .collect();
            if c.is_empty() {
                return Err(Error::NoRealSolution("no flat-rule candidate satisfies both constants".into()));
            }
            Ok(c)
        }
        SuperposeSystem::ClassP2 => {
            let mut out = Vec::new();
            let mut err = None;
            for b in Branch::BOTH {
                match p2_superpose_nonrel(k.kappa1, parts[0], parts[1], mu[0], mu[1], b) {
                    Ok(s) => out.push((b, s)),
                    Err(e) => err = Some(e),
                }
            }
            if out.is_empty() {
                return Err(err.unwrap_or_else(|| Error::NoRealSolution("no branch".into())));
            }
            Ok(out)
        }
    }
}

fn distance(cfg: &SuperposeConfig, a: Point, b: Point) -> f64 {
    let kappa = cfg.kappa_signature().kappa1;
    match cfg.system {
        SuperposeSystem::ClassI4 => wrap_angle(kappa, a[0] - b[0]).abs().max(wrap_angle(kappa, a[1] - b[1]).abs()),
        SuperposeSystem::Riccati1d => wrap_angle(kappa, a[0] - b[0]).abs(),
        SuperposeSystem::ClassP2 => (a[0] - b[0]).abs().max((a[1] - b[1]).abs()),
    }
}

fn constants(cfg: &SuperposeConfig, hidden: Point, parts: &[Point]) -> Result<Vec<f64>> {
    let k = cfg.kappa_signature();
    Ok(match cfg.system {
        SuperposeSystem::ClassI4 => {
            let m = i4_constants(k.kappa1, hidden, parts[0], parts[1])?;
            vec![m.mu1, m.mu2]
        }
        SuperposeSystem::Riccati1d => vec![riccati_mu(k.kappa1, hidden[0], parts[0][0], parts[1][0], parts[2][0])?],
        SuperposeSystem::ClassP2 => {
            let m = p2_constants(k, hidden, parts[0], parts[1])?;
            vec![m.mu1, m.mu2]
        }
    })
}

fn integrate(cfg: &SuperposeConfig, s0: Point) -> Result<Trajectory<2>> {
    let k = cfg.kappa_signature();
    let co = &cfg.coefficients;
    let opts = cfg.tolerances.options();
    let (t0, t1) = (cfg.time.t0, cfg.time.t1);
    let tr = match cfg.system {
        SuperposeSystem::ClassI4 => {
            let side = (s0[0] - s0[1]).signum();
            integrate_partial(|t, y| Ok(i4_rhs(k.kappa1, co, t, *y)), s0, t0, t1, &opts, &|y| (y[0] - y[1]).signum() == side)?
        }
        SuperposeSystem::Riccati1d => {
            integrate_partial(|t, y| Ok([riccati_rhs(k.kappa1, co.eval(t), y[0]), 0.0]), s0, t0, t1, &opts, &|_| true)?
        }
        SuperposeSystem::ClassP2 => {
            let side = s0[1].signum();
            integrate_partial(|t, y| p2_rhs(k, co, t, *y), s0, t0, t1, &opts, &|y| y[1].signum() == side)?
        }
    };
    if !tr.is_complete() {
        return Err(Error::Domain(format!("solution from {s0:?} stopped early: {:?}", tr.termination)));
    }
    Ok(tr)
}

pub fn run(cfg: &SuperposeConfig, out: &Path) -> std::result::Result<SuperpositionReport, CliError> {
    let rule = rule_name(cfg);
    let mut report = SuperpositionReport {
        schema_version: super::config::SCHEMA_VERSION,
        command: "superpose",
        config: cfg.clone(),
        rule,
        mu: Vec::new(),
        samples: cfg.time.samples,
        reconstructed: 0,
        gaps: Vec::new(),
        max_deviation: None,
        tolerance: SUPERPOSITION_TOLERANCE,
        pass: false,
        failure: None,
    };
    let fail = |mut r: SuperpositionReport, e: Error| {
        r.failure = Some(e.to_string());
        r
    };

    let parts0: Vec<Point> = cfg.particular_solutions.iter().map(|s| pad(s)).collect();
    let parts: Vec<Trajectory<2>> = match parts0.iter().map(|&s| integrate(cfg, s)).collect::<Result<_>>() {
        Ok(p) => p,
        Err(e) => return finish(fail(report, e), out, &[], cfg),
    };
    let hidden = match cfg.hidden.as_deref().map(|h| integrate(cfg, pad(h))).transpose() {
        Ok(h) => h,
        Err(e) => return finish(fail(report, e), out, &[], cfg),
    };
    let mu = match (&cfg.mu, &cfg.hidden) {
        (Some(m), _) => m.clone(),
        (None, Some(h)) => match constants(cfg, pad(h), &parts0) {
            Ok(m) => m,
            Err(e) => return finish(fail(report, e), out, &[], cfg),
        },
        (None, None) => unreachable!("validated"),
    };
    report.mu = mu.clone();

    let mut prev: Option<Point> = hidden.as_ref().map(|h| h.eval(cfg.time.t0)).transpose().map_err(|e| CliError::Run(e.to_string()))?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for t in cfg.time.grid() {
        let now: Vec<Point> = parts.iter().map(|p| p.eval(t)).collect::<Result<_>>().map_err(|e| CliError::Run(e.to_string()))?;
        let truth = hidden.as_ref().map(|h| h.eval(t)).transpose().map_err(|e| CliError::Run(e.to_string()))?;
        let picked = candidates(cfg, &now, &mu).map(|c| match prev {
            Some(p) => c.into_iter().min_by(|a, b| distance(cfg, a.1, p).total_cmp(&distance(cfg, b.1, p))).map(|x| x.1),
            None => {
                let want = cfg.branch.unwrap_or(Branch::Plus);
                c.iter().find(|x| x.0 == want).or(c.first()).map(|x| x.1)
            }
        });
        let rec = match picked {
            Ok(r) => r,
            Err(Error::NoRealSolution(_)) | Err(Error::DegenerateConfiguration(_)) => None,
            Err(e) => return finish(fail(report, e), out, &rows, cfg),
        };
        match rec {
            Some(r) => {
                prev = Some(r);
                report.reconstructed += 1;
            }
            None => report.gaps.push(t),
        }
        let dev = match (rec, truth) {
            (Some(r), Some(h)) => {
                let d = distance(cfg, r, h);
                worst = worst.max(d);
                Some(d)
            }
            _ => None,
        };
        let mut row = vec![Some(t), rec.map(|r| r[0])];
        if cfg.system != SuperposeSystem::Riccati1d {
            row.push(rec.map(|r| r[1]));
        }
        if let Some(h) = truth {
            row.push(Some(h[0]));
            if cfg.system != SuperposeSystem::Riccati1d {
                row.push(Some(h[1]));
            }
            row.push(dev);
        }
        rows.push(row);
    }
    if hidden.is_some() {
        report.max_deviation = Some(worst);
    }
    report.pass = report.reconstructed > 0 && worst <= SUPERPOSITION_TOLERANCE;
    if report.reconstructed == 0 {
        report.failure = Some("every sample fell in a gap".into());
    }
    finish(report, out, &rows, cfg)
}

fn finish(
    report: SuperpositionReport,
    out: &Path,
    rows: &[Vec<Option<f64>>],
    cfg: &SuperposeConfig,
) -> std::result::Result<SuperpositionReport, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", out.display()));
    let one_d = cfg.system == SuperposeSystem::Riccati1d;
    let mut header: Vec<String> = if one_d { vec!["t".into(), "x".into()] } else { vec!["t".into(), "x".into(), "y".into()] };
    if cfg.hidden.is_some() {
        if one_d {
            header.push("x_hidden".into());
        } else {
            header.extend(["x_hidden".into(), "y_hidden".into()]);
        }
        header.push("deviation".into());
    }
    write_csv(&out.join("superposition.csv"), &header, rows).map_err(io)?;
    write_json(&out.join("superposition.json"), &report).map_err(io)?;
    Ok(report)
}
