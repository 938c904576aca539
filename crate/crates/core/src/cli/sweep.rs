//! `cklh sweep`: difference sequences along κ → 0 and their log–log slopes at one point.

use std::path::Path;

use serde::Serialize;

use super::output::{write_csv, write_json};
use super::CliError;
use crate::error::Result;
use crate::ktrig::KappaSignature;
use crate::verify::{
    contraction_sweep, fit_slope, i4_quantities, p2_quantities, perturbation_residual, perturbation_sweep,
    PerturbationTarget, SlopeFit, LINEAR_SLOPE, QUADRATIC_SLOPE, QUANTITY_NAMES,
};
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ContractionSystem {
    ClassI4,
    ClassP2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Direction {
    Kappa1,
    Kappa2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Target {
    ClassI4,
    ErmakovNeg,
    GalileiKappa1,
    GalileiDiagonal,
}

impl Target {
    fn perturbation(self) -> PerturbationTarget {
        match self {
            Target::ClassI4 => PerturbationTarget::ClassI4,
            Target::ErmakovNeg => PerturbationTarget::ErmakovNeg,
            Target::GalileiKappa1 => PerturbationTarget::GalileiKappa1,
            Target::GalileiDiagonal => PerturbationTarget::GalileiDiagonal,
        }
    }

    pub fn default_point(self) -> Point {
        match self {
            Target::ClassI4 => [0.3, -0.4],
            Target::ErmakovNeg => [1.2, 0.3],
            _ => [0.3, 0.6],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentFit {
    pub name: String,
    #[serde(flatten)]
    pub fit: SlopeFit,
    pub pass: bool,
    pub diffs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub kind: &'static str,
    pub subject: String,
    pub point: Point,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partner: Option<Point>,
    pub kappas: Vec<f64>,
    pub window: (f64, f64),
    pub components: Vec<ComponentFit>,
    pub pass: bool,
}

pub struct ContractionRequest {
    pub system: ContractionSystem,
    pub direction: Direction,
    pub fixed: f64,
    pub sign: Sign,
    pub point: Point,
    pub partner: Point,
}

impl ContractionRequest {
    fn signature(&self, t: f64) -> KappaSignature {
        let t = if self.sign == Sign::Minus { -t } else { t };
        match self.direction {
            Direction::Kappa1 => KappaSignature::new(t, self.fixed),
            Direction::Kappa2 => KappaSignature::new(self.fixed, t),
        }
    }

    fn quantities(&self, t: f64) -> Result<Vec<f64>> {
        match self.system {
            ContractionSystem::ClassI4 => i4_quantities(self.signature(t).kappa1, self.point, self.partner),
            ContractionSystem::ClassP2 => p2_quantities(self.signature(t), self.point, self.partner),
        }
    }

    fn subject(&self) -> String {
        let s = if self.sign == Sign::Minus { "-" } else { "+" };
        match self.system {
            ContractionSystem::ClassI4 => format!("class_i4/kappa->0{s}"),
            ContractionSystem::ClassP2 => {
                let (d, o) = match self.direction {
                    Direction::Kappa1 => ("kappa1", "kappa2"),
                    Direction::Kappa2 => ("kappa2", "kappa1"),
                };
                format!("class_p2/{d}->0{s}({o}={})", self.fixed)
            }
        }
    }
}

fn assemble(
    kind: &'static str,
    subject: String,
    point: Point,
    partner: Option<Point>,
    kappas: Vec<f64>,
    window: (f64, f64),
    names: Vec<String>,
    diffs: Vec<Vec<f64>>,
) -> SweepReport {
    let components: Vec<ComponentFit> = names
        .into_iter()
        .zip(&diffs)
        .map(|(name, d)| {
            let fit = fit_slope(&kappas, d);
            let pass = match fit {
                SlopeFit::Fitted { slope, .. } => slope >= window.0 && slope <= window.1,
                SlopeFit::Exact | SlopeFit::Unresolved => true,
            };
            ComponentFit { name, fit, pass, diffs: d.clone() }
        })
        .collect();
    let fitted = components.iter().any(|c| matches!(c.fit, SlopeFit::Fitted { .. }));
    let exact = components.iter().all(|c| c.fit == SlopeFit::Exact);
    let pass = components.iter().all(|c| c.pass) && (fitted || exact);
    SweepReport {
        schema_version: super::config::SCHEMA_VERSION,
        command: "sweep",
        kind,
        subject,
        point,
        partner,
        kappas,
        window,
        components,
        pass,
    }
}

pub fn contraction(req: &ContractionRequest) -> std::result::Result<SweepReport, CliError> {
    let run = || -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let ks = contraction_sweep();
        let flat = req.quantities(0.0)?;
        let curved: Vec<Vec<f64>> = ks.iter().map(|&k| req.quantities(k)).collect::<Result<_>>()?;
        let diffs = (0..flat.len()).map(|j| curved.iter().map(|row| (row[j] - flat[j]).abs()).collect()).collect();
        Ok((ks, diffs))
    };
    let (ks, diffs) = run().map_err(|e| CliError::Run(e.to_string()))?;
    let names = QUANTITY_NAMES.iter().map(|s| s.to_string()).collect();
    Ok(assemble("contraction", req.subject(), req.point, Some(req.partner), ks, LINEAR_SLOPE, names, diffs))
}

pub fn perturbation(target: Target, point: Point) -> std::result::Result<SweepReport, CliError> {
    let t = target.perturbation();
    let ks = perturbation_sweep();
    let res: Vec<[f64; 2]> =
        ks.iter().map(|&k| perturbation_residual(t, k, point)).collect::<Result<_>>().map_err(|e| CliError::Run(e.to_string()))?;
    let diffs = (0..2).map(|j| res.iter().map(|r| r[j].abs()).collect()).collect();
    let names = vec!["rhs_x".to_string(), "rhs_y".to_string()];
    Ok(assemble("perturbation", format!("perturbation/{}", t.name()), point, None, ks, QUADRATIC_SLOPE, names, diffs))
}

pub fn write(report: &SweepReport, out: &Path) -> std::result::Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", out.display()));
    let mut header = vec!["kappa".to_string()];
    header.extend(report.components.iter().map(|c| c.name.clone()));
    write_json(&out.join("sweep.json"), report).map_err(io)?;
    write_csv(&out.join("sweep.csv"), &header, &report_rows(report)).map_err(io)
}

fn report_rows(report: &SweepReport) -> Vec<Vec<Option<f64>>> {
    report
        .kappas
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let mut row = vec![Some(k)];
            row.extend(report.components.iter().map(|c| c.diffs.get(i).copied()));
            row
        })
        .collect()
}
