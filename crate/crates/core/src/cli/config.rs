//! JSON run configurations and their validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::applications::{AppSystem, Application, ModelParams};
use crate::class_i4::Branch;
use crate::dynamics::{CoefficientSet, IntegratorOptions};
use crate::ktrig::KappaSignature;

pub const SCHEMA_VERSION: u32 = 1;

/// A configuration problem, rendered as `path:line: message` when the line is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{l}:{c}: {}", self.path, self.message),
            (Some(l), None) => write!(f, "{}:{l}: {}", self.path, self.message),
            _ => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Source text of a configuration, kept to locate keys for semantic errors.
pub struct Source<'a> {
    pub path: String,
    pub text: &'a str,
}

impl<'a> Source<'a> {
    pub fn new(path: &Path, text: &'a str) -> Self {
        Source { path: path.display().to_string(), text }
    }

    /// An error attributed to the first line mentioning `"key"`.
    pub fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let needle = format!("\"{key}\"");
        let line = self.text.lines().position(|l| l.contains(&needle)).map(|i| i + 1);
        ConfigError { path: self.path.clone(), line, column: None, message: message.into() }
    }

    /// An error attributed to element `index` of the array under `"key"`, falling back to the key.
    pub fn element_error(&self, key: &str, index: usize, message: impl Into<String>) -> ConfigError {
        let mut e = self.error(key, message);
        if let Some(line) = self.element_line(key, index) {
            e.line = Some(line);
        }
        e
    }

    fn element_line(&self, key: &str, index: usize) -> Option<usize> {
        let start = self.text.find(&format!("\"{key}\""))?;
        let rest = &self.text[start..];
        let open = rest.find('[')?;
        let (mut depth, mut seen, mut in_str) = (0usize, 0usize, false);
        for (i, ch) in rest[open..].char_indices() {
            match ch {
                '"' => in_str = !in_str,
                _ if in_str => {}
                '[' | '{' => {
                    depth += 1;
                    if depth == 2 {
                        if seen == index {
                            let at = start + open + i;
                            return Some(self.text[..at].matches('\n').count() + 1);
                        }
                        seen += 1;
                    }
                }
                ']' | '}' => {
                    depth = depth.checked_sub(1)?;
                    if depth == 0 {
                        return None;
                    }
                }
                _ => {}
            }
        }
        None
    }

    pub fn parse<T: for<'de> Deserialize<'de>>(&self) -> Result<T, ConfigError> {
        serde_json::from_str(self.text).map_err(|e| ConfigError {
            path: self.path.clone(),
            line: Some(e.line()),
            column: Some(e.column()),
            message: e.to_string().split(" at line").next().unwrap_or_default().to_string(),
        })
    }

    fn check_version(&self, v: u32) -> Result<(), ConfigError> {
        if v != SCHEMA_VERSION {
            return Err(self.error("schema_version", format!("unsupported schema_version {v}, expected {SCHEMA_VERSION}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemId {
    ClassI4,
    ClassP2,
    ScRiccati,
    Diffusion,
    KsNeg,
    KsPos,
    ErmakovNeg,
    ErmakovPos,
    #[serde(rename = "riccati_1d")]
    Riccati1d,
}

impl SystemId {
    pub fn name(self) -> &'static str {
        match self {
            SystemId::ClassI4 => "class_i4",
            SystemId::ClassP2 => "class_p2",
            SystemId::ScRiccati => "sc_riccati",
            SystemId::Diffusion => "diffusion",
            SystemId::KsNeg => "ks_neg",
            SystemId::KsPos => "ks_pos",
            SystemId::ErmakovNeg => "ermakov_neg",
            SystemId::ErmakovPos => "ermakov_pos",
            SystemId::Riccati1d => "riccati_1d",
        }
    }

    pub fn application(self) -> Option<Application> {
        Some(match self {
            SystemId::ScRiccati => Application::SplitComplexRiccati,
            SystemId::Diffusion => Application::DiffusionRiccati,
            SystemId::KsNeg => Application::KummerSchwarzNeg,
            SystemId::KsPos => Application::KummerSchwarzPos,
            SystemId::ErmakovNeg => Application::ErmakovNeg,
            SystemId::ErmakovPos => Application::ErmakovPos,
            _ => return None,
        })
    }

    /// True when the system takes the pair (κ₁, κ₂) instead of a scalar κ.
    pub fn takes_pair(self) -> bool {
        matches!(self, SystemId::ClassP2 | SystemId::KsPos | SystemId::ErmakovPos)
    }

    pub fn dimension(self) -> usize {
        if self == SystemId::Riccati1d {
            1
        } else {
            2
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_t1")]
    pub t1: f64,
    /// Output rows on a uniform grid.
    #[serde(default = "default_rows")]
    pub samples: usize,
}

fn default_t1() -> f64 {
    5.0
}

fn default_rows() -> usize {
    201
}

impl Default for TimeWindow {
    fn default() -> Self {
        Self { t0: 0.0, t1: default_t1(), samples: default_rows() }
    }
}

impl TimeWindow {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.samples.max(2);
        (0..n).map(|i| self.t0 + (self.t1 - self.t0) * i as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
}

fn default_rtol() -> f64 {
    1e-10
}

fn default_atol() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: default_rtol(), atol: default_atol() }
    }
}

impl Tolerances {
    pub fn options(&self) -> IntegratorOptions {
        IntegratorOptions::with_tolerances(self.rtol, self.atol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub manifest: bool,
    #[serde(default)]
    pub svg: bool,
    /// Monitor the shipped invariants when two or more states are given.
    #[serde(default = "yes")]
    pub invariants: bool,
}

fn yes() -> bool {
    true
}

impl Default for Outputs {
    fn default() -> Self {
        Self { csv: true, manifest: true, svg: false, invariants: true }
    }
}

/// Input of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub system: SystemId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappas: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelParams>,
    #[serde(default)]
    pub coefficients: CoefficientSet,
    pub initial_states: Vec<Vec<f64>>,
    #[serde(default)]
    pub time: TimeWindow,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ScenarioConfig {
    pub fn kappa_signature(&self) -> KappaSignature {
        match (self.kappa, self.kappas) {
            (_, Some([a, b])) => KappaSignature::new(a, b),
            (Some(k), None) => KappaSignature::new(k, 0.0),
            _ => KappaSignature::new(0.0, 0.0),
        }
    }

    pub fn model_params(&self) -> ModelParams {
        self.params.unwrap_or_default()
    }

    /// The application system, for the six application identifiers.
    pub fn app_system(&self) -> Option<AppSystem> {
        let app = self.system.application()?;
        AppSystem::new(app, self.kappa_signature(), self.model_params()).ok()
    }

    /// 2D states; the 1D Riccati state x is carried as (x, 0).
    pub fn states(&self) -> Vec<[f64; 2]> {
        self.initial_states
            .iter()
            .map(|s| if s.len() == 1 { [s[0], 0.0] } else { [s[0], s[1]] })
            .collect()
    }
}

fn check_kappa_arity(src: &Source, system: SystemId, kappa: Option<f64>, kappas: Option<[f64; 2]>) -> Result<(), ConfigError> {
    let name = system.name();
    match (system.takes_pair(), kappa, kappas) {
        (true, None, Some(k)) if k.iter().all(|v| v.is_finite()) => Ok(()),
        (false, Some(k), None) if k.is_finite() => Ok(()),
        (true, Some(_), _) => Err(src.error("kappa", format!("{name} takes a pair \"kappas\": [k1, k2], not a scalar \"kappa\""))),
        (false, _, Some(_)) => Err(src.error("kappas", format!("{name} takes a scalar \"kappa\", not a pair"))),
        (true, None, None) => Err(src.error("system", format!("{name} needs \"kappas\": [k1, k2]"))),
        (false, None, None) => Err(src.error("system", format!("{name} needs a scalar \"kappa\""))),
        (true, _, _) => Err(src.error("kappas", "kappas must be finite")),
        (false, _, _) => Err(src.error("kappa", "kappa must be finite")),
    }
}

fn check_common(src: &Source, time: &TimeWindow, tol: &Tolerances, coeffs: &CoefficientSet) -> Result<(), ConfigError> {
    if !(time.t0.is_finite() && time.t1.is_finite() && time.t1 > time.t0) {
        return Err(src.error("time", format!("time window needs t1 > t0, got [{}, {}]", time.t0, time.t1)));
    }
    if time.samples < 2 {
        return Err(src.error("samples", "at least two output samples are needed"));
    }
    if !(tol.rtol > 0.0 && tol.atol > 0.0) {
        return Err(src.error("tolerances", "tolerances must be positive"));
    }
    coeffs.validate().map_err(|e| src.error("coefficients", e.to_string()))
}

/// A state inside the domain predicate of `system`, or the reason it is not.
pub fn domain_violation(cfg_system: SystemId, app: Option<&AppSystem>, s: &[f64]) -> Option<String> {
    if s.iter().any(|v| !v.is_finite()) {
        return Some("non-finite component".into());
    }
    match cfg_system {
        SystemId::ClassI4 if s[0] == s[1] => Some("x = y lies on the excluded diagonal of class_i4".into()),
        SystemId::ClassP2 if s[1] == 0.0 => Some("y = 0 lies on the excluded axis of class_p2".into()),
        _ => match app {
            Some(a) if !a.in_source_domain([s[0], s[1]]) => {
                Some(format!("outside the domain of {} (sheet: {})", cfg_system.name(), a.sheet()))
            }
            _ => None,
        },
    }
}

pub fn parse_scenario(src: &Source) -> Result<ScenarioConfig, ConfigError> {
    let cfg: ScenarioConfig = src.parse()?;
    src.check_version(cfg.schema_version)?;
    check_kappa_arity(src, cfg.system, cfg.kappa, cfg.kappas)?;
    check_common(src, &cfg.time, &cfg.tolerances, &cfg.coefficients)?;
    if let Some(p) = cfg.params {
        ModelParams::new(p.lambda).map_err(|e| src.error("lambda", e.to_string()))?;
    }
    if cfg.initial_states.is_empty() || cfg.initial_states.len() > 3 {
        return Err(src.error("initial_states", format!("1 to 3 initial states, got {}", cfg.initial_states.len())));
    }
    let dim = cfg.system.dimension();
    let app = cfg.app_system();
    for (i, s) in cfg.initial_states.iter().enumerate() {
        if s.len() != dim {
            return Err(src.element_error("initial_states", i, format!("initial_states[{i}] has {} components, {} expects {dim}", s.len(), cfg.system.name())));
        }
        if let Some(why) = domain_violation(cfg.system, app.as_ref(), s) {
            return Err(src.element_error("initial_states", i, format!("initial_states[{i}] = {s:?}: {why}")));
        }
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperposeSystem {
    ClassI4,
    #[serde(rename = "riccati_1d")]
    Riccati1d,
    ClassP2,
}

/// Input of `superpose`. Exactly one of `hidden` and `mu` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperposeConfig {
    pub schema_version: u32,
    pub system: SuperposeSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappas: Option<[f64; 2]>,
    #[serde(default)]
    pub coefficients: CoefficientSet,
    /// Two states (class_i4, class_p2) or three scalars (riccati_1d).
    pub particular_solutions: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    /// Branch at t0 in μ mode; later samples follow continuity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(default)]
    pub time: TimeWindow,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl SuperposeConfig {
    pub fn kappa_signature(&self) -> KappaSignature {
        match (self.kappa, self.kappas) {
            (_, Some([a, b])) => KappaSignature::new(a, b),
            (Some(k), None) => KappaSignature::new(k, 0.0),
            _ => KappaSignature::new(0.0, 0.0),
        }
    }
}

pub fn parse_superpose(src: &Source) -> Result<SuperposeConfig, ConfigError> {
    let cfg: SuperposeConfig = src.parse()?;
    src.check_version(cfg.schema_version)?;
    let as_system = match cfg.system {
        SuperposeSystem::ClassI4 => SystemId::ClassI4,
        SuperposeSystem::Riccati1d => SystemId::Riccati1d,
        SuperposeSystem::ClassP2 => SystemId::ClassP2,
    };
    check_kappa_arity(src, as_system, cfg.kappa, cfg.kappas)?;
    check_common(src, &cfg.time, &cfg.tolerances, &cfg.coefficients)?;
    if let Some([k1, k2]) = cfg.kappas {
        if k1 != 0.0 && k2 != 0.0 {
            return Err(src.error("kappas", "class_p2 superposition needs kappa1 = 0 (flat rule) or kappa2 = 0 (non-relativistic rule)"));
        }
    }
    let (count, dim) = match cfg.system {
        SuperposeSystem::Riccati1d => (3, 1),
        _ => (2, 2),
    };
    if cfg.particular_solutions.len() != count {
        return Err(src.error("particular_solutions", format!("{count} particular solutions expected, got {}", cfg.particular_solutions.len())));
    }
    let mut all: Vec<(&str, Option<usize>, &Vec<f64>)> =
        cfg.particular_solutions.iter().enumerate().map(|(i, s)| ("particular_solutions", Some(i), s)).collect();
    match (&cfg.hidden, &cfg.mu) {
        (Some(h), None) => all.push(("hidden", None, h)),
        (None, Some(m)) => {
            let want = if dim == 1 { 1 } else { 2 };
            if m.len() != want || m.iter().any(|v| !v.is_finite()) {
                return Err(src.error("mu", format!("{want} finite constants expected")));
            }
        }
        _ => return Err(src.error("system", "give exactly one of \"hidden\" and \"mu\"")),
    }
    for (key, idx, s) in all {
        let err = |m: String| match idx {
            Some(i) => src.element_error(key, i, format!("{key}[{i}] {m}")),
            None => src.error(key, format!("{key} {m}")),
        };
        if s.len() != dim {
            return Err(err(format!("= {s:?} has {} components, expected {dim}", s.len())));
        }
        if let Some(why) = domain_violation(as_system, None, s) {
            return Err(err(format!("= {s:?}: {why}")));
        }
    }
    Ok(cfg)
}

/// Optional input of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
}

pub fn parse_verify(src: &Source) -> Result<VerifyConfig, ConfigError> {
    let cfg: VerifyConfig = src.parse()?;
    src.check_version(cfg.schema_version)?;
    for s in &cfg.suites {
        if s != "all" && crate::verify::Suite::from_name(s).is_none() {
            return Err(src.error("suites", format!("unknown suite {s:?}")));
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(text: &str) -> Source<'_> {
        Source { path: "c.json".into(), text }
    }

    #[test]
    fn minimal_scenario() {
        let t = r#"{"schema_version": 1, "system": "class_i4", "kappa": 0.5,
                    "coefficients": {"b1": 1}, "initial_states": [[0, 1]]}"#;
        let c = parse_scenario(&src(t)).unwrap();
        assert_eq!(c.time.t1, 5.0);
        assert!(c.outputs.csv);
    }

    #[test]
    fn diagonal_state_is_rejected_with_its_line() {
        let t = "{\n \"schema_version\": 1,\n \"system\": \"class_i4\",\n \"kappa\": 0,\n \"initial_states\": [\n  [0.1, 0.5],\n  [0.5, 0.5]\n ]\n}";
        let e = parse_scenario(&src(t)).unwrap_err();
        assert_eq!(e.line, Some(7));
        assert!(e.message.contains("diagonal"), "{e}");
    }

    #[test]
    fn kappa_arity() {
        let t = r#"{"schema_version": 1, "system": "class_p2", "kappa": 0.5, "initial_states": [[0, 1]]}"#;
        assert!(parse_scenario(&src(t)).unwrap_err().message.contains("pair"));
        let t = r#"{"schema_version": 1, "system": "class_i4", "kappas": [0, 1], "initial_states": [[0, 1]]}"#;
        assert!(parse_scenario(&src(t)).unwrap_err().message.contains("scalar"));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse_scenario(&src("{\n \"schema_version\": 1,\n \"system\": nope\n}")).unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.column.is_some());
    }

    #[test]
    fn unknown_fields_and_versions() {
        let t = r#"{"schema_version": 2, "system": "class_i4", "kappa": 0, "initial_states": [[0, 1]]}"#;
        assert!(parse_scenario(&src(t)).unwrap_err().message.contains("schema_version"));
        let t = r#"{"schema_version": 1, "system": "class_i4", "kappa": 0, "initial_states": [[0, 1]], "colour": 1}"#;
        assert!(parse_scenario(&src(t)).is_err());
    }

    #[test]
    fn superpose_modes() {
        let t = r#"{"schema_version": 1, "system": "class_i4", "kappa": -1,
                    "particular_solutions": [[0.1, 0.5], [-0.3, 0.2]], "hidden": [0.3, -0.4]}"#;
        assert!(parse_superpose(&src(t)).is_ok());
        let t = r#"{"schema_version": 1, "system": "class_i4", "kappa": -1,
                    "particular_solutions": [[0.1, 0.5], [-0.3, 0.2]]}"#;
        assert!(parse_superpose(&src(t)).is_err());
        let t = r#"{"schema_version": 1, "system": "class_p2", "kappas": [1, 1],
                    "particular_solutions": [[0.1, 0.5], [-0.3, 0.2]], "mu": [1, 2]}"#;
        assert!(parse_superpose(&src(t)).unwrap_err().message.contains("kappa1 = 0"));
    }
}
