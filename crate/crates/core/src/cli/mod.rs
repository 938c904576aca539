//! Command-line front end. Exit codes: 0 everything passed, 1 a check or run failed,
//! 2 bad usage, configuration or I/O.

pub mod config;
pub mod output;
pub mod simulate;
pub mod superpose;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::tables::{evaluate_table, format_table, TableId};
use crate::verify::{run_suite, Suite, SuiteReport, VerifyOptions};
use crate::Point;
use config::{ConfigError, Source};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Io(String),
    Usage(String),
    /// A computation that could not be carried out.
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(_) => EXIT_FAIL,
            _ => EXIT_CONFIG,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Usage(e) => write!(f, "usage error: {e}"),
            CliError::Run(e) => write!(f, "run failed: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "cklh", version, about = "Lie-Hamilton systems on the nine Cayley-Klein spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a scenario; writes trajectory.csv, manifest.json and optionally trajectory.svg.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
    /// Run verification suites and print one line per check.
    Verify {
        /// Suite names, or `all`.
        suites: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Write verify_<suite>.json files here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the reports as JSON instead of text.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Only print failing checks and the suite summaries.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Rebuild a solution from integrated particular solutions; writes superposition.csv and .json.
    Superpose {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare the quoted and general forms of a table's rows at one point.
    Table {
        /// table1, table2 or table3
        which: String,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: Point,
        #[arg(long)]
        json: bool,
    },
    /// Difference sequences and slopes along kappa -> 0; writes sweep.csv and sweep.json.
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
    },
}

#[derive(Debug, Subcommand)]
pub enum SweepKind {
    /// Curved minus flat fields, Hamiltonians, weight and F2, expected O(kappa).
    Contraction {
        #[arg(long, value_enum)]
        system: sweep::ContractionSystem,
        /// Swept curvature of class_p2.
        #[arg(long, value_enum, default_value = "kappa1")]
        direction: sweep::Direction,
        /// The other curvature of class_p2.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        fixed: f64,
        #[arg(long, value_enum, default_value = "plus")]
        sign: sweep::Sign,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: Option<Point>,
        /// Second point of F2.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        partner: Option<Point>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Exact minus first-order right-hand side, expected O(kappa^2).
    Perturbation {
        #[arg(long, value_enum)]
        target: sweep::Target,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: Option<Point>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

pub fn parse_point(s: &str) -> Result<Point, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected X,Y, got {s:?}"));
    }
    let x: f64 = parts[0].parse().map_err(|e| format!("{}: {e}", parts[0]))?;
    let y: f64 = parts[1].parse().map_err(|e| format!("{}: {e}", parts[1]))?;
    if !(x.is_finite() && y.is_finite()) {
        return Err("point must be finite".into());
    }
    Ok([x, y])
}

/// Sizes the global rayon pool from CKLH_THREADS; a pool that already exists is kept.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("CKLH_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("CKLH_THREADS must be a positive integer, got {v:?}")))?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn out_dir(dir: &Path) -> Result<(), CliError> {
    output::ensure_dir(dir).map(|_| ()).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn exit_for(pass: bool) -> i32 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Parses `argv` (including the program name) and runs it, writing to `out` and `err`.
pub fn run_with(argv: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match configure_threads().and_then(|_| dispatch(cli.command, out)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "cklh: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    let w = |e: std::io::Error| CliError::Io(e.to_string());
    match cmd {
        Command::Simulate { config, out: dir, svg } => {
            let text = read(&config)?;
            let cfg = config::parse_scenario(&Source::new(&config, &text))?;
            out_dir(&dir)?;
            let m = simulate::run(&cfg, &dir, svg)?;
            for (i, t) in m.trajectories.iter().enumerate() {
                writeln!(out, "trajectory {}: t_end={} {:?} steps={}", i + 1, t.t_end, t.termination, t.stats.steps).map_err(w)?;
            }
            for r in &m.invariants {
                writeln!(out, "{} {} drift={:.3e} tol={:.0e}", status(r.pass), r.name, r.drift, r.tolerance).map_err(w)?;
            }
            writeln!(out, "{} simulate {} ({})", status(m.pass), cfg.system.name(), m.files.join(", ")).map_err(w)?;
            Ok(exit_for(m.pass))
        }
        Command::Verify { suites, seed, samples, out: dir, json, config, quiet } => {
            let mut opts = VerifyOptions::default();
            let mut names = suites;
            if let Some(path) = config {
                let text = read(&path)?;
                let cfg = config::parse_verify(&Source::new(&path, &text))?;
                if names.is_empty() {
                    names = cfg.suites;
                }
                opts.seed = cfg.seed.unwrap_or(opts.seed);
                opts.samples = cfg.samples.unwrap_or(opts.samples);
            }
            opts.seed = seed.unwrap_or(opts.seed);
            opts.samples = samples.unwrap_or(opts.samples);
            if opts.samples == 0 {
                return Err(CliError::Usage("--samples must be positive".into()));
            }
            let selected = select_suites(&names)?;
            let reports: Vec<SuiteReport> = selected.iter().map(|&s| run_suite(s, &opts)).collect();
            if let Some(dir) = &dir {
                out_dir(dir)?;
                for r in &reports {
                    output::write_json(&dir.join(format!("verify_{}.json", r.suite.name())), r)
                        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                }
            }
            if json {
                let s = serde_json::to_string_pretty(&reports).map_err(|e| CliError::Io(e.to_string()))?;
                writeln!(out, "{s}").map_err(w)?;
            } else {
                for r in &reports {
                    for c in r.checks.iter().filter(|c| !quiet || !c.pass) {
                        let note = c.note.as_deref().map(|n| format!("  [{n}]")).unwrap_or_default();
                        writeln!(out, "{} {} residual={:.3e} threshold={:.0e} samples={}{note}", status(c.pass), c.name, c.residual, c.threshold, c.samples)
                            .map_err(w)?;
                    }
                    let failed = r.failures().count();
                    writeln!(out, "{} suite {}: {}/{} checks passed (seed {}, samples {})", status(r.pass), r.suite.name(), r.checks.len() - failed, r.checks.len(), r.seed, r.samples)
                        .map_err(w)?;
                }
            }
            Ok(exit_for(reports.iter().all(|r| r.pass)))
        }
        Command::Superpose { config, out: dir } => {
            let text = read(&config)?;
            let cfg = config::parse_superpose(&Source::new(&config, &text))?;
            out_dir(&dir)?;
            let r = superpose::run(&cfg, &dir)?;
            let dev = r.max_deviation.map(|d| format!(" max_deviation={d:.3e} tol={:.0e}", r.tolerance)).unwrap_or_default();
            writeln!(out, "{} superpose {}: {}/{} samples reconstructed, {} gaps{dev}", status(r.pass), r.rule, r.reconstructed, r.samples, r.gaps.len()).map_err(w)?;
            if let Some(f) = &r.failure {
                writeln!(out, "failure: {f}").map_err(w)?;
            }
            Ok(exit_for(r.pass))
        }
        Command::Table { which, point, json } => {
            let id = TableId::from_name(&which).ok_or_else(|| CliError::Usage(format!("unknown table {which:?}; expected table1, table2 or table3")))?;
            let r = evaluate_table(id, point);
            if json {
                let s = serde_json::to_string_pretty(&r).map_err(|e| CliError::Io(e.to_string()))?;
                writeln!(out, "{s}").map_err(w)?;
            } else {
                write!(out, "{}", format_table(&r)).map_err(w)?;
            }
            Ok(exit_for(r.pass))
        }
        Command::Sweep { kind } => {
            let (report, dir) = match kind {
                SweepKind::Contraction { system, direction, fixed, sign, point, partner, out: dir } => {
                    let dflt = match system {
                        sweep::ContractionSystem::ClassI4 => ([0.3, -0.4], [-0.2, 0.5]),
                        sweep::ContractionSystem::ClassP2 => ([0.3, 0.6], [-0.2, 0.9]),
                    };
                    let req = sweep::ContractionRequest {
                        system,
                        direction,
                        fixed,
                        sign,
                        point: point.unwrap_or(dflt.0),
                        partner: partner.unwrap_or(dflt.1),
                    };
                    (sweep::contraction(&req)?, dir)
                }
                SweepKind::Perturbation { target, point, out: dir } => {
                    (sweep::perturbation(target, point.unwrap_or(target.default_point()))?, dir)
                }
            };
            out_dir(&dir)?;
            sweep::write(&report, &dir)?;
            for c in &report.components {
                writeln!(out, "{} {} {}", status(c.pass), c.name, serde_json::to_string(&c.fit).unwrap_or_default()).map_err(w)?;
            }
            writeln!(out, "{} sweep {} window=[{}, {}]", status(report.pass), report.subject, report.window.0, report.window.1).map_err(w)?;
            Ok(exit_for(report.pass))
        }
    }
}

fn select_suites(names: &[String]) -> Result<Vec<Suite>, CliError> {
    if names.is_empty() || names.iter().any(|n| n == "all") {
        return Ok(Suite::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| {
            Suite::from_name(n).ok_or_else(|| {
                let known: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                CliError::Usage(format!("unknown suite {n:?}; known: all, {}", known.join(", ")))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let mut argv = vec!["cklh"];
        argv.extend_from_slice(args);
        let code = run_with(argv, &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn points() {
        assert_eq!(parse_point("-0.3, 2").unwrap(), [-0.3, 2.0]);
        assert!(parse_point("1").is_err());
        assert!(parse_point("1,inf").is_err());
    }

    #[test]
    fn table_command() {
        let (code, out, _) = run(&["table", "table3", "--point", "0.3,0.7"]);
        assert_eq!(code, 0, "{out}");
        let (code, _, err) = run(&["table", "table9", "--point", "0,1"]);
        assert_eq!(code, 2);
        assert!(err.contains("unknown table"));
    }

    #[test]
    fn unknown_suite_is_a_usage_error() {
        let (code, _, err) = run(&["verify", "nope"]);
        assert_eq!(code, 2);
        assert!(err.contains("known: all"));
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(&["--help"]).0, 0);
        assert_eq!(run(&["frobnicate"]).0, 2);
    }
}
