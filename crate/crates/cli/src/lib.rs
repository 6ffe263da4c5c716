//! Scenario front end: parse a config, build grids/sets/fields, run the
//! configured checks, and write the report. Parse, resolution, and runtime
//! failures carry distinct exit codes so scripted callers can tell them
//! apart from plain check failures.

pub mod bundled;
pub mod checks;
pub mod config;
pub mod describe;
pub mod oracle;
pub mod resolve;

use config::ScenarioConfig;
use resolve::ResolveError;
use setflow_core::engine::evolve;
use setflow_core::io::{write_field_dump, write_track_csv, ReportWriter};
use std::path::Path;
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_RESOLVE: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug)]
pub enum RunError {
    Parse(String),
    Resolve(String),
    Runtime(String),
}

impl RunError {
    pub fn runtime(msg: impl Into<String>) -> Self {
        RunError::Runtime(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) => EXIT_PARSE,
            RunError::Resolve(_) => EXIT_RESOLVE,
            RunError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Parse(m) => write!(f, "parse error: {m}"),
            RunError::Resolve(m) => write!(f, "resolution error: {m}"),
            RunError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ResolveError> for RunError {
    fn from(e: ResolveError) -> Self {
        RunError::Resolve(e.0)
    }
}

impl From<setflow_core::Error> for RunError {
    fn from(e: setflow_core::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Replace the grid spacing by 1/N.
    pub grid_override: Option<usize>,
    /// Dump every k-th sample of each configured set's track (overrides the
    /// scenario's own cadence when set).
    pub dump_every: Option<usize>,
    pub report_path: Option<std::path::PathBuf>,
    /// Seed for the sampling point lattices; nothing else is randomized.
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { grid_override: None, dump_every: None, report_path: None, seed: 0 }
    }
}

pub struct RunOutcome {
    pub report: ReportWriter,
    pub name: String,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.report.all_passed()
    }
}

/// Runs a scenario from its config text. No outputs are written on parse or
/// resolution failure.
pub fn run_scenario_text(text: &str, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let cfg = ScenarioConfig::parse(text).map_err(|e| RunError::Parse(e.to_string()))?;
    let resolved = resolve::resolve(&cfg, opts.grid_override)?;
    let mut report = ReportWriter::new();

    for check in &cfg.checks {
        let started = Instant::now();
        let records = checks::run_check(check, &resolved, opts.seed)?;
        let elapsed = started.elapsed().as_millis();
        for rec in records {
            report.add(rec, elapsed);
        }
    }

    // Optional field dumps and per-track CSV for every configured set.
    let dump_every = opts.dump_every.unwrap_or(cfg.outputs.dump_every);
    if dump_every > 0 {
        let params = resolved.params()?.clone();
        let dir = opts
            .report_path
            .as_deref()
            .and_then(Path::parent)
            .unwrap_or_else(|| Path::new("."))
            .to_path_buf();
        std::fs::create_dir_all(&dir).map_err(|e| RunError::runtime(e.to_string()))?;
        for (id, set) in &resolved.sets {
            let track = evolve(&set.initial_field(), resolved.field.as_ref(), &params)?;
            for (k, sample) in track.samples.iter().enumerate() {
                if k % dump_every == 0 {
                    let base = dir.join(format!("{}_{id}_{k:05}", cfg.name));
                    write_field_dump(sample, &base).map_err(|e| RunError::runtime(e.to_string()))?;
                }
            }
            let csv = dir.join(format!("{}_{id}.csv", cfg.name));
            write_track_csv(&track, &[], &csv).map_err(|e| RunError::runtime(e.to_string()))?;
        }
    }

    if let Some(path) = &opts.report_path {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| RunError::runtime(e.to_string()))?;
            }
        }
        report
            .write(path)
            .map_err(|e| RunError::runtime(e.to_string()))?;
    }

    Ok(RunOutcome { report, name: cfg.name })
}

/// Looks up a bundled scenario by name, otherwise treats the argument as a
/// file path.
pub fn load_scenario_source(arg: &str) -> Result<String, RunError> {
    if let Some(text) = bundled::get(arg) {
        return Ok(text.to_string());
    }
    std::fs::read_to_string(arg)
        .map_err(|e| RunError::Parse(format!("cannot read scenario {arg}: {e}")))
}
