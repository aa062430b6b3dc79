//! Command-line runner: configuration, presets, experiment orchestration and
//! artifact persistence.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use aqrm_core::AqrmError;
use serde_json::json;

use config::ExperimentConfig;
use output::{json_text, Artifacts};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Where a config came from, echoed into the manifest.
pub enum Origin {
    File(PathBuf),
    Preset(&'static str),
}

impl Origin {
    pub fn label(&self) -> String {
        match self {
            Origin::File(p) => p.display().to_string(),
            Origin::Preset(n) => format!("preset:{n}"),
        }
    }
}

pub struct RunRequest<'a> {
    pub config: &'a ExperimentConfig,
    pub origin: Origin,
    pub overrides: &'a [String],
    pub out_dir: &'a Path,
    pub jobs: usize,
}

pub struct RunOutcome {
    pub exit_code: i32,
    pub error: Option<String>,
    pub files: Vec<String>,
}

fn status_of(e: &AqrmError) -> (&'static str, i32) {
    match e {
        AqrmError::InvalidArgument(_) => ("invalid-config", EXIT_INVALID),
        _ => ("numeric-failure", EXIT_NUMERIC),
    }
}

/// Run one experiment and write its artifacts, report and manifest. Data
/// produced before a failure is kept; the report and manifest say the run
/// is incomplete.
pub fn run_experiment(req: &RunRequest) -> std::io::Result<RunOutcome> {
    let started = Instant::now();
    let mut art = Artifacts::new(req.out_dir)?;
    let result = run::execute(req.config, &mut art);
    let (status, code, error) = match &result {
        Ok(()) => ("ok", EXIT_OK, None),
        Err(e) => {
            let (s, c) = status_of(e);
            (s, c, Some(e.to_string()))
        }
    };
    let mut files = art.finish()?;
    let report = json!({
        "kind": req.config.kind,
        "status": status,
        "complete": result.is_ok(),
        "error": error,
        "results": art.results,
        "warnings": art.warnings,
        "files": files,
    });
    art.write("report.json", &json_text(&report))?;
    files.push("report.json".to_string());
    files.sort();
    let wall = started.elapsed().as_secs_f64();
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = json!({
        "tool": "aqrm",
        "version": env!("CARGO_PKG_VERSION"),
        "kind": req.config.kind,
        "source": req.origin.label(),
        "overrides": req.overrides,
        "seed": req.config.seed,
        "config": req.config,
        "status": status,
        "files": files,
        // everything that differs between identical runs lives here
        "run": { "timestamp_unix": timestamp, "wall_time_s": wall, "jobs": req.jobs },
    });
    std::fs::write(req.out_dir.join("manifest.json"), json_text(&manifest))?;
    files.push("manifest.json".to_string());
    Ok(RunOutcome { exit_code: code, error, files })
}
