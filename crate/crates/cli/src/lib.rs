//! The `distortion` experiment runner: one JSON config in, a manifest, a
//! result JSON and CSV series out.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use distortion_core::Error;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{to_json_string, OutDir};

/// JSON schema of `result.json`.
pub const RESULT_SCHEMA: &str = include_str!("../schema/result.schema.json");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Command-line overrides of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// Suppress the one-line summary on stderr.
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    ValidationError,
    NumericalFailure,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Ok => EXIT_OK,
            RunStatus::ValidationError => EXIT_VALIDATION,
            RunStatus::NumericalFailure => EXIT_NUMERICAL,
        }
    }
}

#[derive(Serialize)]
struct ResultDoc<'a> {
    command: &'a str,
    status: RunStatus,
    failure: Option<&'a str>,
    result: &'a serde_json::Value,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: Option<&'a str>,
    config: Option<&'a RunConfig>,
    config_path: String,
    seed: Option<u64>,
    threads: usize,
    status: RunStatus,
    exit_code: i32,
    failure: Option<&'a str>,
    outputs: &'a [String],
    wall_time_seconds: f64,
}

fn classify(err: &Error) -> RunStatus {
    match err {
        Error::Config(_) | Error::Json(_) => RunStatus::ValidationError,
        _ => RunStatus::NumericalFailure,
    }
}

/// Everything after parsing: validate, run, write artifacts. Returns the status
/// and the failure reason, if any.
fn execute(cfg: &RunConfig, config_dir: Option<&Path>, out: &mut OutDir) -> (RunStatus, Option<String>) {
    if let Err(e) = cfg.validate() {
        return (RunStatus::ValidationError, Some(e.to_string()));
    }
    let mesh = match &cfg.domain {
        Some(d) => match d.build(config_dir) {
            Ok(m) => Some(m),
            Err(e) => return (classify(&e), Some(e.to_string())),
        },
        None => None,
    };
    if mesh.is_none() && cfg.command != config::Command::Oracle {
        return (RunStatus::ValidationError, Some(format!("command {} needs a `domain` section", cfg.command.name())));
    }
    let finished = match commands::run(cfg, mesh, out) {
        Ok(f) => f,
        Err(e) => return (classify(&e), Some(e.to_string())),
    };
    let status = if finished.numerical_failure.is_some() { RunStatus::NumericalFailure } else { RunStatus::Ok };
    let doc = ResultDoc { command: cfg.command.name(), status, failure: finished.numerical_failure.as_deref(), result: &finished.body };
    if let Err(e) = out.write_json("result.json", &doc) {
        return (RunStatus::NumericalFailure, Some(format!("writing result.json: {e}")));
    }
    (status, finished.numerical_failure)
}

/// Run one configuration file. Prints a one-line summary to stderr and
/// returns the process exit code.
pub fn run(config_path: &Path, overrides: &Overrides) -> i32 {
    let started = Instant::now();
    let parsed = std::fs::read_to_string(config_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", config_path.display())))
        .and_then(|text| RunConfig::from_json(&text));
    let mut cfg = parsed.as_ref().ok().cloned();
    if let Some(c) = &mut cfg {
        c.apply_seed(overrides.seed);
    }
    let out_root = overrides.out.clone().or_else(|| cfg.as_ref().and_then(|c| c.out.clone()));
    let Some(out_root) = out_root else {
        eprintln!("error: no output directory; pass --out or set `out` in the config");
        return EXIT_VALIDATION;
    };
    let mut out = match OutDir::create(&out_root) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: output directory {} is not writable: {e}", out_root.display());
            return EXIT_VALIDATION;
        }
    };
    let threads = overrides.threads.unwrap_or_else(rayon::current_num_threads);
    let (status, failure) = match (&parsed, &cfg) {
        (Err(e), _) => (RunStatus::ValidationError, Some(e.to_string())),
        (Ok(_), Some(cfg)) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build();
            match pool {
                Ok(pool) => pool.install(|| execute(cfg, config_path.parent(), &mut out)),
                Err(e) => (RunStatus::ValidationError, Some(format!("thread pool: {e}"))),
            }
        }
        (Ok(_), None) => unreachable!("a parsed config is always cloned"),
    };
    let manifest = Manifest {
        tool: "distortion",
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.as_ref().map(|c| c.command.name()),
        config: cfg.as_ref(),
        config_path: config_path.display().to_string(),
        seed: cfg.as_ref().map(|c| c.seed()),
        threads,
        status,
        exit_code: status.exit_code(),
        failure: failure.as_deref(),
        outputs: out.written(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let written = to_json_string(&manifest).map_err(anyhow::Error::from).and_then(|t| Ok(std::fs::write(out.path("manifest.json"), t)?));
    if let Err(e) = written {
        eprintln!("error: writing manifest.json: {e}");
        return EXIT_NUMERICAL;
    }
    match &failure {
        _ if overrides.quiet => {}
        Some(reason) => eprintln!("{}: {reason}", if status == RunStatus::ValidationError { "invalid" } else { "failed" }),
        None => eprintln!("ok: wrote {} to {}", out.written().join(", "), out_root.display()),
    }
    status.exit_code()
}
