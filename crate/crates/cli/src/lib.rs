//! Command implementations behind the `magbump` binary.
//!
//! Every command produces a JSON report (a header with the effective
//! configuration plus a command-specific `result`) and optionally CSV and SVG
//! artifacts, all written to the output directory as `<command>.<ext>`.

pub mod args;
mod commands;
pub mod config;

use std::fs;
use std::path::PathBuf;

use serde_json::{json, Value};

pub use args::{Cli, Command, Common, Format, Glancing};
pub use config::{load_scene, RunConfig, Tolerances};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] magbump::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use magbump::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Core(
                E::Config(_)
                | E::InvalidBump { .. }
                | E::Overlap(..)
                | E::ZeroField
                | E::CollinearBumps(..)
                | E::SingleBump
                | E::Domain(_)
                | E::NotAdmissible(_)
                | E::ExcludedDirection(_),
            ) => EXIT_USAGE,
            CliError::Core(_) => EXIT_FAIL,
        }
    }
}

/// What a command produced before anything is written.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub result: Value,
    pub csv: Option<String>,
    pub svg: Option<String>,
    /// Human-readable summary, one line each.
    pub lines: Vec<String>,
    pub pass: bool,
}

#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
    pub artifacts: Artifacts,
    pub files: Vec<PathBuf>,
}

pub fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Simulate { .. } => "simulate",
        Command::Degree { .. } => "degree",
        Command::ConeCheck => "cone-check",
        Command::FindOrbit { .. } => "find-orbit",
        Command::AlphaMin => "alpha-min",
        Command::Classify => "classify",
        Command::Sweep { .. } => "sweep",
        Command::Check => "check",
    }
}

/// Runs one command without touching the file system.
pub fn execute(cmd: &Command, cfg: &RunConfig) -> Result<Artifacts, CliError> {
    match cmd {
        Command::Simulate {
            line,
            state,
            beam,
            max_events,
            step,
        } => commands::simulate(
            cfg,
            line.as_deref(),
            state.as_deref(),
            beam.as_deref(),
            *max_events,
            *step,
        ),
        Command::Degree { directions, points } => commands::degree(cfg, *directions, *points),
        Command::ConeCheck => commands::cone_check(cfg),
        Command::FindOrbit {
            word,
            segment,
            phi_in,
            phi_out,
        } => commands::find_orbit(cfg, word, *segment, *phi_in, *phi_out),
        Command::AlphaMin => commands::alpha_min(cfg),
        Command::Classify => commands::classify(cfg),
        Command::Sweep {
            bump,
            from,
            to,
            steps,
            phi,
            points,
        } => commands::sweep(cfg, *bump, *from, *to, *steps, *phi, *points),
        Command::Check => commands::check(cfg),
    }
}

pub fn header(cmd: &Command, cfg: &RunConfig) -> Value {
    json!({
        "tool": "magbump",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command_name(cmd),
        "scene": cfg.scene_path.display().to_string(),
        "bumps": cfg.scene.len(),
        "seed": cfg.seed,
        "samples": cfg.samples,
        "glancing": cfg.glancing,
        "tolerances": cfg.tolerances.table(),
    })
}

/// Parses the configuration, runs the command and writes its artifacts.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = RunConfig::from_common(&cli.common)?;
    if let Some(n) = cfg.parallel {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let artifacts = execute(&cli.command, &cfg)?;
    let mut report = header(&cli.command, &cfg);
    report["pass"] = json!(artifacts.pass);
    report["result"] = artifacts.result.clone();

    let name = command_name(&cli.command);
    fs::create_dir_all(&cfg.out)?;
    let mut files = Vec::new();
    let mut put = |ext: &str, body: &str| -> Result<(), CliError> {
        let path = cfg.out.join(format!("{name}.{ext}"));
        fs::write(&path, body)?;
        files.push(path);
        Ok(())
    };
    if cfg.wants(Format::Json) {
        put(
            "json",
            &(serde_json::to_string_pretty(&report).expect("report is valid JSON") + "\n"),
        )?;
    }
    if cfg.wants(Format::Csv) {
        if let Some(csv) = &artifacts.csv {
            put("csv", csv)?;
        }
    }
    if cfg.wants(Format::Svg) {
        if let Some(svg) = &artifacts.svg {
            put("svg", svg)?;
        }
    }
    Ok(Outcome {
        code: if artifacts.pass { EXIT_PASS } else { EXIT_FAIL },
        report,
        artifacts,
        files,
    })
}
