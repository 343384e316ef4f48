use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug, Clone)]
#[command(
    name = "magbump",
    version,
    about = "Trajectories, checks and symbolic orbits for planar magnetic bumps"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scene file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub scene: Option<PathBuf>,
    /// Directory for report and artifacts.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Artifact formats, comma separated.
    #[arg(
        long,
        global = true,
        value_enum,
        value_delimiter = ',',
        default_value = "json"
    )]
    pub format: Vec<Format>,
    /// Override a tolerance, e.g. `--tolerance residual=1e-12`. Repeatable.
    #[arg(long, global = true, value_name = "NAME=VALUE")]
    pub tolerance: Vec<String>,
    #[arg(long, global = true, value_name = "N")]
    pub samples: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads for sample-heavy commands.
    #[arg(long, global = true, value_name = "N")]
    pub parallel: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "straight")]
    pub glancing: Glancing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Glancing {
    Straight,
    Larmor,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Propagate one or more trajectories through the scene.
    Simulate {
        /// Incoming oriented line `PHI,L`.
        #[arg(long, allow_hyphen_values = true, value_name = "PHI,L")]
        line: Option<String>,
        /// Initial state `X,Y,VX,VY` (velocity is normalized).
        #[arg(long, allow_hyphen_values = true, value_name = "X,Y,VX,VY")]
        state: Option<String>,
        /// Parallel beam `PHI,N`: N lines with direction PHI across the scene.
        #[arg(long, allow_hyphen_values = true, value_name = "PHI,N")]
        beam: Option<String>,
        #[arg(long, default_value_t = 1000)]
        max_events: usize,
        /// CSV sampling step along the trajectory.
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Scattering degree of every bump over several incoming directions.
    Degree {
        #[arg(long, default_value_t = 8)]
        directions: usize,
        /// Grid points across the shadow of the bump.
        #[arg(long, default_value_t = 2000)]
        points: usize,
    },
    /// Sampled strict invariance of the cone field under the return map.
    ConeCheck,
    /// Periodic or scattering orbit with a prescribed itinerary.
    FindOrbit {
        /// Comma-separated 1-based bump indices, e.g. `1,2,3`.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        /// Treat the word as a finite segment (scattering orbit).
        #[arg(long)]
        segment: bool,
        #[arg(long, allow_hyphen_values = true)]
        phi_in: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        phi_out: Option<f64>,
    },
    /// Minimal turning angle over bump triples.
    AlphaMin,
    /// Field regime of each bump and the very strong test.
    Classify,
    /// Vary the field of one bump (or all) and tabulate degree and cone margins.
    Sweep {
        /// 1-based bump whose field is varied; all bumps if omitted.
        #[arg(long)]
        bump: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
        /// Incoming direction for the degree.
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        phi: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// Run every applicable check and aggregate a pass/fail report.
    Check,
}
