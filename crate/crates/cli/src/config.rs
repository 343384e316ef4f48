use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use magbump::flow::GlancingPolicy;
use magbump::geometry::parse_scene;
use magbump::Scene;
use serde::Serialize;

use crate::args::{Common, Format, Glancing};
use crate::CliError;

/// Named numerical tolerances; every one can be overridden on the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Sup-norm residual of the periodic orbit search.
    pub residual: f64,
    /// Distance below which two periodic orbits count as the same.
    pub uniqueness: f64,
    /// Step of the finite-difference oracle.
    pub fd_step: f64,
    /// Relative error allowed between analytic and difference derivatives.
    pub agreement: f64,
    /// Allowed deviation of derivative determinants from 1.
    pub det: f64,
    /// Required strict negativity of the focused Jacobi data.
    pub focus: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-10,
            uniqueness: 1e-8,
            fd_step: 1e-5,
            agreement: 1e-6,
            det: 1e-8,
            focus: 1e-6,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 6] = [
        "residual",
        "uniqueness",
        "fd-step",
        "agreement",
        "det",
        "focus",
    ];

    /// Applies one `NAME=VALUE` override.
    pub fn apply(&mut self, spec: &str) -> Result<(), CliError> {
        let (name, value) = spec.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("tolerance {spec:?} is not of the form NAME=VALUE"))
        })?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("tolerance {name}: {value:?} is not a number")))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(CliError::Usage(format!(
                "tolerance {name} must be positive (got {value})"
            )));
        }
        let slot = match name.trim().replace('_', "-").as_str() {
            "residual" => &mut self.residual,
            "uniqueness" => &mut self.uniqueness,
            "fd-step" => &mut self.fd_step,
            "agreement" => &mut self.agreement,
            "det" => &mut self.det,
            "focus" => &mut self.focus,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown tolerance {other:?} (known: {})",
                    Tolerances::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    pub fn table(&self) -> BTreeMap<&'static str, f64> {
        BTreeMap::from([
            ("residual", self.residual),
            ("uniqueness", self.uniqueness),
            ("fd-step", self.fd_step),
            ("agreement", self.agreement),
            ("det", self.det),
            ("focus", self.focus),
        ])
    }
}

/// Everything a command needs besides its own arguments.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scene_path: PathBuf,
    pub scene: Scene,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub tolerances: Tolerances,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub parallel: Option<usize>,
    pub glancing: GlancingPolicy,
}

impl RunConfig {
    pub fn from_common(common: &Common) -> Result<Self, CliError> {
        let path = common
            .scene
            .clone()
            .ok_or_else(|| CliError::Usage("--scene PATH is required".into()))?;
        let scene = load_scene(&path)?;
        let mut tolerances = Tolerances::default();
        for t in &common.tolerance {
            tolerances.apply(t)?;
        }
        if common.samples == Some(0) {
            return Err(CliError::Usage("--samples must be positive".into()));
        }
        if common.parallel == Some(0) {
            return Err(CliError::Usage("--parallel must be positive".into()));
        }
        let mut formats = common.format.clone();
        formats.dedup();
        Ok(RunConfig {
            scene_path: path,
            scene,
            out: common.out.clone(),
            formats,
            tolerances,
            samples: common.samples,
            seed: common.seed,
            parallel: common.parallel,
            glancing: match common.glancing {
                Glancing::Straight => GlancingPolicy::Straight,
                Glancing::Larmor => GlancingPolicy::Larmor,
            },
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

pub fn load_scene(path: &Path) -> Result<Scene, CliError> {
    let src = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_scene(&src).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_rejections() {
        let mut t = Tolerances::default();
        t.apply("residual=1e-12").unwrap();
        t.apply("fd_step = 2e-5").unwrap();
        assert_eq!(t.residual, 1e-12);
        assert_eq!(t.fd_step, 2e-5);
        assert!(t.apply("residual=-1").is_err());
        assert!(t.apply("residual").is_err());
        assert!(t.apply("speed=1").is_err());
        assert_eq!(t.table().len(), Tolerances::NAMES.len());
    }
}
