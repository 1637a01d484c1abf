use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use geolab_core::LambdaProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Trace,
    PeriodTable,
    IndexTable,
    Shoot,
    FindDouble,
    RicciCheck,
    ValidateProfile,
    OracleC1,
    Accept,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub ode_tol: f64,
    pub event_tol: f64,
    pub root_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ode_tol: 1e-10,
            event_tol: 1e-12,
            root_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv_path: Option<PathBuf>,
    pub svg_path: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
}

/// Initial direction (dr, dφ) at (r, φ); rescaled to unit speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartSpec {
    pub r: f64,
    pub phi: f64,
    pub dr: f64,
    pub dphi: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub profile: Option<LambdaProfile>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
    pub c_list: Option<Vec<f64>>,
    pub kappa: Option<f64>,
    pub r0: Option<f64>,
    pub r0_list: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub r_window: Option<f64>,
    pub r0_bracket: Option<(f64, f64)>,
    pub n_targets: Option<usize>,
    pub t_end: Option<f64>,
    pub start: Option<StartSpec>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub grid_n: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<Command> {
        let Some(cmd) = self.command else {
            bail!("no command given");
        };
        let t = &self.tolerances;
        for (name, v) in [
            ("ode_tol", t.ode_tol),
            ("event_tol", t.event_tol),
            ("root_tol", t.root_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tolerance {name} = {v} must be positive");
            }
        }
        match cmd {
            Command::Shoot if self.r0.is_none() && self.r0_list.is_none() => {
                bail!("shoot requires r0 (or r0_list)")
            }
            Command::OracleC1 if self.kappa.is_none() => bail!("oracle-c1 requires kappa"),
            _ => {}
        }
        Ok(cmd)
    }
}
