//! Parameter files.
//!
//! A file is TOML. Every section and key is optional; unknown ones are
//! errors reported with their line.
//!
//! ```toml
//! [state]
//! p = 1
//! zeta = 0.5          # magnitude
//! zeta_phase = 0.0    # radians
//!
//! [channel]           # omega_a omega_b gamma_plus gamma_minus tau_l epsilon
//! [bath]              # omega_phonon temperature omega_c
//! [fiber]             # length group_index omega_c unit error_budget delta
//! [fig2]              # x_max steps
//!
//! [grid]              # sweep axes
//! zeta = [0.1, 0.3, 0.5]
//! tau_l = { start = 0.0, stop = 1e-5, steps = 11 }
//! p = [0, 1]
//!
//! [output]
//! observables = ["negativity", "fidelity"]
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::args::UnitArg;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub state: StateSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub bath: BathSection,
    #[serde(default)]
    pub fiber: FiberSection,
    #[serde(default)]
    pub fig2: Fig2Section,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub p: Option<usize>,
    pub zeta: Option<f64>,
    pub zeta_phase: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub omega_a: Option<f64>,
    pub omega_b: Option<f64>,
    pub gamma_plus: Option<f64>,
    pub gamma_minus: Option<f64>,
    pub tau_l: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub omega_phonon: Option<f64>,
    pub temperature: Option<f64>,
    pub omega_c: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSection {
    pub length: Option<f64>,
    pub group_index: Option<f64>,
    pub omega_c: Option<f64>,
    pub unit: Option<UnitArg>,
    pub error_budget: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Section {
    pub x_max: Option<f64>,
    pub steps: Option<usize>,
}

/// A real grid axis: explicit values or `steps` evenly spaced points from
/// `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, steps: usize },
}

impl Axis {
    pub fn points(&self, name: &str) -> CliResult<Vec<f64>> {
        let pts = match self {
            Axis::Values(v) => v.clone(),
            Axis::Range { start, stop, steps } => match steps {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            },
        };
        if pts.is_empty() {
            return Err(CliError::Usage(format!("grid axis {name} has no points")));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub p: Option<Vec<usize>>,
    pub zeta: Option<Axis>,
    pub gamma_plus: Option<Axis>,
    pub temperature: Option<Axis>,
    pub epsilon: Option<Axis>,
    pub tau_l: Option<Axis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Pure-state negativity.
    Negativity,
    /// After collective dephasing with the thermal bath.
    NegativityDephased,
    /// With fluctuation decay, zero-temperature rate.
    NegativityDissipative,
    /// Visibility and fluctuation decay together.
    NegativityCombined,
    Fidelity,
}

impl Observable {
    pub const ALL: [Observable; 5] = [
        Observable::Negativity,
        Observable::NegativityDephased,
        Observable::NegativityDissipative,
        Observable::NegativityCombined,
        Observable::Fidelity,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Observable::Negativity => "negativity",
            Observable::NegativityDephased => "negativity_dephased",
            Observable::NegativityDissipative => "negativity_dissipative",
            Observable::NegativityCombined => "negativity_combined",
            Observable::Fidelity => "fidelity",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub observables: Option<Vec<Observable>>,
}

pub fn parse(text: &str, path: &Path) -> CliResult<Config> {
    toml::from_str(text).map_err(|e| CliError::Config { path: path.to_path_buf(), message: e.to_string() })
}

pub fn load(path: &Path) -> CliResult<Config> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse(&text, path)
}
