//! Run configuration file (TOML).
//!
//! Every key is optional; unknown keys are rejected. Frequencies are linear
//! MHz throughout.
//!
//! ```toml
//! scenario = "truncated"
//!
//! [fields.probe]
//! rabi_mhz = 0.5
//! polarization = [0.0, 0.0, 1.0]
//!
//! [fields.rf]
//! rabi_mhz = 200.0
//! polarization = [1.0, 0.0, 0.0]
//!
//! [scan]
//! start_mhz = -100.0
//! stop_mhz = 100.0
//! points = 201
//! ```
//!
//! Leaving out `[fields]` selects probe, coupling and RF at 0.5, 20 and 200 MHz,
//! all along `z`. An empty `[fields]` table means no fields at all.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use rydberg_dress::couplings::{FieldKind, FieldSpec};
use rydberg_dress::model::{preset, OpticalPolarizations, Scenario};
use rydberg_dress::polarization::Polarization;
use rydberg_dress::spectrum::{linear_grid, DecayModel, DriveConfig, ScanOptions, DEFAULT_PROMINENCE};
use rydberg_dress::validate::Tolerances;

use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    Full,
    Truncated,
}

impl PresetName {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Full => "full",
            PresetName::Truncated => "truncated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioChoice {
    Preset(String),
    Inline(Box<Scenario>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub rabi_mhz: f64,
    #[serde(default = "along_z")]
    pub polarization: Polarization,
}

fn along_z() -> Polarization {
    Polarization::Z
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fields {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<FieldConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<FieldConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf: Option<FieldConfig>,
}

impl Default for Fields {
    fn default() -> Self {
        let z = |rabi_mhz| Some(FieldConfig { rabi_mhz, polarization: Polarization::Z });
        Fields { probe: z(0.5), coupling: z(20.0), rf: z(200.0) }
    }
}

impl Fields {
    pub fn get(&self, kind: FieldKind) -> Option<&FieldConfig> {
        match kind {
            FieldKind::Probe => self.probe.as_ref(),
            FieldKind::Coupling => self.coupling.as_ref(),
            FieldKind::Rf => self.rf.as_ref(),
        }
    }

    /// The configured field, or a switched-off `z`-polarized one.
    pub fn spec(&self, kind: FieldKind) -> CliResult<FieldSpec> {
        let c = self.get(kind).copied().unwrap_or(FieldConfig { rabi_mhz: 0.0, polarization: Polarization::Z });
        Ok(FieldSpec::new(kind, c.rabi_mhz, c.polarization)?)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSettings {
    pub probe_detuning_mhz: f64,
    pub rf_detuning_mhz: f64,
    /// One weight per ground sublevel in basis order (ascending `F`, then `m_F`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_populations: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSettings {
    pub start_mhz: f64,
    pub stop_mhz: f64,
    pub points: usize,
    pub optical_depth: f64,
    /// Peak prominence as a fraction of the transmission range.
    pub prominence: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings { start_mhz: -300.0, stop_mhz: 300.0, points: 601, optical_depth: 1.0, prominence: DEFAULT_PROMINENCE }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Dressed-energy clustering tolerance; defaults to `1e-6 · Ω_RF`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_tolerance_mhz: Option<f64>,
    /// A preset name (`full`, `truncated`) or an inline scenario table.
    pub scenario: ScenarioChoice,
    pub fields: Fields,
    pub drive: DriveSettings,
    pub decay: DecayModel,
    pub scan: ScanSettings,
    pub output: OutputSettings,
    pub validate: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            cluster_tolerance_mhz: None,
            scenario: ScenarioChoice::Preset("full".into()),
            fields: Fields::default(),
            drive: DriveSettings::default(),
            decay: DecayModel::default(),
            scan: ScanSettings::default(),
            output: OutputSettings::default(),
            validate: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::config(format!("cannot serialize configuration: {e}")))
    }

    pub fn scenario(&self) -> CliResult<Scenario> {
        let scenario = match &self.scenario {
            ScenarioChoice::Preset(name) => {
                preset(name).ok_or_else(|| CliError::config(format!("unknown preset {name:?} (expected full or truncated)")))?
            }
            ScenarioChoice::Inline(s) => (**s).clone(),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn optical_polarizations(&self) -> OpticalPolarizations {
        let pol = |kind| self.fields.get(kind).map_or(Polarization::Z, |f| f.polarization);
        OpticalPolarizations { probe: pol(FieldKind::Probe), coupling: pol(FieldKind::Coupling) }
    }

    pub fn drive(&self) -> CliResult<DriveConfig> {
        let mut drive = DriveConfig::new(
            self.fields.spec(FieldKind::Probe)?,
            self.fields.spec(FieldKind::Coupling)?,
            self.fields.spec(FieldKind::Rf)?,
        );
        drive.probe_detuning_mhz = self.drive.probe_detuning_mhz;
        drive.rf_detuning_mhz = self.drive.rf_detuning_mhz;
        drive.ground_populations = self.drive.ground_populations.clone();
        Ok(drive)
    }

    pub fn grid(&self) -> CliResult<Vec<f64>> {
        let s = &self.scan;
        if s.points == 0 {
            return Err(CliError::config("scan.points must be at least 1"));
        }
        if s.points > 1 && !(s.stop_mhz > s.start_mhz) {
            return Err(CliError::config("scan.stop_mhz must exceed scan.start_mhz"));
        }
        Ok(linear_grid(s.start_mhz, s.stop_mhz, s.points))
    }

    pub fn scan_options(&self, jobs: Option<usize>) -> ScanOptions {
        ScanOptions { optical_depth: self.scan.optical_depth, prominence: self.scan.prominence, jobs }
    }

    /// Checks everything that can be checked without running a solver.
    pub fn validate(&self) -> CliResult<()> {
        self.scenario()?;
        for kind in FieldKind::ALL {
            self.fields.spec(kind)?;
        }
        self.decay.validate()?;
        self.grid()?;
        if !(self.scan.prominence > 0.0 && self.scan.prominence < 1.0) {
            return Err(CliError::config(format!("scan.prominence {} must lie in (0, 1)", self.scan.prominence)));
        }
        if !(self.scan.optical_depth >= 0.0 && self.scan.optical_depth.is_finite()) {
            return Err(CliError::config("scan.optical_depth must be finite and non-negative"));
        }
        if let Some(t) = self.cluster_tolerance_mhz {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::config(format!("cluster_tolerance_mhz {t} must be positive")));
            }
        }
        Ok(())
    }
}
