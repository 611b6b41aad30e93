//! Experiment configuration: flat TOML with typed keys, unknown keys
//! rejected, validated against the dimension and grid invariants.
//!
//! Scaled quantities are written in natural figure units: `kappa*` in units
//! of `κ0 = ħ⁻¹β^{-1/2}`, `theta*` in units of `ħω`, `gamma*` in units of
//! `ω`, and `dx0*` in units of `ħβ^{-1/2}`.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::profile::MomentumProfile;
use crate::{Error, Result, UnitSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig1a,
    Fig1b,
    Fig2a,
    Steady,
    Diagnose,
    Sweep,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Fig1a => "fig1a",
            ExperimentKind::Fig1b => "fig1b",
            ExperimentKind::Fig2a => "fig2a",
            ExperimentKind::Steady => "steady",
            ExperimentKind::Diagnose => "diagnose",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Ti,
    Qome,
}

/// Profile variant used by figure sweeps and single-point runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileVariant {
    #[default]
    Optimal,
    Clipped,
    Doppler,
}

impl ProfileVariant {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileVariant::Optimal => "optimal",
            ProfileVariant::Clipped => "clipped",
            ProfileVariant::Doppler => "doppler",
        }
    }
}

/// Tagged profile record mirroring [`MomentumProfile`], for explicit profile
/// overrides in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Constant { c: f64 },
    OptimalExp { c: f64, lambda: f64 },
    DopplerLorentz { c1: f64, c2: f64, c3: f64 },
    Clipped { base: Box<ProfileConfig>, sign: f64 },
    Tabulated { p: Vec<f64>, values: Vec<f64> },
}

impl ProfileConfig {
    pub fn to_profile(&self) -> Result<MomentumProfile> {
        let p = match self {
            ProfileConfig::Constant { c } => MomentumProfile::Constant { c: *c },
            ProfileConfig::OptimalExp { c, lambda } => MomentumProfile::OptimalExp {
                c: *c,
                lambda: *lambda,
            },
            ProfileConfig::DopplerLorentz { c1, c2, c3 } => MomentumProfile::DopplerLorentz {
                c1: *c1,
                c2: *c2,
                c3: *c3,
            },
            ProfileConfig::Clipped { base, sign } => MomentumProfile::Clipped {
                base: Box::new(base.to_profile()?),
                sign: *sign,
            },
            ProfileConfig::Tabulated { p, values } => MomentumProfile::Tabulated {
                p: p.clone(),
                values: values.clone(),
            },
        };
        p.validate()?;
        Ok(p)
    }
}

pub const DIM_MIN: usize = 10;
pub const DIM_MAX: usize = 80;

fn default_omega() -> f64 {
    1.0
}
fn default_dim() -> usize {
    40
}
fn default_kappa() -> f64 {
    0.5
}
fn default_gamma() -> f64 {
    0.1
}
fn default_dx0_grid() -> Vec<f64> {
    (0..7).map(|k| 1.5 * k as f64 / 6.0).collect()
}
fn default_theta_grid() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 1.0, 2.0]
}
fn default_kappa_grid() -> Vec<f64> {
    vec![0.1, 0.3, 0.5, 0.7, 0.9]
}
fn default_gamma_grid() -> Vec<f64> {
    vec![0.05, 0.1, 0.2]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,

    /// Oscillator frequency ω (natural units, ħ = m = 1).
    #[serde(default = "default_omega")]
    pub omega: f64,

    /// Fock truncation dimension, within [10, 80].
    #[serde(default = "default_dim")]
    pub dim: usize,

    /// Output path prefix for `<prefix>.csv` / `<prefix>.svg`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,

    #[serde(default)]
    pub emit_plots: bool,

    /// Worker threads for sweeps; 0 means use all available cores.
    #[serde(default)]
    pub workers: usize,

    /// Model for single-point runs (steady / diagnose).
    #[serde(default)]
    pub model: ModelKind,

    /// Profile variant for single-point runs and `sweep`.
    #[serde(default)]
    pub variant: ProfileVariant,

    /// Explicit profile override (tagged record); when present it replaces
    /// the variant-derived profile in single-point runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileConfig>,

    /// Bath temperature in units of ħω (scalar runs, fig2a).
    #[serde(default)]
    pub theta: f64,

    /// Recoil wavenumber in units of κ0 (scalar runs).
    #[serde(default = "default_kappa")]
    pub kappa: f64,

    /// Dissipator rate Γ in units of ω (scalar runs, fig1a/fig1b).
    #[serde(default = "default_gamma")]
    pub gamma: f64,

    /// Displacement axis in units of ħβ^{-1/2} (fig1a).
    #[serde(default = "default_dx0_grid")]
    pub dx0_grid: Vec<f64>,

    /// Temperature axis in units of ħω (fig1a, fig1b).
    #[serde(default = "default_theta_grid")]
    pub theta_grid: Vec<f64>,

    /// Recoil axis in units of κ0 (fig1b, fig2a, sweep).
    #[serde(default = "default_kappa_grid")]
    pub kappa_grid: Vec<f64>,

    /// Rate axis in units of ω (fig2a, sweep).
    #[serde(default = "default_gamma_grid")]
    pub gamma_grid: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(DIM_MIN..=DIM_MAX).contains(&self.dim) {
            return Err(Error::Config(format!(
                "dim = {} outside the allowed range [{DIM_MIN}, {DIM_MAX}]",
                self.dim
            )));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::Config(format!("omega = {} must be > 0", self.omega)));
        }
        for (name, v) in [
            ("theta", self.theta),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if self.theta < 0.0 {
            return Err(Error::Config(format!("theta = {} must be >= 0", self.theta)));
        }
        if self.gamma < 0.0 {
            return Err(Error::Config(format!("gamma = {} must be >= 0", self.gamma)));
        }
        for (name, grid) in [
            ("dx0_grid", &self.dx0_grid),
            ("theta_grid", &self.theta_grid),
            ("kappa_grid", &self.kappa_grid),
            ("gamma_grid", &self.gamma_grid),
        ] {
            if grid.is_empty() {
                return Err(Error::Config(format!("{name} must be nonempty")));
            }
            if grid.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("{name} contains non-finite values")));
            }
        }
        if let Some(p) = &self.profile {
            p.to_profile()?;
        }
        Ok(())
    }

    pub fn units(&self) -> Result<UnitSystem> {
        UnitSystem::new(self.omega)
    }

    /// Normalized round-trip serialization (defaults filled in).
    pub fn to_normalized_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn output_prefix(&self) -> String {
        self.output
            .clone()
            .unwrap_or_else(|| self.experiment.name().to_string())
    }
}
