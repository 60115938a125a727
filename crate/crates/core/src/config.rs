//! TOML run configuration.
//!
//! ```toml
//! [model]
//! layers = "0:1600, 500:2400"   # top depth (m) : speed (m/s)
//! delta = 10.0
//! z_max = 1000.0
//!
//! [grid]
//! dx = 10.0
//! dz = 10.0
//! nx = 256
//! nz = 100
//! dt = 0.002
//! nt = 512
//!
//! [shot]
//! source_x = 1280.0
//! receiver_depth = 600.0
//! ```
//!
//! Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fullwave::FdParams;
use crate::model::{Epsilon, Grid, Layer, ModelError, RunConfig, RunPlan, ShotGeometry, VelocityModel};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("model.layers: {0}")]
    Layers(String),
    #[error("run.epsilon must be 0 or 1, got {0}")]
    Epsilon(u8),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub layers: String,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    pub c_sup: Option<f64>,
    pub c_inf: Option<f64>,
    pub z_max: f64,
}

fn default_rho() -> f64 {
    1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotSection {
    pub source_x: f64,
    pub receiver_depth: f64,
    #[serde(default = "default_peak")]
    pub peak_frequency: f64,
}

fn default_peak() -> f64 {
    25.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub epsilon: u8,
    pub multiples: usize,
    /// Hz; defaults to three times the peak frequency.
    pub f_max: Option<f64>,
    pub transmission: bool,
    pub angle_cutoff: f64,
    pub taper_width: f64,
    /// Imaginary frequency shift in Hz.
    pub damping_hz: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            epsilon: 0,
            multiples: 0,
            f_max: None,
            transmission: true,
            angle_cutoff: 85.0,
            taper_width: 5.0,
            damping_hz: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub grid: Grid,
    pub shot: ShotSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub fullwave: FdParams,
}

/// Parses `"0:1600, 500:2400"`.
pub fn parse_layers(text: &str) -> Result<Vec<Layer>, ConfigError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (z, c) = pair
                .split_once(':')
                .ok_or_else(|| ConfigError::Layers(format!("expected depth:speed, got '{pair}'")))?;
            let z: f64 = z
                .trim()
                .parse()
                .map_err(|_| ConfigError::Layers(format!("bad depth in '{pair}'")))?;
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| ConfigError::Layers(format!("bad speed in '{pair}'")))?;
            Ok(Layer::new(z, c))
        })
        .collect()
}

pub fn format_layers(layers: &[Layer]) -> String {
    layers
        .iter()
        .map(|l| format!("{}:{}", l.top, l.speed))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn model(&self) -> Result<VelocityModel, ConfigError> {
        let layers = parse_layers(&self.model.layers)?;
        if layers.is_empty() {
            return Err(ConfigError::Layers("at least one layer is required".into()));
        }
        let above = self.model.c_sup.unwrap_or(layers[0].speed);
        let below = self.model.c_inf.unwrap_or(layers[layers.len() - 1].speed);
        Ok(VelocityModel::with_boundary_speeds(
            layers,
            self.model.delta,
            self.model.rho,
            self.model.z_max,
            above,
            below,
        )?)
    }

    pub fn run_config(&self) -> Result<RunConfig, ConfigError> {
        let r = &self.run;
        let epsilon = Epsilon::from_index(r.epsilon).ok_or(ConfigError::Epsilon(r.epsilon))?;
        let f_max = r.f_max.unwrap_or(3.0 * self.shot.peak_frequency);
        Ok(RunConfig {
            epsilon,
            multiples: r.multiples,
            omega_max: 2.0 * PI * f_max,
            include_transmission: r.transmission,
            angle_cutoff: r.angle_cutoff,
            taper_width: r.taper_width,
            damping: 2.0 * PI * r.damping_hz,
        })
    }

    pub fn shot(&self) -> ShotGeometry {
        ShotGeometry {
            source_x: self.shot.source_x,
            receiver_depth: self.shot.receiver_depth,
            peak_frequency: self.shot.peak_frequency,
        }
    }

    /// Validated plan for this configuration.
    pub fn plan(&self) -> Result<RunPlan, ConfigError> {
        Ok(RunPlan::new(self.model()?, self.grid, self.shot(), self.run_config()?)?)
    }
}
