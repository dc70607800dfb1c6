//! Scenario files (TOML).
//!
//! ```toml
//! trials = 100
//! seed = 1
//!
//! [geometry]
//! waveguides = 4
//! pas_per_waveguide = 4
//!
//! [radio]
//! pt_dbm = 0.0
//! kappa = 0.08
//!
//! [activation]
//! mode = "continuous"
//! samples = 10000
//!
//! [uncertainty]
//! model = "norm_bounded"
//! delta_bar = 0.3
//!
//! [sweep]
//! axis = "pt_dbm"
//! values = [-10.0, 0.0, 10.0]
//! ```
//!
//! Every key is optional; omitted keys take the defaults below.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::driver::AoOptions;
use crate::scene::{build_geometry, ActivationMode, ExclusionPolicy};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub waveguides: usize,
    pub pas_per_waveguide: usize,
    pub waveguide_length_m: f64,
    pub area_x_m: f64,
    pub area_y_m: f64,
    pub height_m: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            waveguides: 4,
            pas_per_waveguide: 4,
            waveguide_length_m: 50.0,
            area_x_m: 50.0,
            area_y_m: 6.0,
            height_m: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub carrier_frequency_hz: f64,
    pub effective_refractive_index: f64,
    /// In-waveguide attenuation, dB/m.
    pub kappa: f64,
    pub pt_dbm: f64,
    pub noise_dbm: f64,
    /// Minimum PA spacing; half a free-space wavelength when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_spacing_m: Option<f64>,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            carrier_frequency_hz: 28e9,
            effective_refractive_index: 1.4,
            kappa: 0.08,
            pt_dbm: 0.0,
            noise_dbm: -90.0,
            min_spacing_m: None,
        }
    }
}

/// Channel error model with bounds normalized by `‖h̄‖₂` at the initial layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum UncertaintyConfig {
    NormBounded { delta_bar: f64 },
    Probabilistic { epsilon_bar: f64, rho: f64 },
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        UncertaintyConfig::NormBounded { delta_bar: 0.3 }
    }
}

impl UncertaintyConfig {
    pub fn is_probabilistic(&self) -> bool {
        matches!(self, UncertaintyConfig::Probabilistic { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub exclusion: ExclusionPolicy,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let ao = AoOptions::default();
        Self {
            max_iters: ao.max_iters,
            rel_tol: ao.rel_tol,
            exclusion: ao.exclusion,
        }
    }
}

impl From<OptimizerConfig> for AoOptions {
    fn from(c: OptimizerConfig) -> Self {
        AoOptions {
            max_iters: c.max_iters,
            rel_tol: c.rel_tol,
            exclusion: c.exclusion,
            ..AoOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    PtDbm,
    DeltaBar,
    EpsilonBar,
    Rho,
    Kappa,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 5] = [
        SweepAxis::PtDbm,
        SweepAxis::DeltaBar,
        SweepAxis::EpsilonBar,
        SweepAxis::Rho,
        SweepAxis::Kappa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::PtDbm => "pt_dbm",
            SweepAxis::DeltaBar => "delta_bar",
            SweepAxis::EpsilonBar => "epsilon_bar",
            SweepAxis::Rho => "rho",
            SweepAxis::Kappa => "kappa",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::config(
                    "sweep.axis",
                    format!("unknown axis {s:?}; expected one of pt_dbm, delta_bar, epsilon_bar, rho, kappa"),
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub trials: usize,
    pub seed: u64,
    pub geometry: GeometryConfig,
    pub radio: RadioConfig,
    pub activation: ActivationMode,
    pub uncertainty: UncertaintyConfig,
    pub optimizer: OptimizerConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 1,
            geometry: GeometryConfig::default(),
            radio: RadioConfig::default(),
            activation: ActivationMode::Continuous { samples: 10_000 },
            uncertainty: UncertaintyConfig::default(),
            optimizer: OptimizerConfig::default(),
            sweep: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Fails fast on anything that would otherwise surface inside a trial.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        build_geometry(self)?;
        if self.activation.count() < 2 {
            return Err(Error::Discretization(self.activation.count()));
        }
        match self.uncertainty {
            UncertaintyConfig::NormBounded { delta_bar } => {
                if !(delta_bar >= 0.0 && delta_bar.is_finite()) {
                    return Err(Error::config("uncertainty.delta_bar", "must be finite and >= 0"));
                }
            }
            UncertaintyConfig::Probabilistic { epsilon_bar, rho } => {
                if !(epsilon_bar >= 0.0 && epsilon_bar.is_finite()) {
                    return Err(Error::config("uncertainty.epsilon_bar", "must be finite and >= 0"));
                }
                if rho >= 1.0 {
                    return Err(Error::UnboundedErrorBound(rho));
                }
                if !(rho > 0.0) {
                    return Err(Error::config("uncertainty.rho", "must lie in (0, 1)"));
                }
            }
        }
        if self.optimizer.max_iters == 0 {
            return Err(Error::config("optimizer.max_iters", "must be at least 1"));
        }
        if !(self.optimizer.rel_tol > 0.0) {
            return Err(Error::config("optimizer.rel_tol", "must be positive"));
        }
        if let Some(sweep) = &self.sweep {
            self.check_sweep(sweep.axis, &sweep.values)?;
        }
        Ok(())
    }

    /// Axis must suit the uncertainty model; values must be finite and sorted.
    pub fn check_sweep(&self, axis: SweepAxis, values: &[f64]) -> Result<()> {
        let probabilistic = self.uncertainty.is_probabilistic();
        match axis {
            SweepAxis::DeltaBar if probabilistic => {
                return Err(Error::config("sweep.axis", "delta_bar requires the norm_bounded model"))
            }
            SweepAxis::EpsilonBar | SweepAxis::Rho if !probabilistic => {
                return Err(Error::config(
                    "sweep.axis",
                    format!("{axis} requires the probabilistic model"),
                ))
            }
            _ => {}
        }
        if values.is_empty() {
            return Err(Error::config("sweep.values", "must not be empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("sweep.values", "must be finite"));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::config("sweep.values", "must be sorted ascending"));
        }
        for &v in values {
            self.with_axis(axis, v).validate_point()?;
        }
        Ok(())
    }

    fn validate_point(&self) -> Result<()> {
        let mut point = self.clone();
        point.sweep = None;
        point.validate()
    }

    /// Copy of the config with one swept parameter replaced.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Self {
        let mut c = self.clone();
        match (axis, &mut c.uncertainty) {
            (SweepAxis::PtDbm, _) => c.radio.pt_dbm = value,
            (SweepAxis::Kappa, _) => c.radio.kappa = value,
            (SweepAxis::DeltaBar, UncertaintyConfig::NormBounded { delta_bar }) => *delta_bar = value,
            (SweepAxis::EpsilonBar, UncertaintyConfig::Probabilistic { epsilon_bar, .. }) => {
                *epsilon_bar = value
            }
            (SweepAxis::Rho, UncertaintyConfig::Probabilistic { rho, .. }) => *rho = value,
            _ => {}
        }
        c
    }

    /// The current value of a sweepable parameter, if the model has it.
    pub fn axis_value(&self, axis: SweepAxis) -> Option<f64> {
        match (axis, self.uncertainty) {
            (SweepAxis::PtDbm, _) => Some(self.radio.pt_dbm),
            (SweepAxis::Kappa, _) => Some(self.radio.kappa),
            (SweepAxis::DeltaBar, UncertaintyConfig::NormBounded { delta_bar }) => Some(delta_bar),
            (SweepAxis::EpsilonBar, UncertaintyConfig::Probabilistic { epsilon_bar, .. }) => {
                Some(epsilon_bar)
            }
            (SweepAxis::Rho, UncertaintyConfig::Probabilistic { rho, .. }) => Some(rho),
            _ => None,
        }
    }
}
