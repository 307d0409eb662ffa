//! JSON configuration documents. Unknown keys are rejected so typos never
//! silently change a run.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use phasecrb_core::spectra::{BeamModel, OpoSqueezed, PhaseNoiseModel};
use phasecrb_core::tracking::{FeedbackMode, TrackingConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseConfig {
    PowerLaw { p: f64, kappa: f64 },
    OrnsteinUhlenbeck { kappa: f64, lambda: f64 },
    Wiener { kappa: f64 },
}

impl PhaseConfig {
    pub fn build(&self) -> Result<PhaseNoiseModel> {
        let model = match *self {
            PhaseConfig::PowerLaw { p, kappa } => PhaseNoiseModel::power_law(p, kappa),
            PhaseConfig::OrnsteinUhlenbeck { kappa, lambda } => {
                PhaseNoiseModel::ornstein_uhlenbeck(kappa, lambda)
            }
            PhaseConfig::Wiener { kappa } => PhaseNoiseModel::wiener(kappa),
        };
        model.context("invalid phase model")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BeamConfig {
    Coherent {
        alpha: f64,
    },
    OpoSqueezed {
        alpha: f64,
        r_plus: f64,
        r_minus: f64,
        gamma: f64,
        x: f64,
    },
    /// Same parameters as `opo_squeezed`, but routed through the general
    /// stationary-spectra pipeline (spectral convolution) instead of the
    /// closed form.
    GeneralFromOpo {
        alpha: f64,
        r_plus: f64,
        r_minus: f64,
        gamma: f64,
        x: f64,
    },
}

impl BeamConfig {
    pub fn build(&self) -> Result<BeamModel> {
        let beam = match *self {
            BeamConfig::Coherent { alpha } => BeamModel::coherent(alpha)?,
            BeamConfig::OpoSqueezed {
                alpha,
                r_plus,
                r_minus,
                gamma,
                x,
            } => BeamModel::Opo(OpoSqueezed::new(alpha, r_plus, r_minus, gamma, x)?),
            BeamConfig::GeneralFromOpo {
                alpha,
                r_plus,
                r_minus,
                gamma,
                x,
            } => BeamModel::General(OpoSqueezed::new(alpha, r_plus, r_minus, gamma, x)?.to_general()),
        };
        Ok(beam)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub phase: PhaseConfig,
    pub beam: BeamConfig,
}

fn default_points() -> usize {
    9
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    Coherent,
    Heisenberg,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub p: f64,
    pub kappa: f64,
    pub mode: ScalingMode,
    pub n_min: f64,
    pub n_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_gamma_min() -> f64 {
    0.0
}
fn default_gamma_max() -> f64 {
    4.0
}
fn default_tau_min() -> f64 {
    0.0
}
fn default_tau_max() -> f64 {
    1.0
}
fn default_gamma_steps() -> usize {
    32
}
fn default_tau_steps() -> usize {
    16
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    #[serde(default = "default_gamma_min")]
    pub gamma_min: f64,
    #[serde(default = "default_gamma_max")]
    pub gamma_max: f64,
    #[serde(default = "default_gamma_steps")]
    pub gamma_steps: usize,
    #[serde(default = "default_tau_min")]
    pub tau_min: f64,
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    #[serde(default = "default_tau_steps")]
    pub tau_steps: usize,
}

impl SurfaceConfig {
    /// Gamma grid stays strictly positive: a zero lower edge is shifted by
    /// one step.
    pub fn gamma_grid(&self) -> Vec<f64> {
        let n = self.gamma_steps.max(2);
        (0..n)
            .map(|i| {
                let g = self.gamma_min
                    + (self.gamma_max - self.gamma_min) * i as f64 / (n - 1) as f64;
                if g > 0.0 {
                    g
                } else {
                    self.gamma_min + (self.gamma_max - self.gamma_min) / (n - 1) as f64 * 0.5
                }
            })
            .collect()
    }

    pub fn tau_grid(&self) -> Vec<f64> {
        let n = self.tau_steps.max(2);
        (0..n)
            .map(|i| self.tau_min + (self.tau_max - self.tau_min) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    #[serde(default = "default_gamma_min")]
    pub gamma_min: f64,
    #[serde(default = "default_gamma_max")]
    pub gamma_max: f64,
    #[serde(default = "default_tau_min")]
    pub tau_min: f64,
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackConfig {
    Linearized,
    AdaptiveNonlinear,
}

fn default_seed() -> u64 {
    0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub phase: PhaseConfig,
    pub alpha: f64,
    pub dt: f64,
    pub duration: f64,
    pub burn_in: f64,
    pub trajectories: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub feedback: FeedbackConfig,
}

impl SimulateConfig {
    pub fn build(&self, seed_override: Option<u64>) -> Result<TrackingConfig> {
        let feedback = match self.feedback {
            FeedbackConfig::Linearized => FeedbackMode::Linearized,
            FeedbackConfig::AdaptiveNonlinear => FeedbackMode::AdaptiveNonlinear,
        };
        Ok(TrackingConfig::new(
            self.phase.build()?,
            self.alpha,
            self.dt,
            self.duration,
            self.burn_in,
            self.trajectories,
            seed_override.unwrap_or(self.seed),
            feedback,
        )?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub beam: BeamConfig,
}

/// Parses a config document, surfacing the offending field on failure.
pub fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    match serde_json::from_str::<T>(text) {
        Ok(v) => Ok(v),
        Err(e) => bail!("{e}"),
    }
}
