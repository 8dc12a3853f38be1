//! TOML experiment configuration.
//!
//! Top-level keys describe the state, filter, tomography and Monte Carlo
//! settings; `[sweep]` and `[qpt]` hold subcommand-specific lists. Only
//! `epsilon` and `t_v` are required. Unknown keys are rejected.

use std::path::Path;

use distill_core::pipelines::{ExperimentConfig, Preparation};
use distill_core::rng::derive_seed;
use distill_core::states::Family;
use distill_core::tomography::{Noise, QstMethod, DEFAULT_ACQUISITION_SCALE};
use distill_core::uncertainty::DEFAULT_TRIALS;
use serde::{Deserialize, Serialize};

/// The seven filter transmissions characterized in the experiment.
pub const SAMPLE_TVS: [f64; 7] = [0.11, 0.13, 0.16, 0.21, 0.27, 0.41, 0.69];

/// Seed tag for the Monte Carlo stream derived from the top-level seed.
const MC_SEED_TAG: u64 = 0x4d43;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: std::io::Error },
    #[error("{0}")]
    Syntax(String),
    #[error("{key}: {message}")]
    Key { key: String, message: String },
}

fn key_error(key: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Key {
        key: key.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Phi,
    Psi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreparationName {
    Approx,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Linear,
    Mle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseName {
    None,
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_tv_list")]
    pub tv_list: Vec<f64>,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            tv_list: default_tv_list(),
            eps_list: default_eps_list(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QptSection {
    /// Transmission of the simulated filter; defaults to the top-level `t_v`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv_true: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_family")]
    pub family: FamilyName,
    pub epsilon: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "default_preparation")]
    pub preparation: PreparationName,
    #[serde(default)]
    pub depolarizing: f64,
    pub t_v: f64,
    #[serde(default = "one")]
    pub t_h: f64,
    #[serde(default = "default_scale")]
    pub acquisition_scale: f64,
    #[serde(default = "default_method")]
    pub method: MethodName,
    #[serde(default = "default_noise")]
    pub noise: NoiseName,
    #[serde(default)]
    pub seed: u64,
    /// Monte Carlo trials per stage; 0 disables error bars.
    #[serde(default = "default_trials")]
    pub mc_trials: usize,
    #[serde(default)]
    pub fit_tv: bool,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default = "default_qpt")]
    pub qpt: QptSection,
}

fn default_family() -> FamilyName {
    FamilyName::Phi
}
fn default_preparation() -> PreparationName {
    PreparationName::Approx
}
fn one() -> f64 {
    1.0
}
fn default_scale() -> f64 {
    DEFAULT_ACQUISITION_SCALE
}
fn default_method() -> MethodName {
    MethodName::Mle
}
fn default_noise() -> NoiseName {
    NoiseName::None
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_tv_list() -> Vec<f64> {
    SAMPLE_TVS.to_vec()
}
fn default_eps_list() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}
fn default_qpt() -> QptSection {
    QptSection { tv_true: None }
}

impl Config {
    /// Configuration with every optional key at its default.
    pub fn minimal(epsilon: f64, t_v: f64) -> Self {
        Self {
            family: default_family(),
            epsilon,
            lambda: 0.0,
            theta: 0.0,
            preparation: default_preparation(),
            depolarizing: 0.0,
            t_v,
            t_h: 1.0,
            acquisition_scale: default_scale(),
            method: default_method(),
            noise: default_noise(),
            seed: 0,
            mc_trials: DEFAULT_TRIALS,
            fit_tv: false,
            sweep: SweepSection::default(),
            qpt: default_qpt(),
        }
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::Syntax(e.message().to_string()))?;
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let message = e.inner().message().to_string();
            if path == "." {
                ConfigError::Syntax(message)
            } else {
                key_error(path, message)
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|reason| ConfigError::Io {
            path: path.display().to_string(),
            reason,
        })?;
        Self::parse_str(&text)
    }

    /// Full TOML document with every key written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |key: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(key_error(key, format!("{v} is outside [0, 1]")))
            }
        };
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(key_error("epsilon", format!("{} is outside (0, 1]", self.epsilon)));
        }
        unit("lambda", self.lambda)?;
        unit("depolarizing", self.depolarizing)?;
        unit("t_v", self.t_v)?;
        unit("t_h", self.t_h)?;
        if !self.theta.is_finite() {
            return Err(key_error("theta", "must be finite"));
        }
        if !(self.acquisition_scale > 0.0 && self.acquisition_scale.is_finite()) {
            return Err(key_error(
                "acquisition_scale",
                format!("{} is not a positive finite number", self.acquisition_scale),
            ));
        }
        if self.mc_trials == 1 {
            return Err(key_error("mc_trials", "must be 0 or at least 2"));
        }
        if self.sweep.tv_list.is_empty() {
            return Err(key_error("sweep.tv_list", "must not be empty"));
        }
        for (i, &v) in self.sweep.tv_list.iter().enumerate() {
            unit(&format!("sweep.tv_list[{i}]"), v)?;
        }
        if self.sweep.eps_list.is_empty() {
            return Err(key_error("sweep.eps_list", "must not be empty"));
        }
        for (i, &v) in self.sweep.eps_list.iter().enumerate() {
            if !(v > 0.0 && v <= 1.0) {
                return Err(key_error(
                    format!("sweep.eps_list[{i}]"),
                    format!("{v} is outside (0, 1]"),
                ));
            }
        }
        if let Some(t) = self.qpt.tv_true {
            unit("qpt.tv_true", t)?;
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        match self.family {
            FamilyName::Phi => Family::Phi,
            FamilyName::Psi => Family::Psi,
        }
    }

    pub fn mc_seed(&self) -> u64 {
        derive_seed(self.seed, MC_SEED_TAG)
    }

    pub fn qpt_tv_true(&self) -> f64 {
        self.qpt.tv_true.unwrap_or(self.t_v)
    }

    pub fn experiment(&self) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(self.epsilon, self.t_v);
        c.family = self.family();
        c.lambda = self.lambda;
        c.theta = self.theta;
        c.preparation = match self.preparation {
            PreparationName::Approx => Preparation::Approx,
            PreparationName::Exact => Preparation::Exact,
        };
        c.depolarizing = self.depolarizing;
        c.channel.t_h = self.t_h;
        c.acquisition_scale = self.acquisition_scale;
        c.method = match self.method {
            MethodName::Linear => QstMethod::Linear,
            MethodName::Mle => QstMethod::Mle,
        };
        c.noise = match self.noise {
            NoiseName::None => Noise::None,
            NoiseName::Poisson => Noise::Poisson,
        };
        c.seed = self.seed;
        c.mc_trials = self.mc_trials;
        c.mc_seed = self.mc_seed();
        c.fit_tv = self.fit_tv;
        c
    }
}
