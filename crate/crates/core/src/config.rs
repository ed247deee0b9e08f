//! Observer configuration, read from TOML.
//!
//! ```toml
//! recognizer = "grid"          # grid | token | exhaustive
//! eightConnected = false       # grid only
//! geometry = "translation"     # grid only: translation | rotation
//! genes = 4                    # token only
//! cap = 1048576                # exhaustive only: power-multiset cap
//! deltaMut = [1.0, 0.0]        # optional, recognizer default otherwise
//! deltaRepMut = [0.0, 1.0]     # optional; `inf` is allowed
//! omega = [0, 999]             # optional inclusive state range
//! cycles = [151]               # optional generation lengths
//! window = 1                   # meta-state merge
//!
//! [thresholds]
//! epsilon = 0.05
//! minStates = 50
//! minPopulation = 2
//! minGenerations = 5
//! ```

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::Thresholds;
use crate::observer::{DistanceVector, GeometryMode, MutationBounds, Recognizer};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("bad config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecognizerKind {
    #[default]
    Grid,
    Token,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct ObserverConfig {
    pub recognizer: RecognizerKind,
    pub eight_connected: bool,
    pub geometry: GeometryMode,
    pub genes: usize,
    pub cap: u64,
    pub delta_mut: Option<Vec<f64>>,
    pub delta_rep_mut: Option<Vec<f64>>,
    pub omega: Option<[usize; 2]>,
    pub cycles: Option<Vec<usize>>,
    pub window: usize,
    pub thresholds: Thresholds,
}

impl Default for ObserverConfig {
    fn default() -> Self {
        Self {
            recognizer: RecognizerKind::Grid,
            eight_connected: false,
            geometry: GeometryMode::Translation,
            genes: 4,
            cap: crate::multiset::DEFAULT_POWER_CAP,
            delta_mut: None,
            delta_rep_mut: None,
            omega: None,
            cycles: None,
            window: 1,
            thresholds: Thresholds::default(),
        }
    }
}

impl ObserverConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn token(genes: usize) -> Self {
        Self {
            recognizer: RecognizerKind::Token,
            genes,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.thresholds;
        if !(t.epsilon > 0.0 && t.epsilon < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "epsilon {} is outside (0, 1)",
                t.epsilon
            )));
        }
        if self.window == 0 {
            return Err(ConfigError::Invalid("window must be positive".into()));
        }
        if let Some([a, b]) = self.omega {
            if a > b {
                return Err(ConfigError::Invalid(format!("omega [{a}, {b}] is empty")));
            }
        }
        if let Some(c) = &self.cycles {
            if c.is_empty() || c.contains(&0) {
                return Err(ConfigError::Invalid(
                    "cycles must be nonempty positive integers".into(),
                ));
            }
        }
        Ok(())
    }

    /// The configured bounds, or the recognizer's defaults, checked against
    /// its character space.
    pub fn bounds<R: Recognizer>(&self, rec: &R) -> Result<MutationBounds, ConfigError> {
        let d = rec.default_bounds();
        let b = MutationBounds {
            delta_mut: self
                .delta_mut
                .clone()
                .map(DistanceVector)
                .unwrap_or(d.delta_mut),
            delta_rep_mut: self
                .delta_rep_mut
                .clone()
                .map(DistanceVector)
                .unwrap_or(d.delta_rep_mut),
        };
        b.check(rec.space())
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(b)
    }

    /// Ω clipped to the run.
    pub fn omega_range(&self, states: usize) -> Range<usize> {
        match self.omega {
            Some([a, b]) => a.min(states)..(b + 1).min(states),
            None => 0..states,
        }
    }
}
