use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rgg::MonotoneProperty;
use crate::spaces::SpaceDescriptor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Threshold,
    Amplify,
    Pathwise,
    Sandwich,
    Counterexample,
}

/// A geometric grid of `points` radii from `min` to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl RadiusGrid {
    pub fn radii(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0 && self.max >= self.min && self.points >= 1) {
            return Err(Error::usage(format!("bad radius grid {self:?}")));
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let step = (self.max / self.min).ln() / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.min * (step * i as f64).exp()).collect())
    }
}

/// Expansion family parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    /// Generator pair `[a, b]`; defaults to the shipped pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<[[[i64; 2]; 2]; 2]>,
    /// Word length.
    #[serde(default)]
    pub t: usize,
    /// Walk length per suspension leg.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

/// Everything needed to re-run an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceDescriptor>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property: Option<MonotoneProperty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<RadiusGrid>,
    #[serde(default)]
    pub family: FamilyConfig,
    pub trials: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Toml(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Toml(e.to_string()))
    }

    /// Explicit radii, else the grid, else the single radius.
    pub fn radius_list(&self) -> Result<Vec<f64>> {
        if let Some(r) = &self.radii {
            return Ok(r.clone());
        }
        if let Some(g) = &self.grid {
            return g.radii();
        }
        self.radius.map(|r| vec![r]).ok_or_else(|| Error::usage("config needs radius, radii or grid"))
    }
}

/// Hex SHA-256 of a value's JSON serialization.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let json = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&json)))
}
