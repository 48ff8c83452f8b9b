//! The on-disk domain description.
//!
//! A domain is given as its strip decomposition: each strip is
//! `{(x, y) : x_lo ≤ x ≤ x_hi, h_lo(x) ≤ y ≤ h_hi(x)}` and every vertex lists the
//! strips that end there (`left`) and the strips that start there (`right`).
//! Strip ends that appear in no vertex are exterior ends.
//!
//! ```toml
//! [[strips]]
//! id = 0
//! x_lo = 0.0
//! x_hi = 6.283185307179586
//! h_lo = { poly = [0.0] }
//! h_hi = { poly = [2.0], sines = [{ amp = 1.0, freq = 1.0, phase = 0.0 }] }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::profile::Profile;
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLES_PER_STRIP: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripSpec {
    pub id: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub h_lo: Profile,
    pub h_hi: Profile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub x: f64,
    /// Ids of strips whose right end (`x_hi`) is at this vertex.
    #[serde(default)]
    pub left: Vec<usize>,
    /// Ids of strips whose left end (`x_lo`) is at this vertex.
    #[serde(default)]
    pub right: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub strips: Vec<StripSpec>,
    #[serde(default)]
    pub vertices: Vec<VertexSpec>,
    #[serde(default = "default_samples")]
    pub samples_per_strip: usize,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES_PER_STRIP
}

impl DomainSpec {
    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("domain spec is always serializable")
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads a `.json` or `.toml` file (decided by extension; TOML otherwise).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&src),
            _ => Self::from_toml(&src),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => self.to_json(),
            _ => self.to_toml()?,
        };
        std::fs::write(path, text)?;
        Ok(())
    }
}
