use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::DatasetError;

pub const FORMAT_VERSION: u32 = 1;

/// Hex SHA-256 of the scenario text the dataset was generated from.
pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub id: u8,
    pub name: String,
    pub color: [u8; 3],
    /// Labelled pixels over all frames.
    pub pixels: u64,
    pub boxes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_s: f64,
    pub fps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub frame_count: u64,
    pub rate: f64,
    pub resolution: [u32; 2],
    pub vehicle_count: usize,
    pub static_mesh_count: usize,
    pub flow_overflow: usize,
    pub classes: Vec<ClassStats>,
    pub timing: Timing,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<(), DatasetError> {
        let text = toml::to_string(self).map_err(|e| DatasetError::Manifest(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| DatasetError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        toml::from_str(&text).map_err(|e| DatasetError::Manifest(e.to_string()))
    }
}
