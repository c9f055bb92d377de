//! The single JSON configuration file. Every section and key is optional;
//! missing values take the defaults of the corresponding type.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::TrainOptions;
use crate::dataset::SweepSpec;
use crate::descriptor::RoiSpec;
use crate::error::{Error, Result};
use crate::geometry::{ContactGrid, GeometryConfig, SensorGeometry};
use crate::mechanics::{MechanicsConfig, MechanicsParams};
use crate::optics::{FrameSpec, OpticsParams};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub geometry: GeometryConfig,
    pub mechanics: MechanicsConfig,
    pub optics: OpticsParams,
    pub frame: FrameSpec,
    pub roi: RoiSpec,
    pub sweep: SweepSpec,
    pub train: TrainOptions,
}

/// A validated configuration with derived quantities resolved.
#[derive(Debug, Clone)]
pub struct Sensor {
    pub geometry: SensorGeometry,
    pub grid: ContactGrid,
    pub mechanics: MechanicsParams,
    pub optics: OpticsParams,
    pub frame: FrameSpec,
    pub roi: RoiSpec,
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn build(&self) -> Result<Sensor> {
        let (geometry, grid) = self.geometry.build()?;
        let mechanics = self.mechanics.build(geometry.slab_thickness())?;
        self.optics.validate()?;
        self.frame.validate()?;
        self.roi.validate(self.frame.width, self.frame.height)?;
        self.sweep.validate()?;
        Ok(Sensor {
            geometry,
            grid,
            mechanics,
            optics: self.optics.clone(),
            frame: self.frame.clone(),
            roi: self.roi.clone(),
        })
    }

    /// SHA-256 of the compact JSON encoding with all defaults filled in.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
