use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body::JointClearanceParams;
use crate::electronics::ElectronicsSpec;
use crate::motor::{MotorSolverParams, MotorSpec};
use crate::score::ScoringParams;
use crate::wire::WireParams;

/// Passed through to the report; nothing in the pipeline reads it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FabricationMeta {
    pub rigid_material: String,
    pub soft_material: String,
    pub interlock_depth_mm: f64,
}

impl Default for FabricationMeta {
    fn default() -> Self {
        Self { rigid_material: "PLA".into(), soft_material: "TPU".into(), interlock_depth_mm: 0.63 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub clearance: JointClearanceParams,
    pub motor: MotorSpec,
    pub motor_solver: MotorSolverParams,
    pub electronics: ElectronicsSpec,
    pub wire: WireParams,
    pub scoring: ScoringParams,
    /// Working lattice cell in mm; half the voxel size when unset.
    pub cell_size: Option<f64>,
    /// Soft shell thickness in voxels.
    pub shell_thickness_voxels: f64,
    pub fabrication: FabricationMeta,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            clearance: JointClearanceParams::default(),
            motor: MotorSpec::default(),
            motor_solver: MotorSolverParams::default(),
            electronics: ElectronicsSpec::default(),
            wire: WireParams::default(),
            scoring: ScoringParams::default(),
            cell_size: None,
            shell_thickness_voxels: 2.0,
            fabrication: FabricationMeta::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("config is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.clearance.validate().map_err(ConfigError::Invalid)?;
        self.motor.validate().map_err(ConfigError::Invalid)?;
        self.motor_solver.validate().map_err(ConfigError::Invalid)?;
        self.electronics.validate().map_err(ConfigError::Invalid)?;
        self.wire.validate().map_err(ConfigError::Invalid)?;
        self.scoring.validate().map_err(ConfigError::Invalid)?;
        if let Some(c) = self.cell_size {
            if !(c > 0.0) {
                return Err(ConfigError::Invalid("cell_size must be positive".into()));
            }
        }
        if !(self.shell_thickness_voxels > 0.0) {
            return Err(ConfigError::Invalid("shell_thickness_voxels must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_slice(bytes)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
