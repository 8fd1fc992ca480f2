//! Motor mounting: feasible joint motion with interference carving, the
//! holder/connector offset scan and embedding of the mount geometry.

mod geometry;
mod motion;
mod scan;

pub use geometry::{embed_motor, holder_solids, connector_solids, motor_frame, overlap_volume, MotorFrame};
pub use motion::{feasible_motion_and_carve, rotation_angles, FeasibleMotion};
pub use scan::{balance_objective, motor_score, scan_lattice, scan_motor_offset, scan_motor_offset_meshes, scan_offsets, ScanSample};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body::Part;
use crate::voxel::{JointAnnotation, KinematicTree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HolderParams {
    pub outer_radius: f64,
    /// Wall thickness of the sleeve end that seats the motor.
    pub flange_thickness: f64,
    /// Radial length of the mounting arm measured from the motor axis.
    pub arm_reach: f64,
    pub arm_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConnectorParams {
    pub flange_radius: f64,
    pub thickness: f64,
    pub arm_reach: f64,
    pub arm_width: f64,
    /// Axial gap between the motor output face and the flange.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScrewPattern {
    pub count: usize,
    pub circle_radius: f64,
    pub hole_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotorSpec {
    pub body_radius: f64,
    pub body_length: f64,
    pub holder: HolderParams,
    pub connector: ConnectorParams,
    pub screw_holes: ScrewPattern,
    pub mass_g: f64,
}

impl Default for HolderParams {
    fn default() -> Self {
        Self { outer_radius: 19.0, flange_thickness: 6.0, arm_reach: 36.0, arm_width: 16.0 }
    }
}

impl Default for ConnectorParams {
    fn default() -> Self {
        Self { flange_radius: 19.0, thickness: 6.0, arm_reach: 36.0, arm_width: 16.0, gap: 2.5 }
    }
}

impl Default for ScrewPattern {
    fn default() -> Self {
        Self { count: 4, circle_radius: 17.0, hole_radius: 1.5 }
    }
}

impl Default for MotorSpec {
    fn default() -> Self {
        Self {
            body_radius: 15.0,
            body_length: 25.0,
            holder: HolderParams::default(),
            connector: ConnectorParams::default(),
            screw_holes: ScrewPattern::default(),
            mass_g: 60.0,
        }
    }
}

impl MotorSpec {
    pub fn validate(&self) -> Result<(), String> {
        let dims = [
            ("body_radius", self.body_radius),
            ("body_length", self.body_length),
            ("holder.outer_radius", self.holder.outer_radius),
            ("holder.flange_thickness", self.holder.flange_thickness),
            ("holder.arm_reach", self.holder.arm_reach),
            ("holder.arm_width", self.holder.arm_width),
            ("connector.flange_radius", self.connector.flange_radius),
            ("connector.thickness", self.connector.thickness),
            ("connector.arm_reach", self.connector.arm_reach),
            ("connector.arm_width", self.connector.arm_width),
            ("screw_holes.circle_radius", self.screw_holes.circle_radius),
            ("screw_holes.hole_radius", self.screw_holes.hole_radius),
        ];
        for (name, v) in dims {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("motor.{name} must be positive"));
            }
        }
        if self.connector.gap < 0.0 {
            return Err("motor.connector.gap must be non-negative".into());
        }
        if self.holder.outer_radius <= self.body_radius {
            return Err("motor.holder.outer_radius must exceed body_radius".into());
        }
        if self.screw_holes.count < 2 {
            return Err("motor.screw_holes.count must be at least 2".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotorSolverParams {
    /// Minimum attachment volume in mm³.
    pub tau: f64,
    pub balance_weight: f64,
    /// Offset interval in mm; `None` means ±2 motor lengths.
    pub scan_range: Option<[f64; 2]>,
    /// Offset step in mm; `None` means the working cell size.
    pub scan_step: Option<f64>,
    pub rotation_samples: usize,
    /// Allowed interference as a fraction of the smaller part volume.
    pub interference_tolerance: f64,
    /// Largest rest-pose overlap that may be carved away, as a fraction of
    /// the smaller part volume.
    pub max_carve_fraction: f64,
}

impl Default for MotorSolverParams {
    fn default() -> Self {
        Self {
            tau: 500.0,
            balance_weight: 0.25,
            scan_range: None,
            scan_step: None,
            rotation_samples: 13,
            interference_tolerance: 0.005,
            max_carve_fraction: 0.2,
        }
    }
}

impl MotorSolverParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tau >= 0.0) {
            return Err("motor_solver.tau must be non-negative".into());
        }
        if !(self.balance_weight >= 0.0) {
            return Err("motor_solver.balance_weight must be non-negative".into());
        }
        if let Some([lo, hi]) = self.scan_range {
            if !(lo < hi) {
                return Err("motor_solver.scan_range needs lo < hi".into());
            }
        }
        if let Some(step) = self.scan_step {
            if !(step > 0.0) {
                return Err("motor_solver.scan_step must be positive".into());
            }
        }
        if self.rotation_samples < 3 {
            return Err("motor_solver.rotation_samples must be at least 3".into());
        }
        Ok(())
    }

    pub fn resolved_range(&self, spec: &MotorSpec) -> [f64; 2] {
        self.scan_range.unwrap_or([-2.0 * spec.body_length, 2.0 * spec.body_length])
    }

    pub fn resolved_step(&self, cell_size: f64) -> f64 {
        self.scan_step.unwrap_or(cell_size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Configuration {
    HolderOnA,
    HolderOnB,
}

impl Configuration {
    pub const ALL: [Configuration; 2] = [Configuration::HolderOnA, Configuration::HolderOnB];

    pub fn as_str(self) -> &'static str {
        match self {
            Configuration::HolderOnA => "holder_on_a",
            Configuration::HolderOnB => "holder_on_b",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorPlacement {
    pub joint: u32,
    pub segment_a: u32,
    pub segment_b: u32,
    pub offset: f64,
    pub configuration: Configuration,
    /// Motor frame as a row-major 4×4 transform (mm).
    pub pose: [[f64; 4]; 4],
    pub score: f64,
    pub v_h: f64,
    pub v_c: f64,
    pub curves: Vec<ScanSample>,
}

impl MotorPlacement {
    pub fn holder_segment(&self) -> u32 {
        match self.configuration {
            Configuration::HolderOnA => self.segment_a,
            Configuration::HolderOnB => self.segment_b,
        }
    }

    pub fn connector_segment(&self) -> u32 {
        match self.configuration {
            Configuration::HolderOnA => self.segment_b,
            Configuration::HolderOnB => self.segment_a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MotorError {
    #[error("kinematic tree is invalid")]
    InvalidTree,
    #[error("joint {0} is not an edge of the kinematic tree")]
    JointNotInTree(u32),
    #[error("joint {joint}: rest pose interference exceeds the carve budget")]
    ZeroFeasibleRange { joint: u32 },
    #[error("joint {joint}: no offset gives both attachments at least tau")]
    NoFeasibleOffset { joint: u32 },
    #[error("joint {joint}: {detail}")]
    GeometryFailure { joint: u32, detail: String },
}

impl MotorError {
    pub fn joint(&self) -> Option<u32> {
        match self {
            MotorError::InvalidTree => None,
            MotorError::JointNotInTree(j) => Some(*j),
            MotorError::ZeroFeasibleRange { joint }
            | MotorError::NoFeasibleOffset { joint }
            | MotorError::GeometryFailure { joint, .. } => Some(*joint),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotorSolution {
    pub placements: Vec<MotorPlacement>,
    pub feasible: BTreeMap<u32, FeasibleMotion>,
}

/// Processes joints in ascending id order, mutating `parts` after each.
pub fn solve_all_motors(
    parts: &mut BTreeMap<u32, Part>,
    tree: &KinematicTree,
    joints: &[JointAnnotation],
    spec: &MotorSpec,
    params: &MotorSolverParams,
    cell_size: f64,
) -> Result<MotorSolution, MotorError> {
    if !tree.valid {
        return Err(MotorError::InvalidTree);
    }
    let mut sorted: Vec<&JointAnnotation> = joints.iter().collect();
    sorted.sort_by_key(|j| j.id);
    let mut placements = Vec::new();
    let mut feasible = BTreeMap::new();
    for joint in sorted {
        let edge = *tree.edge_for_joint(joint.id).ok_or(MotorError::JointNotInTree(joint.id))?;
        let (mut a, mut b) = (
            parts.remove(&edge.a).ok_or(MotorError::JointNotInTree(joint.id))?,
            parts.remove(&edge.b).ok_or(MotorError::JointNotInTree(joint.id))?,
        );
        let result = (|| {
            let motion = feasible_motion_and_carve(&mut a.field, &mut b.field, joint, params)?;
            let placement = scan_motor_offset(&a.field, &b.field, joint, (edge.a, edge.b), spec, params, cell_size)?;
            embed_motor(&mut a, &mut b, &placement, joint, spec)?;
            Ok((motion, placement))
        })();
        parts.insert(edge.a, a);
        parts.insert(edge.b, b);
        let (motion, placement) = result?;
        feasible.insert(joint.id, motion);
        placements.push(placement);
    }
    Ok(MotorSolution { placements, feasible })
}
