//! Runs one design through every stage in fixed order and collects
//! per-stage reports, scores and the final parts.

mod batch;
mod config;
mod export;
mod report;

pub use batch::{batch_run, load_design_dir, write_batch_outputs, BatchResult, DesignRecord};
pub use config::{ConfigError, FabricationMeta, PipelineConfig};
pub use export::{export_run, scan_curve_csv, scores_csv_header, scores_csv_row, REPORT_JSON, SCORES_CSV};
pub use report::{PipelineReport, ReportMotor, ReportPart, ReportPlacement, ReportRoute};

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body::{compose_layers, process_rigid, process_soft, working_cell, BodyError, Part, ProcessorProvenance};
use crate::electronics::{carve_cavities, place_electronics, Component, ElectronicsError, ElectronicsSolution};
use crate::mesh::{oriented_bounding_box, MeshError};
use crate::motor::{solve_all_motors, MotorError, MotorSolution};
use crate::score::{
    aggregate, body_overlap_volume, score_cable, score_electronics, score_installability, score_motor, DesignOutcome,
    ScoreBundle, ScoreTerms,
};
use crate::voxel::{segment_and_tree, KinematicTree, MorphologyError, MorphologySpec};
use crate::wire::{route_wires, routing_endpoints, WireError, WireSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Tree,
    Processors,
    Motor,
    Electronics,
    Wire,
    Scoring,
}

impl Stage {
    pub const ORDER: [Stage; 6] =
        [Stage::Tree, Stage::Processors, Stage::Motor, Stage::Electronics, Stage::Wire, Stage::Scoring];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Tree => "tree",
            Stage::Processors => "processors",
            Stage::Motor => "motor",
            Stage::Electronics => "electronics",
            Stage::Wire => "wire",
            Stage::Scoring => "scoring",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Machine-readable failure reasons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonCode {
    InvalidTree,
    NoRigidSegments,
    InconsistentLayers,
    MeshFailure,
    JointNotInTree,
    ZeroFeasibleRange,
    NoFeasibleOffset,
    MotorGeometry,
    NoControllerHost,
    NoBatteryHost,
    ElectronicsGeometry,
    DisconnectedRoute,
    NoHostMesh,
    WireGeometry,
}

impl ReasonCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ReasonCode::InvalidTree => "invalid_tree",
            ReasonCode::NoRigidSegments => "no_rigid_segments",
            ReasonCode::InconsistentLayers => "inconsistent_layers",
            ReasonCode::MeshFailure => "mesh_failure",
            ReasonCode::JointNotInTree => "joint_not_in_tree",
            ReasonCode::ZeroFeasibleRange => "zero_feasible_range",
            ReasonCode::NoFeasibleOffset => "no_feasible_offset",
            ReasonCode::MotorGeometry => "motor_geometry",
            ReasonCode::NoControllerHost => "no_controller_host",
            ReasonCode::NoBatteryHost => "no_battery_host",
            ReasonCode::ElectronicsGeometry => "electronics_geometry",
            ReasonCode::DisconnectedRoute => "disconnected_route",
            ReasonCode::NoHostMesh => "no_host_mesh",
            ReasonCode::WireGeometry => "wire_geometry",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Error)]
#[error("{stage} stage failed: {detail}")]
pub struct StageFailure {
    pub stage: Stage,
    pub reason: ReasonCode,
    pub detail: String,
    pub joint: Option<u32>,
    pub segment: Option<u32>,
}

impl StageFailure {
    fn new(stage: Stage, reason: ReasonCode, detail: impl fmt::Display) -> Self {
        Self { stage, reason, detail: detail.to_string(), joint: None, segment: None }
    }

    fn at_joint(mut self, joint: Option<u32>) -> Self {
        self.joint = joint;
        self
    }
}

impl From<MotorError> for StageFailure {
    fn from(e: MotorError) -> Self {
        let reason = match e {
            MotorError::InvalidTree => ReasonCode::InvalidTree,
            MotorError::JointNotInTree(_) => ReasonCode::JointNotInTree,
            MotorError::ZeroFeasibleRange { .. } => ReasonCode::ZeroFeasibleRange,
            MotorError::NoFeasibleOffset { .. } => ReasonCode::NoFeasibleOffset,
            MotorError::GeometryFailure { .. } => ReasonCode::MotorGeometry,
        };
        StageFailure::new(Stage::Motor, reason, &e).at_joint(e.joint())
    }
}

impl From<ElectronicsError> for StageFailure {
    fn from(e: ElectronicsError) -> Self {
        let reason = match e {
            ElectronicsError::NoControllerHost => ReasonCode::NoControllerHost,
            ElectronicsError::NoBatteryHost => ReasonCode::NoBatteryHost,
            ElectronicsError::GeometryFailure(_) => ReasonCode::ElectronicsGeometry,
        };
        StageFailure::new(Stage::Electronics, reason, e)
    }
}

impl From<WireError> for StageFailure {
    fn from(e: WireError) -> Self {
        let reason = match e {
            WireError::Disconnected { .. } => ReasonCode::DisconnectedRoute,
            WireError::NoHostMesh { .. } | WireError::NoController => ReasonCode::NoHostMesh,
            WireError::GeometryFailure { .. } => ReasonCode::WireGeometry,
        };
        let segment = match e {
            WireError::NoHostMesh { segment } => Some(segment),
            _ => None,
        };
        StageFailure { segment, ..StageFailure::new(Stage::Wire, reason, &e).at_joint(e.joint()) }
    }
}

impl From<BodyError> for StageFailure {
    fn from(e: BodyError) -> Self {
        let reason = match e {
            BodyError::NoRigidSegments => ReasonCode::NoRigidSegments,
            BodyError::InconsistentLayers(_) => ReasonCode::InconsistentLayers,
            BodyError::Mesh(_) => ReasonCode::MeshFailure,
        };
        StageFailure::new(Stage::Processors, reason, e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StageStatus {
    Success,
    Failure { reason: ReasonCode, detail: String, joint: Option<u32>, segment: Option<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub stage: Stage,
    #[serde(flatten)]
    pub status: StageStatus,
    pub metrics: BTreeMap<String, f64>,
}

impl SolverReport {
    pub fn is_success(&self) -> bool {
        self.status == StageStatus::Success
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Morphology(#[from] MorphologyError),
    #[error("empty batch")]
    EmptyBatch,
    #[error("io error at {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Everything one run produced. A run with `outcome == Success` is a
/// complete blueprint.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub design: String,
    pub reports: Vec<SolverReport>,
    pub outcome: DesignOutcome,
    pub scores: ScoreBundle,
    pub tree: KinematicTree,
    pub rigid_parts: BTreeMap<u32, Part>,
    pub skin: Option<Part>,
    pub motors: Option<MotorSolution>,
    pub electronics: Option<ElectronicsSolution>,
    pub wires: Option<WireSolution>,
    /// Wall time per stage; kept out of the report so reports stay
    /// reproducible.
    pub timings: Vec<(Stage, Duration)>,
}

impl PipelineRun {
    pub fn is_blueprint(&self) -> bool {
        self.outcome == DesignOutcome::Success
    }

    pub fn failure(&self) -> Option<(&SolverReport, ReasonCode)> {
        let last = self.reports.last()?;
        match &last.status {
            StageStatus::Failure { reason, .. } => Some((last, *reason)),
            StageStatus::Success => None,
        }
    }

    /// Stage of the last report.
    pub fn stage_reached(&self) -> Stage {
        self.reports.last().map_or(Stage::Tree, |r| r.stage)
    }
}

struct Recorder {
    reports: Vec<SolverReport>,
    timings: Vec<(Stage, Duration)>,
}

impl Recorder {
    fn stage<T>(
        &mut self,
        stage: Stage,
        f: impl FnOnce() -> Result<(T, BTreeMap<String, f64>), StageFailure>,
    ) -> Result<T, StageFailure> {
        let start = Instant::now();
        let result = f();
        self.timings.push((stage, start.elapsed()));
        match result {
            Ok((value, metrics)) => {
                self.reports.push(SolverReport { stage, status: StageStatus::Success, metrics });
                Ok(value)
            }
            Err(e) => {
                let status =
                    StageStatus::Failure { reason: e.reason, detail: e.detail.clone(), joint: e.joint, segment: e.segment };
                self.reports.push(SolverReport { stage, status, metrics: BTreeMap::new() });
                Err(e)
            }
        }
    }
}

fn metrics<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn outcome_for(stage: Stage, reason: ReasonCode) -> DesignOutcome {
    match (stage, reason) {
        (_, ReasonCode::InvalidTree) => DesignOutcome::InvalidTree,
        (Stage::Tree | Stage::Processors, _) => DesignOutcome::ProcessorFail,
        (Stage::Motor, _) => DesignOutcome::MotorFail,
        (Stage::Electronics, _) => DesignOutcome::ElecFail,
        (Stage::Wire | Stage::Scoring, _) => DesignOutcome::WireFail,
    }
}

/// Runs every stage on `spec`. Stage failures are part of the returned run;
/// only invalid input is an error.
pub fn run_pipeline(spec: &MorphologySpec, config: &PipelineConfig) -> Result<PipelineRun, PipelineError> {
    config.validate()?;
    spec.validate()?;
    let design = spec.meta.get("name").cloned().unwrap_or_else(|| "design".into());
    let mut rec = Recorder { reports: Vec::new(), timings: Vec::new() };
    let mut raw = ScoreTerms::default();
    let mut run = PipelineRun {
        design,
        reports: Vec::new(),
        outcome: DesignOutcome::Success,
        scores: aggregate(raw, &config.scoring),
        tree: KinematicTree { nodes: vec![], edges: vec![], root: None, valid: false, invalid_reason: None },
        rigid_parts: BTreeMap::new(),
        skin: None,
        motors: None,
        electronics: None,
        wires: None,
        timings: Vec::new(),
    };

    let result = (|| -> Result<(), StageFailure> {
        let (labeling, tree) = rec.stage(Stage::Tree, || {
            let (labeling, tree) = segment_and_tree(spec, &config.clearance);
            let m = metrics([
                ("segments", labeling.segment_count as f64),
                ("joints", spec.joints.len() as f64),
                ("tree_edges", tree.edges.len() as f64),
            ]);
            if !tree.valid {
                let why = tree.invalid_reason.as_ref().map_or("invalid".to_string(), |r| r.to_string());
                return Err(StageFailure::new(Stage::Tree, ReasonCode::InvalidTree, format!("invalid kinematic tree: {why}")));
            }
            Ok(((labeling, tree), m))
        })?;
        run.tree = tree.clone();

        let voxel_size = spec.grid.voxel_size();
        let cell = working_cell(&spec.grid, config.cell_size);
        let body = rec.stage(Stage::Processors, || {
            let shell = config.shell_thickness_voxels * voxel_size;
            let rigid = process_rigid(spec, &labeling, &config.clearance, cell)?;
            let skin = process_soft(spec, &config.clearance, shell, cell)?;
            let provenance = ProcessorProvenance { clearance: config.clearance, shell_thickness_mm: shell, cell_size_mm: cell };
            let body = compose_layers(rigid, skin, tree.clone(), spec.joints.clone(), labeling, voxel_size, provenance)?;
            let m = metrics([
                ("rigid_parts", body.rigid_parts.len() as f64),
                ("rigid_volume_mm3", body.rigid_parts.values().map(Part::volume).sum()),
                ("skin_volume_mm3", body.skin.as_ref().map_or(0.0, Part::volume)),
                ("cell_size_mm", cell),
            ]);
            Ok((body, m))
        })?;
        run.rigid_parts = body.rigid_parts;
        run.skin = body.skin;

        let motors = rec.stage(Stage::Motor, || {
            let sol = solve_all_motors(&mut run.rigid_parts, &tree, &spec.joints, &config.motor, &config.motor_solver, cell)?;
            let mean = score_motor(&sol.placements).unwrap_or(0.0);
            let m = metrics([("motors", sol.placements.len() as f64), ("s_motor", mean)]);
            Ok((sol, m))
        })?;
        raw.s_motor = score_motor(&motors.placements).unwrap_or(0.0);
        run.motors = Some(motors);

        let elec = rec.stage(Stage::Electronics, || {
            let mut sol = place_electronics(&run.rigid_parts, &config.electronics)?;
            let host = sol
                .clearances
                .iter()
                .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0).then(y.0.cmp(x.0)))
                .map(|(&s, &(d, _))| (s, d));
            let s_elec = match host {
                Some((seg, d_max)) => {
                    let obb = oriented_bounding_box(&run.rigid_parts[&seg].mesh)
                        .map_err(|e: MeshError| StageFailure::new(Stage::Electronics, ReasonCode::ElectronicsGeometry, e))?;
                    score_electronics(d_max, &obb, &config.scoring).unwrap_or(0.0)
                }
                None => 0.0,
            };
            sol.v_insert_total = carve_cavities(&mut run.rigid_parts, &mut sol.placements, &config.electronics)?;
            let m = metrics([
                ("placements", sol.placements.len() as f64),
                ("v_insert_mm3", sol.v_insert_total),
                ("s_elec", s_elec),
            ]);
            Ok(((sol, s_elec), m))
        })?;
        raw.s_elec = elec.1;
        raw.s_elec_inst = score_installability(elec.0.v_insert_total, config.scoring.inst_lambda);
        let controller = elec.0.placements.iter().find(|p| p.component == Component::Controller).cloned();
        run.electronics = Some(elec.0);

        let wires = rec.stage(Stage::Wire, || {
            let motors = &run.motors.as_ref().expect("motor stage succeeded").placements;
            let controller = controller.ok_or(WireError::NoController)?;
            let ends = routing_endpoints(motors, &controller, &run.rigid_parts, &config.motor, &config.electronics, &config.wire)?;
            let sol = route_wires(&mut run.rigid_parts, run.skin.as_mut(), &tree, &ends, &config.wire, voxel_size)?;
            let m = metrics([
                ("routes", sol.routes.len() as f64),
                ("total_length_mm", sol.total_length),
                ("max_curvature_per_mm", sol.max_curvature),
            ]);
            Ok((sol, m))
        })?;
        raw.s_cable = score_cable(wires.total_length, wires.max_curvature, &config.scoring);
        run.wires = Some(wires);

        rec.stage(Stage::Scoring, || {
            let overlap = body_overlap_volume(&run.rigid_parts);
            raw.s_body_inst = score_installability(overlap, config.scoring.inst_lambda);
            let bundle = aggregate(raw, &config.scoring);
            Ok(((), metrics([("body_overlap_mm3", overlap), ("s_mfg", bundle.s_mfg)])))
        })
    })();

    if let Err(f) = &result {
        run.outcome = outcome_for(f.stage, f.reason);
    }
    run.scores = aggregate(raw, &config.scoring);
    run.reports = rec.reports;
    run.timings = rec.timings;
    Ok(run)
}
