use serde::{Deserialize, Serialize};

use super::{FabricationMeta, PipelineConfig, PipelineRun, SolverReport};
use crate::electronics::Component;
use crate::mesh::Vec3;
use crate::motor::Configuration;
use crate::score::{DesignOutcome, ScoreBounds, ScoreBundle};
use crate::voxel::KinematicTree;
use crate::wire::SnappedEndpoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPart {
    pub label: String,
    pub segment: Option<u32>,
    pub file: String,
    pub triangles: usize,
    pub volume_mm3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMotor {
    pub joint: u32,
    pub segment_a: u32,
    pub segment_b: u32,
    pub holder_segment: u32,
    pub configuration: Configuration,
    pub offset_mm: f64,
    pub pose: [[f64; 4]; 4],
    pub score: f64,
    pub v_h_mm3: f64,
    pub v_c_mm3: f64,
    pub feasible_range_rad: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPlacement {
    pub component: Component,
    pub segment: u32,
    pub anchor: Vec3,
    pub pose: [[f64; 4]; 4],
    pub extents_mm: Vec3,
    pub v_insert_mm3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRoute {
    pub joint: u32,
    pub start: SnappedEndpoint,
    pub end: SnappedEndpoint,
    pub parts: String,
    pub waypoints: Vec<Vec3>,
    pub length_mm: f64,
    pub max_curvature_per_mm: f64,
}

/// The serialized run summary. Contains no wall-clock data, so identical
/// inputs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub design: String,
    pub status: String,
    pub outcome: DesignOutcome,
    pub stages: Vec<SolverReport>,
    pub scores: ScoreBundle,
    pub normalization_bounds: ScoreBounds,
    pub tree: KinematicTree,
    pub parts: Vec<ReportPart>,
    pub motors: Vec<ReportMotor>,
    pub electronics: Vec<ReportPlacement>,
    pub routes: Vec<ReportRoute>,
    pub total_length_mm: f64,
    pub max_curvature_per_mm: f64,
    pub fabrication: FabricationMeta,
}

impl PipelineReport {
    pub fn from_run(run: &PipelineRun, config: &PipelineConfig) -> Self {
        let mut parts: Vec<ReportPart> = run
            .rigid_parts
            .iter()
            .map(|(&seg, p)| ReportPart {
                label: p.label.clone(),
                segment: Some(seg),
                file: format!("{}.stl", p.label),
                triangles: p.mesh.triangles.len(),
                volume_mm3: p.volume(),
            })
            .collect();
        if let Some(s) = &run.skin {
            parts.push(ReportPart {
                label: s.label.clone(),
                segment: None,
                file: format!("{}.stl", s.label),
                triangles: s.mesh.triangles.len(),
                volume_mm3: s.volume(),
            });
        }
        let motors = run
            .motors
            .iter()
            .flat_map(|sol| {
                sol.placements.iter().map(|m| ReportMotor {
                    joint: m.joint,
                    segment_a: m.segment_a,
                    segment_b: m.segment_b,
                    holder_segment: m.holder_segment(),
                    configuration: m.configuration,
                    offset_mm: m.offset,
                    pose: m.pose,
                    score: m.score,
                    v_h_mm3: m.v_h,
                    v_c_mm3: m.v_c,
                    feasible_range_rad: sol.feasible.get(&m.joint).map(|f| f.range),
                })
            })
            .collect();
        let electronics = run
            .electronics
            .iter()
            .flat_map(|sol| &sol.placements)
            .map(|p| ReportPlacement {
                component: p.component,
                segment: p.segment,
                anchor: p.position,
                pose: p.matrix(),
                extents_mm: config.electronics.extents(p.component),
                v_insert_mm3: p.v_insert,
            })
            .collect();
        let routes = run
            .wires
            .iter()
            .flat_map(|w| &w.routes)
            .map(|r| ReportRoute {
                joint: r.joint,
                start: r.start,
                end: r.end,
                parts: r.path.host_part.clone(),
                waypoints: r.path.waypoints.clone(),
                length_mm: r.length,
                max_curvature_per_mm: r.max_curvature,
            })
            .collect();
        PipelineReport {
            design: run.design.clone(),
            status: if run.is_blueprint() { "success" } else { "failure" }.into(),
            outcome: run.outcome,
            stages: run.reports.clone(),
            scores: run.scores,
            normalization_bounds: config.scoring.bounds,
            tree: run.tree.clone(),
            parts,
            motors,
            electronics,
            routes,
            total_length_mm: run.wires.as_ref().map_or(0.0, |w| w.total_length),
            max_curvature_per_mm: run.wires.as_ref().map_or(0.0, |w| w.max_curvature),
            fabrication: config.fabrication.clone(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("report serializes");
        bytes.push(b'\n');
        bytes
    }
}
