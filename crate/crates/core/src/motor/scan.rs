use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{connector_solids, holder_solids, motor_frame, overlap_volume, radial_toward};
use super::{Configuration, MotorError, MotorPlacement, MotorSolverParams, MotorSpec};
use crate::mesh::{voxelize, MeshError, TriMesh, VolumeField};
use crate::voxel::JointAnnotation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub configuration: Configuration,
    pub delta: f64,
    pub v_h: f64,
    pub v_c: f64,
    pub score: f64,
}

/// Balance objective `√(V_h·V_c) + α·(V_h + V_c)`.
pub fn balance_objective(v_h: f64, v_c: f64, alpha: f64) -> f64 {
    (v_h * v_c).sqrt() + alpha * (v_h + v_c)
}

/// Offset score: the balance objective gated on both volumes reaching `tau`.
pub fn motor_score(v_h: f64, v_c: f64, tau: f64, alpha: f64) -> f64 {
    if v_h >= tau && v_c >= tau {
        balance_objective(v_h, v_c, alpha)
    } else {
        0.0
    }
}

/// Uniform lattice `lo, lo + step, …` up to `hi` inclusive.
pub fn scan_lattice(range: [f64; 2], step: f64) -> Vec<f64> {
    let [lo, hi] = range;
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// True when `x` should win over the incumbent `y`: higher score, then
/// smaller |δ|, then holder-on-a, then the lower offset.
fn better(x: &ScanSample, y: &ScanSample) -> bool {
    x.score
        .total_cmp(&y.score)
        .then(y.delta.abs().total_cmp(&x.delta.abs()))
        .then(y.configuration.cmp(&x.configuration))
        .then(y.delta.total_cmp(&x.delta))
        .is_gt()
}

/// Evaluates `volumes(configuration, δ) -> (V_h, V_c)` on every lattice
/// offset for both configurations and returns the best sample plus the full
/// curve, or `None` when every sample scores 0. Samples are evaluated in
/// parallel; the reduction is sequential so the winner does not depend on
/// thread count.
pub fn scan_offsets(
    deltas: &[f64],
    params: &MotorSolverParams,
    volumes: impl Fn(Configuration, f64) -> (f64, f64) + Sync,
) -> Option<(ScanSample, Vec<ScanSample>)> {
    let jobs: Vec<(Configuration, f64)> =
        Configuration::ALL.iter().flat_map(|&c| deltas.iter().map(move |&d| (c, d))).collect();
    let curve: Vec<ScanSample> = jobs
        .par_iter()
        .map(|&(configuration, delta)| {
            let (v_h, v_c) = volumes(configuration, delta);
            let score = motor_score(v_h, v_c, params.tau, params.balance_weight);
            ScanSample { configuration, delta, v_h, v_c, score }
        })
        .collect();
    let mut best: Option<ScanSample> = None;
    for s in &curve {
        if s.score > 0.0 && best.as_ref().is_none_or(|b| better(s, b)) {
            best = Some(*s);
        }
    }
    best.map(|b| (b, curve))
}

/// Offset scan on occupancy fields of the two parts joined by `joint`.
pub fn scan_motor_offset(
    a: &VolumeField,
    b: &VolumeField,
    joint: &JointAnnotation,
    segments: (u32, u32),
    spec: &MotorSpec,
    params: &MotorSolverParams,
    cell_size: f64,
) -> Result<MotorPlacement, MotorError> {
    let com_a = a.occupied_centroid();
    let com_b = b.occupied_centroid();
    let toward_a = radial_toward(&joint.axis, &joint.position, com_a);
    let toward_b = radial_toward(&joint.axis, &joint.position, com_b);
    let setup = |c: Configuration| match c {
        Configuration::HolderOnA => (a, b, toward_a, toward_b),
        Configuration::HolderOnB => (b, a, toward_b, toward_a),
    };
    let deltas = scan_lattice(params.resolved_range(spec), params.resolved_step(cell_size));
    let (best, curves) = scan_offsets(&deltas, params, |c, delta| {
        let (holder_part, connector_part, holder_dir, connector_dir) = setup(c);
        let frame = motor_frame(joint, delta, &holder_dir);
        (
            overlap_volume(holder_part, &holder_solids(&frame, spec)),
            overlap_volume(connector_part, &connector_solids(&frame, &connector_dir, spec)),
        )
    })
    .ok_or(MotorError::NoFeasibleOffset { joint: joint.id })?;
    let (_, _, holder_dir, _) = setup(best.configuration);
    Ok(MotorPlacement {
        joint: joint.id,
        segment_a: segments.0,
        segment_b: segments.1,
        offset: best.delta,
        configuration: best.configuration,
        pose: motor_frame(joint, best.delta, &holder_dir).matrix(),
        score: best.score,
        v_h: best.v_h,
        v_c: best.v_c,
        curves,
    })
}

/// Mesh entry point: voxelizes both parts at `cell_size` and scans.
pub fn scan_motor_offset_meshes(
    part_a: &TriMesh,
    part_b: &TriMesh,
    joint: &JointAnnotation,
    spec: &MotorSpec,
    params: &MotorSolverParams,
    cell_size: f64,
) -> Result<MotorPlacement, MotorError> {
    let voxel = |m: &TriMesh| {
        voxelize(m, cell_size).map_err(|e: MeshError| MotorError::GeometryFailure { joint: joint.id, detail: e.to_string() })
    };
    scan_motor_offset(&voxel(part_a)?, &voxel(part_b)?, joint, (0, 1), spec, params, cell_size)
}
