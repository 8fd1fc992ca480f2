//! Semi-virtual stage: per-segment rigid bone meshes with joint clearances
//! and a hollow soft skin, composed into one layered body.

mod bundle;

pub use bundle::{write_body_bundle, BODY_JSON};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{marching_cubes, mesh_volume, Lattice, MeshError, Solid, TriMesh, Vec3, VolumeField};
use crate::voxel::{
    erode, opening, segment_and_tree, BinaryGrid, JointAnnotation, KinematicTree, MaterialGrid, MaterialLabel,
    MorphologySpec, SegmentLabeling, UNSEGMENTED,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JointClearanceParams {
    pub cylinder_radius: f64,
    pub cylinder_half_length: f64,
    pub soft_sphere_radius: f64,
    pub erode_dilate_radius: usize,
}

impl Default for JointClearanceParams {
    fn default() -> Self {
        // sized from the default motor: 1.6 x body radius 15, 1.2 x length 25
        Self {
            cylinder_radius: 24.0,
            cylinder_half_length: 30.0,
            soft_sphere_radius: 24.0 + 2.0 * crate::voxel::DEFAULT_VOXEL_SIZE,
            erode_dilate_radius: 1,
        }
    }
}

impl JointClearanceParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("cylinder_radius", self.cylinder_radius),
            ("cylinder_half_length", self.cylinder_half_length),
            ("soft_sphere_radius", self.soft_sphere_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("clearance.{name} must be positive"));
            }
        }
        Ok(())
    }

    pub fn cylinder(&self, joint: &JointAnnotation) -> Solid {
        Solid::Cylinder {
            center: joint.position,
            axis: joint.axis,
            radius: self.cylinder_radius,
            half_length: self.cylinder_half_length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BodyError {
    #[error("morphology has no rigid segments")]
    NoRigidSegments,
    #[error("inconsistent layers: {0}")]
    InconsistentLayers(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// A printable part: occupancy on the working lattice (the source of truth
/// for booleans) and the mesh extracted from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub label: String,
    pub field: VolumeField,
    pub mesh: TriMesh,
}

impl Part {
    pub fn from_field(label: impl Into<String>, field: VolumeField) -> Result<Self, MeshError> {
        let label = label.into();
        let mesh = marching_cubes(&field, 0.5)?.with_label(label.clone());
        Ok(Self { label, field, mesh })
    }

    /// Re-extracts the mesh after the field changed.
    pub fn remesh(&mut self) -> Result<(), MeshError> {
        self.mesh = marching_cubes(&self.field, 0.5)?.with_label(self.label.clone());
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.field.occupied_volume()
    }
}

pub fn rigid_label(segment: u32) -> String {
    format!("rigid_{segment}")
}

pub const SKIN_LABEL: &str = "skin";

/// Upsamples voxels selected by `keep` onto the working lattice.
fn voxels_to_field(grid: &MaterialGrid, cell_size: f64, keep: impl Fn(usize) -> bool) -> Option<VolumeField> {
    let vs = grid.voxel_size();
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for idx in (0..grid.len()).filter(|&i| keep(i)) {
        let c = grid.voxel_center(idx);
        lo = lo.inf(&(c - Vec3::repeat(0.5 * vs)));
        hi = hi.sup(&(c + Vec3::repeat(0.5 * vs)));
    }
    if lo.x > hi.x {
        return None;
    }
    let lattice = Lattice::covering(&lo, &hi, cell_size, 1);
    let dims = grid.dims();
    let field = VolumeField::from_fn(lattice, |p| {
        let mut ijk = [0usize; 3];
        for a in 0..3 {
            let f = (p[a] / vs).floor();
            if f < 0.0 || f >= dims[a] as f64 {
                return 0.0;
            }
            ijk[a] = f as usize;
        }
        f64::from(u8::from(keep(grid.index(ijk[0], ijk[1], ijk[2]))))
    });
    Some(field)
}

/// Working cell size: half the voxel unless configured.
pub fn working_cell(grid: &MaterialGrid, cell_size: Option<f64>) -> f64 {
    cell_size.unwrap_or(grid.voxel_size() / 2.0)
}

/// Per-segment rigid parts with every joint clearance cylinder removed.
pub fn process_rigid(
    spec: &MorphologySpec,
    labeling: &SegmentLabeling,
    clearance: &JointClearanceParams,
    cell_size: f64,
) -> Result<BTreeMap<u32, Part>, BodyError> {
    if labeling.segment_count == 0 {
        return Err(BodyError::NoRigidSegments);
    }
    let mut parts = BTreeMap::new();
    for seg in 0..labeling.segment_count as u32 {
        let mut field = voxels_to_field(&spec.grid, cell_size, |i| labeling.segment_id[i] == seg)
            .ok_or(BodyError::NoRigidSegments)?;
        for joint in &spec.joints {
            clearance.cylinder(joint).paint(&mut field, 0.0);
        }
        parts.insert(seg, Part::from_field(rigid_label(seg), field)?);
    }
    Ok(parts)
}

/// Soft voxels after joint sphere removal, opening and hollowing, before
/// meshing.
pub fn soft_shell_voxels(spec: &MorphologySpec, clearance: &JointClearanceParams, shell_thickness: f64) -> BinaryGrid {
    let grid = &spec.grid;
    let r2 = clearance.soft_sphere_radius * clearance.soft_sphere_radius;
    let soft = BinaryGrid::from_fn(grid.dims(), |idx| {
        grid.labels()[idx] == MaterialLabel::Soft && {
            let c = grid.voxel_center(idx);
            spec.joints.iter().all(|j| (c - j.position).norm_squared() > r2)
        }
    });
    let smoothed = opening(&soft, clearance.erode_dilate_radius);
    let shell_voxels = (shell_thickness / grid.voxel_size()).ceil().max(1.0) as usize;
    smoothed.and_not(&erode(&smoothed, shell_voxels))
}

/// Hollow skin mesh, or `None` when no soft voxels survive.
pub fn process_soft(
    spec: &MorphologySpec,
    clearance: &JointClearanceParams,
    shell_thickness: f64,
    cell_size: f64,
) -> Result<Option<Part>, BodyError> {
    let shell = soft_shell_voxels(spec, clearance, shell_thickness);
    if shell.count() == 0 {
        return Ok(None);
    }
    let field = voxels_to_field(&spec.grid, cell_size, |i| shell.data[i]).expect("shell is non-empty");
    Ok(Some(Part::from_field(SKIN_LABEL, field)?))
}

/// Record of the parameters a body was processed with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessorProvenance {
    pub clearance: JointClearanceParams,
    pub shell_thickness_mm: f64,
    pub cell_size_mm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiVirtualBody {
    pub rigid_parts: BTreeMap<u32, Part>,
    pub skin: Option<Part>,
    pub tree: KinematicTree,
    pub joints: Vec<JointAnnotation>,
    pub labeling: SegmentLabeling,
    pub voxel_size: f64,
    pub provenance: ProcessorProvenance,
}

impl SemiVirtualBody {
    pub fn rigid_meshes(&self) -> BTreeMap<u32, &TriMesh> {
        self.rigid_parts.iter().map(|(k, p)| (*k, &p.mesh)).collect()
    }

    pub fn cell_size(&self) -> f64 {
        self.provenance.cell_size_mm
    }
}

pub fn compose_layers(
    rigid_parts: BTreeMap<u32, Part>,
    skin: Option<Part>,
    tree: KinematicTree,
    joints: Vec<JointAnnotation>,
    labeling: SegmentLabeling,
    voxel_size: f64,
    provenance: ProcessorProvenance,
) -> Result<SemiVirtualBody, BodyError> {
    let keys: Vec<u32> = rigid_parts.keys().copied().collect();
    let mut nodes = tree.nodes.clone();
    nodes.sort_unstable();
    if keys != nodes {
        return Err(BodyError::InconsistentLayers(format!("part keys {keys:?} differ from tree nodes {nodes:?}")));
    }
    for (id, part) in rigid_parts.iter().map(|(k, p)| (k.to_string(), p)).chain(skin.iter().map(|p| ("skin".into(), p))) {
        part.mesh
            .check_watertight()
            .map_err(|e| BodyError::InconsistentLayers(format!("part {id}: {e}")))?;
        if mesh_volume(&part.mesh)? <= 0.0 {
            return Err(BodyError::InconsistentLayers(format!("part {id} has no volume")));
        }
    }
    Ok(SemiVirtualBody { rigid_parts, skin, tree, joints, labeling, voxel_size, provenance })
}

/// Segmentation, both processors and composition in one call.
pub fn build_body(
    spec: &MorphologySpec,
    clearance: &JointClearanceParams,
    shell_thickness: f64,
    cell_size: f64,
) -> Result<SemiVirtualBody, BodyError> {
    let (labeling, tree) = segment_and_tree(spec, clearance);
    let rigid = process_rigid(spec, &labeling, clearance, cell_size)?;
    let skin = process_soft(spec, clearance, shell_thickness, cell_size)?;
    let provenance = ProcessorProvenance { clearance: *clearance, shell_thickness_mm: shell_thickness, cell_size_mm: cell_size };
    compose_layers(rigid, skin, tree, spec.joints.clone(), labeling, spec.grid.voxel_size(), provenance)
}

/// Number of rigid voxels that belong to some segment.
pub fn segmented_voxel_count(labeling: &SegmentLabeling) -> usize {
    labeling.segment_id.iter().filter(|&&s| s != UNSEGMENTED).count()
}
