//! Abstract voxel morphologies: material grids, joint annotations, rigid
//! segmentation and the kinematic tree built on top of it.

mod format;
mod morphology;
mod segment;
mod tree;

pub use format::{parse_morphology, serialize_morphology, MorphologyError};
pub use morphology::{ball_offsets, dilate, erode, opening, BinaryGrid};
pub use segment::{label_segments, SegmentLabeling, UNSEGMENTED};
pub use tree::{build_kinematic_tree, KinematicTree, TreeEdge, TreeInvalidity};

use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::body::JointClearanceParams;

pub const MIN_DIM: usize = 4;
pub const MAX_DIM: usize = 256;
pub const DEFAULT_DIM: usize = 64;
pub const DEFAULT_VOXEL_SIZE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaterialLabel {
    Empty,
    Rigid,
    Soft,
}

impl MaterialLabel {
    pub fn code(self) -> u8 {
        match self {
            MaterialLabel::Empty => 0,
            MaterialLabel::Rigid => 1,
            MaterialLabel::Soft => 2,
        }
    }

    pub fn from_code(code: u64) -> Option<Self> {
        match code {
            0 => Some(MaterialLabel::Empty),
            1 => Some(MaterialLabel::Rigid),
            2 => Some(MaterialLabel::Soft),
            _ => None,
        }
    }
}

/// Dense material lattice, x-fastest. Voxel `(i, j, k)` has its center at
/// `((i + 0.5) * voxel_size, (j + 0.5) * voxel_size, (k + 0.5) * voxel_size)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialGrid {
    dims: [usize; 3],
    voxel_size: f64,
    labels: Vec<MaterialLabel>,
}

impl MaterialGrid {
    pub fn new(dims: [usize; 3], voxel_size: f64) -> Self {
        assert!(
            dims.iter().all(|d| (MIN_DIM..=MAX_DIM).contains(d)),
            "grid dims must lie in [{MIN_DIM}, {MAX_DIM}]"
        );
        assert!(voxel_size > 0.0, "voxel size must be positive");
        Self {
            dims,
            voxel_size,
            labels: vec![MaterialLabel::Empty; dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn from_labels(
        dims: [usize; 3],
        voxel_size: f64,
        labels: Vec<MaterialLabel>,
    ) -> Result<Self, MorphologyError> {
        if !dims.iter().all(|d| (MIN_DIM..=MAX_DIM).contains(d)) {
            return Err(MorphologyError::invariant("dims", "each dimension must lie in [4, 256]"));
        }
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(MorphologyError::invariant("voxel_size_mm", "must be positive"));
        }
        if labels.len() != dims[0] * dims[1] * dims[2] {
            return Err(MorphologyError::invariant("labels", "length must equal nx*ny*nz"));
        }
        Ok(Self { dims, voxel_size, labels })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn labels(&self) -> &[MaterialLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let i = index % self.dims[0];
        let j = (index / self.dims[0]) % self.dims[1];
        let k = index / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> MaterialLabel {
        self.labels[self.index(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, label: MaterialLabel) {
        let idx = self.index(i, j, k);
        self.labels[idx] = label;
    }

    /// Fills the half-open index box `[lo, hi)` (clamped to the grid).
    pub fn fill_box(&mut self, lo: [usize; 3], hi: [usize; 3], label: MaterialLabel) {
        for k in lo[2]..hi[2].min(self.dims[2]) {
            for j in lo[1]..hi[1].min(self.dims[1]) {
                for i in lo[0]..hi[0].min(self.dims[0]) {
                    self.set(i, j, k, label);
                }
            }
        }
    }

    pub fn voxel_center(&self, index: usize) -> Vector3<f64> {
        let [i, j, k] = self.coords(index);
        Vector3::new(
            (i as f64 + 0.5) * self.voxel_size,
            (j as f64 + 0.5) * self.voxel_size,
            (k as f64 + 0.5) * self.voxel_size,
        )
    }

    /// Physical extent of the grid in mm.
    pub fn extent(&self) -> Vector3<f64> {
        Vector3::new(
            self.dims[0] as f64 * self.voxel_size,
            self.dims[1] as f64 * self.voxel_size,
            self.dims[2] as f64 * self.voxel_size,
        )
    }

    pub fn count(&self, label: MaterialLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn non_empty_count(&self) -> usize {
        self.labels.len() - self.count(MaterialLabel::Empty)
    }

    pub fn mask(&self, label: MaterialLabel) -> BinaryGrid {
        BinaryGrid::from_fn(self.dims, |idx| self.labels[idx] == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointAnnotation {
    pub id: u32,
    pub position: Vector3<f64>,
    pub axis: Vector3<f64>,
    /// Closed motion interval `[min, max]` in radians.
    pub motion_range: (f64, f64),
}

impl JointAnnotation {
    pub fn new(id: u32, position: [f64; 3], axis: [f64; 3], motion_range: (f64, f64)) -> Self {
        Self {
            id,
            position: Vector3::from(position),
            axis: Vector3::from(axis),
            motion_range,
        }
    }

    /// True when `p` lies in the clearance cylinder of this joint.
    pub fn in_cylinder(&self, p: &Vector3<f64>, radius: f64, half_length: f64) -> bool {
        let d = p - self.position;
        let along = d.dot(&self.axis);
        if along.abs() > half_length {
            return false;
        }
        let radial_sq = d.norm_squared() - along * along;
        radial_sq <= radius * radius
    }

    pub fn validate(&self, grid: &MaterialGrid) -> Result<(), MorphologyError> {
        let field = |name: &str| format!("joints[{}].{}", self.id, name);
        if !self.axis.iter().all(|c| c.is_finite()) || (self.axis.norm() - 1.0).abs() > 1e-9 {
            return Err(MorphologyError::invariant(&field("axis"), "axis not unit"));
        }
        let extent = grid.extent();
        for c in 0..3 {
            let p = self.position[c];
            if !(p.is_finite() && p >= 0.0 && p <= extent[c]) {
                return Err(MorphologyError::invariant(
                    &field("position_mm"),
                    "position outside the grid bounding box",
                ));
            }
        }
        let (lo, hi) = self.motion_range;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(MorphologyError::invariant(&field("range_rad"), "range must satisfy lo <= hi"));
        }
        if hi - lo > std::f64::consts::TAU + 1e-12 {
            return Err(MorphologyError::invariant(&field("range_rad"), "range wider than 2*pi"));
        }
        Ok(())
    }
}

/// Voxel grid plus joint annotations, the input to the whole pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphologySpec {
    pub grid: MaterialGrid,
    pub joints: Vec<JointAnnotation>,
    pub meta: BTreeMap<String, String>,
}

impl MorphologySpec {
    pub fn new(grid: MaterialGrid, joints: Vec<JointAnnotation>) -> Self {
        Self { grid, joints, meta: BTreeMap::new() }
    }

    pub fn with_meta(mut self, key: &str, value: &str) -> Self {
        self.meta.insert(key.to_owned(), value.to_owned());
        self
    }

    pub fn validate(&self) -> Result<(), MorphologyError> {
        let mut seen = std::collections::BTreeSet::new();
        for joint in &self.joints {
            if !seen.insert(joint.id) {
                return Err(MorphologyError::invariant(
                    &format!("joints[{}].id", joint.id),
                    "duplicate joint id",
                ));
            }
            joint.validate(&self.grid)?;
        }
        Ok(())
    }

    pub fn joint(&self, id: u32) -> Option<&JointAnnotation> {
        self.joints.iter().find(|j| j.id == id)
    }

    /// Joints sorted by ascending id.
    pub fn joints_by_id(&self) -> Vec<&JointAnnotation> {
        let mut joints: Vec<_> = self.joints.iter().collect();
        joints.sort_by_key(|j| j.id);
        joints
    }
}

/// Segments and tree in one step; the same clearance parameters must be used
/// later by the rigid processor.
pub fn segment_and_tree(
    spec: &MorphologySpec,
    clearance: &JointClearanceParams,
) -> (SegmentLabeling, KinematicTree) {
    let labeling = label_segments(&spec.grid, &spec.joints, clearance);
    let tree = build_kinematic_tree(&labeling, &spec.joints, &spec.grid, clearance);
    (labeling, tree)
}
