use std::collections::VecDeque;

use super::{JointAnnotation, MaterialGrid, MaterialLabel};
use crate::body::JointClearanceParams;

/// Sentinel in [`SegmentLabeling::segment_id`] for voxels outside every segment.
pub const UNSEGMENTED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentLabeling {
    pub dims: [usize; 3],
    pub segment_id: Vec<u32>,
    pub segment_count: usize,
    pub segment_volumes: Vec<usize>,
}

impl SegmentLabeling {
    pub fn voxels_of(&self, segment: u32) -> impl Iterator<Item = usize> + '_ {
        self.segment_id
            .iter()
            .enumerate()
            .filter(move |(_, &s)| s == segment)
            .map(|(i, _)| i)
    }
}

/// True when the voxel center lies inside any joint clearance cylinder.
pub(crate) fn masked_by_joint(
    grid: &MaterialGrid,
    joints: &[JointAnnotation],
    clearance: &JointClearanceParams,
    index: usize,
) -> bool {
    let c = grid.voxel_center(index);
    joints
        .iter()
        .any(|j| j.in_cylinder(&c, clearance.cylinder_radius, clearance.cylinder_half_length))
}

/// 6-connected labeling of rigid voxels outside every joint clearance cylinder.
///
/// Components are numbered in scanline order of their smallest voxel index.
pub fn label_segments(
    grid: &MaterialGrid,
    joints: &[JointAnnotation],
    clearance: &JointClearanceParams,
) -> SegmentLabeling {
    let dims = grid.dims();
    let n = grid.len();
    let mask: Vec<bool> = (0..n)
        .map(|idx| {
            grid.labels()[idx] == MaterialLabel::Rigid && !masked_by_joint(grid, joints, clearance, idx)
        })
        .collect();

    let mut segment_id = vec![UNSEGMENTED; n];
    let mut volumes = Vec::new();
    let mut queue = VecDeque::new();
    let strides = [1usize, dims[0], dims[0] * dims[1]];
    for seed in 0..n {
        if !mask[seed] || segment_id[seed] != UNSEGMENTED {
            continue;
        }
        let label = volumes.len() as u32;
        let mut volume = 0;
        segment_id[seed] = label;
        queue.push_back(seed);
        while let Some(idx) = queue.pop_front() {
            volume += 1;
            let c = grid.coords(idx);
            for axis in 0..3 {
                if c[axis] > 0 {
                    let nb = idx - strides[axis];
                    if mask[nb] && segment_id[nb] == UNSEGMENTED {
                        segment_id[nb] = label;
                        queue.push_back(nb);
                    }
                }
                if c[axis] + 1 < dims[axis] {
                    let nb = idx + strides[axis];
                    if mask[nb] && segment_id[nb] == UNSEGMENTED {
                        segment_id[nb] = label;
                        queue.push_back(nb);
                    }
                }
            }
        }
        volumes.push(volume);
    }
    SegmentLabeling { dims, segment_id, segment_count: volumes.len(), segment_volumes: volumes }
}
