use std::fmt;

use serde::{Deserialize, Serialize};

use super::{JointAnnotation, MaterialGrid, SegmentLabeling, UNSEGMENTED};
use crate::body::JointClearanceParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub joint: u32,
    /// Segment with the larger contact count at the joint.
    pub a: u32,
    pub b: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeInvalidity {
    JointTouchesFewerThanTwo { joint: u32 },
    Disconnected,
    Cycle,
}

impl fmt::Display for TreeInvalidity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeInvalidity::JointTouchesFewerThanTwo { .. } => f.write_str("joint touches <2 segments"),
            TreeInvalidity::Disconnected => f.write_str("disconnected"),
            TreeInvalidity::Cycle => f.write_str("cycle"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicTree {
    pub nodes: Vec<u32>,
    pub edges: Vec<TreeEdge>,
    pub root: Option<u32>,
    pub valid: bool,
    pub invalid_reason: Option<TreeInvalidity>,
}

impl KinematicTree {
    pub fn edge_for_joint(&self, joint: u32) -> Option<&TreeEdge> {
        self.edges.iter().find(|e| e.joint == joint)
    }

    /// Segment ids along the tree path from `from` to `to`, inclusive.
    pub fn path_between(&self, from: u32, to: u32) -> Option<Vec<u32>> {
        let mut prev: std::collections::BTreeMap<u32, u32> = Default::default();
        let mut queue = std::collections::VecDeque::from([from]);
        let mut seen = std::collections::BTreeSet::from([from]);
        while let Some(n) = queue.pop_front() {
            if n == to {
                let mut path = vec![to];
                let mut cur = to;
                while let Some(&p) = prev.get(&cur) {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for e in &self.edges {
                let other = if e.a == n {
                    e.b
                } else if e.b == n {
                    e.a
                } else {
                    continue;
                };
                if seen.insert(other) {
                    prev.insert(other, n);
                    queue.push_back(other);
                }
            }
        }
        None
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Contact counts of each segment inside the joint cylinder dilated by one voxel.
pub(crate) fn joint_contacts(
    labeling: &SegmentLabeling,
    joint: &JointAnnotation,
    grid: &MaterialGrid,
    clearance: &JointClearanceParams,
) -> Vec<usize> {
    let pad = grid.voxel_size();
    let radius = clearance.cylinder_radius + pad;
    let half = clearance.cylinder_half_length + pad;
    let mut counts = vec![0usize; labeling.segment_count];
    for (idx, &seg) in labeling.segment_id.iter().enumerate() {
        if seg != UNSEGMENTED && joint.in_cylinder(&grid.voxel_center(idx), radius, half) {
            counts[seg as usize] += 1;
        }
    }
    counts
}

pub fn build_kinematic_tree(
    labeling: &SegmentLabeling,
    joints: &[JointAnnotation],
    grid: &MaterialGrid,
    clearance: &JointClearanceParams,
) -> KinematicTree {
    let nodes: Vec<u32> = (0..labeling.segment_count as u32).collect();
    let root = labeling
        .segment_volumes
        .iter()
        .enumerate()
        .max_by(|(ia, va), (ib, vb)| va.cmp(vb).then(ib.cmp(ia)))
        .map(|(i, _)| i as u32);

    let mut sorted: Vec<&JointAnnotation> = joints.iter().collect();
    sorted.sort_by_key(|j| j.id);

    let mut edges = Vec::new();
    let mut invalid = None;
    for joint in sorted {
        let counts = joint_contacts(labeling, joint, grid, clearance);
        let mut ranked: Vec<(usize, usize)> =
            counts.iter().copied().enumerate().filter(|&(_, c)| c > 0).collect();
        // descending count, ties to the lower segment id
        ranked.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        if ranked.len() < 2 {
            invalid.get_or_insert(TreeInvalidity::JointTouchesFewerThanTwo { joint: joint.id });
            continue;
        }
        edges.push(TreeEdge { joint: joint.id, a: ranked[0].0 as u32, b: ranked[1].0 as u32 });
    }

    if invalid.is_none() {
        let mut uf = UnionFind::new(nodes.len());
        if edges.iter().any(|e| !uf.union(e.a as usize, e.b as usize)) {
            invalid = Some(TreeInvalidity::Cycle);
        } else if nodes.is_empty() || edges.len() + 1 != nodes.len() {
            invalid = Some(TreeInvalidity::Disconnected);
        }
    }

    KinematicTree { nodes, edges, root, valid: invalid.is_none(), invalid_reason: invalid }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::{label_segments, MaterialLabel::Rigid};

    fn params() -> JointClearanceParams {
        JointClearanceParams {
            cylinder_radius: 12.0,
            cylinder_half_length: 8.0,
            soft_sphere_radius: 8.0,
            erode_dilate_radius: 1,
        }
    }

    fn tree_for(grid: &MaterialGrid, joints: &[JointAnnotation]) -> KinematicTree {
        let l = label_segments(grid, joints, &params());
        build_kinematic_tree(&l, joints, grid, &params())
    }

    #[test]
    fn two_segments_one_joint() {
        let mut g = MaterialGrid::new([20, 6, 6], 5.0);
        g.fill_box([0, 1, 1], [20, 5, 5], Rigid);
        let j = JointAnnotation::new(0, [50.0, 15.0, 15.0], [0.0, 0.0, 1.0], (-1.0, 1.0));
        let t = tree_for(&g, &[j]);
        assert!(t.valid, "{:?}", t.invalid_reason);
        assert_eq!(t.nodes.len(), 2);
        assert_eq!(t.edges.len(), 1);
    }

    #[test]
    fn joint_touching_one_segment_is_invalid() {
        let mut g = MaterialGrid::new([20, 6, 6], 5.0);
        g.fill_box([0, 1, 1], [6, 5, 5], Rigid);
        // cylinder at the free end of the bar
        let j = JointAnnotation::new(0, [30.0, 15.0, 15.0], [0.0, 0.0, 1.0], (-1.0, 1.0));
        let t = tree_for(&g, &[j]);
        assert!(!t.valid);
        assert_eq!(t.invalid_reason.unwrap().to_string(), "joint touches <2 segments");
    }

    #[test]
    fn ring_is_a_cycle() {
        // square ring of bars cut into three pieces by three joints
        let mut g = MaterialGrid::new([24, 24, 4], 5.0);
        g.fill_box([2, 2, 1], [22, 4, 3], Rigid);
        g.fill_box([2, 2, 1], [4, 22, 3], Rigid);
        g.fill_box([2, 20, 1], [22, 22, 3], Rigid);
        g.fill_box([20, 2, 1], [22, 22, 3], Rigid);
        let joints = [
            JointAnnotation::new(0, [60.0, 15.0, 10.0], [0.0, 1.0, 0.0], (-1.0, 1.0)),
            JointAnnotation::new(1, [15.0, 60.0, 10.0], [1.0, 0.0, 0.0], (-1.0, 1.0)),
            JointAnnotation::new(2, [105.0, 60.0, 10.0], [1.0, 0.0, 0.0], (-1.0, 1.0)),
        ];
        let t = tree_for(&g, &joints);
        // graph oracle: 3 segments joined by 3 edges cannot be a tree
        assert_eq!(t.nodes.len(), 3);
        assert_eq!(t.edges.len(), 3);
        assert!(!t.valid);
        assert_eq!(t.invalid_reason, Some(TreeInvalidity::Cycle));
    }

    #[test]
    fn separate_islands_are_disconnected() {
        let mut g = MaterialGrid::new([20, 6, 6], 5.0);
        g.fill_box([0, 1, 1], [4, 5, 5], Rigid);
        g.fill_box([10, 1, 1], [14, 5, 5], Rigid);
        let t = tree_for(&g, &[]);
        assert!(!t.valid);
        assert_eq!(t.invalid_reason, Some(TreeInvalidity::Disconnected));
        assert_eq!(t.root, Some(0));
    }

    #[test]
    fn path_between_walks_edges() {
        let t = KinematicTree {
            nodes: vec![0, 1, 2, 3],
            edges: vec![
                TreeEdge { joint: 0, a: 0, b: 1 },
                TreeEdge { joint: 1, a: 0, b: 2 },
                TreeEdge { joint: 2, a: 2, b: 3 },
            ],
            root: Some(0),
            valid: true,
            invalid_reason: None,
        };
        assert_eq!(t.path_between(1, 3), Some(vec![1, 0, 2, 3]));
    }
}
