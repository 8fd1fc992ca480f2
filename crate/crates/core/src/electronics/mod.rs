//! Electronics placement: controller and battery boxes anchored at segment
//! centers of mass, oriented from a discrete rotation set, and carved out as
//! cavities.

mod orientations;

pub use orientations::{candidate_orientations, OrientationLevel};

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body::Part;
use crate::mesh::{max_interior_clearance, signed_distance, Solid, Vec3, VolumeField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ElectronicsSpec {
    /// Full box lengths in mm.
    pub controller_extents: [f64; 3],
    pub battery_extents: [f64; 3],
    pub clearance: f64,
    /// Stacking direction in the box frame.
    pub insertion_axis: [f64; 3],
    /// Gap between stacked boxes in mm.
    pub stack_gap: f64,
}

impl Default for ElectronicsSpec {
    fn default() -> Self {
        Self {
            controller_extents: [44.0, 44.0, 16.0],
            battery_extents: [60.0, 34.0, 18.0],
            clearance: 1.5,
            insertion_axis: [0.0, 0.0, 1.0],
            stack_gap: 2.0,
        }
    }
}

impl ElectronicsSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.controller_extents.iter().chain(&self.battery_extents).any(|&e| !(e > 0.0)) {
            return Err("electronics box extents must be positive".into());
        }
        if !(self.clearance >= 0.0) || !(self.stack_gap >= 0.0) {
            return Err("electronics clearance and stack_gap must be non-negative".into());
        }
        let n = Vec3::from(self.insertion_axis).norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err("electronics.insertion_axis must be a unit vector".into());
        }
        Ok(())
    }

    pub fn extents(&self, component: Component) -> Vec3 {
        Vec3::from(match component {
            Component::Controller => self.controller_extents,
            Component::Battery => self.battery_extents,
        })
    }

    /// Box-frame centers of battery and controller when stacked (controller
    /// on top along the insertion axis), centered on the anchor.
    pub fn stack_offsets(&self) -> (Vec3, Vec3) {
        let u = Vec3::from(self.insertion_axis);
        let height = |e: Vec3| u.abs().dot(&e);
        let (hb, hc) = (height(self.extents(Component::Battery)), height(self.extents(Component::Controller)));
        let total = hb + self.stack_gap + hc;
        (u * (-0.5 * total + 0.5 * hb), u * (0.5 * total - 0.5 * hc))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Controller,
    Battery,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Controller => "controller",
            Component::Battery => "battery",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectronicsPlacement {
    pub component: Component,
    pub segment: u32,
    /// Anchor point: the host segment's center of mass.
    pub position: Vec3,
    pub rotation: Matrix3<f64>,
    /// Box center relative to the anchor, in the box frame.
    pub local_offset: Vec3,
    /// Part volume above the box along world +z (insertion interference).
    pub v_insert: f64,
}

impl ElectronicsPlacement {
    pub fn box_center(&self) -> Vec3 {
        self.position + self.rotation * self.local_offset
    }

    /// Box pose as a row-major 4×4 transform.
    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let c = self.box_center();
        let r = &self.rotation;
        [
            [r[(0, 0)], r[(0, 1)], r[(0, 2)], c.x],
            [r[(1, 0)], r[(1, 1)], r[(1, 2)], c.y],
            [r[(2, 0)], r[(2, 1)], r[(2, 2)], c.z],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElectronicsError {
    #[error("no segment hosts controller")]
    NoControllerHost,
    #[error("no segment hosts battery")]
    NoBatteryHost,
    #[error("electronics geometry failure: {0}")]
    GeometryFailure(String),
}

/// Surface sample points of a box: a lattice on each face with spacing at
/// most `spacing`, which includes edges and vertices.
fn box_samples(extents: &Vec3, rotation: &Matrix3<f64>, center: &Vec3, spacing: f64) -> Vec<Vec3> {
    let half = extents * 0.5;
    let mut out = Vec::new();
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        let nu = (extents[u] / spacing).ceil().max(1.0) as usize;
        let nv = (extents[v] / spacing).ceil().max(1.0) as usize;
        for side in [-1.0, 1.0] {
            for a in 0..=nu {
                for b in 0..=nv {
                    let mut local = Vec3::zeros();
                    local[axis] = side * half[axis];
                    local[u] = -half[u] + extents[u] * a as f64 / nu as f64;
                    local[v] = -half[v] + extents[v] * b as f64 / nv as f64;
                    out.push(center + rotation * local);
                }
            }
        }
    }
    out
}

/// True when every surface sample of the box has signed distance at least
/// `clearance` in `sdf`.
pub fn test_containment(sdf: &VolumeField, extents: &Vec3, rotation: &Matrix3<f64>, center: &Vec3, clearance: f64) -> bool {
    box_samples(extents, rotation, center, sdf.cell_size)
        .iter()
        .all(|p| sdf.sample_trilinear(p).is_some_and(|phi| phi >= clearance))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectronicsSolution {
    pub placements: Vec<ElectronicsPlacement>,
    pub v_insert_total: f64,
    /// Maximum interior clearance and its location per segment, measured
    /// on the parts before the cavities were carved.
    pub clearances: BTreeMap<u32, (f64, Vec3)>,
}

struct Host<'a> {
    segment: u32,
    anchor: Vec3,
    sdf: &'a VolumeField,
}

fn first_fit(host: &Host, rotations: &[Matrix3<f64>], boxes: &[(Vec3, Vec3)], clearance: f64) -> Option<Matrix3<f64>> {
    rotations.iter().copied().find(|r| {
        boxes.iter().all(|(extents, offset)| test_containment(host.sdf, extents, r, &(host.anchor + r * offset), clearance))
    })
}

/// Finds hosts for both boxes. Segments are tried by descending volume,
/// first for the stacked pair, then for each box on its own.
pub fn place_electronics(parts: &BTreeMap<u32, Part>, spec: &ElectronicsSpec) -> Result<ElectronicsSolution, ElectronicsError> {
    let mut sdfs = BTreeMap::new();
    let mut clearances = BTreeMap::new();
    for (&seg, part) in parts {
        if let Ok(sdf) = signed_distance(&part.field) {
            if let Ok(c) = max_interior_clearance(&sdf) {
                clearances.insert(seg, c);
            }
            sdfs.insert(seg, sdf);
        }
    }
    let mut order: Vec<(u32, f64)> = parts.iter().map(|(&s, p)| (s, p.volume())).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let hosts: Vec<Host> = order
        .iter()
        .filter_map(|&(seg, _)| {
            Some(Host { segment: seg, anchor: parts[&seg].field.occupied_centroid()?, sdf: sdfs.get(&seg)? })
        })
        .collect();

    let mut rotations = candidate_orientations(OrientationLevel::Coarse);
    rotations.extend(candidate_orientations(OrientationLevel::Fine));
    let extents_c = spec.extents(Component::Controller);
    let extents_b = spec.extents(Component::Battery);
    let (offset_b, offset_c) = spec.stack_offsets();
    let placement = |component, host: &Host, rotation, local_offset| ElectronicsPlacement {
        component,
        segment: host.segment,
        position: host.anchor,
        rotation,
        local_offset,
        v_insert: 0.0,
    };

    for host in &hosts {
        if let Some(r) = first_fit(host, &rotations, &[(extents_c, offset_c), (extents_b, offset_b)], spec.clearance) {
            return Ok(ElectronicsSolution {
                placements: vec![
                    placement(Component::Controller, host, r, offset_c),
                    placement(Component::Battery, host, r, offset_b),
                ],
                v_insert_total: 0.0,
                clearances,
            });
        }
    }
    let single = |extents: Vec3, skip: Option<u32>| {
        hosts
            .iter()
            .filter(|h| Some(h.segment) != skip)
            .find_map(|h| first_fit(h, &rotations, &[(extents, Vec3::zeros())], spec.clearance).map(|r| (h, r)))
    };
    let (ch, cr) = single(extents_c, None).ok_or(ElectronicsError::NoControllerHost)?;
    let (bh, br) = single(extents_b, Some(ch.segment)).ok_or(ElectronicsError::NoBatteryHost)?;
    Ok(ElectronicsSolution {
        placements: vec![
            placement(Component::Controller, ch, cr, Vec3::zeros()),
            placement(Component::Battery, bh, br, Vec3::zeros()),
        ],
        v_insert_total: 0.0,
        clearances,
    })
}

/// True when the vertical segment from `p` down to `p - reach·ẑ` meets the
/// box, i.e. `p` lies in the box swept upward by `reach`.
fn in_upward_sweep(p: &Vec3, center: &Vec3, rotation: &Matrix3<f64>, half: &Vec3, reach: f64) -> bool {
    let origin = rotation.transpose() * (p - center);
    let dir = rotation.transpose() * -Vec3::z();
    let (mut t0, mut t1) = (0.0_f64, reach);
    for a in 0..3 {
        if dir[a].abs() < 1e-15 {
            if origin[a].abs() > half[a] {
                return false;
            }
        } else {
            let (ta, tb) = ((-half[a] - origin[a]) / dir[a], (half[a] - origin[a]) / dir[a]);
            t0 = t0.max(ta.min(tb));
            t1 = t1.min(ta.max(tb));
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Occupied volume of `field` in the box swept along world +z up to the top
/// of the field's occupied bounds.
pub fn insertion_interference(field: &VolumeField, extents: &Vec3, rotation: &Matrix3<f64>, center: &Vec3) -> f64 {
    let Some((_, top)) = field.occupied_bounds() else { return 0.0 };
    let half = extents * 0.5;
    let reach = (top.z - center.z).max(0.0);
    let (lo, hi) = Solid::Box { center: *center, rotation: *rotation, half_extents: half }.bounds();
    let lattice = field.lattice();
    let Some(range) = lattice.index_range(&lo, &Vec3::new(hi.x, hi.y, top.z.max(hi.z))) else { return 0.0 };
    let mut n = 0usize;
    for k in range[2].0..=range[2].1 {
        for j in range[1].0..=range[1].1 {
            for i in range[0].0..=range[0].1 {
                if field.values[lattice.index(i, j, k)] > 0.5 && in_upward_sweep(&lattice.center(i, j, k), center, rotation, &half, reach) {
                    n += 1;
                }
            }
        }
    }
    n as f64 * field.cell_volume()
}

/// Subtracts the clearance-inflated boxes from their hosts, then records
/// each box's insertion interference. Returns the total.
pub fn carve_cavities(
    parts: &mut BTreeMap<u32, Part>,
    placements: &mut [ElectronicsPlacement],
    spec: &ElectronicsSpec,
) -> Result<f64, ElectronicsError> {
    for p in placements.iter() {
        let part = parts
            .get_mut(&p.segment)
            .ok_or_else(|| ElectronicsError::GeometryFailure(format!("segment {} missing", p.segment)))?;
        let half = spec.extents(p.component) * 0.5 + Vec3::repeat(spec.clearance);
        Solid::Box { center: p.box_center(), rotation: p.rotation, half_extents: half }.paint(&mut part.field, 0.0);
    }
    let mut total = 0.0;
    for p in placements.iter_mut() {
        let part = &parts[&p.segment];
        p.v_insert = insertion_interference(&part.field, &spec.extents(p.component), &p.rotation, &p.box_center());
        total += p.v_insert;
    }
    let mut hosts: Vec<u32> = placements.iter().map(|p| p.segment).collect();
    hosts.dedup();
    for seg in hosts {
        let part = parts.get_mut(&seg).expect("host exists");
        part.remesh().map_err(|e| ElectronicsError::GeometryFailure(format!("segment {seg}: {e}")))?;
    }
    Ok(total)
}

/// Placement followed by cavity carving.
pub fn solve_electronics(parts: &mut BTreeMap<u32, Part>, spec: &ElectronicsSpec) -> Result<ElectronicsSolution, ElectronicsError> {
    let mut solution = place_electronics(parts, spec)?;
    solution.v_insert_total = carve_cavities(parts, &mut solution.placements, spec)?;
    Ok(solution)
}
