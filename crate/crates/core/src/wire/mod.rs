//! Wire routing: surface geodesics from each motor to the controller,
//! smoothed, swept into tubes and subtracted from every part they touch.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body::Part;
use crate::electronics::{ElectronicsPlacement, ElectronicsSpec};
use crate::mesh::{smooth_path, sweep_tube, SurfaceGraph, SurfacePath, TriMesh, Vec3, VolumeField};
use crate::motor::{MotorFrame, MotorPlacement, MotorSpec};
use crate::voxel::KinematicTree;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WireParams {
    pub radius: f64,
    pub window: usize,
    /// Distance of the motor reference point from the motor axis along the
    /// frame x axis; defaults to the holder rim.
    pub motor_offset: Option<f64>,
    /// Extra distance beyond the controller's top face along the insertion
    /// axis.
    pub controller_offset: f64,
    /// Bridge radius across joints, in voxels.
    pub bridge_voxels: f64,
}

impl Default for WireParams {
    fn default() -> Self {
        Self { radius: 2.0, window: 5, motor_offset: None, controller_offset: 0.0, bridge_voxels: 2.0 }
    }
}

impl WireParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.radius > 0.0) {
            return Err("wire.radius must be positive".into());
        }
        if self.window == 0 {
            return Err("wire.window must be at least 1".into());
        }
        if !(self.bridge_voxels >= 0.0) {
            return Err("wire.bridge_voxels must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WireError {
    #[error("segment {segment} has no mesh to route on")]
    NoHostMesh { segment: u32 },
    #[error("no controller placement")]
    NoController,
    #[error("disconnected route")]
    Disconnected { joint: u32 },
    #[error("wire geometry failure at joint {joint}: {detail}")]
    GeometryFailure { joint: u32, detail: String },
}

impl WireError {
    pub fn joint(&self) -> Option<u32> {
        match self {
            WireError::Disconnected { joint } | WireError::GeometryFailure { joint, .. } => Some(*joint),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnappedEndpoint {
    pub segment: u32,
    pub reference: Vec3,
    pub vertex: u32,
    pub position: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteEndpoints {
    pub joint: u32,
    pub start: SnappedEndpoint,
    pub end: SnappedEndpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRoute {
    pub joint: u32,
    pub start: SnappedEndpoint,
    pub end: SnappedEndpoint,
    pub path: SurfacePath,
    pub length: f64,
    pub max_curvature: f64,
    /// Curvature of the unsmoothed vertex path.
    pub raw_max_curvature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireSolution {
    pub routes: Vec<WireRoute>,
    pub total_length: f64,
    pub max_curvature: f64,
    /// Volume removed per part label, mm³.
    pub removed_volume: BTreeMap<String, f64>,
}

/// Path length and maximum Menger curvature.
pub fn path_metrics(path: &SurfacePath) -> (f64, f64) {
    (path.length(), path.max_curvature())
}

/// Nearest vertex of the mesh's largest connected component to `reference`;
/// ties go to the lower vertex id.
pub fn snap_to_vertex(mesh: &TriMesh, reference: &Vec3) -> Option<(u32, Vec3)> {
    let labels = mesh.vertex_components();
    let mut sizes: BTreeMap<u32, usize> = BTreeMap::new();
    for t in &mesh.triangles {
        *sizes.entry(labels[t[0] as usize]).or_default() += 1;
    }
    let (&largest, _) = sizes.iter().max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)))?;
    let mut best: Option<(f64, u32)> = None;
    for (v, p) in mesh.vertices.iter().enumerate() {
        if labels[v] != largest {
            continue;
        }
        let d = (p - reference).norm_squared();
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, v as u32));
        }
    }
    best.map(|(_, v)| (v, mesh.vertices[v as usize]))
}

fn snap(parts: &BTreeMap<u32, Part>, segment: u32, reference: Vec3) -> Result<SnappedEndpoint, WireError> {
    let part = parts.get(&segment).ok_or(WireError::NoHostMesh { segment })?;
    let (vertex, position) = snap_to_vertex(&part.mesh, &reference).ok_or(WireError::NoHostMesh { segment })?;
    Ok(SnappedEndpoint { segment, reference, vertex, position })
}

/// Reference points (holder rim for each motor, top-face center of the
/// controller) snapped onto their host meshes.
pub fn routing_endpoints(
    motors: &[MotorPlacement],
    controller: &ElectronicsPlacement,
    parts: &BTreeMap<u32, Part>,
    motor_spec: &MotorSpec,
    electronics: &ElectronicsSpec,
    params: &WireParams,
) -> Result<Vec<RouteEndpoints>, WireError> {
    let axis = Vec3::from(electronics.insertion_axis);
    let lift = 0.5 * axis.abs().dot(&electronics.extents(controller.component)) + params.controller_offset;
    let top = controller.box_center() + controller.rotation * axis * lift;
    let end = snap(parts, controller.segment, top)?;
    let rim = params.motor_offset.unwrap_or(motor_spec.holder.outer_radius);
    let mut out: Vec<RouteEndpoints> = motors
        .iter()
        .map(|m| {
            let frame = MotorFrame::from_matrix(&m.pose);
            let start = snap(parts, m.holder_segment(), frame.origin + frame.x() * rim)?;
            Ok(RouteEndpoints { joint: m.joint, start, end })
        })
        .collect::<Result<_, WireError>>()?;
    out.sort_by_key(|e| e.joint);
    Ok(out)
}

/// Links every vertex of `from` to its nearest vertex of `to` when closer
/// than `radius`.
fn bridge(graph: &mut SurfaceGraph, from: (&TriMesh, u32), to: (&TriMesh, u32), radius: f64) {
    if radius <= 0.0 {
        return;
    }
    let key = |p: &Vec3| ((p.x / radius).floor() as i64, (p.y / radius).floor() as i64, (p.z / radius).floor() as i64);
    let mut buckets: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
    for (v, p) in to.0.vertices.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(v as u32);
    }
    let r2 = radius * radius;
    for (v, p) in from.0.vertices.iter().enumerate() {
        let (i, j, k) = key(p);
        let mut best: Option<(f64, u32)> = None;
        for di in -1..=1 {
            for dj in -1..=1 {
                for dk in -1..=1 {
                    for &w in buckets.get(&(i + di, j + dj, k + dk)).into_iter().flatten() {
                        let d = (to.0.vertices[w as usize] - p).norm_squared();
                        if d <= r2 && best.is_none_or(|(bd, bw)| d < bd || (d == bd && w < bw)) {
                            best = Some((d, w));
                        }
                    }
                }
            }
        }
        if let Some((_, w)) = best {
            graph.connect(from.1 + v as u32, to.1 + w);
        }
    }
}

fn route_one(
    parts: &BTreeMap<u32, Part>,
    tree: &KinematicTree,
    ends: &RouteEndpoints,
    params: &WireParams,
    voxel_size: f64,
) -> Result<WireRoute, WireError> {
    let joint = ends.joint;
    let chain = tree.path_between(ends.start.segment, ends.end.segment).ok_or(WireError::Disconnected { joint })?;
    let mut graph = SurfaceGraph::default();
    let mut bases = Vec::with_capacity(chain.len());
    for seg in &chain {
        let part = parts.get(seg).ok_or(WireError::NoHostMesh { segment: *seg })?;
        bases.push(graph.append_mesh(&part.mesh, true));
    }
    let radius = params.bridge_voxels * voxel_size;
    for w in 0..chain.len().saturating_sub(1) {
        let (ma, mb) = (&parts[&chain[w]].mesh, &parts[&chain[w + 1]].mesh);
        bridge(&mut graph, (ma, bases[w]), (mb, bases[w + 1]), radius);
        bridge(&mut graph, (mb, bases[w + 1]), (ma, bases[w]), radius);
    }
    let start = bases[0] + ends.start.vertex;
    let end = bases[chain.len() - 1] + ends.end.vertex;
    let (nodes, _) = graph.shortest_path(start, end).map_err(|_| WireError::Disconnected { joint })?;
    let host = chain.iter().map(|s| parts[s].label.as_str()).collect::<Vec<_>>().join("+");
    let raw = SurfacePath::new(nodes.iter().map(|&n| graph.position(n)).collect(), host);
    let path = smooth_path(&raw, params.window);
    let (length, max_curvature) = path_metrics(&path);
    Ok(WireRoute {
        joint,
        start: ends.start,
        end: ends.end,
        raw_max_curvature: raw.max_curvature(),
        path,
        length,
        max_curvature,
    })
}

/// Clears every occupied tube cell in `field`; returns the removed volume.
/// Both fields share the global lattice alignment, so cells map one to one.
fn subtract_tube(field: &mut VolumeField, tube: &VolumeField) -> f64 {
    let (lt, lf) = (tube.lattice(), field.lattice());
    let mut removed = 0usize;
    for (idx, &v) in tube.values.iter().enumerate() {
        if v <= 0.5 {
            continue;
        }
        if let Some([i, j, k]) = lf.cell_of(&lt.center_of(idx)) {
            let fi = lf.index(i, j, k);
            if field.values[fi] > 0.5 {
                field.values[fi] = 0.0;
                removed += 1;
            }
        }
    }
    removed as f64 * field.cell_volume()
}

/// Routes every endpoint pair on the parts along its kinematic-tree chain,
/// then subtracts the tunnels in ascending joint order from all rigid parts
/// and the skin.
pub fn route_wires(
    parts: &mut BTreeMap<u32, Part>,
    mut skin: Option<&mut Part>,
    tree: &KinematicTree,
    endpoints: &[RouteEndpoints],
    params: &WireParams,
    voxel_size: f64,
) -> Result<WireSolution, WireError> {
    let shared: &BTreeMap<u32, Part> = parts;
    let mut routes: Vec<WireRoute> = endpoints
        .par_iter()
        .map(|e| route_one(shared, tree, e, params, voxel_size))
        .collect::<Result<_, _>>()?;
    routes.sort_by_key(|r| r.joint);

    let mut removed_volume: BTreeMap<String, f64> = BTreeMap::new();
    let mut touched: Vec<u32> = Vec::new();
    let mut skin_touched = false;
    for route in &routes {
        let cell = parts.values().next().map(|p| p.field.cell_size).unwrap_or(voxel_size);
        let tube = sweep_tube(&route.path, params.radius, cell);
        for (&seg, part) in parts.iter_mut() {
            let v = subtract_tube(&mut part.field, &tube);
            if v > 0.0 {
                *removed_volume.entry(part.label.clone()).or_default() += v;
                touched.push(seg);
            }
        }
        if let Some(s) = skin.as_deref_mut() {
            let v = subtract_tube(&mut s.field, &tube);
            if v > 0.0 {
                *removed_volume.entry(s.label.clone()).or_default() += v;
                skin_touched = true;
            }
        }
    }
    touched.sort_unstable();
    touched.dedup();
    let first_joint = routes.first().map_or(0, |r| r.joint);
    let fail = |e: crate::mesh::MeshError| WireError::GeometryFailure { joint: first_joint, detail: e.to_string() };
    for seg in touched {
        parts.get_mut(&seg).expect("touched part exists").remesh().map_err(fail)?;
    }
    if skin_touched {
        if let Some(s) = skin {
            s.remesh().map_err(fail)?;
        }
    }
    let total_length = routes.iter().fold(0.0, |acc, r| acc + r.length);
    let max_curvature = routes.iter().map(|r| r.max_curvature).fold(0.0, f64::max);
    Ok(WireSolution { routes, total_length, max_curvature, removed_volume })
}
