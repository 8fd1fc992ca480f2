use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3};
use serde::{Deserialize, Serialize};

use super::{Lattice, MeshError, TriMesh, Vec3, VolumeField};

pub const DEFAULT_CYLINDER_SEGMENTS: usize = 32;
const SPHERE_SEGMENTS: usize = 64;
const SPHERE_STACKS: usize = 32;

fn positive(name: &str, value: f64) -> Result<(), MeshError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(MeshError::InvalidDimension(format!("{name} must be positive, got {value}")))
    }
}

/// Rotation taking +z onto `axis`.
pub(crate) fn frame_for_axis(axis: &Vec3) -> Matrix3<f64> {
    let axis = axis.normalize();
    match Rotation3::rotation_between(&Vec3::z(), &axis) {
        Some(r) => *r.matrix(),
        // antiparallel: half turn about x
        None => *Rotation3::from_axis_angle(&Vec3::x_axis(), PI).matrix(),
    }
}

/// Axis-aligned box centered at the origin with the given half-extents.
/// Each face is split into four triangles around its center, which keeps
/// the surface mirror-symmetric.
pub fn make_box(half_extents: &Vec3) -> Result<TriMesh, MeshError> {
    for a in 0..3 {
        positive("box half-extent", half_extents[a])?;
    }
    let mut vertices: Vec<Vec3> = (0..8)
        .map(|c| {
            Vec3::new(
                if c & 1 == 0 { -half_extents.x } else { half_extents.x },
                if c & 2 == 0 { -half_extents.y } else { half_extents.y },
                if c & 4 == 0 { -half_extents.z } else { half_extents.z },
            )
        })
        .collect();
    let mut triangles = Vec::new();
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in 0..2usize {
            let at = |du: usize, dv: usize| ((side << axis) | (du << u) | (dv << v)) as u32;
            let mut ring = [at(0, 0), at(1, 0), at(1, 1), at(0, 1)];
            if side == 0 {
                ring.reverse();
            }
            let mut center = Vec3::zeros();
            center[axis] = if side == 0 { -half_extents[axis] } else { half_extents[axis] };
            let c = vertices.len() as u32;
            vertices.push(center);
            for i in 0..4 {
                triangles.push([c, ring[i], ring[(i + 1) % 4]]);
            }
        }
    }
    Ok(TriMesh::new(vertices, triangles))
}

/// Closed cylinder centered at the origin along `axis`.
pub fn make_cylinder(radius: f64, half_length: f64, axis: &Vec3, segments: usize) -> Result<TriMesh, MeshError> {
    positive("cylinder radius", radius)?;
    positive("cylinder half-length", half_length)?;
    if segments < 3 {
        return Err(MeshError::InvalidDimension(format!("cylinder needs at least 3 segments, got {segments}")));
    }
    if axis.norm() == 0.0 {
        return Err(MeshError::InvalidDimension("cylinder axis is zero".into()));
    }
    let n = segments as u32;
    let mut vertices = Vec::with_capacity(2 * segments + 2);
    for z in [-half_length, half_length] {
        for i in 0..segments {
            let theta = 2.0 * PI * i as f64 / segments as f64;
            vertices.push(Vec3::new(radius * theta.cos(), radius * theta.sin(), z));
        }
    }
    let (bottom, top) = (2 * n, 2 * n + 1);
    vertices.push(Vec3::new(0.0, 0.0, -half_length));
    vertices.push(Vec3::new(0.0, 0.0, half_length));
    let mut triangles = Vec::with_capacity(4 * segments);
    for i in 0..n {
        let j = (i + 1) % n;
        triangles.push([i, j, n + j]);
        triangles.push([i, n + j, n + i]);
        triangles.push([top, n + i, n + j]);
        triangles.push([bottom, j, i]);
    }
    let frame = frame_for_axis(axis);
    Ok(TriMesh::new(vertices, triangles).transformed(&frame, &Vec3::zeros()))
}

/// UV sphere centered at the origin.
pub fn make_sphere(radius: f64) -> Result<TriMesh, MeshError> {
    positive("sphere radius", radius)?;
    let (seg, stacks) = (SPHERE_SEGMENTS as u32, SPHERE_STACKS as u32);
    let mut vertices = vec![Vec3::new(0.0, 0.0, radius)];
    for j in 1..stacks {
        let phi = PI * j as f64 / stacks as f64;
        for i in 0..seg {
            let theta = 2.0 * PI * i as f64 / seg as f64;
            vertices.push(radius * Vec3::new(phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()));
        }
    }
    let south = vertices.len() as u32;
    vertices.push(Vec3::new(0.0, 0.0, -radius));
    let ring = |j: u32, i: u32| 1 + (j - 1) * seg + (i % seg);
    let mut triangles = Vec::new();
    for i in 0..seg {
        triangles.push([0, ring(1, i), ring(1, i + 1)]);
        for j in 1..stacks - 1 {
            triangles.push([ring(j, i), ring(j + 1, i), ring(j + 1, i + 1)]);
            triangles.push([ring(j, i), ring(j + 1, i + 1), ring(j, i + 1)]);
        }
        triangles.push([south, ring(stacks - 1, i + 1), ring(stacks - 1, i)]);
    }
    Ok(TriMesh::new(vertices, triangles))
}

/// Analytic solid used for clearances and mounting geometry. Occupancy
/// fields are sampled directly from the inside test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Solid {
    Box { center: Vec3, rotation: Matrix3<f64>, half_extents: Vec3 },
    Cylinder { center: Vec3, axis: Vec3, radius: f64, half_length: f64 },
    Sphere { center: Vec3, radius: f64 },
}

impl Solid {
    pub fn contains(&self, p: &Vec3) -> bool {
        match self {
            Solid::Box { center, rotation, half_extents } => {
                let local = rotation.transpose() * (p - center);
                (0..3).all(|a| local[a].abs() <= half_extents[a])
            }
            Solid::Cylinder { center, axis, radius, half_length } => {
                let d = p - center;
                let along = d.dot(axis);
                along.abs() <= *half_length && (d - axis * along).norm_squared() <= radius * radius
            }
            Solid::Sphere { center, radius } => (p - center).norm_squared() <= radius * radius,
        }
    }

    /// Conservative axis-aligned bounds.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let reach = match self {
            Solid::Box { rotation, half_extents, .. } => rotation.abs() * half_extents,
            Solid::Cylinder { axis, radius, half_length, .. } => {
                Vec3::from_fn(|a, _| axis[a].abs() * half_length + radius * (1.0 - axis[a] * axis[a]).max(0.0).sqrt())
            }
            Solid::Sphere { radius, .. } => Vec3::repeat(*radius),
        };
        let c = self.center();
        (c - reach, c + reach)
    }

    pub fn center(&self) -> Vec3 {
        match self {
            Solid::Box { center, .. } | Solid::Cylinder { center, .. } | Solid::Sphere { center, .. } => *center,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Solid::Box { half_extents, .. } => 8.0 * half_extents.x * half_extents.y * half_extents.z,
            Solid::Cylinder { radius, half_length, .. } => PI * radius * radius * 2.0 * half_length,
            Solid::Sphere { radius, .. } => 4.0 / 3.0 * PI * radius.powi(3),
        }
    }

    /// Sets every cell of `field` whose center lies inside to `value`.
    pub fn paint(&self, field: &mut VolumeField, value: f64) {
        let lattice = field.lattice();
        let (lo, hi) = self.bounds();
        let Some(range) = lattice.index_range(&lo, &hi) else { return };
        for k in range[2].0..=range[2].1 {
            for j in range[1].0..=range[1].1 {
                for i in range[0].0..=range[0].1 {
                    if self.contains(&lattice.center(i, j, k)) {
                        let idx = lattice.index(i, j, k);
                        field.values[idx] = value;
                    }
                }
            }
        }
    }

    /// Occupancy on the global lattice of `cell_size`, padded by one cell.
    pub fn field(&self, cell_size: f64) -> VolumeField {
        let (lo, hi) = self.bounds();
        let mut f = VolumeField::new(Lattice::covering(&lo, &hi, cell_size, 1), 0.0);
        self.paint(&mut f, 1.0);
        f
    }

    pub fn mesh(&self) -> Result<TriMesh, MeshError> {
        match self {
            Solid::Box { center, rotation, half_extents } => Ok(make_box(half_extents)?.transformed(rotation, center)),
            Solid::Cylinder { center, axis, radius, half_length } => {
                Ok(make_cylinder(*radius, *half_length, axis, DEFAULT_CYLINDER_SEGMENTS)?.translated(center))
            }
            Solid::Sphere { center, radius } => Ok(make_sphere(*radius)?.translated(center)),
        }
    }
}
