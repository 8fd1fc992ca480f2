//! Geometry kernel: triangle meshes, scalar volume fields and the operations
//! that move between them.
//!
//! Booleans and volumes are evaluated on occupancy fields sampled at cell
//! centers rather than by exact mesh CSG. Fields that are meant to interact
//! share a global lattice whose cell corners sit at integer multiples of the
//! cell size, so resampling between them is exact.

mod field;
mod geodesic;
mod marching_cubes;
mod obb;
mod path;
mod primitives;
mod sdf;
mod stl;
mod trimesh;
mod voxelize;

pub use field::{field_boolean, BooleanOp, Lattice, VolumeField};
pub use geodesic::{surface_geodesic, SurfaceGraph};
pub use marching_cubes::marching_cubes;
pub use obb::{oriented_bounding_box, OrientedBox};
pub use path::{smooth_path, sweep_tube, SurfacePath};
pub use primitives::{make_box, make_cylinder, make_sphere, Solid, DEFAULT_CYLINDER_SEGMENTS};
pub use sdf::{max_interior_clearance, signed_distance};
pub use stl::{read_stl_triangle_count, write_stl, STL_HEADER};
pub use trimesh::{TriMesh, DEGENERATE_AREA};
pub use voxelize::{intersection_volume, mesh_volume, voxelize};

use nalgebra::Vector3;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("no cell straddles the iso level")]
    EmptySurface,
    #[error("mesh is not watertight: {0}")]
    NonWatertight(String),
    #[error("field has no interior cells")]
    NoInterior,
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("no surface path between vertices {0} and {1}")]
    Disconnected(usize, usize),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
}
