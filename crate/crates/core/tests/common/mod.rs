#![allow(dead_code)]

use std::collections::BTreeMap;

use morphfab_core::body::Part;
use morphfab_core::mesh::{Lattice, Solid, Vec3, VolumeField};
use morphfab_core::motor::{
    connector_solids, holder_solids, motor_frame, overlap_volume, Configuration, MotorSolverParams, MotorSpec,
};
use morphfab_core::voxel::JointAnnotation;
use nalgebra::{Matrix3, Rotation3};

pub fn box_field(center: Vec3, half: Vec3, rotation: Matrix3<f64>, cell: f64) -> VolumeField {
    Solid::Box { center, rotation, half_extents: half }.field(cell)
}

pub fn box_part(label: &str, center: Vec3, half: Vec3, cell: f64) -> Part {
    Part::from_field(label, box_field(center, half, Matrix3::identity(), cell)).unwrap()
}

/// Two slabs on either side of a hinge about x at the origin. Slab A lies
/// below, tilted so its top rises with x; slab B lies above, tilted the
/// same way so its underside moves away from the hinge as x grows. A mount
/// sliding along +x therefore bites deeper into A and shallower into B.
pub struct TwoSlab {
    pub a: VolumeField,
    pub b: VolumeField,
    pub joint: JointAnnotation,
}

pub fn two_slab(cell: f64) -> TwoSlab {
    let tilt = *Rotation3::from_axis_angle(&Vec3::y_axis(), -0.2).matrix();
    let a = box_field(Vec3::new(0.0, 0.0, -45.0), Vec3::new(90.0, 40.0, 20.0), tilt, cell);
    let b = box_field(Vec3::new(0.0, 0.0, 45.0), Vec3::new(90.0, 40.0, 20.0), tilt, cell);
    let joint = JointAnnotation::new(0, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], (-0.5, 0.5));
    TwoSlab { a, b, joint }
}

/// Unit vector from the hinge axis toward `target`, perpendicular to the
/// axis.
pub fn radial(joint: &JointAnnotation, target: Vec3) -> Vec3 {
    let d = target - joint.position;
    (d - joint.axis * d.dot(&joint.axis)).normalize()
}

/// Attachment volumes of both mounts at `delta` for `configuration`,
/// measured directly on the fields.
pub fn attachment_volumes(
    slabs: &TwoSlab,
    configuration: Configuration,
    delta: f64,
    spec: &MotorSpec,
) -> (f64, f64) {
    let toward_a = radial(&slabs.joint, slabs.a.occupied_centroid().unwrap());
    let toward_b = radial(&slabs.joint, slabs.b.occupied_centroid().unwrap());
    let (holder_part, connector_part, holder_dir, connector_dir) = match configuration {
        Configuration::HolderOnA => (&slabs.a, &slabs.b, toward_a, toward_b),
        Configuration::HolderOnB => (&slabs.b, &slabs.a, toward_b, toward_a),
    };
    let frame = motor_frame(&slabs.joint, delta, &holder_dir);
    (
        overlap_volume(holder_part, &holder_solids(&frame, spec)),
        overlap_volume(connector_part, &connector_solids(&frame, &connector_dir, spec)),
    )
}

/// Gated balance score written out independently of the library.
pub fn oracle_score(v_h: f64, v_c: f64, params: &MotorSolverParams) -> f64 {
    if v_h.min(v_c) < params.tau {
        return 0.0;
    }
    (v_h * v_c).sqrt() + params.balance_weight * (v_h + v_c)
}

/// Signed distance by exhaustive search: distance between cell centers to
/// the nearest cell of the other class, with everything outside the grid
/// counted as empty, minus half a cell.
pub fn brute_force_sdf(field: &VolumeField) -> Vec<f64> {
    let [nx, ny, nz] = field.dims;
    let cs = field.cell_size;
    let inside = |i: i64, j: i64, k: i64| {
        (0..nx as i64).contains(&i)
            && (0..ny as i64).contains(&j)
            && (0..nz as i64).contains(&k)
            && field.get(i as usize, j as usize, k as usize) > 0.5
    };
    let mut out = Vec::with_capacity(field.values.len());
    for k in 0..nz as i64 {
        for j in 0..ny as i64 {
            for i in 0..nx as i64 {
                let here = inside(i, j, k);
                let mut best = f64::INFINITY;
                for c in -1..=nz as i64 {
                    for b in -1..=ny as i64 {
                        for a in -1..=nx as i64 {
                            if inside(a, b, c) != here {
                                let d2 = ((a - i).pow(2) + (b - j).pow(2) + (c - k).pow(2)) as f64;
                                best = best.min(d2);
                            }
                        }
                    }
                }
                let d = (best.sqrt() - 0.5) * cs;
                out.push(if here { d } else { -d });
            }
        }
    }
    out
}

pub fn lattice(dims: [usize; 3], cell: f64) -> Lattice {
    Lattice { dims, cell_size: cell, origin: Vec3::zeros() }
}

pub fn single_part_map(parts: Vec<Part>) -> BTreeMap<u32, Part> {
    (0u32..).zip(parts).collect()
}
