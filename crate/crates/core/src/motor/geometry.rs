use std::f64::consts::TAU;

use nalgebra::{Matrix3, Matrix4};

use super::{Configuration, MotorError, MotorPlacement, MotorSpec};
use crate::body::Part;
use crate::mesh::{Lattice, Solid, Vec3, VolumeField};
use crate::voxel::JointAnnotation;

/// Motor frame: origin on the joint axis, z along the axis, x pointing
/// radially toward the holder's host part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorFrame {
    pub origin: Vec3,
    pub rotation: Matrix3<f64>,
}

impl MotorFrame {
    pub fn x(&self) -> Vec3 {
        self.rotation.column(0).into()
    }

    pub fn z(&self) -> Vec3 {
        self.rotation.column(2).into()
    }

    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.origin);
        std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
    }

    pub fn from_matrix(m: &[[f64; 4]; 4]) -> Self {
        let rotation = Matrix3::from_fn(|r, c| m[r][c]);
        Self { origin: Vec3::new(m[0][3], m[1][3], m[2][3]), rotation }
    }
}

/// Unit vector perpendicular to `axis` pointing from `from` toward `target`.
/// Falls back to a fixed perpendicular when the target sits on the axis.
pub(crate) fn radial_toward(axis: &Vec3, from: &Vec3, target: Option<Vec3>) -> Vec3 {
    if let Some(t) = target {
        let d = t - from;
        let r = d - axis * d.dot(axis);
        if r.norm() > 1e-9 {
            return r.normalize();
        }
    }
    let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    (helper - axis * helper.dot(axis)).normalize()
}

pub fn motor_frame(joint: &JointAnnotation, offset: f64, radial: &Vec3) -> MotorFrame {
    let z = joint.axis;
    let x = *radial;
    let y = z.cross(&x);
    MotorFrame { origin: joint.position + z * offset, rotation: Matrix3::from_columns(&[x, y, z]) }
}

/// Sleeve around the motor plus a radial arm into the host part.
pub fn holder_solids(frame: &MotorFrame, spec: &MotorSpec) -> Vec<Solid> {
    let h = &spec.holder;
    vec![
        Solid::Cylinder {
            center: frame.origin,
            axis: frame.z(),
            radius: h.outer_radius,
            half_length: 0.5 * spec.body_length,
        },
        Solid::Box {
            center: frame.origin + frame.x() * (0.5 * h.arm_reach),
            rotation: frame.rotation,
            half_extents: Vec3::new(0.5 * h.arm_reach, 0.5 * h.arm_width, 0.5 * spec.body_length),
        },
    ]
}

fn connector_center(frame: &MotorFrame, spec: &MotorSpec) -> Vec3 {
    let c = &spec.connector;
    frame.origin + frame.z() * (0.5 * spec.body_length + c.gap + 0.5 * c.thickness)
}

/// Flange past the motor output face plus a radial arm along `radial`.
pub fn connector_solids(frame: &MotorFrame, radial: &Vec3, spec: &MotorSpec) -> Vec<Solid> {
    let c = &spec.connector;
    let center = connector_center(frame, spec);
    let z = frame.z();
    let rotation = Matrix3::from_columns(&[*radial, z.cross(radial), z]);
    vec![
        Solid::Cylinder { center, axis: z, radius: c.flange_radius, half_length: 0.5 * c.thickness },
        Solid::Box {
            center: center + radial * (0.5 * c.arm_reach),
            rotation,
            half_extents: Vec3::new(0.5 * c.arm_reach, 0.5 * c.arm_width, 0.5 * c.thickness),
        },
    ]
}

fn motor_body(frame: &MotorFrame, spec: &MotorSpec) -> Solid {
    Solid::Cylinder { center: frame.origin, axis: frame.z(), radius: spec.body_radius, half_length: 0.5 * spec.body_length }
}

fn screw_holes(frame: &MotorFrame, spec: &MotorSpec, cell_size: f64) -> Vec<Solid> {
    let center = connector_center(frame, spec);
    let s = &spec.screw_holes;
    (0..s.count)
        .map(|k| {
            let theta = TAU * k as f64 / s.count as f64;
            let local = Vec3::new(s.circle_radius * theta.cos(), s.circle_radius * theta.sin(), 0.0);
            Solid::Cylinder {
                center: center + frame.rotation * local,
                axis: frame.z(),
                radius: s.hole_radius,
                // one extra cell so the hole cuts through the flange faces
                half_length: 0.5 * spec.connector.thickness + cell_size,
            }
        })
        .collect()
}

/// Occupied volume of `field` inside the union of `solids`.
pub fn overlap_volume(field: &VolumeField, solids: &[Solid]) -> f64 {
    let lattice = field.lattice();
    let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
    for s in solids {
        let (l, h) = s.bounds();
        lo = lo.inf(&l);
        hi = hi.sup(&h);
    }
    let Some(range) = lattice.index_range(&lo, &hi) else { return 0.0 };
    let mut n = 0usize;
    for k in range[2].0..=range[2].1 {
        for j in range[1].0..=range[1].1 {
            for i in range[0].0..=range[0].1 {
                if field.values[lattice.index(i, j, k)] > 0.5 {
                    let p = lattice.center(i, j, k);
                    if solids.iter().any(|s| s.contains(&p)) {
                        n += 1;
                    }
                }
            }
        }
    }
    n as f64 * field.cell_volume()
}

fn add_solids(field: &mut VolumeField, solids: &[Solid]) {
    for s in solids {
        let (lo, hi) = s.bounds();
        field.grow_to_cover(&Lattice::covering(&lo, &hi, field.cell_size, 1));
        s.paint(field, 1.0);
    }
}

/// Unions holder and connector onto their parts, then removes the motor
/// body envelope and the screw holes. `a` and `b` are the joint's segment
/// parts in tree-edge order.
pub fn embed_motor(
    a: &mut Part,
    b: &mut Part,
    placement: &MotorPlacement,
    joint: &JointAnnotation,
    spec: &MotorSpec,
) -> Result<(), MotorError> {
    let failure = |detail: String| MotorError::GeometryFailure { joint: joint.id, detail };
    let frame = MotorFrame::from_matrix(&placement.pose);
    let (holder_part, connector_part) = match placement.configuration {
        Configuration::HolderOnA => (a, b),
        Configuration::HolderOnB => (b, a),
    };
    let connector_dir = radial_toward(&frame.z(), &frame.origin, connector_part.field.occupied_centroid());
    let holder = holder_solids(&frame, spec);
    let connector = connector_solids(&frame, &connector_dir, spec);
    if overlap_volume(&holder_part.field, &holder) <= 0.0 {
        return Err(failure("holder does not touch its part".into()));
    }
    if overlap_volume(&connector_part.field, &connector) <= 0.0 {
        return Err(failure("connector does not touch its part".into()));
    }
    let cell = holder_part.field.cell_size;
    add_solids(&mut holder_part.field, &holder);
    add_solids(&mut connector_part.field, &connector);
    let body = motor_body(&frame, spec);
    body.paint(&mut holder_part.field, 0.0);
    body.paint(&mut connector_part.field, 0.0);
    for hole in screw_holes(&frame, spec, cell) {
        hole.paint(&mut connector_part.field, 0.0);
    }
    holder_part.remesh().map_err(|e| failure(format!("holder part: {e}")))?;
    connector_part.remesh().map_err(|e| failure(format!("connector part: {e}")))?;
    Ok(())
}
