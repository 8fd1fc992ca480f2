use nalgebra::{Rotation3, Unit};
use serde::{Deserialize, Serialize};

use super::{MotorError, MotorSolverParams};
use crate::mesh::VolumeField;
use crate::voxel::JointAnnotation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleMotion {
    /// Feasible sub-interval of the joint range, radians.
    pub range: (f64, f64),
    /// Sampled `(angle, interference mm³)` after any rest-pose carve.
    pub samples: Vec<(f64, f64)>,
    /// Volume removed from each part, mm³.
    pub carved_a: f64,
    pub carved_b: f64,
}

/// `samples` evenly spaced angles across the range, plus 0 when the range
/// contains it, sorted ascending.
pub fn rotation_angles(range: (f64, f64), samples: usize) -> Vec<f64> {
    let (lo, hi) = range;
    let n = samples.max(2);
    let mut angles: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    if lo <= 0.0 && hi >= 0.0 && !angles.iter().any(|&a| a.abs() < 1e-12) {
        angles.push(0.0);
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    angles
}

/// Cells of `b` that, rotated by `angle` about the joint, land in occupied
/// cells of `a`; returned as (b index, a index) pairs.
fn interference(a: &VolumeField, b: &VolumeField, joint: &JointAnnotation, angle: f64) -> Vec<(usize, usize)> {
    let rot = Rotation3::from_axis_angle(&Unit::new_normalize(joint.axis), angle);
    let lb = b.lattice();
    let la = a.lattice();
    let mut hits = Vec::new();
    for (idx, &v) in b.values.iter().enumerate() {
        if v <= 0.5 {
            continue;
        }
        let p = joint.position + rot * (lb.center_of(idx) - joint.position);
        if let Some([i, j, k]) = la.cell_of(&p) {
            let ai = la.index(i, j, k);
            if a.values[ai] > 0.5 {
                hits.push((idx, ai));
            }
        }
    }
    hits
}

fn carve(a: &mut VolumeField, b: &mut VolumeField, hits: &[(usize, usize)]) {
    for &(bi, ai) in hits {
        b.values[bi] = 0.0;
        a.values[ai] = 0.0;
    }
}

/// Rotates `b` about the joint across its range and carves the mutual
/// interference from both parts. The feasible range is the widest run of
/// sampled angles around the rest pose whose interference stays within
/// tolerance.
pub fn feasible_motion_and_carve(
    a: &mut VolumeField,
    b: &mut VolumeField,
    joint: &JointAnnotation,
    params: &MotorSolverParams,
) -> Result<FeasibleMotion, MotorError> {
    let smaller = a.occupied_volume().min(b.occupied_volume());
    let tolerance = params.interference_tolerance * smaller;
    let budget = params.max_carve_fraction * smaller;
    let cell = a.cell_volume();
    let (va0, vb0) = (a.occupied_volume(), b.occupied_volume());

    let angles = rotation_angles(joint.motion_range, params.rotation_samples);
    let rest = angles
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .map(|(i, _)| i)
        .expect("at least two angles");

    let rest_hits = interference(a, b, joint, angles[rest]);
    let rest_volume = rest_hits.len() as f64 * cell;
    if rest_volume > tolerance {
        if rest_volume > budget {
            return Err(MotorError::ZeroFeasibleRange { joint: joint.id });
        }
        carve(a, b, &rest_hits);
    }

    let hits: Vec<Vec<(usize, usize)>> = angles
        .iter()
        .enumerate()
        .map(|(i, &angle)| if i == rest { Vec::new() } else { interference(a, b, joint, angle) })
        .collect();
    let ok = |i: usize| hits[i].len() as f64 * cell <= tolerance;
    let (mut lo, mut hi) = (rest, rest);
    while lo > 0 && ok(lo - 1) {
        lo -= 1;
    }
    while hi + 1 < angles.len() && ok(hi + 1) {
        hi += 1;
    }
    let samples = angles.iter().zip(&hits).map(|(&t, h)| (t, h.len() as f64 * cell)).collect();
    for h in &hits[lo..=hi] {
        carve(a, b, h);
    }
    Ok(FeasibleMotion {
        range: (angles[lo], angles[hi]),
        samples,
        carved_a: va0 - a.occupied_volume(),
        carved_b: vb0 - b.occupied_volume(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Solid, Vec3};
    use nalgebra::Matrix3;

    fn slab(center: Vec3, half: Vec3) -> VolumeField {
        Solid::Box { center, rotation: Matrix3::identity(), half_extents: half }.field(1.0)
    }

    #[test]
    fn disjoint_parts_keep_full_range() {
        let mut a = slab(Vec3::new(0.0, 0.0, 40.0), Vec3::repeat(10.0));
        let mut b = slab(Vec3::new(0.0, 0.0, -40.0), Vec3::repeat(10.0));
        let j = JointAnnotation::new(0, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], (-0.5, 0.5));
        let before = (a.clone(), b.clone());
        let m = feasible_motion_and_carve(&mut a, &mut b, &j, &MotorSolverParams::default()).unwrap();
        assert_eq!(m.range, (-0.5, 0.5));
        assert_eq!((a, b), before);
        assert_eq!(m.carved_a + m.carved_b, 0.0);
    }

    #[test]
    fn plate_blocks_beyond_thirty_degrees() {
        // a thin plate along +y from the axis; the partner is a wedge that
        // occupies angles beyond 30 degrees on both sides of the plate
        let j = JointAnnotation::new(0, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], (-90f64.to_radians(), 90f64.to_radians()));
        let mut b = slab(Vec3::new(0.0, 25.0, 0.0), Vec3::new(5.0, 15.0, 1.0));
        let lattice = crate::mesh::Lattice::covering(&Vec3::repeat(-45.0), &Vec3::repeat(45.0), 1.0, 0);
        let mut a = VolumeField::from_fn(lattice, |p| {
            let r = (p.y * p.y + p.z * p.z).sqrt();
            let angle = p.z.atan2(p.y).abs();
            f64::from(u8::from(p.x.abs() <= 5.0 && (8.0..=42.0).contains(&r) && angle > 30f64.to_radians() + 0.1))
        });
        let params = MotorSolverParams { rotation_samples: 25, ..Default::default() };
        let m = feasible_motion_and_carve(&mut a, &mut b, &j, &params).unwrap();
        let step = 180f64.to_radians() / 24.0;
        let thirty = 30f64.to_radians();
        assert!(m.range.0 <= -thirty + step && m.range.1 >= thirty - step, "{:?}", m.range);
        assert!(m.range.0 >= -j.motion_range.0.abs() && m.range.1 <= j.motion_range.1);
    }

    #[test]
    fn coincident_parts_have_zero_range() {
        let mut a = slab(Vec3::zeros(), Vec3::repeat(10.0));
        let mut b = a.clone();
        let j = JointAnnotation::new(3, [0.0, 0.0, 0.0], [0.0, 0.0, 1.0], (-0.5, 0.5));
        assert_eq!(
            feasible_motion_and_carve(&mut a, &mut b, &j, &MotorSolverParams::default()),
            Err(MotorError::ZeroFeasibleRange { joint: 3 })
        );
    }
}
