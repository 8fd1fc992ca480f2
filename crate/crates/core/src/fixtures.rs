//! Hand-built morphologies and a seeded procedural generator, used by tests,
//! the batch command and the examples in the README. The generator is a
//! stand-in for sampling a learned design space.

use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::voxel::{JointAnnotation, MaterialGrid, MaterialLabel, MorphologySpec, DEFAULT_VOXEL_SIZE};

const VS: f64 = DEFAULT_VOXEL_SIZE;
const RANGE: (f64, f64) = (-FRAC_PI_4, FRAC_PI_4);

fn mm(v: usize) -> f64 {
    v as f64 * VS
}

/// Torso with a soft top layer and three legs hanging below, each hinged
/// about x at its junction with the torso.
pub fn tripod() -> MorphologySpec {
    let mut g = MaterialGrid::new([28, 28, 40], VS);
    g.fill_box([2, 2, 14], [26, 26, 34], MaterialLabel::Rigid);
    g.fill_box([2, 2, 34], [26, 26, 38], MaterialLabel::Soft);
    let legs = [[4, 4], [16, 4], [10, 16]];
    let mut joints = Vec::new();
    for (id, [x, y]) in legs.into_iter().enumerate() {
        g.fill_box([x, y, 2], [x + 8, y + 8, 14], MaterialLabel::Rigid);
        joints.push(JointAnnotation::new(id as u32, [mm(x + 4), mm(y + 4), mm(14)], [1.0, 0.0, 0.0], RANGE));
    }
    MorphologySpec::new(g, joints).with_meta("name", "tripod")
}

/// Torso with four legs; same construction as [`tripod`].
pub fn quadruped() -> MorphologySpec {
    let mut g = MaterialGrid::new([32, 28, 40], VS);
    g.fill_box([2, 2, 14], [30, 26, 34], MaterialLabel::Rigid);
    g.fill_box([2, 2, 34], [30, 26, 38], MaterialLabel::Soft);
    let legs = [[3, 3], [21, 3], [3, 17], [21, 17]];
    let mut joints = Vec::new();
    for (id, [x, y]) in legs.into_iter().enumerate() {
        g.fill_box([x, y, 2], [x + 8, y + 8, 14], MaterialLabel::Rigid);
        joints.push(JointAnnotation::new(id as u32, [mm(x + 4), mm(y + 4), mm(14)], [1.0, 0.0, 0.0], RANGE));
    }
    MorphologySpec::new(g, joints).with_meta("name", "quadruped")
}

/// Square loop cut by two joints into two segments joined twice.
pub fn ring() -> MorphologySpec {
    let mut g = MaterialGrid::new([40, 40, 12], VS);
    g.fill_box([2, 2, 2], [38, 38, 10], MaterialLabel::Rigid);
    let mut hole = MaterialGrid::new([40, 40, 12], VS);
    hole.fill_box([10, 10, 0], [30, 30, 12], MaterialLabel::Rigid);
    for (idx, &l) in hole.labels().to_vec().iter().enumerate() {
        if l == MaterialLabel::Rigid {
            let [i, j, k] = g.coords(idx);
            g.set(i, j, k, MaterialLabel::Empty);
        }
    }
    let joints = vec![
        JointAnnotation::new(0, [mm(20), mm(6), mm(6)], [0.0, 1.0, 0.0], RANGE),
        JointAnnotation::new(1, [mm(20), mm(34), mm(6)], [0.0, 1.0, 0.0], RANGE),
    ];
    MorphologySpec::new(g, joints).with_meta("name", "ring")
}

/// Two slender bars joined end to end; too thin to hold the electronics.
pub fn thin_limb() -> MorphologySpec {
    let mut g = MaterialGrid::new([12, 44, 12], VS);
    g.fill_box([2, 2, 2], [10, 42, 10], MaterialLabel::Rigid);
    let joints = vec![JointAnnotation::new(0, [mm(6), mm(22), mm(6)], [1.0, 0.0, 0.0], RANGE)];
    MorphologySpec::new(g, joints).with_meta("name", "thin_limb")
}

/// Large block with a bar hinged to one side.
pub fn block_and_bar() -> MorphologySpec {
    let mut g = MaterialGrid::new([28, 44, 24], VS);
    g.fill_box([2, 2, 2], [26, 26, 22], MaterialLabel::Rigid);
    g.fill_box([10, 26, 8], [18, 42, 16], MaterialLabel::Rigid);
    let joints = vec![JointAnnotation::new(0, [mm(14), mm(26), mm(12)], [1.0, 0.0, 0.0], RANGE)];
    MorphologySpec::new(g, joints).with_meta("name", "block_and_bar")
}

/// Block, then two bars in a row along +y: routes from the far joint must
/// cross the middle bar.
pub fn chain() -> MorphologySpec {
    let mut g = MaterialGrid::new([28, 60, 24], VS);
    g.fill_box([2, 2, 2], [26, 26, 22], MaterialLabel::Rigid);
    g.fill_box([10, 26, 8], [18, 58, 16], MaterialLabel::Rigid);
    let joints = vec![
        JointAnnotation::new(0, [mm(14), mm(26), mm(12)], [1.0, 0.0, 0.0], RANGE),
        JointAnnotation::new(1, [mm(14), mm(42), mm(12)], [1.0, 0.0, 0.0], RANGE),
    ];
    MorphologySpec::new(g, joints).with_meta("name", "chain")
}

/// Single rigid block with no joints.
pub fn single_block() -> MorphologySpec {
    let mut g = MaterialGrid::new([24, 24, 20], VS);
    g.fill_box([2, 2, 2], [22, 22, 18], MaterialLabel::Rigid);
    MorphologySpec::new(g, vec![]).with_meta("name", "single_block")
}

/// Seeded procedural morphology on a cubic grid of `dim` voxels: a torso,
/// one to four limbs on distinct faces, joints at the junctions and an
/// optional soft layer on top.
pub fn generate(seed: u64, dim: usize) -> MorphologySpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = MaterialGrid::new([dim; 3], VS);
    let center = dim / 2;
    let half = |rng: &mut ChaCha8Rng, lo: usize, hi: usize| rng.random_range(lo..=hi).min(center - 2);
    let t = [half(&mut rng, 6, 13), half(&mut rng, 6, 13), half(&mut rng, 4, 10)];
    let lo = [center - t[0], center - t[1], center - t[2]];
    let hi = [center + t[0], center + t[1], center + t[2]];
    g.fill_box(lo, hi, MaterialLabel::Rigid);
    if rng.random_bool(0.5) {
        let top = (hi[2] + rng.random_range(2..=4)).min(dim - 1);
        g.fill_box([lo[0], lo[1], hi[2]], [hi[0], hi[1], top], MaterialLabel::Soft);
    }

    // limb directions: distinct picks from ±x, ±y, −z, so limbs never touch
    let limbs = rng.random_range(1..=4);
    let dirs = rand::seq::index::sample(&mut rng, 5, limbs);
    let mut joints = Vec::new();
    for (id, dir) in (0u32..).zip(dirs) {
        let width = rng.random_range(6..=10usize);
        let length = rng.random_range(8..=14usize);
        let (axis, normal) = match dir {
            0 | 1 => (1, 0),
            2 | 3 => (0, 1),
            _ => (0, 2),
        };
        let positive = dir % 2 == 0 && dir < 4;
        let mut a = [0usize; 3];
        let mut b = [0usize; 3];
        for c in 0..3 {
            if c == normal {
                if positive {
                    a[c] = hi[c];
                    b[c] = (hi[c] + length).min(dim - 1);
                } else {
                    a[c] = lo[c].saturating_sub(length).max(1);
                    b[c] = lo[c];
                }
            } else {
                let span = hi[c] - lo[c];
                let w = width.min(span);
                let start = lo[c] + rng.random_range(0..=span - w);
                a[c] = start;
                b[c] = start + w;
            }
        }
        if b[normal] <= a[normal] {
            continue;
        }
        g.fill_box(a, b, MaterialLabel::Rigid);
        let mut position = [0.0; 3];
        for c in 0..3 {
            position[c] = if c == normal { mm(if positive { hi[c] } else { lo[c] }) } else { 0.5 * (mm(a[c]) + mm(b[c])) };
        }
        let mut axis_vec = [0.0; 3];
        axis_vec[axis] = 1.0;
        joints.push(JointAnnotation::new(id, position, axis_vec, RANGE));
    }
    MorphologySpec::new(g, joints).with_meta("name", &format!("gen_{seed}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        for spec in [tripod(), quadruped(), ring(), thin_limb(), block_and_bar(), chain(), single_block()] {
            spec.validate().unwrap();
        }
    }

    #[test]
    fn generator_is_seeded() {
        assert_eq!(generate(7, 64), generate(7, 64));
        for seed in 0..20 {
            generate(seed, 64).validate().unwrap();
        }
    }
}
