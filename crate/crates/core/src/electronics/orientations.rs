use nalgebra::{Matrix3, Rotation3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrientationLevel {
    /// The 24 axis-aligned rotations, identity first.
    Coarse,
    /// Each coarse rotation followed by a ±15° or ±30° turn about one box
    /// axis, without the coarse set itself.
    Fine,
}

const FINE_STEPS_DEG: [f64; 4] = [15.0, -15.0, 30.0, -30.0];

fn coarse() -> Vec<Matrix3<f64>> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(24);
    for perm in PERMS {
        for signs in 0..8u8 {
            let mut m = Matrix3::zeros();
            for (row, &col) in perm.iter().enumerate() {
                m[(row, col)] = if signs >> row & 1 == 0 { 1.0 } else { -1.0 };
            }
            if m.determinant() > 0.0 {
                out.push(m);
            }
        }
    }
    out
}

fn push_unique(out: &mut Vec<Matrix3<f64>>, seen: &[Matrix3<f64>], m: Matrix3<f64>) {
    let close = |x: &Matrix3<f64>| (x - m).abs().max() < 1e-6;
    if !seen.iter().any(close) && !out.iter().any(close) {
        out.push(m);
    }
}

/// Candidate box orientations in scan order.
pub fn candidate_orientations(level: OrientationLevel) -> Vec<Matrix3<f64>> {
    let base = coarse();
    match level {
        OrientationLevel::Coarse => base,
        OrientationLevel::Fine => {
            let mut out = Vec::new();
            for c in &base {
                for axis in [Vector3::x_axis(), Vector3::y_axis(), Vector3::z_axis()] {
                    for deg in FINE_STEPS_DEG {
                        let turn = Rotation3::from_axis_angle(&axis, deg.to_radians());
                        push_unique(&mut out, &base, c * turn.matrix());
                    }
                }
            }
            out
        }
    }
}
