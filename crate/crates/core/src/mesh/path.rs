use serde::{Deserialize, Serialize};

use super::{Lattice, Vec3, VolumeField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePath {
    pub waypoints: Vec<Vec3>,
    pub host_part: String,
}

impl SurfacePath {
    /// Drops consecutive duplicate waypoints.
    pub fn new(mut waypoints: Vec<Vec3>, host_part: impl Into<String>) -> Self {
        waypoints.dedup();
        Self { waypoints, host_part: host_part.into() }
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, |acc, l| acc + l)
    }

    /// Largest Menger curvature `4·area / (a·b·c)` over consecutive triples.
    /// Collinear triples and paths of fewer than three points give 0.
    pub fn max_curvature(&self) -> f64 {
        self.waypoints
            .windows(3)
            .map(|w| {
                let (a, b, c) = ((w[1] - w[0]).norm(), (w[2] - w[1]).norm(), (w[2] - w[0]).norm());
                let twice_area = (w[1] - w[0]).cross(&(w[2] - w[0])).norm();
                let denom = a * b * c;
                if denom == 0.0 {
                    0.0
                } else {
                    2.0 * twice_area / denom
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Centered moving average with pinned endpoints. Near the ends the window
/// shrinks symmetrically so every average stays centered on its waypoint.
/// Even windows behave like the next smaller odd window.
pub fn smooth_path(path: &SurfacePath, window: usize) -> SurfacePath {
    let n = path.waypoints.len();
    let half = window.saturating_sub(1) / 2;
    if half == 0 || n < 3 {
        return path.clone();
    }
    let pts = &path.waypoints;
    let smoothed = (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            pts[i - h..=i + h].iter().sum::<Vec3>() / (2 * h + 1) as f64
        })
        .collect();
    SurfacePath::new(smoothed, path.host_part.clone())
}

fn segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 == 0.0 { 0.0 } else { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) };
    (p - (a + ab * t)).norm()
}

/// Occupancy of the tube of `radius` around the path: the union of balls
/// centered on the polyline, which is the limit of densely sampled spheres.
pub fn sweep_tube(path: &SurfacePath, radius: f64, cell_size: f64) -> VolumeField {
    let pts = &path.waypoints;
    let lo = pts.iter().fold(Vec3::repeat(f64::INFINITY), |acc, p| acc.inf(p)) - Vec3::repeat(radius);
    let hi = pts.iter().fold(Vec3::repeat(f64::NEG_INFINITY), |acc, p| acc.sup(p)) + Vec3::repeat(radius);
    let lattice = Lattice::covering(&lo, &hi, cell_size, 1);
    let mut field = VolumeField::new(lattice, 0.0);
    let segments: Vec<(Vec3, Vec3)> = if pts.len() == 1 {
        vec![(pts[0], pts[0])]
    } else {
        pts.windows(2).map(|w| (w[0], w[1])).collect()
    };
    for (a, b) in &segments {
        let r = Vec3::repeat(radius);
        let Some(range) = lattice.index_range(&(a.inf(b) - r), &(a.sup(b) + r)) else { continue };
        for k in range[2].0..=range[2].1 {
            for j in range[1].0..=range[1].1 {
                for i in range[0].0..=range[0].1 {
                    let idx = lattice.index(i, j, k);
                    if field.values[idx] == 0.0 && segment_distance(&lattice.center(i, j, k), a, b) <= radius {
                        field.values[idx] = 1.0;
                    }
                }
            }
        }
    }
    field
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn path(points: &[[f64; 3]]) -> SurfacePath {
        SurfacePath::new(points.iter().map(|p| Vec3::from(*p)).collect(), "p")
    }

    #[test]
    fn window_one_is_identity() {
        let p = path(&[[0.0, 0.0, 0.0], [1.0, 2.0, 0.0], [3.0, 0.0, 1.0]]);
        assert_eq!(smooth_path(&p, 1), p);
    }

    #[test]
    fn collinear_points_unchanged() {
        let p = path(&[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]);
        for w in [1, 3, 5, 7] {
            let s = smooth_path(&p, w);
            for (a, b) in s.waypoints.iter().zip(&p.waypoints) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn capsule_volume() {
        let p = path(&[[0.0, 0.0, 0.0], [20.0, 0.0, 0.0]]);
        let v = sweep_tube(&p, 2.0, 0.5).occupied_volume();
        let analytic = PI * 4.0 * 20.0 + 4.0 / 3.0 * PI * 8.0;
        assert!((v - analytic).abs() / analytic < 0.1, "{v} vs {analytic}");
    }

    #[test]
    fn right_angle_curvature() {
        let p = path(&[[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        assert!((p.max_curvature() - 2f64.sqrt()).abs() < 1e-6);
        assert!((p.length() - 2.0).abs() < 1e-12);
    }
}
