use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{MeshError, TriMesh, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Vec3,
    /// Columns are the box axes, matching `extents` order.
    pub axes: Matrix3<f64>,
    /// Half-lengths, sorted descending.
    pub extents: [f64; 3],
}

impl OrientedBox {
    pub fn max_extent(&self) -> f64 {
        self.extents[0]
    }
}

/// Flips `v` so its largest-magnitude component (first on ties) is positive.
fn canonical_sign(v: Vec3) -> Vec3 {
    let mut best = 0;
    for a in 1..3 {
        if v[a].abs() > v[best].abs() {
            best = a;
        }
    }
    if v[best] < 0.0 {
        -v
    } else {
        v
    }
}

/// PCA box: axes from the area-weighted covariance of triangle centroids,
/// extents from vertex projections.
pub fn oriented_bounding_box(mesh: &TriMesh) -> Result<OrientedBox, MeshError> {
    if mesh.vertices.len() < 4 || mesh.triangles.is_empty() {
        return Err(MeshError::DegenerateGeometry("fewer than four vertices".into()));
    }
    let weights: Vec<(f64, Vec3)> = (0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = mesh.triangle(t);
            (mesh.triangle_area(t), (a + b + c) / 3.0)
        })
        .collect();
    let total: f64 = weights.iter().map(|(w, _)| w).sum();
    let mean = weights.iter().map(|(w, c)| c * *w).sum::<Vec3>() / total;
    let mut cov = Matrix3::zeros();
    for (w, c) in &weights {
        let d = c - mean;
        cov += d * d.transpose() * *w;
    }
    cov /= total;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));

    let mut axes: Vec<Vec3> = order.iter().map(|&i| eig.eigenvectors.column(i).normalize()).collect();
    let mut half = [0.0; 3];
    let mut mid = [0.0; 3];
    for (a, axis) in axes.iter().enumerate() {
        let (lo, hi) = mesh
            .vertices
            .iter()
            .map(|v| v.dot(axis))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p)));
        half[a] = 0.5 * (hi - lo);
        mid[a] = 0.5 * (hi + lo);
    }
    let center = axes.iter().zip(mid).map(|(axis, m)| axis * m).sum::<Vec3>();

    let mut ranked = [0usize, 1, 2];
    ranked.sort_by(|&x, &y| half[y].total_cmp(&half[x]));
    let extents = ranked.map(|i| half[i]);
    let scale = extents[0].max(1e-300);
    if extents[2] <= 1e-9 * scale {
        return Err(MeshError::DegenerateGeometry("coplanar vertices".into()));
    }
    axes = ranked.iter().map(|&i| axes[i]).collect();
    let e1 = canonical_sign(axes[0]);
    let e2 = canonical_sign(axes[1]);
    let e3 = e1.cross(&e2);
    Ok(OrientedBox { center, axes: Matrix3::from_columns(&[e1, e2, e3]), extents })
}
