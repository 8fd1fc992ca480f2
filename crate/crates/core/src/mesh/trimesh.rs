use std::collections::HashMap;

use nalgebra::{Matrix3, Vector3};

use super::{MeshError, Vec3};

/// Triangles with area at or below this (mm²) are dropped on construction.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub part_label: Option<String>,
}

impl TriMesh {
    /// Builds a mesh, dropping degenerate triangles. Panics on out-of-range
    /// indices, which indicate a construction bug rather than bad input.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Self {
        let n = vertices.len() as u32;
        for t in &triangles {
            assert!(t.iter().all(|&i| i < n), "triangle index out of range");
        }
        let mut mesh = Self { vertices, triangles, part_label: None };
        mesh.triangles.retain(|t| {
            let [a, b, c] = t.map(|i| mesh.vertices[i as usize]);
            t[0] != t[1] && t[1] != t[2] && t[0] != t[2] && 0.5 * (b - a).cross(&(c - a)).norm() > DEGENERATE_AREA
        });
        mesh
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.part_label = Some(label.into());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    pub fn triangle_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangle(t);
        (b - a).cross(&(c - a))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * self.triangle_normal(t).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Directed edge multiplicities keyed by `(from, to)`.
    fn directed_edges(&self) -> HashMap<(u32, u32), u32> {
        let mut edges = HashMap::with_capacity(self.triangles.len() * 3);
        for t in &self.triangles {
            for e in 0..3 {
                *edges.entry((t[e], t[(e + 1) % 3])).or_insert(0) += 1;
            }
        }
        edges
    }

    /// Every undirected edge is used by exactly two triangles.
    pub fn check_watertight(&self) -> Result<(), MeshError> {
        if self.triangles.is_empty() {
            return Err(MeshError::NonWatertight("mesh has no triangles".into()));
        }
        let mut undirected: HashMap<(u32, u32), u32> = HashMap::with_capacity(self.triangles.len() * 2);
        for ((a, b), n) in self.directed_edges() {
            *undirected.entry((a.min(b), a.max(b))).or_insert(0) += n;
        }
        match undirected.iter().filter(|(_, &n)| n != 2).min() {
            None => Ok(()),
            Some(((a, b), n)) => Err(MeshError::NonWatertight(format!("edge ({a}, {b}) used by {n} triangles"))),
        }
    }

    pub fn is_watertight(&self) -> bool {
        self.check_watertight().is_ok()
    }

    /// Each directed edge appears once and is matched by its reverse.
    pub fn is_consistently_oriented(&self) -> bool {
        let edges = self.directed_edges();
        edges.iter().all(|(&(a, b), &n)| n == 1 && edges.get(&(b, a)) == Some(&1))
    }

    /// V − E + F over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        let mut edges = std::collections::HashSet::new();
        for t in &self.triangles {
            for e in 0..3 {
                used[t[e] as usize] = true;
                let (a, b) = (t[e], t[(e + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        v - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Number of edge-connected triangle components.
    pub fn component_count(&self) -> usize {
        let labels = self.vertex_components();
        let mut roots: Vec<u32> = self.triangles.iter().map(|t| labels[t[0] as usize]).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Component label per vertex (unreferenced vertices get their own label).
    pub fn vertex_components(&self) -> Vec<u32> {
        let n = self.vertices.len();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(p: &mut [u32], x: u32) -> u32 {
            let mut r = x;
            while p[r as usize] != r {
                r = p[r as usize];
            }
            let mut c = x;
            while p[c as usize] != r {
                let next = p[c as usize];
                p[c as usize] = r;
                c = next;
            }
            r
        }
        for t in &self.triangles {
            for e in 0..3 {
                let (ra, rb) = (find(&mut parent, t[e]), find(&mut parent, t[(e + 1) % 3]));
                if ra != rb {
                    parent[ra.max(rb) as usize] = ra.min(rb);
                }
            }
        }
        (0..n as u32).map(|v| find(&mut parent, v)).collect()
    }

    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| (lo.inf(v), hi.sup(v))))
    }

    pub fn flip_orientation(&mut self) {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
    }

    pub fn transformed(&self, rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| rotation * v + translation).collect(),
            triangles: self.triangles.clone(),
            part_label: self.part_label.clone(),
        }
    }

    pub fn translated(&self, offset: &Vec3) -> TriMesh {
        self.transformed(&Matrix3::identity(), offset)
    }

    /// Concatenates meshes without welding.
    pub fn merged(meshes: &[&TriMesh]) -> TriMesh {
        let mut out = TriMesh::default();
        for m in meshes {
            let base = out.vertices.len() as u32;
            out.vertices.extend_from_slice(&m.vertices);
            out.triangles.extend(m.triangles.iter().map(|t| t.map(|i| i + base)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> TriMesh {
        TriMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        )
    }

    #[test]
    fn tetra_is_closed_sphere() {
        let t = tetra();
        assert!(t.is_watertight());
        assert!(t.is_consistently_oriented());
        assert_eq!(t.euler_characteristic(), 2);
        assert_eq!(t.component_count(), 1);
    }

    #[test]
    fn degenerate_triangles_are_dropped() {
        let m = TriMesh::new(
            vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)],
            vec![[0, 1, 2]],
        );
        assert!(m.is_empty());
    }

    #[test]
    fn open_fan_is_not_watertight() {
        let m = TriMesh::new(
            vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)],
            vec![[0, 1, 2], [0, 2, 3]],
        );
        assert!(matches!(m.check_watertight(), Err(MeshError::NonWatertight(_))));
    }
}
