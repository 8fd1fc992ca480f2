//! Approximate surface geodesics by Dijkstra over the mesh edge graph,
//! refined with one Steiner point at every edge midpoint. Each midpoint links
//! to its edge's endpoints, to the opposite corner of every incident triangle
//! and to the other two midpoints of those triangles.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::{MeshError, SurfacePath, TriMesh, Vec3};

#[derive(Debug, Clone, Default)]
pub struct SurfaceGraph {
    positions: Vec<Vec3>,
    adjacency: Vec<Vec<(u32, f64)>>,
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    // min-heap on (dist, node)
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl SurfaceGraph {
    /// Node ids `0..mesh.vertices.len()` are the mesh vertices; Steiner
    /// nodes follow.
    pub fn new(mesh: &TriMesh, steiner: bool) -> Self {
        let mut g = SurfaceGraph::default();
        g.append_mesh(mesh, steiner);
        g
    }

    /// Adds a mesh as a separate block of nodes and returns the id of its
    /// first vertex.
    pub fn append_mesh(&mut self, mesh: &TriMesh, steiner: bool) -> u32 {
        let base = self.positions.len() as u32;
        self.positions.extend_from_slice(&mesh.vertices);
        self.adjacency.resize(self.positions.len(), Vec::new());

        let mut edge_ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut edges: Vec<(u32, u32)> = Vec::new();
        for t in &mesh.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                edge_ids.entry(key).or_insert_with(|| {
                    edges.push(key);
                    (edges.len() - 1) as u32
                });
            }
        }
        for &(a, b) in &edges {
            self.connect(base + a, base + b);
        }
        if !steiner {
            return base;
        }
        let mid_base = self.positions.len() as u32;
        for &(a, b) in &edges {
            let m = 0.5 * (mesh.vertices[a as usize] + mesh.vertices[b as usize]);
            self.positions.push(m);
            self.adjacency.push(Vec::new());
        }
        for (e, &(a, b)) in edges.iter().enumerate() {
            let m = mid_base + e as u32;
            self.connect(m, base + a);
            self.connect(m, base + b);
        }
        for t in &mesh.triangles {
            let mids: Vec<u32> = (0..3)
                .map(|e| {
                    let (a, b) = (t[e], t[(e + 1) % 3]);
                    mid_base + edge_ids[&(a.min(b), a.max(b))]
                })
                .collect();
            for e in 0..3 {
                // midpoint of edge (t[e], t[e+1]) faces corner t[e+2]
                self.connect(mids[e], base + t[(e + 2) % 3]);
                self.connect(mids[e], mids[(e + 1) % 3]);
            }
        }
        base
    }

    /// Adds an undirected edge weighted by Euclidean length.
    pub fn connect(&mut self, a: u32, b: u32) {
        if a == b {
            return;
        }
        let w = (self.positions[a as usize] - self.positions[b as usize]).norm();
        self.adjacency[a as usize].push((b, w));
        self.adjacency[b as usize].push((a, w));
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn position(&self, node: u32) -> Vec3 {
        self.positions[node as usize]
    }

    /// Dijkstra from `start` to `end`; returns the node sequence and length.
    /// Equal-distance candidates leave the heap lowest id first and only
    /// strict improvements relax, so the result is deterministic.
    pub fn shortest_path(&self, start: u32, end: u32) -> Result<(Vec<u32>, f64), MeshError> {
        let n = self.positions.len();
        let disconnected = || MeshError::Disconnected(start as usize, end as usize);
        if start as usize >= n || end as usize >= n {
            return Err(disconnected());
        }
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![u32::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[start as usize] = 0.0;
        heap.push(Entry { dist: 0.0, node: start });
        while let Some(Entry { dist: d, node }) = heap.pop() {
            if d > dist[node as usize] {
                continue;
            }
            if node == end {
                break;
            }
            for &(next, w) in &self.adjacency[node as usize] {
                let nd = d + w;
                if nd < dist[next as usize] {
                    dist[next as usize] = nd;
                    prev[next as usize] = node;
                    heap.push(Entry { dist: nd, node: next });
                }
            }
        }
        if !dist[end as usize].is_finite() {
            return Err(disconnected());
        }
        let mut nodes = vec![end];
        let mut cur = end;
        while cur != start {
            cur = prev[cur as usize];
            nodes.push(cur);
        }
        nodes.reverse();
        Ok((nodes, dist[end as usize]))
    }
}

/// Shortest surface path between two mesh vertices.
pub fn surface_geodesic(mesh: &TriMesh, start: usize, end: usize) -> Result<SurfacePath, MeshError> {
    let graph = SurfaceGraph::new(mesh, true);
    let (nodes, _) = graph.shortest_path(start as u32, end as u32)?;
    let label = mesh.part_label.clone().unwrap_or_default();
    let waypoints = nodes.iter().map(|&n| graph.position(n)).collect();
    Ok(SurfacePath::new(waypoints, label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::make_box;

    #[test]
    fn adjacent_vertices_use_the_edge() {
        let m = make_box(&Vec3::repeat(0.5)).unwrap();
        let t = m.triangles[0];
        let p = surface_geodesic(&m, t[0] as usize, t[1] as usize).unwrap();
        let edge = (m.vertices[t[0] as usize] - m.vertices[t[1] as usize]).norm();
        assert!((p.length() - edge).abs() < 1e-12);
    }

    #[test]
    fn separate_parts_are_disconnected() {
        let a = make_box(&Vec3::repeat(0.5)).unwrap();
        let b = a.translated(&Vec3::new(5.0, 0.0, 0.0));
        let m = TriMesh::merged(&[&a, &b]);
        let n = a.vertices.len();
        assert!(matches!(surface_geodesic(&m, 0, n), Err(MeshError::Disconnected(..))));
    }

    #[test]
    fn steiner_points_never_lengthen() {
        let m = make_box(&Vec3::new(2.0, 1.0, 0.5)).unwrap();
        let plain = SurfaceGraph::new(&m, false);
        let refined = SurfaceGraph::new(&m, true);
        for s in 0..m.vertices.len() as u32 {
            for e in 0..m.vertices.len() as u32 {
                let (_, a) = plain.shortest_path(s, e).unwrap();
                let (_, b) = refined.shortest_path(s, e).unwrap();
                assert!(b <= a + 1e-12);
                let straight = (m.vertices[s as usize] - m.vertices[e as usize]).norm();
                assert!(b >= straight - 1e-12);
            }
        }
    }
}
