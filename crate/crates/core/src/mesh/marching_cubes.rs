//! Marching Cubes over cell-center samples.
//!
//! The 256-case table is generated at first use from per-face rules instead
//! of being transcribed: on every cube face the inside corners are cut off by
//! segments running from the crossing where the face boundary (walked
//! counter-clockwise from outside the cube) leaves the inside region to the
//! crossing where it re-enters. Ambiguous faces (two diagonal inside corners)
//! always separate the inside corners, which matches 6-connectivity of the
//! inside set. Because the rule depends only on the four values of a face,
//! the two cubes sharing it produce the same segments, and the output is
//! watertight. Segments chain into closed loops which are fan-triangulated;
//! a fan never uses a diagonal whose endpoints lie on a common cube face, and
//! loops admitting no such fan get a centroid vertex instead.
//!
//! Samples beyond the field domain are padded with outside values mirrored
//! about the iso level, so every surface closes on the boundary.

use std::sync::OnceLock;

use super::{MeshError, TriMesh, Vec3, VolumeField};

const CENTROID: u8 = u8::MAX;

/// Cube corner `c` has offset `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`.
fn corner_offset(c: usize) -> [usize; 3] {
    [c & 1, (c >> 1) & 1, (c >> 2) & 1]
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    axis: usize,
    base: usize,
}

fn edges() -> [Edge; 12] {
    let mut out = [Edge { axis: 0, base: 0 }; 12];
    let mut n = 0;
    for axis in 0..3 {
        for base in 0..8 {
            if base & (1 << axis) == 0 {
                out[n] = Edge { axis, base };
                n += 1;
            }
        }
    }
    out
}

fn edge_between(a: usize, b: usize) -> usize {
    let base = a.min(b);
    let axis = (a ^ b).trailing_zeros() as usize;
    edges().iter().position(|e| e.axis == axis && e.base == base).expect("corners must share an edge")
}

/// Faces are `(axis, side)` pairs.
fn edge_faces(e: usize) -> [(usize, usize); 2] {
    let edge = edges()[e];
    let mut out = [(0, 0); 2];
    let mut n = 0;
    for b in 0..3 {
        if b != edge.axis {
            out[n] = (b, (edge.base >> b) & 1);
            n += 1;
        }
    }
    out
}

fn share_face(e1: usize, e2: usize) -> bool {
    let f1 = edge_faces(e1);
    edge_faces(e2).iter().any(|f| f1.contains(f))
}

/// Corners of each face ordered counter-clockwise seen from outside.
fn face_corners() -> Vec<[usize; 4]> {
    let mut faces = Vec::new();
    for axis in 0..3 {
        for side in 0..2 {
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            let at = |du: usize, dv: usize| (side << axis) | (du << u) | (dv << v);
            let mut quad = [at(0, 0), at(1, 0), at(1, 1), at(0, 1)];
            // (u, v, axis) is right-handed, so this order faces +axis
            if side == 0 {
                quad.reverse();
            }
            faces.push(quad);
        }
    }
    faces
}

#[derive(Debug, Clone)]
struct LoopTable {
    edges: Vec<u8>,
    /// Triangles as positions into `edges`, or [`CENTROID`].
    triangles: Vec<[u8; 3]>,
}

fn triangulate(edges_in_loop: &[u8]) -> Vec<[u8; 3]> {
    let n = edges_in_loop.len();
    if n == 3 {
        return vec![[0, 1, 2]];
    }
    for apex in 0..n {
        let ok = (2..n - 1).all(|k| {
            !share_face(edges_in_loop[apex] as usize, edges_in_loop[(apex + k) % n] as usize)
        });
        if ok {
            return (1..n - 1)
                .map(|k| [apex as u8, ((apex + k) % n) as u8, ((apex + k + 1) % n) as u8])
                .collect();
        }
    }
    (0..n).map(|k| [CENTROID, k as u8, ((k + 1) % n) as u8]).collect()
}

fn build_case(case: usize) -> Vec<LoopTable> {
    let inside = |c: usize| case & (1 << c) != 0;
    let mut next = [None::<usize>; 12];
    for quad in face_corners() {
        for i in 0..4 {
            let (cur, nxt) = (quad[i], quad[(i + 1) % 4]);
            if inside(cur) && !inside(nxt) {
                // exit crossing; walk back to where this inside run began
                let exit = edge_between(cur, nxt);
                let mut start = i;
                while inside(quad[(start + 3) % 4]) {
                    start = (start + 3) % 4;
                }
                let entry = edge_between(quad[(start + 3) % 4], quad[start]);
                next[exit] = Some(entry);
            }
        }
    }
    let mut visited = [false; 12];
    let mut loops = Vec::new();
    for start in 0..12 {
        if visited[start] || next[start].is_none() {
            continue;
        }
        let mut ring = Vec::new();
        let mut cur = start;
        while !visited[cur] {
            visited[cur] = true;
            ring.push(cur as u8);
            cur = next[cur].expect("crossings chain into closed loops");
        }
        debug_assert_eq!(cur, start);
        // loops run with the inside on the normal side; reverse for outward normals
        ring.reverse();
        let triangles = triangulate(&ring);
        loops.push(LoopTable { edges: ring, triangles });
    }
    loops
}

fn case_table() -> &'static [Vec<LoopTable>] {
    static TABLE: OnceLock<Vec<Vec<LoopTable>>> = OnceLock::new();
    TABLE.get_or_init(|| (0..256).map(build_case).collect())
}

/// Extracts the `iso` level set (inside = value > iso) as a watertight,
/// outward-oriented mesh.
pub fn marching_cubes(field: &VolumeField, iso: f64) -> Result<TriMesh, MeshError> {
    let [nx, ny, nz] = field.dims;
    // padded node lattice: node (i, j, k) maps to field cell (i - 1, j - 1, k - 1)
    let (px, py, pz) = (nx + 2, ny + 2, nz + 2);
    let node = |i: usize, j: usize, k: usize| i + px * (j + py * k);
    let mut values = vec![0.0; px * py * pz];
    for k in 0..pz {
        for j in 0..py {
            for i in 0..px {
                let ci = i.clamp(1, nx) - 1;
                let cj = j.clamp(1, ny) - 1;
                let ck = k.clamp(1, nz) - 1;
                let v = field.get(ci, cj, ck);
                let interior = (1..=nx).contains(&i) && (1..=ny).contains(&j) && (1..=nz).contains(&k);
                values[node(i, j, k)] = if interior || v <= iso { v } else { 2.0 * iso - v };
            }
        }
    }
    let position = |i: usize, j: usize, k: usize| {
        field.origin
            + Vec3::new(i as f64 - 0.5, j as f64 - 0.5, k as f64 - 0.5) * field.cell_size
    };

    let table = case_table();
    let cube_edges = edges();
    let mut edge_vertex = [
        vec![u32::MAX; px * py * pz],
        vec![u32::MAX; px * py * pz],
        vec![u32::MAX; px * py * pz],
    ];
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();

    for k in 0..pz - 1 {
        for j in 0..py - 1 {
            for i in 0..px - 1 {
                let mut case = 0usize;
                for c in 0..8 {
                    let o = corner_offset(c);
                    if values[node(i + o[0], j + o[1], k + o[2])] > iso {
                        case |= 1 << c;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                for lp in &table[case] {
                    let ids: Vec<u32> = lp
                        .edges
                        .iter()
                        .map(|&e| {
                            let edge = cube_edges[e as usize];
                            let o = corner_offset(edge.base);
                            let (a, b, c) = (i + o[0], j + o[1], k + o[2]);
                            let slot = &mut edge_vertex[edge.axis][node(a, b, c)];
                            if *slot == u32::MAX {
                                let mut d = [a, b, c];
                                d[edge.axis] += 1;
                                let v0 = values[node(a, b, c)];
                                let v1 = values[node(d[0], d[1], d[2])];
                                let t = ((iso - v0) / (v1 - v0)).clamp(1e-3, 1.0 - 1e-3);
                                let p0 = position(a, b, c);
                                let p1 = position(d[0], d[1], d[2]);
                                *slot = vertices.len() as u32;
                                vertices.push(p0 + (p1 - p0) * t);
                            }
                            *slot
                        })
                        .collect();
                    let mut centroid = None;
                    for tri in &lp.triangles {
                        let resolved = tri.map(|slot| {
                            if slot == CENTROID {
                                *centroid.get_or_insert_with(|| {
                                    let c = ids.iter().map(|&v| vertices[v as usize]).sum::<Vec3>()
                                        / ids.len() as f64;
                                    vertices.push(c);
                                    (vertices.len() - 1) as u32
                                })
                            } else {
                                ids[slot as usize]
                            }
                        });
                        triangles.push(resolved);
                    }
                }
            }
        }
    }
    if triangles.is_empty() {
        return Err(MeshError::EmptySurface);
    }
    Ok(TriMesh::new(vertices, triangles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{mesh_volume, Lattice};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn every_case_forms_closed_loops() {
        for (case, loops) in case_table().iter().enumerate() {
            let crossings: usize = (0..12)
                .filter(|&e| {
                    let edge = edges()[e];
                    let other = edge.base | (1 << edge.axis);
                    ((case >> edge.base) & 1) != ((case >> other) & 1)
                })
                .count();
            let used: usize = loops.iter().map(|l| l.edges.len()).sum();
            assert_eq!(crossings, used, "case {case}");
        }
    }

    fn cube_field(n: usize) -> VolumeField {
        let lattice = Lattice::covering(&Vec3::zeros(), &Vec3::repeat(n as f64), 1.0, 1);
        VolumeField::from_fn(lattice, |p| {
            f64::from(u8::from((0..3).all(|a| p[a] > 0.0 && p[a] < n as f64)))
        })
    }

    #[test]
    fn solid_cube_volume_bounds() {
        let mesh = marching_cubes(&cube_field(10), 0.5).unwrap();
        assert!(mesh.is_watertight());
        assert!(mesh.is_consistently_oriented());
        let v = mesh_volume(&mesh).unwrap();
        assert!((729.0..=1000.0).contains(&v), "{v}");
        assert_eq!(mesh.euler_characteristic(), 2);
    }

    #[test]
    fn all_outside_is_empty() {
        let lattice = Lattice::covering(&Vec3::zeros(), &Vec3::repeat(4.0), 1.0, 0);
        let f = VolumeField::new(lattice, 0.0);
        assert_eq!(marching_cubes(&f, 0.5), Err(MeshError::EmptySurface));
    }

    #[test]
    fn random_noise_is_watertight_and_oriented() {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lattice = Lattice::covering(&Vec3::zeros(), &Vec3::repeat(9.0), 1.0, 0);
            let mut f = VolumeField::new(lattice, 0.0);
            for v in &mut f.values {
                *v = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
            }
            let mesh = marching_cubes(&f, 0.5).unwrap();
            assert!(mesh.is_watertight(), "seed {seed}: {:?}", mesh.check_watertight());
            assert!(mesh.is_consistently_oriented(), "seed {seed}");
            assert!(mesh_volume(&mesh).unwrap() > 0.0);
        }
    }

    #[test]
    fn continuous_noise_is_watertight() {
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let lattice = Lattice::covering(&Vec3::zeros(), &Vec3::repeat(8.0), 1.0, 0);
            let mut f = VolumeField::new(lattice, 0.0);
            for v in &mut f.values {
                *v = rng.random_range(-1.0..1.0);
            }
            let mesh = marching_cubes(&f, 0.0).unwrap();
            assert!(mesh.is_watertight(), "seed {seed}: {:?}", mesh.check_watertight());
            assert!(mesh.is_consistently_oriented());
        }
    }

    #[test]
    fn domain_filling_field_closes() {
        let lattice = Lattice::covering(&Vec3::zeros(), &Vec3::repeat(3.0), 1.0, 0);
        let f = VolumeField::new(lattice, 1.0);
        let mesh = marching_cubes(&f, 0.5).unwrap();
        assert!(mesh.is_watertight());
        assert!(mesh_volume(&mesh).unwrap() > 0.0);
    }
}
