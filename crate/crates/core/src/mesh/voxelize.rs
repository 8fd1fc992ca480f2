use super::{Lattice, MeshError, TriMesh, Vec3, VolumeField};

/// Perturbed sign of a 2D edge function. Points exactly on an edge are
/// resolved as if the sample were nudged by an infinitesimal `(+ε, −ε²)` in
/// (y, z), which is the classic top-left rule: two triangles sharing an edge
/// never both claim (or both miss) a sample on it.
#[inline]
fn edge_sign(value: f64, dy: f64, dz: f64) -> bool {
    if value != 0.0 {
        value > 0.0
    } else if dz != 0.0 {
        dz < 0.0
    } else {
        dy < 0.0
    }
}

/// Edge function of `p` against the directed edge `a -> b` in the yz plane.
/// Always evaluated from the lexicographically smaller endpoint, so both
/// triangles sharing an edge see bitwise-opposite values.
#[inline]
fn edge_function(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    if a <= b {
        (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
    } else {
        -((a.0 - b.0) * (p.1 - b.1) - (a.1 - b.1) * (p.0 - b.0))
    }
}

/// Occupancy of `mesh` on `lattice` by ray parity along +x through cell
/// centers. The mesh must be closed; this is not checked here.
pub(crate) fn rasterize(mesh: &TriMesh, lattice: &Lattice) -> VolumeField {
    let [nx, ny, nz] = lattice.dims;
    let cs = lattice.cell_size;
    let mut crossings: Vec<Vec<f64>> = vec![Vec::new(); ny * nz];
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle(t);
        let pa = (a.y, a.z);
        let pb = (b.y, b.z);
        let pc = (c.y, c.z);
        let area = edge_function(pa, pb, pc);
        if area == 0.0 {
            continue;
        }
        let lo = a.inf(&b).inf(&c);
        let hi = a.sup(&b).sup(&c);
        let Some(range) = lattice.index_range(
            &Vec3::new(lattice.origin.x, lo.y, lo.z),
            &Vec3::new(lattice.max_corner().x, hi.y, hi.z),
        ) else {
            continue;
        };
        let orient = area > 0.0;
        for k in range[2].0..=range[2].1 {
            let z = lattice.origin.z + (k as f64 + 0.5) * cs;
            for j in range[1].0..=range[1].1 {
                let y = lattice.origin.y + (j as f64 + 0.5) * cs;
                let p = (y, z);
                let wa = edge_function(pb, pc, p);
                let wb = edge_function(pc, pa, p);
                let wc = edge_function(pa, pb, p);
                let inside = edge_sign(wa, pc.0 - pb.0, pc.1 - pb.1) == orient
                    && edge_sign(wb, pa.0 - pc.0, pa.1 - pc.1) == orient
                    && edge_sign(wc, pb.0 - pa.0, pb.1 - pa.1) == orient;
                if inside {
                    let x = (wa * a.x + wb * b.x + wc * c.x) / (wa + wb + wc);
                    crossings[j + ny * k].push(x);
                }
            }
        }
    }
    let mut field = VolumeField::new(*lattice, 0.0);
    for k in 0..nz {
        for j in 0..ny {
            let row = &mut crossings[j + ny * k];
            if row.is_empty() {
                continue;
            }
            row.sort_by(f64::total_cmp);
            for pair in row.chunks_exact(2) {
                let first = ((pair[0] - lattice.origin.x) / cs - 0.5).ceil().max(0.0) as usize;
                let last = ((pair[1] - lattice.origin.x) / cs - 0.5).ceil();
                if last <= 0.0 {
                    continue;
                }
                for i in first..(last as usize).min(nx) {
                    let idx = lattice.index(i, j, k);
                    field.values[idx] = 1.0;
                }
            }
        }
    }
    field
}

fn covering_lattice(mesh: &TriMesh, cell_size: f64) -> Result<Lattice, MeshError> {
    if !(cell_size > 0.0) {
        return Err(MeshError::InvalidDimension(format!("cell size {cell_size}")));
    }
    let (lo, hi) = mesh.bounding_box().ok_or(MeshError::EmptySurface)?;
    Ok(Lattice::covering(&lo, &hi, cell_size, 1))
}

/// Occupancy field of a closed mesh on the global lattice of `cell_size`.
pub fn voxelize(mesh: &TriMesh, cell_size: f64) -> Result<VolumeField, MeshError> {
    mesh.check_watertight()?;
    let lattice = covering_lattice(mesh, cell_size)?;
    Ok(rasterize(mesh, &lattice))
}

/// Enclosed volume by the divergence theorem; positive for outward normals.
pub fn mesh_volume(mesh: &TriMesh) -> Result<f64, MeshError> {
    mesh.check_watertight()?;
    Ok(mesh
        .triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| mesh.vertices[i as usize]);
            a.dot(&b.cross(&c))
        })
        .sum::<f64>()
        / 6.0)
}

/// Volume of the overlap of two closed meshes, counted on a shared lattice.
pub fn intersection_volume(a: &TriMesh, b: &TriMesh, cell_size: f64) -> Result<f64, MeshError> {
    a.check_watertight()?;
    b.check_watertight()?;
    let la = covering_lattice(a, cell_size)?;
    let lb = covering_lattice(b, cell_size)?;
    let (alo, ahi) = (la.origin, la.max_corner());
    let (blo, bhi) = (lb.origin, lb.max_corner());
    let lo = alo.sup(&blo);
    let hi = ahi.inf(&bhi);
    if (0..3).any(|i| lo[i] >= hi[i]) {
        return Ok(0.0);
    }
    let half = Vec3::repeat(0.5 * cell_size);
    let shared = Lattice::covering(&(lo + half), &(hi - half), cell_size, 0);
    let fa = rasterize(a, &shared);
    let fb = rasterize(b, &shared);
    let n = fa.values.iter().zip(&fb.values).filter(|(x, y)| **x > 0.5 && **y > 0.5).count();
    Ok(n as f64 * shared.cell_size.powi(3))
}
