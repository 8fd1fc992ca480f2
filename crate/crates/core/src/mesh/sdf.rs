//! Exact Euclidean distance transform (separable lower-envelope method).
//!
//! Distances are measured between cell centers: an inside cell gets the
//! distance to the nearest outside center minus half a cell, an outside cell
//! minus the distance to the nearest inside center plus half a cell. Cells
//! beyond the domain count as outside.

use super::{MeshError, Vec3, VolumeField};

/// Squared distance transform of one row in place. `f` holds squared
/// distances (`INFINITY` for no site).
fn edt_1d(f: &mut [f64], sites: &mut Vec<usize>, bounds: &mut Vec<f64>) {
    let n = f.len();
    sites.clear();
    bounds.clear();
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        while let Some(&v) = sites.last() {
            let vf = v as f64;
            let s = ((f[q] + qf * qf) - (f[v] + vf * vf)) / (2.0 * qf - 2.0 * vf);
            if s <= *bounds.last().expect("bounds track sites") {
                sites.pop();
                bounds.pop();
            } else {
                bounds.push(s);
                break;
            }
        }
        if sites.is_empty() {
            bounds.push(f64::NEG_INFINITY);
        }
        sites.push(q);
    }
    if sites.is_empty() {
        return;
    }
    let values: Vec<f64> = sites.iter().map(|&s| f[s]).collect();
    let mut k = 0;
    for (q, fq) in f.iter_mut().enumerate() {
        let qf = q as f64;
        while k + 1 < sites.len() && bounds[k + 1] < qf {
            k += 1;
        }
        let d = qf - sites[k] as f64;
        *fq = d * d + values[k];
    }
}

/// Squared distance (in cells²) from every cell to the nearest cell where
/// `is_site` holds.
fn squared_edt(dims: [usize; 3], is_site: impl Fn(usize) -> bool) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    let mut d: Vec<f64> = (0..nx * ny * nz).map(|i| if is_site(i) { 0.0 } else { f64::INFINITY }).collect();
    let mut sites = Vec::new();
    let mut bounds = Vec::new();
    let mut line = Vec::new();
    let strides = [1, nx, nx * ny];
    for axis in 0..3 {
        let len = dims[axis];
        let stride = strides[axis];
        let (o1, o2) = ((axis + 1) % 3, (axis + 2) % 3);
        for b in 0..dims[o2] {
            for a in 0..dims[o1] {
                let base = a * strides[o1] + b * strides[o2];
                line.clear();
                line.extend((0..len).map(|t| d[base + t * stride]));
                edt_1d(&mut line, &mut sites, &mut bounds);
                for (t, v) in line.iter().enumerate() {
                    d[base + t * stride] = *v;
                }
            }
        }
    }
    d
}

/// Signed distance field of an occupancy field (occupied = value > 0.5).
pub fn signed_distance(field: &VolumeField) -> Result<VolumeField, MeshError> {
    if field.occupied_count() == 0 {
        return Err(MeshError::NoInterior);
    }
    let [nx, ny, nz] = field.dims;
    // one layer of outside padding stands in for the exterior
    let padded = [nx + 2, ny + 2, nz + 2];
    let inside = |idx: usize| {
        let i = idx % padded[0];
        let j = (idx / padded[0]) % padded[1];
        let k = idx / (padded[0] * padded[1]);
        (1..=nx).contains(&i)
            && (1..=ny).contains(&j)
            && (1..=nz).contains(&k)
            && field.get(i - 1, j - 1, k - 1) > 0.5
    };
    let to_outside = squared_edt(padded, |i| !inside(i));
    let to_inside = squared_edt(padded, inside);
    let cs = field.cell_size;
    let mut values = Vec::with_capacity(field.values.len());
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let p = (i + 1) + padded[0] * ((j + 1) + padded[1] * (k + 1));
                values.push(if field.get(i, j, k) > 0.5 {
                    (to_outside[p].sqrt() - 0.5) * cs
                } else {
                    -(to_inside[p].sqrt() - 0.5) * cs
                });
            }
        }
    }
    Ok(VolumeField { dims: field.dims, cell_size: cs, origin: field.origin, values })
}

/// Largest positive SDF value and the center of the (first) cell holding it.
pub fn max_interior_clearance(sdf: &VolumeField) -> Result<(f64, Vec3), MeshError> {
    let mut best: Option<(f64, usize)> = None;
    for (idx, &v) in sdf.values.iter().enumerate() {
        if v > 0.0 && best.is_none_or(|(b, _)| v > b) {
            best = Some((v, idx));
        }
    }
    let (d, idx) = best.ok_or(MeshError::NoInterior)?;
    Ok((d, sdf.lattice().center_of(idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Lattice;

    fn box_field(n: usize, lo: usize, hi: usize) -> VolumeField {
        let lattice = Lattice::covering(&Vec3::zeros(), &Vec3::repeat(n as f64), 1.0, 0);
        let mut f = VolumeField::new(lattice, 0.0);
        for k in lo..hi {
            for j in lo..hi {
                for i in lo..hi {
                    let idx = f.index(i, j, k);
                    f.values[idx] = 1.0;
                }
            }
        }
        f
    }

    #[test]
    fn single_cell_is_half_cell() {
        let f = box_field(5, 2, 3);
        let (d, p) = max_interior_clearance(&signed_distance(&f).unwrap()).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert_eq!(p, Vec3::repeat(2.5));
    }

    #[test]
    fn cube_center_clearance() {
        let f = box_field(21, 0, 21);
        let (d, p) = max_interior_clearance(&signed_distance(&f).unwrap()).unwrap();
        assert!((d - 10.5).abs() <= 1.0);
        assert_eq!(p, Vec3::repeat(10.5));
    }

    #[test]
    fn empty_field_has_no_interior() {
        let f = box_field(4, 0, 0);
        assert_eq!(signed_distance(&f), Err(MeshError::NoInterior));
    }
}
