use serde::{Deserialize, Serialize};

use super::Vec3;

/// Axis-aligned sampling lattice. Sample `(i, j, k)` sits at the cell center
/// `origin + (i + 0.5, j + 0.5, k + 0.5) * cell_size`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub dims: [usize; 3],
    pub cell_size: f64,
    pub origin: Vec3,
}

impl Lattice {
    /// Lattice aligned to integer multiples of `cell_size` covering the box
    /// `[lo, hi]` plus `pad` extra cells on every side.
    pub fn covering(lo: &Vec3, hi: &Vec3, cell_size: f64, pad: usize) -> Self {
        let mut origin = Vec3::zeros();
        let mut dims = [0usize; 3];
        for a in 0..3 {
            let first = (lo[a] / cell_size).floor() as i64 - pad as i64;
            let last = (hi[a] / cell_size).ceil() as i64 + pad as i64;
            origin[a] = first as f64 * cell_size;
            dims[a] = (last - first).max(1) as usize;
        }
        Self { dims, cell_size, origin }
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        [
            index % self.dims[0],
            (index / self.dims[0]) % self.dims[1],
            index / (self.dims[0] * self.dims[1]),
        ]
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin
            + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * self.cell_size
    }

    pub fn center_of(&self, index: usize) -> Vec3 {
        let [i, j, k] = self.coords(index);
        self.center(i, j, k)
    }

    /// Cell containing `p`, if inside the lattice.
    #[inline]
    pub fn cell_of(&self, p: &Vec3) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - self.origin[a]) / self.cell_size).floor();
            if f < 0.0 || f >= self.dims[a] as f64 {
                return None;
            }
            out[a] = f as usize;
        }
        Some(out)
    }

    /// Inclusive index range of cells whose centers may fall in `[lo, hi]`.
    pub fn index_range(&self, lo: &Vec3, hi: &Vec3) -> Option<[(usize, usize); 3]> {
        let mut out = [(0, 0); 3];
        for a in 0..3 {
            let first = ((lo[a] - self.origin[a]) / self.cell_size - 0.5).ceil().max(0.0);
            let last = ((hi[a] - self.origin[a]) / self.cell_size - 0.5).floor();
            if last < 0.0 || first >= self.dims[a] as f64 || first > last {
                return None;
            }
            out[a] = (first as usize, (last as usize).min(self.dims[a] - 1));
        }
        Some(out)
    }

    pub fn max_corner(&self) -> Vec3 {
        self.origin
            + Vec3::new(self.dims[0] as f64, self.dims[1] as f64, self.dims[2] as f64) * self.cell_size
    }

    /// Smallest lattice on the same global grid containing both.
    pub fn union(&self, other: &Lattice) -> Lattice {
        let lo = self.origin.inf(&other.origin);
        let hi = self.max_corner().sup(&other.max_corner());
        let half = Vec3::repeat(0.5 * self.cell_size);
        Lattice::covering(&(lo + half), &(hi - half), self.cell_size, 0)
    }
}

/// Dense scalar field: occupancy in `{0, 1}` or signed distance in mm
/// (positive inside).
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeField {
    pub dims: [usize; 3],
    pub cell_size: f64,
    pub origin: Vec3,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BooleanOp {
    Union,
    Difference,
    Intersection,
}

impl VolumeField {
    pub fn new(lattice: Lattice, fill: f64) -> Self {
        Self {
            dims: lattice.dims,
            cell_size: lattice.cell_size,
            origin: lattice.origin,
            values: vec![fill; lattice.len()],
        }
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn(&Vec3) -> f64) -> Self {
        let values = (0..lattice.len()).map(|idx| f(&lattice.center_of(idx))).collect();
        Self { dims: lattice.dims, cell_size: lattice.cell_size, origin: lattice.origin, values }
    }

    pub fn lattice(&self) -> Lattice {
        Lattice { dims: self.dims, cell_size: self.cell_size, origin: self.origin }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_size.powi(3)
    }

    pub fn is_occupied(&self, idx: usize) -> bool {
        self.values[idx] > 0.5
    }

    pub fn occupied_count(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.5).count()
    }

    pub fn occupied_volume(&self) -> f64 {
        self.occupied_count() as f64 * self.cell_volume()
    }

    /// Value at the cell containing `p`, if any.
    pub fn sample_nearest(&self, p: &Vec3) -> Option<f64> {
        let [i, j, k] = self.lattice().cell_of(p)?;
        Some(self.get(i, j, k))
    }

    /// Trilinear interpolation between cell centers; `None` outside the
    /// hull of the centers.
    pub fn sample_trilinear(&self, p: &Vec3) -> Option<f64> {
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let u = (p[a] - self.origin[a]) / self.cell_size - 0.5;
            if u < 0.0 || u > (self.dims[a] - 1) as f64 {
                return None;
            }
            let b = (u.floor() as usize).min(self.dims[a].saturating_sub(2));
            base[a] = b;
            frac[a] = u - b as f64;
        }
        let mut acc = 0.0;
        for corner in 0..8 {
            let o = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let mut w = 1.0;
            let mut idx = [0usize; 3];
            for a in 0..3 {
                w *= if o[a] == 1 { frac[a] } else { 1.0 - frac[a] };
                idx[a] = (base[a] + o[a]).min(self.dims[a] - 1);
            }
            if w != 0.0 {
                acc += w * self.get(idx[0], idx[1], idx[2]);
            }
        }
        Some(acc)
    }

    /// Centroid of occupied cell centers.
    pub fn occupied_centroid(&self) -> Option<Vec3> {
        let lattice = self.lattice();
        let mut sum = Vec3::zeros();
        let mut n = 0usize;
        for (idx, &v) in self.values.iter().enumerate() {
            if v > 0.5 {
                sum += lattice.center_of(idx);
                n += 1;
            }
        }
        (n > 0).then(|| sum / n as f64)
    }

    /// World bounds of occupied cells (cell faces, not centers).
    pub fn occupied_bounds(&self) -> Option<(Vec3, Vec3)> {
        let lattice = self.lattice();
        let half = Vec3::repeat(0.5 * self.cell_size);
        let mut bounds: Option<(Vec3, Vec3)> = None;
        for (idx, &v) in self.values.iter().enumerate() {
            if v > 0.5 {
                let c = lattice.center_of(idx);
                bounds = Some(match bounds {
                    None => (c - half, c + half),
                    Some((lo, hi)) => (lo.inf(&(c - half)), hi.sup(&(c + half))),
                });
            }
        }
        bounds
    }

    /// Copies this field onto `lattice` by nearest-cell lookup; cells with
    /// no source sample get `fill`.
    pub fn resampled(&self, lattice: Lattice, fill: f64) -> VolumeField {
        VolumeField::from_fn(lattice, |p| self.sample_nearest(p).unwrap_or(fill))
    }

    /// Grows the domain (never shrinks) so it covers `lattice` as well.
    pub fn grow_to_cover(&mut self, other: &Lattice) {
        let current = self.lattice();
        let lo = current.origin;
        let hi = current.max_corner();
        if other.origin.iter().zip(lo.iter()).all(|(o, l)| o >= l)
            && other.max_corner().iter().zip(hi.iter()).all(|(o, h)| o <= h)
        {
            return;
        }
        let grown = current.union(other);
        *self = self.resampled(grown, 0.0);
    }

    /// Map values cellwise against `other` resampled by nearest-cell lookup
    /// (missing cells read as 0).
    pub fn zip_with(&self, other: &VolumeField, f: impl Fn(f64, f64) -> f64) -> VolumeField {
        let lattice = self.lattice();
        let same = other.lattice() == lattice;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, &a)| {
                let b = if same {
                    other.values[idx]
                } else {
                    other.sample_nearest(&lattice.center_of(idx)).unwrap_or(0.0)
                };
                f(a, b)
            })
            .collect();
        VolumeField { dims: self.dims, cell_size: self.cell_size, origin: self.origin, values }
    }

    /// Number of cells occupied in both fields, evaluated on `self`'s lattice.
    pub fn overlap_count(&self, other: &VolumeField) -> usize {
        let lattice = self.lattice();
        let Some(range) = lattice.index_range(&other.origin, &other.lattice().max_corner()) else {
            return 0;
        };
        let mut n = 0;
        for k in range[2].0..=range[2].1 {
            for j in range[1].0..=range[1].1 {
                for i in range[0].0..=range[0].1 {
                    let idx = lattice.index(i, j, k);
                    if self.values[idx] > 0.5
                        && other.sample_nearest(&lattice.center(i, j, k)).unwrap_or(0.0) > 0.5
                    {
                        n += 1;
                    }
                }
            }
        }
        n
    }
}

/// Cellwise boolean on `a`'s lattice; `b` is resampled by nearest-cell lookup.
pub fn field_boolean(a: &VolumeField, b: &VolumeField, op: BooleanOp) -> VolumeField {
    match op {
        BooleanOp::Union => a.zip_with(b, f64::max),
        BooleanOp::Difference => a.zip_with(b, |x, y| x * (1.0 - y)),
        BooleanOp::Intersection => a.zip_with(b, f64::min),
    }
}
