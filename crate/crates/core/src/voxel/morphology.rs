//! Binary morphology on dense occupancy grids with a Euclidean ball element.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryGrid {
    pub dims: [usize; 3],
    pub data: Vec<bool>,
}

impl BinaryGrid {
    pub fn empty(dims: [usize; 3]) -> Self {
        Self { dims, data: vec![false; dims[0] * dims[1] * dims[2]] }
    }

    pub fn from_fn(dims: [usize; 3], f: impl FnMut(usize) -> bool) -> Self {
        Self { dims, data: (0..dims[0] * dims[1] * dims[2]).map(f).collect() }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.data[self.index(i, j, k)]
    }

    /// Out-of-range coordinates read as empty.
    #[inline]
    pub fn get_signed(&self, i: i64, j: i64, k: i64) -> bool {
        if i < 0 || j < 0 || k < 0 {
            return false;
        }
        let (i, j, k) = (i as usize, j as usize, k as usize);
        if i >= self.dims[0] || j >= self.dims[1] || k >= self.dims[2] {
            return false;
        }
        self.get(i, j, k)
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_subset_of(&self, other: &BinaryGrid) -> bool {
        self.dims == other.dims && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    pub fn and_not(&self, other: &BinaryGrid) -> BinaryGrid {
        assert_eq!(self.dims, other.dims);
        BinaryGrid {
            dims: self.dims,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a && !b).collect(),
        }
    }
}

/// Integer offsets of the discrete ball `i² + j² + k² <= r²`.
pub fn ball_offsets(radius: usize) -> Vec<[i64; 3]> {
    let r = radius as i64;
    let mut out = Vec::new();
    for k in -r..=r {
        for j in -r..=r {
            for i in -r..=r {
                if i * i + j * j + k * k <= r * r {
                    out.push([i, j, k]);
                }
            }
        }
    }
    out
}

fn apply(grid: &BinaryGrid, radius: usize, erode: bool) -> BinaryGrid {
    if radius == 0 {
        return grid.clone();
    }
    let offsets = ball_offsets(radius);
    let [nx, ny, nz] = grid.dims;
    let mut out = BinaryGrid::empty(grid.dims);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let probe = |o: &[i64; 3]| grid.get_signed(i as i64 + o[0], j as i64 + o[1], k as i64 + o[2]);
                let v = if erode {
                    grid.get(i, j, k) && offsets.iter().all(probe)
                } else {
                    grid.get(i, j, k) || offsets.iter().any(probe)
                };
                let idx = out.index(i, j, k);
                out.data[idx] = v;
            }
        }
    }
    out
}

/// Erosion; cells beyond the grid border count as empty.
pub fn erode(grid: &BinaryGrid, radius: usize) -> BinaryGrid {
    apply(grid, radius, true)
}

pub fn dilate(grid: &BinaryGrid, radius: usize) -> BinaryGrid {
    apply(grid, radius, false)
}

pub fn opening(grid: &BinaryGrid, radius: usize) -> BinaryGrid {
    dilate(&erode(grid, radius), radius)
}
