use crate::Point;

/// Uniform Cartesian grid over a box in 2 or 3 ambient dimensions.
///
/// Nodes sit at `origin + h * (i, j, k)`. Linear index order is x fastest,
/// then y, then z, matching the dump format. 2-d grids have `counts[2] == 1`
/// and a zero third coordinate everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub origin: Point,
    pub spacing: f64,
    pub counts: [usize; 3],
}

impl Grid {
    pub fn new_2d(origin: [f64; 2], spacing: f64, nx: usize, ny: usize) -> Self {
        assert!(spacing > 0.0, "spacing must be positive");
        assert!(nx >= 8 && ny >= 8, "need at least 8 nodes per axis");
        Grid {
            dim: 2,
            origin: Point::new(origin[0], origin[1], 0.0),
            spacing,
            counts: [nx, ny, 1],
        }
    }

    pub fn new_3d(origin: [f64; 3], spacing: f64, nx: usize, ny: usize, nz: usize) -> Self {
        assert!(spacing > 0.0, "spacing must be positive");
        assert!(nx >= 8 && ny >= 8 && nz >= 8, "need at least 8 nodes per axis");
        Grid {
            dim: 3,
            origin: Point::new(origin[0], origin[1], origin[2]),
            spacing,
            counts: [nx, ny, nz],
        }
    }

    /// Grid covering `[lo, hi]^dim` with spacing as close to `spacing` as an
    /// integer node count allows (the box is honored exactly; the count is
    /// rounded to cover it).
    pub fn from_box(dim: usize, lo: &[f64], hi: &[f64], spacing: f64) -> Self {
        assert!(dim == 2 || dim == 3);
        let mut counts = [1usize; 3];
        for a in 0..dim {
            counts[a] = ((hi[a] - lo[a]) / spacing).round() as usize + 1;
            counts[a] = counts[a].max(8);
        }
        if dim == 2 {
            Grid::new_2d([lo[0], lo[1]], spacing, counts[0], counts[1])
        } else {
            Grid::new_3d([lo[0], lo[1], lo[2]], spacing, counts[0], counts[1], counts[2])
        }
    }

    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1] * self.counts[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.counts[1] + j) * self.counts[0] + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let i = idx % self.counts[0];
        let j = (idx / self.counts[0]) % self.counts[1];
        let k = idx / (self.counts[0] * self.counts[1]);
        (i, j, k)
    }

    #[inline]
    pub fn pos(&self, idx: usize) -> Point {
        let (i, j, k) = self.coords(idx);
        self.origin
            + Point::new(
                i as f64 * self.spacing,
                j as f64 * self.spacing,
                k as f64 * self.spacing,
            )
    }

    /// Box side lengths.
    pub fn extent(&self) -> Point {
        Point::new(
            (self.counts[0] - 1) as f64 * self.spacing,
            (self.counts[1] - 1) as f64 * self.spacing,
            if self.dim == 3 {
                (self.counts[2] - 1) as f64 * self.spacing
            } else {
                0.0
            },
        )
    }

    /// Diagonal of the box; every internode distance is below this.
    pub fn diameter(&self) -> f64 {
        self.extent().norm()
    }

    /// Finite stand-in for "distance to the empty set". Large enough that no
    /// real distance on the grid reaches it, small enough that squaring it
    /// stays comfortably finite.
    pub fn sentinel(&self) -> f64 {
        10.0 * self.diameter()
    }

    pub fn is_sentinel(&self, d: f64) -> bool {
        d >= 0.5 * self.sentinel()
    }

    /// Axis-aligned neighbors (4 in 2-d, 6 in 3-d).
    pub fn neighbors(&self, idx: usize, out: &mut Vec<usize>) {
        out.clear();
        let (i, j, k) = self.coords(idx);
        if i > 0 {
            out.push(self.index(i - 1, j, k));
        }
        if i + 1 < self.counts[0] {
            out.push(self.index(i + 1, j, k));
        }
        if j > 0 {
            out.push(self.index(i, j - 1, k));
        }
        if j + 1 < self.counts[1] {
            out.push(self.index(i, j + 1, k));
        }
        if self.dim == 3 {
            if k > 0 {
                out.push(self.index(i, j, k - 1));
            }
            if k + 1 < self.counts[2] {
                out.push(self.index(i, j, k + 1));
            }
        }
    }

    /// Distance from a node to the nearest box face.
    pub fn face_distance(&self, idx: usize) -> f64 {
        let (i, j, k) = self.coords(idx);
        let mut cells = i.min(self.counts[0] - 1 - i).min(j).min(self.counts[1] - 1 - j);
        if self.dim == 3 {
            cells = cells.min(k).min(self.counts[2] - 1 - k);
        }
        cells as f64 * self.spacing
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && self.counts == other.counts
            && (self.origin - other.origin).norm() < 1e-12
            && (self.spacing - other.spacing).abs() < 1e-15
    }

    /// Bilinear (2-d) / trilinear (3-d) interpolation of nodal `values` at a
    /// point, clamped to the box.
    pub fn interpolate(&self, values: &[f64], p: &Point) -> f64 {
        assert_eq!(values.len(), self.len());
        let h = self.spacing;
        let clamp_axis = |x: f64, n: usize| -> (usize, f64) {
            let s = (x / h).clamp(0.0, (n - 1) as f64);
            let i0 = (s.floor() as usize).min(n.saturating_sub(2));
            (i0, s - i0 as f64)
        };
        let (i0, fx) = clamp_axis(p.x - self.origin.x, self.counts[0]);
        let (j0, fy) = clamp_axis(p.y - self.origin.y, self.counts[1]);
        if self.dim == 2 {
            let v00 = values[self.index(i0, j0, 0)];
            let v10 = values[self.index(i0 + 1, j0, 0)];
            let v01 = values[self.index(i0, j0 + 1, 0)];
            let v11 = values[self.index(i0 + 1, j0 + 1, 0)];
            let a = v00 * (1.0 - fx) + v10 * fx;
            let b = v01 * (1.0 - fx) + v11 * fx;
            a * (1.0 - fy) + b * fy
        } else {
            let (k0, fz) = clamp_axis(p.z - self.origin.z, self.counts[2]);
            let mut acc = 0.0;
            for (dk, wz) in [(0, 1.0 - fz), (1, fz)] {
                for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
                    for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
                        acc += values[self.index(i0 + di, j0 + dj, k0 + dk)] * wx * wy * wz;
                    }
                }
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        let g = Grid::new_3d([0.0, 0.0, 0.0], 0.5, 8, 9, 10);
        for idx in [0, 1, 17, 8 * 9 * 10 - 1] {
            let (i, j, k) = g.coords(idx);
            assert_eq!(g.index(i, j, k), idx);
        }
    }

    #[test]
    fn positions_and_extent() {
        let g = Grid::new_2d([-1.0, -1.0], 0.25, 9, 9);
        assert_eq!(g.pos(0), Point::new(-1.0, -1.0, 0.0));
        assert_eq!(g.pos(g.len() - 1), Point::new(1.0, 1.0, 0.0));
        assert!((g.extent().x - 2.0).abs() < 1e-15);
        assert!(g.is_sentinel(g.sentinel()));
        assert!(!g.is_sentinel(g.diameter()));
    }

    #[test]
    fn interpolation_reproduces_linear_functions() {
        let g = Grid::new_2d([0.0, 0.0], 0.1, 11, 11);
        let vals: Vec<f64> = (0..g.len()).map(|i| {
            let p = g.pos(i);
            2.0 * p.x - 3.0 * p.y + 0.5
        }).collect();
        let q = Point::new(0.537, 0.221, 0.0);
        let want = 2.0 * q.x - 3.0 * q.y + 0.5;
        assert!((g.interpolate(&vals, &q) - want).abs() < 1e-12);
    }
}
