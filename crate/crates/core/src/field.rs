use crate::grid::Grid;
use crate::Point;

/// Sign tolerance for sublevel membership: `u <= SIGN_TOL` counts as inside.
pub const SIGN_TOL: f64 = 1e-12;

/// Scalar values sampled at grid nodes at one instant.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl ScalarField {
    pub fn constant(grid: Grid, time: f64, value: f64) -> Self {
        let n = grid.len();
        ScalarField { grid, values: vec![value; n], time }
    }

    pub fn from_fn(grid: Grid, time: f64, f: impl Fn(Point) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.len()).map(|i| f(grid.pos(i))).collect();
        debug_assert!(values.iter().all(|v| v.is_finite()), "field contains non-finite values");
        ScalarField { grid, values, time }
    }

    pub fn at(&self, p: &Point) -> f64 {
        self.grid.interpolate(&self.values, p)
    }

    /// `{u <= 0}` as a node set, with isolated-node smoothing.
    pub fn sublevel_mask(&self) -> ClosedSetMask {
        let inside: Vec<bool> = self.values.iter().map(|&u| u <= SIGN_TOL).collect();
        ClosedSetMask { grid: self.grid.clone(), inside, repr: MaskRepr::Sublevel }.smoothed(&self.values, self.grid.spacing)
    }

    /// `{u = 0}` as a node set: a node is in iff `|u| <= h` or `u` changes
    /// sign with an axis neighbor. Works for unsigned fields too, where only
    /// the `|u| <= h` clause fires.
    pub fn zeroset_mask(&self) -> ClosedSetMask {
        self.levelset_mask(0.0)
    }

    /// `{u = a}` extracted the same way as the zero set.
    pub fn levelset_mask(&self, a: f64) -> ClosedSetMask {
        let g = &self.grid;
        let h = g.spacing;
        let mut inside = vec![false; g.len()];
        let mut nbrs = Vec::with_capacity(6);
        for idx in 0..g.len() {
            let u = self.values[idx] - a;
            if u.abs() <= h {
                inside[idx] = true;
                continue;
            }
            g.neighbors(idx, &mut nbrs);
            if nbrs.iter().any(|&n| u * (self.values[n] - a) < 0.0) {
                inside[idx] = true;
            }
        }
        ClosedSetMask { grid: g.clone(), inside, repr: MaskRepr::ZeroSet }
            .smoothed(&self.values, h)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Which predicate of the generating field a mask encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskRepr {
    /// `Z = {u <= 0}`
    Sublevel,
    /// `Z = {u = 0}`
    ZeroSet,
}

/// Closed set represented by its grid nodes.
#[derive(Debug, Clone)]
pub struct ClosedSetMask {
    pub grid: Grid,
    pub inside: Vec<bool>,
    pub repr: MaskRepr,
}

impl ClosedSetMask {
    pub fn empty(grid: Grid, repr: MaskRepr) -> Self {
        let n = grid.len();
        ClosedSetMask { grid, inside: vec![false; n], repr }
    }

    pub fn from_nodes(grid: Grid, nodes: &[usize], repr: MaskRepr) -> Self {
        let mut inside = vec![false; grid.len()];
        for &n in nodes {
            inside[n] = true;
        }
        ClosedSetMask { grid, inside, repr }
    }

    pub fn from_predicate(grid: Grid, repr: MaskRepr, f: impl Fn(Point) -> bool) -> Self {
        let inside: Vec<bool> = (0..grid.len()).map(|i| f(grid.pos(i))).collect();
        ClosedSetMask { grid, inside, repr }
    }

    pub fn is_empty(&self) -> bool {
        !self.inside.iter().any(|&b| b)
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.inside.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn union(&self, other: &ClosedSetMask) -> ClosedSetMask {
        assert!(self.grid.same_shape(&other.grid), "mask grids differ");
        let inside = self
            .inside
            .iter()
            .zip(&other.inside)
            .map(|(&a, &b)| a | b)
            .collect();
        ClosedSetMask { grid: self.grid.clone(), inside, repr: self.repr }
    }

    /// Drop inside nodes with no inside neighbor unless the field value
    /// pins them to the set (`|u| <= h/2`); such singletons are sign noise.
    fn smoothed(mut self, values: &[f64], h: f64) -> Self {
        let grid = self.grid.clone();
        let mut nbrs = Vec::with_capacity(6);
        let snapshot = self.inside.clone();
        for idx in 0..grid.len() {
            if !snapshot[idx] {
                continue;
            }
            grid.neighbors(idx, &mut nbrs);
            if nbrs.iter().all(|&n| !snapshot[n]) && values[idx].abs() > 0.5 * h {
                self.inside[idx] = false;
            }
        }
        self
    }

    /// Nodes of the mask adjacent to at least one outside node (or on the box
    /// face). For a Sublevel mask this is the discrete boundary.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut nbrs = Vec::with_capacity(6);
        for idx in self.nodes() {
            self.grid.neighbors(idx, &mut nbrs);
            if nbrs.len() < 2 * self.grid.dim || nbrs.iter().any(|&n| !self.inside[n]) {
                out.push(idx);
            }
        }
        out
    }
}

/// Time-indexed family of closed sets, encoded by sampled level-set fields.
#[derive(Debug, Clone)]
pub struct SpacetimeTrack {
    /// Fields at strictly increasing times; the first sits at `start_time`.
    pub samples: Vec<ScalarField>,
    pub start_time: f64,
    /// Spacing of the stored samples (the solver steps much finer).
    pub time_step: f64,
    pub repr: MaskRepr,
    /// First time the set was observed empty, at solver-step resolution.
    pub extinction: Option<f64>,
}

impl SpacetimeTrack {
    pub fn grid(&self) -> &Grid {
        &self.samples[0].grid
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn mask_at(&self, i: usize) -> ClosedSetMask {
        match self.repr {
            MaskRepr::Sublevel => self.samples[i].sublevel_mask(),
            MaskRepr::ZeroSet => self.samples[i].zeroset_mask(),
        }
    }

    pub fn masks(&self) -> Vec<(f64, ClosedSetMask)> {
        (0..self.len()).map(|i| (self.samples[i].time, self.mask_at(i))).collect()
    }

    /// Builds a track from analytic fields; used by tests and the Kuratowski
    /// machinery, which do not need the solver.
    pub fn from_fn(
        grid: &Grid,
        times: &[f64],
        repr: MaskRepr,
        f: impl Fn(Point, f64) -> f64,
    ) -> Self {
        assert!(!times.is_empty());
        let samples: Vec<ScalarField> = times
            .iter()
            .map(|&t| ScalarField::from_fn(grid.clone(), t, |p| f(p, t)))
            .collect();
        let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        SpacetimeTrack {
            samples,
            start_time: times[0],
            time_step: dt,
            repr,
            extinction: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_circle_field(h: f64) -> ScalarField {
        let g = Grid::from_box(2, &[-2.0, -2.0], &[2.0, 2.0], h);
        ScalarField::from_fn(g, 0.0, |p| p.xy().norm() - 1.0)
    }

    #[test]
    fn sublevel_mask_matches_disk() {
        let u = unit_circle_field(1.0 / 16.0);
        let m = u.sublevel_mask();
        for idx in 0..u.grid.len() {
            let r = u.grid.pos(idx).xy().norm();
            if r < 0.9 {
                assert!(m.contains(idx));
            }
            if r > 1.1 {
                assert!(!m.contains(idx));
            }
        }
    }

    #[test]
    fn zeroset_mask_is_thin_ring() {
        let h = 1.0 / 16.0;
        let u = unit_circle_field(h);
        let m = u.zeroset_mask();
        assert!(!m.is_empty());
        for idx in m.nodes() {
            let r = u.grid.pos(idx).xy().norm();
            assert!((r - 1.0).abs() <= 2.0 * h, "ring node at radius {r}");
        }
    }

    #[test]
    fn isolated_noise_node_is_smoothed_away() {
        let g = Grid::new_2d([0.0, 0.0], 0.1, 16, 16);
        let mut vals = vec![1.0; g.len()];
        vals[g.index(8, 8, 0)] = -1.0; // deep spike, |u| > h/2, isolated
        let u = ScalarField { grid: g.clone(), values: vals, time: 0.0 };
        assert!(u.sublevel_mask().is_empty());
    }

    #[test]
    fn genuine_small_set_survives_smoothing() {
        let g = Grid::new_2d([0.0, 0.0], 0.1, 16, 16);
        let mut vals = vec![1.0; g.len()];
        vals[g.index(8, 8, 0)] = -0.01; // |u| <= h/2: a real, barely-resolved set
        let u = ScalarField { grid: g.clone(), values: vals, time: 0.0 };
        assert_eq!(u.sublevel_mask().count(), 1);
    }
}
