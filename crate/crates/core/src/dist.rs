//! Exact Euclidean distance transforms and the set/spacetime distances built
//! on them.
//!
//! The transform is the separable lower-envelope algorithm: one pass per axis
//! computing, for every node, `min_q (|p - q|^2 + f(q))` over seed nodes `q`.
//! With `f = 0` on a mask it is the exact node-to-node distance (squared);
//! with `f = d(q)^2` it extends sub-cell seed distances, with O(h) error.

use crate::error::{Error, Result};
use crate::field::{ClosedSetMask, MaskRepr, ScalarField, SpacetimeTrack};
use crate::grid::Grid;
use crate::Point;
use rayon::prelude::*;

const INF: f64 = f64::INFINITY;

/// Distance field plus the empty-set flag; when the set is empty every value
/// equals the grid sentinel (10x diameter) instead of infinity so that
/// downstream arithmetic stays finite.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub field: ScalarField,
    pub set_empty: bool,
}

impl DistanceField {
    pub fn at(&self, p: &Point) -> f64 {
        self.field.at(p)
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.field.values[idx]
    }
}

/// One-dimensional lower envelope of parabolas: `out[i] = min_j ((i-j)^2 h^2 + f[j])`.
/// Sites with infinite `f` are skipped. `v` and `z` are scratch.
fn envelope_1d(f: &[f64], h: f64, out: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    let n = f.len();
    v.clear();
    z.clear();
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let xq = q as f64 * h;
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(-INF);
                    break;
                }
                Some(&p) => {
                    let xp = p as f64 * h;
                    let s = (f[q] + xq * xq - f[p] - xp * xp) / (2.0 * (xq - xp));
                    if s <= *z.last().unwrap() {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        out.fill(INF);
        return;
    }
    let mut k = 0;
    for i in 0..n {
        let x = i as f64 * h;
        while k + 1 < v.len() && z[k + 1] < x {
            k += 1;
        }
        let xs = v[k] as f64 * h;
        out[i] = (x - xs) * (x - xs) + f[v[k]];
    }
}

/// Squared distances `min_q (|p-q|^2 + offsets[q])` over the whole grid.
/// `offsets` must be nonnegative or infinite.
pub fn edt_squared(grid: &Grid, offsets: &[f64]) -> Vec<f64> {
    assert_eq!(offsets.len(), grid.len());
    let [nx, ny, nz] = grid.counts;
    let h = grid.spacing;
    let mut work = offsets.to_vec();

    // x pass: lines are contiguous.
    work.par_chunks_mut(nx)
        .for_each_init(
            || (vec![0.0; nx], Vec::new(), Vec::new()),
            |(line, v, z), row| {
                envelope_1d(row, h, line, v, z);
                row.copy_from_slice(line);
            },
        );

    // y pass.
    let mut next = vec![0.0; work.len()];
    {
        let work_ref = &work;
        next.par_chunks_mut(nx * ny)
            .enumerate()
            .for_each_init(
                || (vec![0.0; ny], vec![0.0; ny], Vec::new(), Vec::new()),
                |(col, line, v, z), (k, slab)| {
                    for i in 0..nx {
                        for j in 0..ny {
                            col[j] = work_ref[(k * ny + j) * nx + i];
                        }
                        envelope_1d(col, h, line, v, z);
                        for j in 0..ny {
                            slab[j * nx + i] = line[j];
                        }
                    }
                },
            );
    }

    if grid.dim == 2 || nz == 1 {
        return next;
    }

    // z pass: writes are strided across slabs, so gather per column and
    // scatter the results serially.
    let plane = nx * ny;
    let mut out = vec![0.0; next.len()];
    {
        let next_ref = &next;
        let cols: Vec<usize> = (0..plane).collect();
        let results: Vec<(usize, Vec<f64>)> = cols
            .par_iter()
            .map_init(
                || (vec![0.0; nz], vec![0.0; nz], Vec::new(), Vec::new()),
                |(col, line, v, z), &c| {
                    for k in 0..nz {
                        col[k] = next_ref[k * plane + c];
                    }
                    envelope_1d(col, h, line, v, z);
                    (c, line.clone())
                },
            )
            .collect();
        for (c, line) in results {
            for k in 0..nz {
                out[k * plane + c] = line[k];
            }
        }
    }
    out
}

/// Exact (to grid resolution) Euclidean distance to the mask's node set.
/// An empty mask yields the sentinel field.
pub fn distance_transform(mask: &ClosedSetMask) -> DistanceField {
    let grid = mask.grid.clone();
    if mask.is_empty() {
        let s = grid.sentinel();
        return DistanceField {
            field: ScalarField::constant(grid, 0.0, s),
            set_empty: true,
        };
    }
    let offsets: Vec<f64> = mask.inside.iter().map(|&b| if b { 0.0 } else { INF }).collect();
    let sq = edt_squared(&grid, &offsets);
    let values: Vec<f64> = sq.iter().map(|&d| d.sqrt()).collect();
    DistanceField {
        field: ScalarField { grid, values, time: 0.0 },
        set_empty: false,
    }
}

/// Distance extension from sub-cell seeds by Godunov fast sweeping: `seeds`
/// pairs node indices with the (unsigned) distance of the interface from
/// that node. Seed values stay frozen; elsewhere the eikonal equation
/// `|grad d| = 1` is solved upwind, so distances propagate linearly and the
/// result is exactly translation-equivariant.
pub fn distance_from_seeds(grid: &Grid, seeds: &[(usize, f64)]) -> Vec<f64> {
    let [nx, ny, nz] = grid.counts;
    distance_from_seeds_window(grid, seeds, [0, 0, 0], [nx - 1, ny - 1, nz - 1])
}

/// Window-restricted variant: nodes outside `[lo, hi]` keep the INF they
/// start with. The solver uses this with a band-sized window so the sweep
/// cost tracks the interface, not the box.
pub fn distance_from_seeds_window(
    grid: &Grid,
    seeds: &[(usize, f64)],
    lo: [usize; 3],
    hi: [usize; 3],
) -> Vec<f64> {
    let n = grid.len();
    let h = grid.spacing;
    let mut d = vec![INF; n];
    let mut frozen = vec![false; n];
    for &(idx, v) in seeds {
        if v < d[idx] {
            d[idx] = v;
        }
        frozen[idx] = true;
    }
    let [nx, ny, nz] = grid.counts;
    let sy = nx;
    let sz = nx * ny;
    let dim3 = grid.dim == 3;

    // 2^dim sweep orderings, run twice; enough for a distance function.
    let dirs = [false, true];
    for _round in 0..2 {
        for &rz in if dim3 { &dirs[..] } else { &dirs[..1] } {
            for &ry in &dirs {
                for &rx in &dirs {
                    for kk in lo[2]..=hi[2] {
                        let k = if rz { lo[2] + hi[2] - kk } else { kk };
                        for jj in lo[1]..=hi[1] {
                            let j = if ry { lo[1] + hi[1] - jj } else { jj };
                            let base = (k * ny + j) * nx;
                            for ii in lo[0]..=hi[0] {
                                let i = if rx { lo[0] + hi[0] - ii } else { ii };
                                let idx = base + i;
                                if frozen[idx] {
                                    continue;
                                }
                                let ax = {
                                    let a = if i > 0 { d[idx - 1] } else { INF };
                                    let b = if i + 1 < nx { d[idx + 1] } else { INF };
                                    a.min(b)
                                };
                                let ay = {
                                    let a = if j > 0 { d[idx - sy] } else { INF };
                                    let b = if j + 1 < ny { d[idx + sy] } else { INF };
                                    a.min(b)
                                };
                                let az = if dim3 {
                                    let a = if k > 0 { d[idx - sz] } else { INF };
                                    let b = if k + 1 < nz { d[idx + sz] } else { INF };
                                    a.min(b)
                                } else {
                                    INF
                                };
                                let cand = eikonal_solve(ax, ay, az, h);
                                if cand < d[idx] {
                                    d[idx] = cand;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    d
}

/// Godunov eikonal update from the three axis minima (INF for absent axes).
#[inline]
fn eikonal_solve(m0: f64, m1: f64, m2: f64, h: f64) -> f64 {
    // Sort the three values ascending without branching on finiteness.
    let (mut a, mut b, mut c) = (m0, m1, m2);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    if b > c {
        std::mem::swap(&mut b, &mut c);
    }
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    if !a.is_finite() {
        return INF;
    }
    let mut best = a + h;
    if best > b && b.is_finite() {
        let disc = 2.0 * h * h - (a - b) * (a - b);
        if disc >= 0.0 {
            best = 0.5 * (a + b + disc.sqrt());
        }
        if best > c && c.is_finite() {
            let s = a + b + c;
            let q = a * a + b * b + c * c;
            let disc = s * s - 3.0 * (q - h * h);
            if disc >= 0.0 {
                best = (s + disc.sqrt()) / 3.0;
            }
        }
    }
    best
}

/// `min_{p in a} dist(p, b)`; sentinel if either set is empty. Symmetric to
/// within 2h.
///
/// Panics if the masks live on different grids.
pub fn set_distance(a: &ClosedSetMask, b: &ClosedSetMask) -> f64 {
    assert!(a.grid.same_shape(&b.grid), "set_distance: grid mismatch");
    if a.is_empty() || b.is_empty() {
        return a.grid.sentinel();
    }
    let db = distance_transform(b);
    a.nodes().map(|i| db.value(i)).fold(INF, f64::min)
}

/// Symmetric Hausdorff distance between node sets; 0 if both empty, sentinel
/// if exactly one is.
pub fn hausdorff_distance(a: &ClosedSetMask, b: &ClosedSetMask) -> f64 {
    assert!(a.grid.same_shape(&b.grid), "hausdorff_distance: grid mismatch");
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return a.grid.sentinel(),
        _ => {}
    }
    let da = distance_transform(a);
    let db = distance_transform(b);
    let sup_a = a.nodes().map(|i| db.value(i)).fold(0.0f64, f64::max);
    let sup_b = b.nodes().map(|i| da.value(i)).fold(0.0f64, f64::max);
    sup_a.max(sup_b)
}

/// Parabolic spacetime metric: `max(|x1 - x2|, |t1 - t2|^(1/2))`.
pub fn spacetime_distance(p: (&Point, f64), q: (&Point, f64)) -> f64 {
    let spatial = (p.0 - q.0).norm();
    let temporal = (p.1 - q.1).abs().sqrt();
    spatial.max(temporal)
}

/// Kuratowski limsup of a family of tracks, approximated on the grid: the
/// spacetime set `{(x,t): liminf_n dist((x,t), Z_n) = 0}` with the parabolic
/// metric, thresholded at 2h. The liminf over the finite family is taken over
/// its trailing half, so sets that appear only in early tracks drop out.
///
/// The result is returned as a track whose sublevel masks are the limit set
/// (sample values are `liminf distance - 2h`).
pub fn kuratowski_limsup(tracks: &[SpacetimeTrack]) -> Result<SpacetimeTrack> {
    if tracks.len() < 2 {
        return Err(Error::InsufficientTracks { got: tracks.len() });
    }
    let grid = tracks[0].grid().clone();
    let times = tracks[0].times();
    for tr in tracks {
        assert!(tr.grid().same_shape(&grid), "kuratowski_limsup: grid mismatch");
        let ts = tr.times();
        assert_eq!(ts.len(), times.len(), "kuratowski_limsup: time lattice mismatch");
        for (a, b) in ts.iter().zip(&times) {
            assert!((a - b).abs() < 1e-9, "kuratowski_limsup: time lattice mismatch");
        }
    }
    let h = grid.spacing;
    let tail_start = tracks.len() / 2;
    let n_nodes = grid.len();

    // Spatial distance fields per (track, sample).
    let spatial: Vec<Vec<Vec<f64>>> = tracks
        .iter()
        .map(|tr| {
            (0..tr.len())
                .map(|i| distance_transform(&tr.mask_at(i)).field.values)
                .collect()
        })
        .collect();

    let samples: Vec<ScalarField> = times
        .iter()
        .enumerate()
        .map(|(_k, &tk)| {
            let mut values = vec![0.0; n_nodes];
            values
                .par_iter_mut()
                .enumerate()
                .for_each(|(node, out)| {
                    let mut liminf = INF;
                    for tr in tail_start..tracks.len() {
                        let mut best = INF;
                        for (s, &ts) in times.iter().enumerate() {
                            let d = spatial[tr][s][node].max((tk - ts).abs().sqrt());
                            best = best.min(d);
                        }
                        liminf = liminf.min(best);
                    }
                    *out = liminf - 2.0 * h;
                });
            ScalarField { grid: grid.clone(), values, time: tk }
        })
        .collect();

    Ok(SpacetimeTrack {
        samples,
        start_time: times[0],
        time_step: if times.len() > 1 { times[1] - times[0] } else { 0.0 },
        repr: MaskRepr::Sublevel,
        extinction: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_distance_is_exact() {
        let g = Grid::from_box(2, &[-1.0, -1.0], &[1.0, 1.0], 0.1);
        let origin = (0..g.len()).find(|&i| g.pos(i).norm() < 1e-12).unwrap();
        let m = ClosedSetMask::from_nodes(g.clone(), &[origin], MaskRepr::Sublevel);
        let d = distance_transform(&m);
        let q = Point::new(0.5, 0.0, 0.0);
        assert!((d.at(&q) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn disk_distance_matches_analytic() {
        let h = 1.0 / 64.0;
        let g = Grid::from_box(2, &[-2.0, -2.0], &[2.0, 2.0], h);
        let m = ClosedSetMask::from_predicate(g.clone(), MaskRepr::Sublevel, |p| p.xy().norm() <= 1.0);
        let d = distance_transform(&m);
        let q = Point::new(1.5, 0.0, 0.0);
        assert!((d.at(&q) - 0.5).abs() <= h, "got {}", d.at(&q));
    }

    #[test]
    fn empty_mask_gives_sentinel() {
        let g = Grid::new_2d([0.0, 0.0], 0.1, 8, 8);
        let m = ClosedSetMask::empty(g.clone(), MaskRepr::Sublevel);
        let d = distance_transform(&m);
        assert!(d.set_empty);
        assert!(d.field.values.iter().all(|&v| g.is_sentinel(v)));
        let other = ClosedSetMask::from_nodes(g.clone(), &[0], MaskRepr::Sublevel);
        assert!(g.is_sentinel(set_distance(&other, &m)));
    }

    #[test]
    fn two_disks_gap() {
        let h = 1.0 / 32.0;
        let g = Grid::from_box(2, &[-3.5, -1.5], &[3.5, 1.5], h);
        let a = ClosedSetMask::from_predicate(g.clone(), MaskRepr::Sublevel, |p| {
            (p.xy() - nalgebra::Vector2::new(-2.0, 0.0)).norm() <= 1.0
        });
        let b = ClosedSetMask::from_predicate(g.clone(), MaskRepr::Sublevel, |p| {
            (p.xy() - nalgebra::Vector2::new(2.0, 0.0)).norm() <= 1.0
        });
        let d = set_distance(&a, &b);
        assert!((d - 2.0).abs() <= 2.0 * h, "got {d}");
        assert!((set_distance(&b, &a) - d).abs() <= 2.0 * h);
        assert_eq!(set_distance(&a, &a), 0.0);
    }

    #[test]
    fn spacetime_metric_examples() {
        let o = Point::zeros();
        assert_eq!(spacetime_distance((&o, 0.0), (&Point::new(3.0, 4.0, 0.0), 0.0)), 5.0);
        assert_eq!(spacetime_distance((&o, 0.0), (&o, 4.0)), 2.0);
        let p = Point::new(1.0, 0.0, 0.0);
        assert_eq!(spacetime_distance((&p, 1.0), (&o, 1.25)), 1.0);
    }

    #[test]
    fn edt_3d_sphere() {
        let h = 1.0 / 8.0;
        let g = Grid::from_box(3, &[-1.0; 3], &[1.0; 3], h);
        let m = ClosedSetMask::from_predicate(g.clone(), MaskRepr::Sublevel, |p| p.norm() <= 0.5);
        let d = distance_transform(&m);
        let q = Point::new(0.9, 0.0, 0.0);
        assert!((d.at(&q) - 0.4).abs() <= h);
    }

    #[test]
    fn kuratowski_needs_two_tracks() {
        let g = Grid::new_2d([0.0, 0.0], 0.1, 8, 8);
        let tr = SpacetimeTrack::from_fn(&g, &[0.0, 0.1], MaskRepr::Sublevel, |p, _| p.x - 0.4);
        assert!(matches!(
            kuratowski_limsup(std::slice::from_ref(&tr)),
            Err(Error::InsufficientTracks { got: 1 })
        ));
    }
}
