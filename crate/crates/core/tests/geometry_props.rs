//! Property tests for the geometry layer: Lipschitz bounds on the distance
//! transform, symmetry of set distances, and the spacetime metric axioms.

use proptest::prelude::*;
use setflow_core::dist::{distance_transform, hausdorff_distance, set_distance, spacetime_distance};
use setflow_core::field::{ClosedSetMask, MaskRepr};
use setflow_core::{Grid, Point};

fn grid() -> Grid {
    Grid::from_box(2, &[-1.0, -1.0], &[1.0, 1.0], 1.0 / 16.0)
}

fn mask_from_disks(disks: &[(f64, f64, f64)]) -> ClosedSetMask {
    let g = grid();
    ClosedSetMask::from_predicate(g, MaskRepr::Sublevel, |p| {
        disks
            .iter()
            .any(|&(cx, cy, r)| (p.xy() - nalgebra::Vector2::new(cx, cy)).norm() <= r)
    })
}

fn disk_strategy() -> impl Strategy<Value = (f64, f64, f64)> {
    (-0.6..0.6f64, -0.6..0.6f64, 0.05..0.35f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn distance_transform_is_lipschitz_on_the_grid_graph(disks in prop::collection::vec(disk_strategy(), 1..3)) {
        let m = mask_from_disks(&disks);
        let g = m.grid.clone();
        let h = g.spacing;
        let d = distance_transform(&m);
        let mut nbrs = Vec::new();
        for idx in 0..g.len() {
            g.neighbors(idx, &mut nbrs);
            for &n in &nbrs {
                let gap = (d.value(idx) - d.value(n)).abs();
                prop_assert!(gap <= h + 2.0 * h, "jump {gap} between neighbors");
            }
        }
    }

    #[test]
    fn set_distance_is_symmetric_within_two_cells(
        a in prop::collection::vec(disk_strategy(), 1..3),
        b in prop::collection::vec(disk_strategy(), 1..3),
    ) {
        let ma = mask_from_disks(&a);
        let mb = mask_from_disks(&b);
        let h = ma.grid.spacing;
        let dab = set_distance(&ma, &mb);
        let dba = set_distance(&mb, &ma);
        prop_assert!((dab - dba).abs() <= 2.0 * h, "{dab} vs {dba}");
    }

    #[test]
    fn hausdorff_dominates_set_distance(
        a in prop::collection::vec(disk_strategy(), 1..3),
        b in prop::collection::vec(disk_strategy(), 1..3),
    ) {
        let ma = mask_from_disks(&a);
        let mb = mask_from_disks(&b);
        prop_assert!(hausdorff_distance(&ma, &mb) + 1e-12 >= set_distance(&ma, &mb));
    }

    #[test]
    fn spacetime_metric_axioms(
        x1 in -2.0..2.0f64, y1 in -2.0..2.0f64, t1 in 0.0..4.0f64,
        x2 in -2.0..2.0f64, y2 in -2.0..2.0f64, t2 in 0.0..4.0f64,
        x3 in -2.0..2.0f64, y3 in -2.0..2.0f64, t3 in 0.0..4.0f64,
    ) {
        let p = (Point::new(x1, y1, 0.0), t1);
        let q = (Point::new(x2, y2, 0.0), t2);
        let r = (Point::new(x3, y3, 0.0), t3);
        let d = |a: &(Point, f64), b: &(Point, f64)| spacetime_distance((&a.0, a.1), (&b.0, b.1));
        prop_assert!((d(&p, &q) - d(&q, &p)).abs() < 1e-12);
        prop_assert!(d(&p, &q) <= d(&p, &r) + d(&r, &q) + 1e-12);
        prop_assert!(d(&p, &p).abs() < 1e-12);
    }
}
