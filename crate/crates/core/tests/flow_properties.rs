//! Cross-module flow properties: grid convergence of the extinction time,
//! the Kuratowski limit examples, distance monotonicity on solver tracks,
//! and the reported (not resolved) fattening of interface tracks.

use setflow_core::dist::{hausdorff_distance, kuratowski_limsup};
use setflow_core::engine::{evolve, extinction_time, Extinction, FlowParams};
use setflow_core::field::{MaskRepr, ScalarField, SpacetimeTrack};
use setflow_core::harness::{check_finite_speed, check_shrinking_ball_monotonicity, TrackDistances};
use setflow_core::io::interface_measure;
use setflow_core::{Grid, Point};

fn circle_track(n: usize, r0: f64, horizon: f64) -> (Grid, SpacetimeTrack) {
    let h = 1.0 / n as f64;
    let g = Grid::from_box(2, &[-1.25, -1.25], &[1.25, 1.25], h);
    let u0 = ScalarField::from_fn(g.clone(), 0.0, |p| p.xy().norm() - r0);
    let p = FlowParams::for_grid(&g, horizon);
    (g.clone(), evolve(&u0, None, &p).unwrap())
}

#[test]
fn extinction_error_halves_with_the_grid() {
    let mut errs = Vec::new();
    for n in [64usize, 128] {
        let (_, track) = circle_track(n, 1.0, 0.6);
        match extinction_time(&track) {
            Extinction::At(t) => errs.push((t - 0.5).abs()),
            Extinction::Survived => panic!("circle survived at n = {n}"),
        }
    }
    let ratio = errs[0] / errs[1];
    assert!(
        (1.4..=2.6).contains(&ratio),
        "error ratio {ratio} outside the first-order band (errs {errs:?})"
    );
}

#[test]
fn solver_track_satisfies_ball_monotonicity_and_finite_speed() {
    let (g, track) = circle_track(64, 0.8, 0.2);
    let h = g.spacing;
    let dists = TrackDistances::new(&track);
    let probes = [
        Point::new(0.0, 0.0, 0.0),
        Point::new(0.5, 0.3, 0.0),
        Point::new(-1.0, -1.0, 0.0),
        Point::new(0.79, 0.0, 0.0),
    ];
    let rep = check_shrinking_ball_monotonicity(&dists, &g, &probes, 8.0 * h, 4.0 * h);
    assert!(rep.passed, "monotonicity margin {}", rep.margin);

    let probe = Point::new(1.15, 0.0, 0.0);
    let rep = check_finite_speed(&dists, &g, &probe, 0.0, 4.0 * h);
    assert!(rep.passed, "finite speed margin {}", rep.margin);
}

#[test]
fn kuratowski_constant_sequence_is_idempotent() {
    let g = Grid::from_box(2, &[-1.0, -1.0], &[1.0, 1.0], 1.0 / 16.0);
    let times: Vec<f64> = (0..6).map(|i| i as f64 * 0.05).collect();
    let h = g.spacing;
    let z = SpacetimeTrack::from_fn(&g, &times, MaskRepr::Sublevel, |p, _| p.xy().norm() - 0.5);
    let lim = kuratowski_limsup(&[z.clone(), z.clone(), z.clone(), z.clone()]).unwrap();
    for i in 0..times.len() {
        let d = hausdorff_distance(&z.mask_at(i), &lim.mask_at(i));
        assert!(d <= 2.0 * h + 1e-12, "sample {i}: hausdorff {d}");
    }
}

#[test]
fn kuratowski_interleaved_sequences_give_the_union() {
    let g = Grid::from_box(2, &[-1.0, -1.0], &[1.0, 1.0], 1.0 / 16.0);
    let h = g.spacing;
    let times: Vec<f64> = (0..4).map(|i| i as f64 * 0.05).collect();
    let a = SpacetimeTrack::from_fn(&g, &times, MaskRepr::Sublevel, |p, _| {
        (p.xy() - nalgebra::Vector2::new(-0.4, 0.0)).norm() - 0.25
    });
    let b = SpacetimeTrack::from_fn(&g, &times, MaskRepr::Sublevel, |p, _| {
        (p.xy() - nalgebra::Vector2::new(0.4, 0.0)).norm() - 0.25
    });
    let lim =
        kuratowski_limsup(&[a.clone(), b.clone(), a.clone(), b.clone()]).unwrap();
    for i in 0..times.len() {
        let union = a.mask_at(i).union(&b.mask_at(i));
        let d = hausdorff_distance(&union, &lim.mask_at(i));
        assert!(d <= 2.0 * h + 1e-12, "sample {i}: hausdorff {d}");
    }
}

#[test]
fn kuratowski_limit_keeps_the_extinction_point() {
    // Shrinking circles with extinction times rising to 1: the limit track
    // contains the spacetime point (0, 1) even though every member's slice
    // at t = 1 is empty.
    let g = Grid::from_box(2, &[-1.8, -1.8], &[1.8, 1.8], 1.0 / 16.0);
    let h = g.spacing;
    let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let tracks: Vec<SpacetimeTrack> = (0..6)
        .map(|n| {
            // T_n = 1 - (7 - n) h^2 for the last members: within the 2h
            // spacetime tolerance of the full circle's extinction at 1.
            let t_n = 1.0 - (7 - n) as f64 * h * h;
            SpacetimeTrack::from_fn(&g, &times, MaskRepr::Sublevel, move |p, t| {
                let r2 = 2.0 * (t_n - t);
                if r2 <= 0.0 {
                    1.0
                } else {
                    p.xy().norm() - r2.sqrt()
                }
            })
        })
        .collect();
    let lim = kuratowski_limsup(&tracks).unwrap();
    // The sample at t = 1.
    let i1 = times.iter().position(|&t| (t - 1.0).abs() < 1e-12).unwrap();
    let m = lim.mask_at(i1);
    let origin = (0..g.len()).find(|&i| g.pos(i).norm() < 1e-12).unwrap();
    assert!(m.contains(origin), "extinction point missing from the limit");
    // And every member of the family is empty there.
    for tr in &tracks {
        assert!(tr.mask_at(i1).is_empty());
    }
}

#[test]
fn interface_track_fattening_is_reported_small() {
    // Unsigned evolution of a circle: the thickness of {u <= 2h} beyond the
    // nominal 4h band is the (reported, unresolved) fattening.
    let h = 1.0 / 48.0;
    let g = Grid::from_box(2, &[-1.3, -1.3], &[1.3, 1.3], h);
    let u0 = ScalarField::from_fn(g.clone(), 0.0, |p| (p.xy().norm() - 0.8f64).abs());
    let p = FlowParams::for_grid(&g, 0.05);
    let track = evolve(&u0, None, &p).unwrap();
    let mut worst_excess: f64 = 0.0;
    for s in &track.samples {
        let band = s.values.iter().filter(|v| v.abs() <= 2.0 * h).count() as f64 * h * h;
        let len = interface_measure(s).max(1e-9);
        let thickness = band / len;
        worst_excess = worst_excess.max(thickness - 4.0 * h);
    }
    assert!(
        worst_excess <= 2.0 * h,
        "fattening excess {} = {:.2} cells",
        worst_excess,
        worst_excess / h
    );
}

#[test]
fn boundary_of_region_track_matches_redistanced_run() {
    let h = 1.0 / 48.0;
    let g = Grid::from_box(2, &[-1.3, -1.3], &[1.3, 1.3], h);
    let u0 = ScalarField::from_fn(g.clone(), 0.0, |p| p.xy().norm() - 0.9);
    let p = FlowParams::for_grid(&g, 0.1);
    let a = evolve(&u0, None, &p).unwrap();
    let b = evolve(&setflow_core::engine::reinitialize(&u0), None, &p).unwrap();
    let cell = h * 2.0f64.sqrt();
    for i in 0..a.len() {
        let za = a.samples[i].zeroset_mask();
        let zb = b.samples[i].zeroset_mask();
        let d = hausdorff_distance(&za, &zb);
        assert!(d <= cell, "sample {i}: hausdorff {d} vs cell {cell}");
    }
}
