//! Executable theorem checks: pairs or families of flows and barriers are
//! evolved and the comparison conclusions asserted with discretization-aware
//! tolerances. Every check reports its worst signed slack (`margin`), the
//! tolerance it was judged against, and a witness of the worst case;
//! `passed` always means `margin >= -tolerance`.
//!
//! Tolerance policy: set-distance assertions carry an additive slack of 4h
//! for front placement, and strict-disjointness checks demand a margin of at
//! least h/2 (node quantization). The exponential-gap rate is always sourced
//! from the transport field's sampled symmetrized-Jacobian bound, never
//! supplied by hand, so hypothesis and check cannot drift apart.

use crate::ambient::{ricx_lower_bound, AmbientField};
use crate::barrier::{classify_strong, eval_barrier, shrinking_ball, ImplicitBarrier};
use crate::dist::{distance_transform, hausdorff_distance, set_distance, DistanceField};
use crate::engine::{compose_flows, evolve, FlowParams};
use crate::error::{Error, Result};
use crate::field::{ClosedSetMask, ScalarField, SpacetimeTrack};
use crate::grid::Grid;
use crate::Point;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremId {
    ShrinkingBall,
    FiniteSpeed,
    Compactness,
    KeyProposition,
    DistanceTheorem,
    LongTime,
    Avoidance,
    StrongBarrierEquiv,
    BoundaryFlow,
    Semigroup,
    Containment,
}

impl std::fmt::Display for TheoremId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for TheoremId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "ShrinkingBall" => TheoremId::ShrinkingBall,
            "FiniteSpeed" => TheoremId::FiniteSpeed,
            "Compactness" => TheoremId::Compactness,
            "KeyProposition" => TheoremId::KeyProposition,
            "DistanceTheorem" => TheoremId::DistanceTheorem,
            "LongTime" => TheoremId::LongTime,
            "Avoidance" => TheoremId::Avoidance,
            "StrongBarrierEquiv" => TheoremId::StrongBarrierEquiv,
            "BoundaryFlow" => TheoremId::BoundaryFlow,
            "Semigroup" => TheoremId::Semigroup,
            "Containment" => TheoremId::Containment,
            other => return Err(format!("unknown theorem id: {other}")),
        })
    }
}

#[derive(Debug, Clone)]
pub struct TheoremCheckReport {
    pub theorem_id: TheoremId,
    pub passed: bool,
    /// Worst signed slack over all samples; nonnegative is clean.
    pub margin: f64,
    /// Time and location of the worst case.
    pub witness: Option<(f64, Point)>,
    pub tolerance: f64,
    pub detail: String,
}

impl TheoremCheckReport {
    fn conclude(
        theorem_id: TheoremId,
        margin: f64,
        tolerance: f64,
        witness: Option<(f64, Point)>,
        detail: impl Into<String>,
    ) -> Self {
        TheoremCheckReport {
            theorem_id,
            passed: margin >= -tolerance,
            margin,
            witness,
            tolerance,
            detail: detail.into(),
        }
    }
}

/// Distance fields of every sample of a track, computed once and shared by
/// the probe-based checks.
pub struct TrackDistances {
    pub times: Vec<f64>,
    pub fields: Vec<DistanceField>,
}

impl TrackDistances {
    pub fn new(track: &SpacetimeTrack) -> Self {
        let times = track.times();
        let fields = (0..track.len())
            .map(|i| distance_transform(&track.mask_at(i)))
            .collect();
        TrackDistances { times, fields }
    }

    pub fn dist_to_point(&self, sample: usize, p: &Point) -> f64 {
        self.fields[sample].at(p)
    }
}

fn min_mask_distance(a: &ClosedSetMask, db: &DistanceField) -> (f64, Option<Point>) {
    if a.is_empty() || db.set_empty {
        return (a.grid.sentinel(), None);
    }
    let mut best = f64::INFINITY;
    let mut at = None;
    for idx in a.nodes() {
        let d = db.value(idx);
        if d < best {
            best = d;
            at = Some(a.grid.pos(idx));
        }
    }
    (best, at)
}

fn require_aligned(a: &SpacetimeTrack, b: &SpacetimeTrack) {
    assert_eq!(a.len(), b.len(), "tracks have different sample counts");
    for (x, y) in a.times().iter().zip(b.times()) {
        assert!((x - y).abs() < 1e-9, "tracks have different sample times");
    }
}

/// Initially disjoint flows stay disjoint (one of them compact). Evolves
/// both sets and requires strictly positive gap at every sample.
pub fn check_avoidance(
    y0: &ScalarField,
    z0: &ScalarField,
    transport: Option<&AmbientField>,
    params: &FlowParams,
) -> Result<TheoremCheckReport> {
    let h = y0.grid.spacing;
    let (ty, tz) = evolve_pair(y0, z0, transport, params)?;
    let d0 = set_distance(&ty.mask_at(0), &tz.mask_at(0));
    if d0 <= 4.0 * h {
        return Err(Error::SetsTooClose { dist: d0, required: 4.0 * h });
    }
    let (margin, witness) = pair_min_distance(&ty, &tz);
    Ok(TheoremCheckReport::conclude(
        TheoremId::Avoidance,
        margin,
        -h / 2.0,
        witness,
        format!("initial gap {d0:.4}"),
    ))
}

/// Exponential lower bound on the gap: `dist(Y(t), Z(t)) >=
/// e^(lambda t) (d0 - 4h) - 4h`, with `lambda` from the transport field's
/// symmetrized Jacobian over the run box.
pub fn check_exponential_distance(
    y0: &ScalarField,
    z0: &ScalarField,
    transport: Option<&AmbientField>,
    params: &FlowParams,
) -> Result<TheoremCheckReport> {
    let grid = &y0.grid;
    let h = grid.spacing;
    let lambda = transport.map_or(0.0, |f| ricx_lower_bound(f, grid));
    let (ty, tz) = evolve_pair(y0, z0, transport, params)?;
    let d0 = set_distance(&ty.mask_at(0), &tz.mask_at(0));
    if d0 <= 4.0 * h {
        return Err(Error::SetsTooClose { dist: d0, required: 4.0 * h });
    }
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for i in 0..ty.len() {
        let t = ty.samples[i].time - ty.start_time;
        let my = ty.mask_at(i);
        let mz = tz.mask_at(i);
        if my.is_empty() || mz.is_empty() {
            break; // gap is infinite from extinction on
        }
        let dz = distance_transform(&mz);
        let (d, at) = min_mask_distance(&my, &dz);
        let bound = (lambda * t).exp() * (d0 - 4.0 * h) - 4.0 * h;
        let slack = d - bound;
        if slack < margin {
            margin = slack;
            witness = at.map(|p| (ty.samples[i].time, p));
        }
    }
    Ok(TheoremCheckReport::conclude(
        TheoremId::LongTime,
        margin,
        0.0,
        witness,
        format!("lambda = {lambda:.4}, initial gap {d0:.4}"),
    ))
}

/// A strong barrier seeded disjoint from the track stays disjoint over its
/// whole interval.
pub fn check_strong_barrier_avoidance(
    track: &SpacetimeTrack,
    b: &ImplicitBarrier,
    transport: Option<&AmbientField>,
) -> Result<TheoremCheckReport> {
    check_masks_avoid_barrier(track.grid(), &track.masks(), b, transport)
}

/// Mask-list form of the strong-barrier avoidance check, shared with the
/// polygonal-curve rasterization path.
pub fn check_masks_avoid_barrier(
    grid: &Grid,
    masks: &[(f64, ClosedSetMask)],
    b: &ImplicitBarrier,
    transport: Option<&AmbientField>,
) -> Result<TheoremCheckReport> {
    let cls = classify_strong(b, transport, 128)?;
    if !cls.strong {
        return Err(Error::BarrierNotStrong {
            worst_phi: cls.worst_phi,
            point: cls.worst_point,
            time: cls.worst_time,
        });
    }
    let h = grid.spacing;
    let mut margin = f64::INFINITY;
    let mut witness = None;
    let mut overlapping = 0usize;
    for (t, z) in masks {
        if !b.contains_time(*t) {
            continue;
        }
        overlapping += 1;
        if z.is_empty() {
            continue;
        }
        let k = b.mask_on(grid, *t);
        if k.is_empty() {
            continue;
        }
        let dk = distance_transform(&k);
        let (d, at) = min_mask_distance(z, &dk);
        if d < margin {
            margin = d;
            witness = at.map(|p| (*t, p));
        }
    }
    if overlapping == 0 || !margin.is_finite() {
        return Ok(TheoremCheckReport::conclude(
            TheoremId::StrongBarrierEquiv,
            grid.sentinel(),
            -h / 2.0,
            None,
            "no overlapping samples (barrier after extinction)",
        ));
    }
    Ok(TheoremCheckReport::conclude(
        TheoremId::StrongBarrierEquiv,
        margin,
        -h / 2.0,
        witness,
        format!("{overlapping} overlapping samples, worst phi {:.3e}", cls.worst_phi),
    ))
}

/// Equality-tolerant companion for non-strong barriers: if the track touches
/// `K(t)` at all, the first contact must happen on the boundary of `K` and
/// carry `Phi >= -phi_tol` there.
pub fn check_first_contact(
    track: &SpacetimeTrack,
    b: &ImplicitBarrier,
    transport: Option<&AmbientField>,
    phi_tol: f64,
) -> Result<TheoremCheckReport> {
    let grid = track.grid();
    let h = grid.spacing;
    for i in 0..track.len() {
        let t = track.samples[i].time;
        if !b.contains_time(t) {
            continue;
        }
        let z = track.mask_at(i);
        if z.is_empty() {
            continue;
        }
        let contact: Vec<usize> = z.nodes().filter(|&n| b.value(&grid.pos(n), t) <= 0.0).collect();
        if contact.is_empty() {
            continue;
        }
        // First contact found: every contact node must lie near the barrier
        // boundary, not its interior.
        let mut worst_depth = 0.0f64;
        let mut worst_phi = f64::INFINITY;
        let mut at = grid.pos(contact[0]);
        for &n in &contact {
            let p = grid.pos(n);
            let depth = -b.value(&p, t);
            if depth > worst_depth {
                worst_depth = depth;
                at = p;
            }
            let rep = eval_barrier(b, &p, t, transport)?;
            let phi = if transport.is_some() { rep.phi_x } else { rep.phi };
            worst_phi = worst_phi.min(phi);
        }
        let boundary_ok = worst_depth <= 2.0 * h;
        let margin = if boundary_ok { worst_phi + phi_tol } else { -worst_depth };
        return Ok(TheoremCheckReport::conclude(
            TheoremId::StrongBarrierEquiv,
            margin,
            0.0,
            Some((t, at)),
            format!(
                "first contact at t = {t:.4}: depth {worst_depth:.3e}, phi {worst_phi:.3e}"
            ),
        ));
    }
    Ok(TheoremCheckReport::conclude(
        TheoremId::StrongBarrierEquiv,
        grid.sentinel(),
        0.0,
        None,
        "no contact",
    ))
}

/// Boundary of the biggest flow of a region is itself a weak flow: the
/// boundary track must avoid a panel of strong barriers seeded disjoint.
pub fn check_boundary_flow(
    region0: &ScalarField,
    transport: Option<&AmbientField>,
    params: &FlowParams,
    panel: &[ImplicitBarrier],
) -> Result<TheoremCheckReport> {
    let grid = &region0.grid;
    let h = grid.spacing;
    let region_track = evolve(region0, transport, params)?;
    let boundary: Vec<(f64, ClosedSetMask)> = (0..region_track.len())
        .map(|i| {
            (
                region_track.samples[i].time,
                region_track.samples[i].zeroset_mask(),
            )
        })
        .collect();
    let mut margin = f64::INFINITY;
    let mut witness = None;
    let mut used = 0usize;
    for b in panel {
        let cls = classify_strong(b, transport, 128)?;
        if !cls.strong {
            return Err(Error::BarrierNotStrong {
                worst_phi: cls.worst_phi,
                point: cls.worst_point,
                time: cls.worst_time,
            });
        }
        used += 1;
        for (t, z) in &boundary {
            if !b.contains_time(*t) || z.is_empty() {
                continue;
            }
            let k = b.mask_on(grid, *t);
            if k.is_empty() {
                continue;
            }
            let dk = distance_transform(&k);
            let (d, at) = min_mask_distance(z, &dk);
            if d < margin {
                margin = d;
                witness = at.map(|p| (*t, p));
            }
        }
    }
    if !margin.is_finite() {
        margin = grid.sentinel();
    }
    Ok(TheoremCheckReport::conclude(
        TheoremId::BoundaryFlow,
        margin,
        -h / 2.0,
        witness,
        format!("{used} strong barriers"),
    ))
}

/// Deterministic panel of strong shrinking balls seeded disjoint from the
/// track of masks: anchors on a fixed lattice, radii fitted to the initial
/// clearance, lifetimes limited by the radius law.
pub fn strong_ball_panel(
    initial: &ClosedSetMask,
    horizon: f64,
    min_count: usize,
) -> Vec<ImplicitBarrier> {
    let grid = &initial.grid;
    let h = grid.spacing;
    let m = grid.dim - 1;
    let c = 2.0 * m as f64 + 1.0;
    let d0 = distance_transform(initial);
    let ext = grid.extent();
    let margin = 10.0 * h;
    let mut anchors = Vec::new();
    // 5x5 (x5) interior lattice of candidate centers.
    let steps = [0.15, 0.3, 0.5, 0.7, 0.85];
    for &fx in &steps {
        for &fy in &steps {
            if grid.dim == 2 {
                anchors.push(grid.origin + Point::new(fx * ext.x, fy * ext.y, 0.0));
            } else {
                for &fz in &steps {
                    anchors.push(grid.origin + Point::new(fx * ext.x, fy * ext.y, fz * ext.z));
                }
            }
        }
    }
    let mut panel = Vec::new();
    for a in anchors {
        let clearance = d0.at(&a);
        let to_face = {
            let mut v = (a.x - grid.origin.x).min(grid.origin.x + ext.x - a.x);
            v = v.min((a.y - grid.origin.y).min(grid.origin.y + ext.y - a.y));
            if grid.dim == 3 {
                v = v.min((a.z - grid.origin.z).min(grid.origin.z + ext.z - a.z));
            }
            v
        };
        let delta = (clearance - 6.0 * h).min(to_face - margin);
        if delta < 4.0 * h {
            continue;
        }
        let life = (0.8 * delta * delta / c).min(horizon);
        if life <= 0.0 {
            continue;
        }
        panel.push(shrinking_ball(grid.dim, a, delta, c, (0.0, life)));
        if panel.len() >= min_count.max(6) {
            break;
        }
    }
    panel
}

/// Level sets of one solve are pairwise disjoint tracks, and the zero level
/// agrees with the directly computed flow of the interface within one cell.
pub fn check_containment_levels(
    c_signed: &ScalarField,
    levels: &[f64],
    transport: Option<&AmbientField>,
    params: &FlowParams,
) -> Result<TheoremCheckReport> {
    let grid = &c_signed.grid;
    let h = grid.spacing;
    for &a in levels {
        if a.abs() > params.band_width / 2.0 {
            return Err(Error::LevelOutOfBand { level: a, band_half: params.band_width / 2.0 });
        }
    }
    let track = evolve(c_signed, transport, params)?;

    // (i) pairwise disjoint level tracks, skipping pairs the grid cannot
    // tell apart.
    let mut margin = f64::INFINITY;
    let mut witness = None;
    let mut unresolved = Vec::new();
    for (pi, &a) in levels.iter().enumerate() {
        for &b in levels.iter().skip(pi + 1) {
            if (a - b).abs() < 2.5 * h {
                unresolved.push((a, b));
                continue;
            }
            for s in 0..track.len() {
                let f = &track.samples[s];
                let ma = f.levelset_mask(a);
                let mb = f.levelset_mask(b);
                if ma.is_empty() || mb.is_empty() {
                    continue;
                }
                let db = distance_transform(&mb);
                let (d, at) = min_mask_distance(&ma, &db);
                let slack = d - h / 2.0;
                if slack < margin {
                    margin = slack;
                    witness = at.map(|p| (f.time, p));
                }
            }
        }
    }

    // (ii) zero level vs. a direct flow of the interface computed on an
    // independently discretized field (re-distanced initialization).
    let mut zero_detail = String::from("zero level not requested");
    if levels.iter().any(|&a| a == 0.0) {
        let redistanced = crate::engine::reinitialize(c_signed);
        let direct = evolve(&redistanced, transport, params)?;
        require_aligned(&track, &direct);
        let cell = h * (grid.dim as f64).sqrt();
        let mut worst = 0.0f64;
        let mut worst_t = track.start_time;
        for s in 0..track.len() {
            let za = track.samples[s].zeroset_mask();
            let zb = direct.samples[s].zeroset_mask();
            if za.is_empty() && zb.is_empty() {
                continue;
            }
            let d = hausdorff_distance(&za, &zb);
            if d > worst {
                worst = d;
                worst_t = track.samples[s].time;
            }
        }
        let slack = cell - worst;
        if slack < margin {
            margin = slack;
            witness = Some((worst_t, Point::zeros()));
        }
        zero_detail = format!("zero-level hausdorff {worst:.4} vs cell {cell:.4}");
    }

    if !margin.is_finite() {
        margin = grid.sentinel();
    }
    let detail = if unresolved.is_empty() {
        zero_detail
    } else {
        format!("{zero_detail}; unresolved pairs: {unresolved:?}")
    };
    Ok(TheoremCheckReport::conclude(TheoremId::Containment, margin, 0.0, witness, detail))
}

/// For any weak set flow and probe point, `min(eps, dist(Z(t), p))^2 + c t`
/// is nondecreasing (up to the stated slack).
pub fn check_shrinking_ball_monotonicity(
    dists: &TrackDistances,
    grid: &Grid,
    probes: &[Point],
    eps_cap: f64,
    slack: f64,
) -> TheoremCheckReport {
    let m = grid.dim - 1;
    let c = 2.0 * m as f64 + 0.5;
    let mut worst_dip = 0.0f64;
    let mut witness = None;
    for p in probes {
        let mut running_max = f64::NEG_INFINITY;
        for (s, t) in dists.times.iter().enumerate() {
            let d = dists.dist_to_point(s, p).min(eps_cap);
            let q = d * d + c * t;
            let dip = running_max - q;
            if dip > worst_dip {
                worst_dip = dip;
                witness = Some((*t, *p));
            }
            running_max = running_max.max(q);
        }
    }
    TheoremCheckReport::conclude(
        TheoremId::ShrinkingBall,
        slack - worst_dip,
        0.0,
        witness,
        format!("c = {c}, eps = {eps_cap}, {} probes", probes.len()),
    )
}

/// Backward distance bound at points of the track: if `p` is in `Z(T)` then
/// `min(eps, dist(Z(t), p))^2 <= c (T - t) + slack` for `t < T`.
pub fn check_backward_bound(
    dists: &TrackDistances,
    grid: &Grid,
    track: &SpacetimeTrack,
    slack: f64,
) -> TheoremCheckReport {
    let m = grid.dim - 1;
    let c = 2.0 * m as f64 + 0.5;
    let eps_cap = 8.0 * grid.spacing;
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    // Probe a few on-track points at a few reference times.
    let picks = [track.len() / 3, 2 * track.len() / 3, track.len() - 1];
    for &sref in &picks {
        let mask = track.mask_at(sref);
        let nodes: Vec<usize> = mask.nodes().collect();
        if nodes.is_empty() {
            continue;
        }
        let t_ref = dists.times[sref];
        for &n in nodes.iter().step_by((nodes.len() / 5).max(1)) {
            let p = grid.pos(n);
            for s in 0..sref {
                let t = dists.times[s];
                let d = dists.dist_to_point(s, &p).min(eps_cap);
                let excess = d * d - c * (t_ref - t) - slack;
                if excess > worst {
                    worst = excess;
                    witness = Some((t, p));
                }
            }
        }
    }
    if !worst.is_finite() {
        worst = -grid.sentinel();
    }
    TheoremCheckReport::conclude(TheoremId::ShrinkingBall, -worst, 0.0, witness, "backward bound")
}

/// Finite propagation speed: with `R = dist(Z(0), p)`, for every `r < R` the
/// bound `dist(Z(t), p) >= R - (2m/r + chi) t - slack` holds while
/// `t <= (R - r)/(2m/r + chi)`.
pub fn check_finite_speed(
    dists: &TrackDistances,
    grid: &Grid,
    probe: &Point,
    chi: f64,
    slack: f64,
) -> TheoremCheckReport {
    let m = (grid.dim - 1) as f64;
    let big_r = dists.dist_to_point(0, probe);
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for frac in [0.25, 0.5, 0.75] {
        let r = frac * big_r;
        let speed = 2.0 * m / r + chi;
        let window = (big_r - r) / speed;
        for (s, t) in dists.times.iter().enumerate() {
            let tau = t - dists.times[0];
            if tau > window {
                break;
            }
            let d = dists.dist_to_point(s, probe);
            let bound = big_r - speed * tau - slack;
            let sl = d - bound;
            if sl < margin {
                margin = sl;
                witness = Some((*t, *probe));
            }
        }
    }
    TheoremCheckReport::conclude(
        TheoremId::FiniteSpeed,
        margin,
        0.0,
        witness,
        format!("R = {big_r:.4}, chi = {chi:.3}"),
    )
}

/// The empty set stays empty under every transport field supplied.
pub fn check_compactness(
    grid: &Grid,
    fields: &[Option<AmbientField>],
    params: &FlowParams,
) -> Result<TheoremCheckReport> {
    let u0 = ScalarField::constant(grid.clone(), 0.0, grid.sentinel());
    let mut margin = 1.0;
    let mut witness = None;
    for f in fields {
        let track = evolve(&u0, f.as_ref(), params)?;
        for (t, m) in track.masks() {
            if !m.is_empty() {
                margin = -1.0;
                witness = Some((t, grid.pos(m.nodes().next().unwrap())));
            }
        }
    }
    Ok(TheoremCheckReport::conclude(
        TheoremId::Compactness,
        margin,
        0.0,
        witness,
        format!("{} fields", fields.len()),
    ))
}

/// Exponential bound against a subsolution barrier: `dist(Z(t), K(t)) >=
/// e^(lambda t) (d0 - 4h) - 4h`. The barrier must satisfy `Phi <= 0` on its
/// boundary (checked by sampling).
pub fn check_key_proposition(
    track: &SpacetimeTrack,
    b: &ImplicitBarrier,
    transport: Option<&AmbientField>,
) -> Result<TheoremCheckReport> {
    let cls = classify_strong(b, transport, 128)?;
    if cls.worst_phi > 1e-6 {
        return Err(Error::BarrierNotStrong {
            worst_phi: cls.worst_phi,
            point: cls.worst_point,
            time: cls.worst_time,
        });
    }
    let grid = track.grid();
    let h = grid.spacing;
    let lambda = transport.map_or(0.0, |f| ricx_lower_bound(f, grid));
    let t0 = b.time_interval.0;
    let k0 = b.mask_on(grid, t0);
    let s0 = track
        .times()
        .iter()
        .position(|&t| (t - t0).abs() < track.time_step.max(1e-12))
        .unwrap_or(0);
    let d0 = set_distance(&track.mask_at(s0), &k0);
    if d0 <= 4.0 * h {
        return Err(Error::SetsTooClose { dist: d0, required: 4.0 * h });
    }
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for i in 0..track.len() {
        let t = track.samples[i].time;
        if !b.contains_time(t) {
            continue;
        }
        let z = track.mask_at(i);
        if z.is_empty() {
            continue;
        }
        let k = b.mask_on(grid, t);
        if k.is_empty() {
            continue;
        }
        let dk = distance_transform(&k);
        let (d, at) = min_mask_distance(&z, &dk);
        let bound = (lambda * (t - t0)).exp() * (d0 - 4.0 * h) - 4.0 * h;
        let slack = d - bound;
        if slack < margin {
            margin = slack;
            witness = at.map(|p| (t, p));
        }
    }
    if !margin.is_finite() {
        margin = grid.sentinel();
    }
    Ok(TheoremCheckReport::conclude(
        TheoremId::KeyProposition,
        margin,
        0.0,
        witness,
        format!("lambda = {lambda:.4}, d0 = {d0:.4}"),
    ))
}

/// Semigroup property: one run to `s + t` agrees with the composition of a
/// run to `s` and a restarted run to `t` within 3h Hausdorff distance.
pub fn check_semigroup(
    c: &ClosedSetMask,
    s: f64,
    t: f64,
    transport: Option<&AmbientField>,
    params: &FlowParams,
) -> Result<TheoremCheckReport> {
    let h = c.grid.spacing;
    let (a, b) = compose_flows(c, s, t, transport, params)?;
    let d = hausdorff_distance(&a, &b);
    Ok(TheoremCheckReport::conclude(
        TheoremId::Semigroup,
        3.0 * h - d,
        0.0,
        None,
        format!("hausdorff {d:.4} at s = {s}, t = {t}"),
    ))
}

/// Half-gap bounds through a separating midsurface: with `eta` the initial
/// gap between Y and Z and M equidistant between them, both
/// `dist(Y(t), M(t))` and `dist(Z(t), M(t))` stay above
/// `(1/2) e^(lambda t) (eta - 4h) - 4h`.
///
/// `m_signed` is a signed distance whose zero set is M (the separator
/// bounds the two sides it separates, so such a field always exists); its
/// zero-set track is the evolving midsurface.
pub fn check_midsurface_halfgap(
    y0: &ScalarField,
    z0: &ScalarField,
    m_signed: &ScalarField,
    transport: Option<&AmbientField>,
    params: &FlowParams,
) -> Result<TheoremCheckReport> {
    let grid = &y0.grid;
    let h = grid.spacing;
    let lambda = transport.map_or(0.0, |f| ricx_lower_bound(f, grid));
    let ty = evolve(y0, transport, params)?;
    let tz = evolve(z0, transport, params)?;
    let tm = evolve(m_signed, transport, params)?;
    require_aligned(&ty, &tm);
    require_aligned(&tz, &tm);
    let eta = set_distance(&ty.mask_at(0), &tz.mask_at(0));
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for i in 0..ty.len() {
        let t = ty.samples[i].time - ty.start_time;
        let mm = tm.samples[i].zeroset_mask();
        if mm.is_empty() {
            break;
        }
        let dm = distance_transform(&mm);
        let bound = 0.5 * (lambda * t).exp() * (eta - 4.0 * h) - 4.0 * h;
        for side in [&ty, &tz] {
            let ms = side.mask_at(i);
            if ms.is_empty() {
                continue;
            }
            let (d, at) = min_mask_distance(&ms, &dm);
            let slack = d - bound;
            if slack < margin {
                margin = slack;
                witness = at.map(|p| (ty.samples[i].time, p));
            }
        }
    }
    if !margin.is_finite() {
        margin = grid.sentinel();
    }
    Ok(TheoremCheckReport::conclude(
        TheoremId::DistanceTheorem,
        margin,
        0.0,
        witness,
        format!("eta = {eta:.4}, lambda = {lambda:.4}"),
    ))
}

fn evolve_pair(
    y0: &ScalarField,
    z0: &ScalarField,
    transport: Option<&AmbientField>,
    params: &FlowParams,
) -> Result<(SpacetimeTrack, SpacetimeTrack)> {
    assert!(y0.grid.same_shape(&z0.grid), "pair on different grids");
    let ty = evolve(y0, transport, params)?;
    let tz = evolve(z0, transport, params)?;
    require_aligned(&ty, &tz);
    Ok((ty, tz))
}

fn pair_min_distance(ty: &SpacetimeTrack, tz: &SpacetimeTrack) -> (f64, Option<(f64, Point)>) {
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for i in 0..ty.len() {
        let my = ty.mask_at(i);
        let mz = tz.mask_at(i);
        if my.is_empty() || mz.is_empty() {
            continue;
        }
        let dz = distance_transform(&mz);
        let (d, at) = min_mask_distance(&my, &dz);
        if d < margin {
            margin = d;
            witness = at.map(|p| (ty.samples[i].time, p));
        }
    }
    if !margin.is_finite() {
        margin = ty.grid().sentinel();
    }
    (margin, witness)
}

/// Spec'd guard: identical initial sets are a vacuous avoidance question.
pub fn require_distinct_initial(y0: &ClosedSetMask, z0: &ClosedSetMask) -> Result<()> {
    if y0.inside == z0.inside {
        return Err(Error::InvalidArgument(
            "avoidance check needs distinct initial sets".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::MaskRepr;

    fn disk_field(grid: &Grid, cx: f64, cy: f64, r: f64) -> ScalarField {
        ScalarField::from_fn(grid.clone(), 0.0, move |p| {
            (p.xy() - nalgebra::Vector2::new(cx, cy)).norm() - r
        })
    }

    #[test]
    fn two_disjoint_circles_avoid() {
        let h = 1.0 / 48.0;
        let g = Grid::from_box(2, &[-2.0, -1.0], &[2.0, 1.0], h);
        let y0 = disk_field(&g, -0.8, 0.0, 0.4);
        let z0 = disk_field(&g, 0.8, 0.0, 0.4);
        let p = FlowParams::for_grid(&g, 0.07);
        let rep = check_avoidance(&y0, &z0, None, &p).unwrap();
        assert!(rep.passed, "margin {}", rep.margin);
        // With lambda = 0 the gap is nondecreasing within slack.
        let rep = check_exponential_distance(&y0, &z0, None, &p).unwrap();
        assert!(rep.passed, "margin {}", rep.margin);
    }

    #[test]
    fn overlapping_initial_sets_are_rejected() {
        let h = 1.0 / 32.0;
        let g = Grid::from_box(2, &[-1.0, -1.0], &[1.0, 1.0], h);
        let y0 = disk_field(&g, 0.0, 0.0, 0.4);
        let p = FlowParams::for_grid(&g, 0.05);
        assert!(matches!(
            check_avoidance(&y0, &y0.clone(), None, &p),
            Err(Error::SetsTooClose { .. })
        ));
        let m = y0.sublevel_mask();
        assert!(require_distinct_initial(&m, &m.clone()).is_err());
    }

    #[test]
    fn concentric_circles_gap_grows() {
        let h = 1.0 / 48.0;
        let g = Grid::from_box(2, &[-1.6, -1.6], &[1.6, 1.6], h);
        let y0 = disk_field(&g, 0.0, 0.0, 0.5);
        // Outer circle as the boundary of the complement region.
        let z0 = ScalarField::from_fn(g.clone(), 0.0, |p| 1.0 - p.xy().norm());
        let p = FlowParams::for_grid(&g, 0.1);
        let rep = check_avoidance(&y0, &z0, None, &p).unwrap();
        assert!(rep.passed);
        let rep = check_exponential_distance(&y0, &z0, None, &p).unwrap();
        assert!(rep.passed, "margin {}", rep.margin);
    }

    #[test]
    fn strong_barrier_avoidance_and_rejection() {
        let h = 1.0 / 48.0;
        let g = Grid::from_box(2, &[-1.3, -1.3], &[1.3, 1.3], h);
        let u0 = disk_field(&g, 0.0, 0.0, 1.0);
        let p = FlowParams::for_grid(&g, 0.1);
        let mut track = evolve(&u0, None, &p).unwrap();
        track.repr = MaskRepr::ZeroSet;
        // Strong ball inside the shrinking circle, initial gap 0.5.
        let b = shrinking_ball(2, Point::zeros(), 0.5, 3.0, (0.0, 0.05));
        let rep = check_strong_barrier_avoidance(&track, &b, None).unwrap();
        assert!(rep.passed, "margin {}", rep.margin);

        // Non-strong barrier is refused.
        let exact = shrinking_ball(2, Point::zeros(), 0.5, 2.0, (0.0, 0.05));
        assert!(matches!(
            check_strong_barrier_avoidance(&track, &exact, None),
            Err(Error::BarrierNotStrong { .. })
        ));
    }

    #[test]
    fn barrier_after_extinction_is_trivially_disjoint() {
        let h = 1.0 / 32.0;
        let g = Grid::from_box(2, &[-0.8, -0.8], &[0.8, 0.8], h);
        let u0 = disk_field(&g, 0.0, 0.0, 0.3);
        let p = FlowParams::for_grid(&g, 0.15);
        let track = evolve(&u0, None, &p).unwrap();
        assert!(track.extinction.is_some());
        let b = shrinking_ball(2, Point::zeros(), 0.7, 3.0, (0.12, 0.14));
        let rep = check_strong_barrier_avoidance(&track, &b, None).unwrap();
        assert!(rep.passed);
        assert!(rep.detail.contains("after extinction") || rep.margin > 0.0);
    }

    #[test]
    fn first_contact_mode_sees_boundary_touch() {
        let h = 1.0 / 48.0;
        let g = Grid::from_box(2, &[-1.3, -1.3], &[1.3, 1.3], h);
        // Track: shrinking circle. Barrier: the exact same circle as a
        // complement barrier (exterior region), touching from outside at all
        // times. Contact from the first overlapping sample, on the boundary,
        // with Phi ~ 0.
        let u0 = disk_field(&g, 0.0, 0.0, 1.0);
        let p = FlowParams::for_grid(&g, 0.05);
        let track = evolve(&u0, None, &p).unwrap();
        let b = crate::barrier::ball_complement(2, Point::zeros(), 0.97f64.sqrt(), 2.0, (0.0, 0.04));
        let rep = check_first_contact(&track, &b, None, 0.15).unwrap();
        assert!(rep.passed, "margin {} detail {}", rep.margin, rep.detail);
        assert!(rep.detail.contains("first contact"));
    }

    #[test]
    fn compactness_check_on_builtin_fields() {
        let g = Grid::from_box(2, &[-1.0, -1.0], &[1.0, 1.0], 1.0 / 16.0);
        let p = FlowParams::for_grid(&g, 0.05);
        let fields = vec![
            None,
            Some(AmbientField::radial(0.5).bounded_on(&g)),
            Some(AmbientField::rotation(1.0).bounded_on(&g)),
            Some(AmbientField::shear(0.7).bounded_on(&g)),
            Some(AmbientField::constant(Point::new(0.3, 0.1, 0.0)).bounded_on(&g)),
        ];
        let rep = check_compactness(&g, &fields, &p).unwrap();
        assert!(rep.passed);
    }

    #[test]
    fn panel_produces_enough_barriers() {
        let h = 1.0 / 48.0;
        let g = Grid::from_box(2, &[-1.6, -1.6], &[1.6, 1.6], h);
        let mask = ClosedSetMask::from_predicate(g.clone(), MaskRepr::ZeroSet, |p| {
            (p.xy().norm() - 1.0).abs() <= h
        });
        let panel = strong_ball_panel(&mask, 0.1, 6);
        assert!(panel.len() >= 6, "only {} barriers", panel.len());
        for b in &panel {
            let cls = classify_strong(b, None, 128).unwrap();
            assert!(cls.strong);
        }
    }
}
