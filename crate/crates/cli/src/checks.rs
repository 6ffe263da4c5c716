//! Executes one configured check against the resolved scenario, producing
//! one or more report records. Core preconditions (overlapping sets, non-
//! strong barriers, non-mean-convex inputs) surface as runtime errors and
//! map to their own exit code in the binary.

use crate::config::{BarrierConfig, CheckConfig, CurveConfig};
use crate::oracle;
use crate::resolve::{Resolved, ResolveError};
use crate::RunError;
use nalgebra::Vector2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use setflow_core::barrier::{
    ball_complement, classify_strong, eval_barrier, half_space, perturb_barrier, shrinking_ball,
    ImplicitBarrier,
};
use setflow_core::brakke::{
    brakke_rhs, brakke_sides, check_brakke_inequality, check_support_is_weak_flow, curve_step,
    flow_curve, PolygonalCurve, RhsForm, TestFunction,
};
use setflow_core::dist::set_distance;
use setflow_core::engine::{arrival_time, check_mean_convex, evolve, extinction_time, Extinction};
use setflow_core::harness::{
    check_avoidance, check_backward_bound, check_boundary_flow, check_compactness,
    check_containment_levels, check_finite_speed, check_first_contact, check_key_proposition,
    check_midsurface_halfgap, check_semigroup, check_shrinking_ball_monotonicity,
    check_strong_barrier_avoidance, require_distinct_initial, strong_ball_panel, TrackDistances,
};
use setflow_core::io::CheckRecord;
use setflow_core::separator::{build_separator, normal_continuity_report};
use setflow_core::{AmbientField, Point};

fn point_of(v: &[f64]) -> Point {
    Point::new(
        v.first().copied().unwrap_or(0.0),
        v.get(1).copied().unwrap_or(0.0),
        v.get(2).copied().unwrap_or(0.0),
    )
}

/// Evolves a configured set. Boundary sets bound a region here, so the
/// robust track is the zero set of the evolved signed field (the boundary
/// of the region flow); raw unsigned evolution is reserved for sets that
/// bound nothing.
fn evolve_set(
    s: &crate::resolve::ResolvedSet,
    field: Option<&AmbientField>,
    params: &setflow_core::FlowParams,
) -> Result<setflow_core::SpacetimeTrack, setflow_core::Error> {
    let mut track = evolve(&s.sdf, field, params)?;
    if s.config.as_boundary {
        track.repr = setflow_core::MaskRepr::ZeroSet;
    }
    Ok(track)
}

pub fn barrier_from(bc: &BarrierConfig, dim: usize) -> Result<ImplicitBarrier, ResolveError> {
    let interval = (bc.t0_time, bc.t1_time);
    Ok(match bc.shape.as_str() {
        "ball" => shrinking_ball(dim, point_of(&bc.center_len), bc.delta_len, bc.rate, interval),
        "ball_complement" => {
            ball_complement(dim, point_of(&bc.center_len), bc.delta_len, bc.rate, interval)
        }
        "half_space" => half_space(
            dim,
            point_of(&bc.normal),
            bc.offset_len,
            bc.drift_per_time,
            interval,
            2.0,
        ),
        other => return Err(ResolveError(format!("unknown barrier shape: {other}"))),
    })
}

fn curve_from(cc: &CurveConfig, vertices: usize) -> Result<PolygonalCurve, ResolveError> {
    let c = Vector2::new(
        cc.center_len.first().copied().unwrap_or(0.0),
        cc.center_len.get(1).copied().unwrap_or(0.0),
    );
    Ok(match cc.shape.as_str() {
        "circle" => PolygonalCurve::circle(c, cc.radius_len, vertices, 0.0),
        "ellipse" => PolygonalCurve::ellipse(c, cc.a_len, cc.b_len, vertices, 0.0),
        other => return Err(ResolveError(format!("unknown curve shape: {other}"))),
    })
}

/// The five bundled nonnegative test functions, scaled to a curve's extent.
fn phi_suite(center: Vector2<f64>, scale: f64) -> Vec<TestFunction> {
    vec![
        TestFunction::plateau(center, 1.4 * scale, 1.9 * scale),
        TestFunction::bump(center + Vector2::new(0.7 * scale, 0.0), scale, 1.0, Vector2::zeros()),
        TestFunction::bump(center - Vector2::new(0.0, 0.5 * scale), 1.2 * scale, 0.6, Vector2::zeros()),
        TestFunction::bump(center, 1.5 * scale, 0.8, Vector2::new(0.1, -0.05)),
        TestFunction::bump(center + Vector2::new(0.2 * scale, 0.3 * scale), 0.8 * scale, 1.3, Vector2::zeros()),
    ]
}

pub fn run_check(
    check: &CheckConfig,
    r: &Resolved,
    seed: u64,
) -> Result<Vec<CheckRecord>, RunError> {
    let scenario = r.name.as_str();
    let h = r.grid.spacing;
    let field = r.field.as_ref();
    match check {
        CheckConfig::CircleExtinction { set, expected_time, tol_time } => {
            let s = r.set(set)?;
            let track = evolve_set(s, field, r.params()?)?;
            let (margin, detail) = match extinction_time(&track) {
                Extinction::At(t) => (
                    tol_time - (t - expected_time).abs(),
                    format!("extinction at {t:.6}, expected {expected_time} +- {tol_time}"),
                ),
                Extinction::Survived => (-r.grid.sentinel(), "survived the horizon".to_string()),
            };
            Ok(vec![CheckRecord::new(
                scenario,
                "CircleExtinction",
                margin >= 0.0,
                margin,
                0.0,
            )
            .with_detail(detail)])
        }

        CheckConfig::ShrinkingBall { sets, probes } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let params = r.params()?;
            let mut out = Vec::new();
            for id in sets {
                let s = r.set(id)?;
                let track = evolve_set(s, field, params)?;
                let dists = TrackDistances::new(&track);
                let ext = r.grid.extent();
                let pts: Vec<Point> = (0..*probes)
                    .map(|_| {
                        let fx: f64 = rng.gen_range(0.05..0.95);
                        let fy: f64 = rng.gen_range(0.05..0.95);
                        let fz: f64 = if r.grid.dim == 3 { rng.gen_range(0.05..0.95) } else { 0.0 };
                        r.grid.origin + Point::new(fx * ext.x, fy * ext.y, fz * ext.z)
                    })
                    .collect();
                let rep = check_shrinking_ball_monotonicity(
                    &dists,
                    &r.grid,
                    &pts,
                    params.band_width,
                    4.0 * h,
                );
                out.push(
                    CheckRecord::from_report(scenario, &rep)
                        .with_detail(format!("set {id}: {}", rep.detail)),
                );
                let rep = check_backward_bound(&dists, &r.grid, &track, 4.0 * h);
                out.push(
                    CheckRecord::from_report(scenario, &rep)
                        .with_detail(format!("set {id}: backward bound")),
                );
            }
            Ok(out)
        }

        CheckConfig::FiniteSpeed { set, probe_len } => {
            let s = r.set(set)?;
            let track = evolve_set(s, field, r.params()?)?;
            let dists = TrackDistances::new(&track);
            let probe = point_of(probe_len);
            let rep = check_finite_speed(&dists, &r.grid, &probe, r.chi, 4.0 * h);
            Ok(vec![CheckRecord::from_report(scenario, &rep)])
        }

        CheckConfig::Avoidance { y, z } => {
            let (ys, zs) = (r.set(y)?, r.set(z)?);
            require_distinct_initial(&ys.mask(), &zs.mask())?;
            let rep = check_avoidance(&ys.initial_field(), &zs.initial_field(), field, r.params()?)?;
            Ok(vec![CheckRecord::from_report(scenario, &rep)])
        }

        CheckConfig::LongTime { y, z, oracle: oracle_cfg } => {
            let params = r.params()?;
            let (ys, zs) = (r.set(y)?, r.set(z)?);
            let ty = evolve(&ys.initial_field(), field, params)?;
            let tz = evolve(&zs.initial_field(), field, params)?;
            let masks_y = ty.masks();
            let masks_z = tz.masks();
            let d0 = set_distance(&masks_y[0].1, &masks_z[0].1);
            if d0 <= 4.0 * h {
                return Err(RunError::runtime(format!(
                    "initial gap {d0} below the 4h precondition"
                )));
            }
            let mut gaps: Vec<(f64, f64)> = Vec::new();
            for ((t, my), (_, mz)) in masks_y.iter().zip(&masks_z) {
                if my.is_empty() || mz.is_empty() {
                    break;
                }
                gaps.push((*t, set_distance(my, mz)));
            }
            let lambda = r.lambda;
            let mut margin = f64::INFINITY;
            for &(t, g) in &gaps {
                let bound = (lambda * (t - ty.start_time)).exp() * (d0 - 4.0 * h) - 4.0 * h;
                margin = margin.min(g - bound);
            }
            let mut out = vec![CheckRecord::new(
                scenario,
                "LongTime",
                margin >= 0.0,
                margin,
                0.0,
            )
            .with_detail(format!("lambda = {lambda:.4}, d0 = {d0:.4}, pair {y}/{z}"))];

            if let Some(oc) = oracle_cfg {
                let kappa = match field {
                    Some(f) if f.name.starts_with("radial") => r.lambda,
                    _ => 0.0,
                };
                let times: Vec<f64> = gaps.iter().map(|(t, _)| *t).collect();
                let oracle_gaps = oracle::gap_series(oc, kappa, &times, 4.0 * h);
                let mut worst = f64::NEG_INFINITY;
                let mut compared = 0;
                for ((_, g), og) in gaps.iter().zip(&oracle_gaps) {
                    if let Some(o) = og {
                        let allowance = 0.03 * o.abs() + 2.0 * h;
                        worst = worst.max((g - o).abs() - allowance);
                        compared += 1;
                    }
                }
                let margin = -worst;
                out.push(
                    CheckRecord::new(scenario, "GapOracle", margin >= 0.0, margin, 0.0)
                        .with_detail(format!(
                            "{compared} samples vs ODE oracle, allowance 3% + 2h, pair {y}/{z}"
                        )),
                );
            }
            Ok(out)
        }

        CheckConfig::KeyProposition { z, barrier } => {
            let zs = r.set(z)?;
            let track = evolve_set(zs, field, r.params()?)?;
            let b = barrier_from(barrier, r.grid.dim)?;
            let rep = check_key_proposition(&track, &b, field)?;
            Ok(vec![CheckRecord::from_report(scenario, &rep)])
        }

        CheckConfig::DistanceTheorem { y, z } => {
            let (ys, zs) = (r.set(y)?, r.set(z)?);
            let sep = build_separator(&ys.mask(), &zs.mask(), 0.0)?;
            // Sign the distance to M by the interpolant's side: M bounds the
            // two components it separates.
            let dist_m = setflow_core::dist::distance_transform(&sep.mask);
            let values: Vec<f64> = dist_m
                .field
                .values
                .iter()
                .zip(&sep.solution.field.values)
                .map(|(&d, &hv)| if hv < sep.level { -d } else { d })
                .collect();
            let m_signed = setflow_core::ScalarField {
                grid: r.grid.clone(),
                values,
                time: 0.0,
            };
            let rep = check_midsurface_halfgap(
                &ys.initial_field(),
                &zs.initial_field(),
                &m_signed,
                field,
                r.params()?,
            )?;
            Ok(vec![CheckRecord::from_report(scenario, &rep)])
        }

        CheckConfig::StrongBarrierEquiv { z, barrier } => {
            let zs = r.set(z)?;
            let track = evolve_set(zs, field, r.params()?)?;
            let b = barrier_from(barrier, r.grid.dim)?;
            let rep = check_strong_barrier_avoidance(&track, &b, field)?;
            Ok(vec![CheckRecord::from_report(scenario, &rep)])
        }

        CheckConfig::FirstContact { z, barrier, phi_tol } => {
            let zs = r.set(z)?;
            let track = evolve_set(zs, field, r.params()?)?;
            let b = barrier_from(barrier, r.grid.dim)?;
            let rep = check_first_contact(&track, &b, field, *phi_tol)?;
            Ok(vec![CheckRecord::from_report(scenario, &rep).with_detail(rep.detail.clone())])
        }

        CheckConfig::BoundaryFlow { region } => {
            let params = r.params()?;
            let s = r.set(region)?;
            if s.config.as_boundary {
                return Err(RunError::Resolve(format!(
                    "boundary flow needs a region set, {region} is a boundary"
                )));
            }
            let boundary0 = s.sdf.zeroset_mask();
            let panel = strong_ball_panel(&boundary0, params.max_time, 6);
            if panel.len() < 6 {
                return Err(RunError::runtime(format!(
                    "only {} strong barriers fit the box",
                    panel.len()
                )));
            }
            let rep = check_boundary_flow(&s.sdf, field, params, &panel)?;
            let mut out = vec![CheckRecord::from_report(scenario, &rep)];

            // The boundary of the region track matches a second, independently
            // discretized run (re-distanced initialization) within one cell.
            let region_track = evolve(&s.sdf, field, params)?;
            let redistanced = setflow_core::engine::reinitialize(&s.sdf);
            let curve_track = evolve(&redistanced, field, params)?;
            let cell = h * (r.grid.dim as f64).sqrt();
            let mut worst = 0.0f64;
            for i in 0..region_track.len().min(curve_track.len()) {
                let za = region_track.samples[i].zeroset_mask();
                let zb = curve_track.samples[i].zeroset_mask();
                if za.is_empty() && zb.is_empty() {
                    continue;
                }
                worst = worst.max(setflow_core::dist::hausdorff_distance(&za, &zb));
            }
            let margin = cell - worst;
            out.push(
                CheckRecord::new(scenario, "BoundaryMatchesCurve", margin >= 0.0, margin, 0.0)
                    .with_detail(format!("hausdorff {worst:.5} vs one cell {cell:.5}")),
            );
            Ok(out)
        }

        CheckConfig::Semigroup { set, s_time, t_time } => {
            let s = r.set(set)?;
            let rep = check_semigroup(&s.mask(), *s_time, *t_time, field, r.params()?)?;
            Ok(vec![CheckRecord::from_report(scenario, &rep)
                .with_detail(format!("set {set}: {}", rep.detail))])
        }

        CheckConfig::Containment { set, levels } => {
            let s = r.set(set)?;
            let rep = check_containment_levels(&s.sdf, levels, field, r.params()?)?;
            Ok(vec![CheckRecord::from_report(scenario, &rep)])
        }

        CheckConfig::Compactness {} => {
            let params = r.params()?;
            let fields = vec![
                None,
                Some(AmbientField::radial(0.5).bounded_on(&r.grid)),
                Some(AmbientField::rotation(1.0).bounded_on(&r.grid)),
                Some(AmbientField::shear(0.7).bounded_on(&r.grid)),
                Some(AmbientField::constant(Point::new(0.3, 0.1, 0.0)).bounded_on(&r.grid)),
            ];
            let rep = check_compactness(&r.grid, &fields, params)?;
            Ok(vec![CheckRecord::from_report(scenario, &rep)])
        }

        CheckConfig::BrakkeInequality { curve, vertices, dt_time, horizon_time, refinement } => {
            let c0 = curve_from(curve, *vertices)?;
            let steps = (horizon_time / dt_time).round() as usize;
            let record_every = (steps / 40).max(1);
            let track = flow_curve(&c0, field, *dt_time, steps, record_every)?;
            let center = Vector2::new(
                curve.center_len.first().copied().unwrap_or(0.0),
                curve.center_len.get(1).copied().unwrap_or(0.0),
            );
            let scale = if curve.shape == "circle" {
                curve.radius_len
            } else {
                curve.a_len.max(curve.b_len)
            };
            let mut worst_violation = f64::NEG_INFINITY;
            let mut worst_phi = String::new();
            for phi in phi_suite(center, scale) {
                let rep = check_brakke_inequality(&track, field, &phi);
                if rep.worst_violation > worst_violation {
                    worst_violation = rep.worst_violation;
                    worst_phi = phi.name.clone();
                }
            }
            let mut out = vec![CheckRecord::new(
                scenario,
                "BrakkeInequality",
                worst_violation <= 0.0,
                -worst_violation,
                0.0,
            )
            .with_detail(format!(
                "5 test functions, worst at {worst_phi}, {} recorded steps",
                track.len() - 1
            ))];

            // Integration-by-parts chain: the two algebraic forms of the
            // right side agree within 1% on every recorded state.
            let mut worst_rel = 0.0f64;
            for state in track.iter().step_by(4) {
                for phi in phi_suite(center, scale) {
                    let pre = brakke_rhs(state, field, &phi, RhsForm::PreParts);
                    let post = brakke_rhs(state, field, &phi, RhsForm::PostParts);
                    let scale_v = pre
                        .abs()
                        .max(post.abs())
                        .max(setflow_core::brakke::curvature_mass(state, &phi))
                        .max(1e-6);
                    worst_rel = worst_rel.max((pre - post).abs() / scale_v);
                }
            }
            let margin = 0.01 - worst_rel;
            out.push(
                CheckRecord::new(scenario, "BrakkeForms", margin >= 0.0, margin, 0.0)
                    .with_detail(format!("worst relative form gap {worst_rel:.5}")),
            );

            if *refinement {
                // Doubling vertices and quartering dt moves each side by no
                // more than the coarse run's own disagreement.
                let phi = TestFunction::plateau(center, 1.4 * scale, 1.9 * scale);
                let c_fine = curve_from(curve, vertices * 2)?;
                let dt_f = dt_time / 4.0;
                let c1 = curve_step(&c0, field, *dt_time)?;
                let (lhs_c, rhs_c, _) = brakke_sides(&c0, &c1, field, &phi);
                let c1f = curve_step(&c_fine, field, dt_f)?;
                let (lhs_f, rhs_f, _) = brakke_sides(&c_fine, &c1f, field, &phi);
                // Same quadrature floor as the inequality: the coarse gap can
                // be accidentally tiny while both runs carry O(n^-2) error.
                let floor = 0.002 * setflow_core::brakke::curvature_mass(&c0, &phi);
                let allowed = (lhs_c - rhs_c).abs() + 1e-6 + floor;
                let shift = (lhs_f - lhs_c).abs().max((rhs_f - rhs_c).abs());
                let margin = allowed - shift;
                out.push(
                    CheckRecord::new(scenario, "BrakkeRefinement", margin >= 0.0, margin, 0.0)
                        .with_detail(format!("shift {shift:.3e} vs coarse gap {allowed:.3e}")),
                );
            }
            Ok(out)
        }

        CheckConfig::BrakkeWeakFlow { curve, dt_time, horizon_time, vertices } => {
            let c0 = curve_from(curve, *vertices)?;
            let steps = (horizon_time / dt_time).round() as usize;
            let track = flow_curve(&c0, field, *dt_time, steps, (steps / 24).max(1))?;
            let rep = check_support_is_weak_flow(&track, field, &r.grid)?;
            Ok(vec![CheckRecord::from_report(scenario, &rep)])
        }

        CheckConfig::Separator { x, y, level, log_profile, max_angle_deg } => {
            let (xs, ys) = (r.set(x)?, r.set(y)?);
            let out = build_separator(&xs.mask(), &ys.mask(), *level)?;
            let rsep = out.problem.r;
            let mut records = vec![CheckRecord::new(
                scenario,
                "SeparatorSeparation",
                true,
                out.dist_x_to_m.min(out.dist_y_to_m),
                0.0,
            )
            .with_detail(format!(
                "r = {rsep:.4}, level {:.4}, |M| = {} nodes",
                out.level,
                out.mask.count()
            ))];

            let eq = 3.0 * h
                - (out.dist_x_to_m - out.dist_y_to_m)
                    .abs()
                    .max((out.dist_x_to_m - rsep).abs())
                    .max((out.dist_y_to_m - rsep).abs());
            records.push(
                CheckRecord::new(scenario, "SeparatorEquidistance", eq >= 0.0, eq, 0.0)
                    .with_detail(format!(
                        "dist(X,M) = {:.4}, dist(Y,M) = {:.4}, r = {rsep:.4}",
                        out.dist_x_to_m, out.dist_y_to_m
                    )),
            );

            if *log_profile {
                // Fit a ln(rho) + b over the bulk of the in-between band and
                // bound the residual by 2% of the data range (2.0). The fit
                // runs on the base solve (delta = r/4): that is the wide
                // harmonic band; the delta-refinement sweep only sharpens
                // the extracted surface. Cells near the Dirichlet sets carry
                // the staircase roughness of the discretized circles and are
                // excluded; the profile comparison concerns the interior.
                let base_prob =
                    setflow_core::separator::SeparatorProblem::new(&xs.mask(), &ys.mask(), None)?;
                let base_sol = setflow_core::separator::solve_harmonic(&base_prob)?;
                let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
                let mut pts = Vec::new();
                let mid = 2.0;
                for idx in 0..r.grid.len() {
                    if !base_sol.free[idx] {
                        continue;
                    }
                    let rho = r.grid.pos(idx).xy().norm();
                    if (rho - mid).abs() > 0.15 {
                        continue;
                    }
                    let lx = rho.ln();
                    let v = base_sol.field.values[idx];
                    sx += lx;
                    sy += v;
                    sxx += lx * lx;
                    sxy += lx * v;
                    n += 1.0;
                    pts.push((lx, v));
                }
                let a = (n * sxy - sx * sy) / (n * sxx - sx * sx);
                let b = (sy - a * sx) / n;
                let mut worst = 0.0f64;
                for (lx, v) in &pts {
                    worst = worst.max((v - (a * lx + b)).abs());
                }
                let margin = 0.04 - worst;
                records.push(
                    CheckRecord::new(scenario, "SeparatorLogProfile", margin >= 0.0, margin, 0.0)
                        .with_detail(format!(
                            "fit residual {worst:.5} over {} nodes, a = {a:.4}",
                            pts.len()
                        )),
                );
            }

            if let Some(max_deg) = max_angle_deg {
                let rep = normal_continuity_report(&out.problem, &out.solution, &out.mask);
                let (margin, detail) = match rep.max_angle_deg {
                    Some(angle) => (
                        max_deg - angle,
                        format!(
                            "max angle {angle:.2} deg over {} samples, contact {} nodes",
                            rep.samples, rep.contact_count
                        ),
                    ),
                    None => (*max_deg, "Z empty".to_string()),
                };
                records.push(
                    CheckRecord::new(scenario, "SeparatorNormals", margin >= 0.0, margin, 0.0)
                        .with_detail(detail),
                );
            }
            Ok(records)
        }

        CheckConfig::ArrivalTime { region, disk_radius_len, probe_radius_len } => {
            let params = r.params()?;
            let s = r.set(region)?;
            if !check_mean_convex(&s.sdf, field, params, 20)? {
                return Err(RunError::runtime(format!(
                    "region {region} is not mean-convex for this field"
                )));
            }
            let track = evolve(&s.sdf, field, params)?;
            let at = arrival_time(&track, &s.sdf.sublevel_mask())?;
            let mut out = Vec::new();

            if let Some(r0) = disk_radius_len {
                let m = (r.grid.dim - 1) as f64;
                let mut worst = 0.0f64;
                for idx in 0..r.grid.len() {
                    let p = r.grid.pos(idx);
                    let rho = if r.grid.dim == 2 { p.xy().norm() } else { p.norm() };
                    if rho <= *probe_radius_len {
                        let want = (r0 * r0 - rho * rho) / (2.0 * m);
                        worst = worst.max((at.values[idx] - want).abs());
                    }
                }
                let margin = 3.0 * h - worst;
                out.push(
                    CheckRecord::new(scenario, "ArrivalClosedForm", margin >= 0.0, margin, 0.0)
                        .with_detail(format!("max |u - closed form| = {worst:.5}")),
                );
            }

            // Nestedness of superlevel sets, checked on a level lattice.
            let mut nested_ok = true;
            let levels: Vec<f64> = (1..8).map(|k| k as f64 * params.max_time / 8.0).collect();
            for w in levels.windows(2) {
                let hi = at.superlevel(w[1]);
                let lo = at.superlevel(w[0]);
                if hi.nodes().any(|n| !lo.contains(n)) {
                    nested_ok = false;
                }
            }
            out.push(
                CheckRecord::new(
                    scenario,
                    "ArrivalNested",
                    nested_ok,
                    if nested_ok { 1.0 } else { -1.0 },
                    0.0,
                )
                .with_detail(format!("{} levels", levels.len())),
            );

            // Level sets carry no interior: no full-stencil plateau at any
            // probed level (h^2 agreement would indicate a fattened flow).
            let mut plateaus = 0;
            for t in &levels {
                plateaus += at.plateau_nodes(*t, h * h);
            }
            out.push(
                CheckRecord::new(
                    scenario,
                    "ArrivalLevelInterior",
                    plateaus == 0,
                    -(plateaus as f64),
                    0.0,
                )
                .with_detail(format!("continuity constant {:.3}", at.continuity_constant())),
            );
            Ok(out)
        }

        CheckConfig::BarrierExactness {} => {
            let mut out = Vec::new();
            // Exact shrinking sphere: |Phi| <= 1e-10 at all sampled points
            // and times, in both ambient dimensions.
            let mut worst = 0.0f64;
            for (dim, c) in [(2usize, 2.0), (3usize, 4.0)] {
                let b = ball_complement(dim, Point::zeros(), 1e-9, c, (-1.5, -0.2));
                for s in 0..=20 {
                    let t = -1.5 + 1.3 * s as f64 / 20.0;
                    for seed_pt in b.boundary_seeds(t, 120) {
                        let rep = eval_barrier(&b, &seed_pt, t, None)
                            .map_err(setflow_core::Error::from)?;
                        worst = worst.max(rep.phi.abs());
                    }
                }
            }
            let margin = 1e-10 - worst;
            out.push(
                CheckRecord::new(scenario, "ExactSpherePhi", margin >= 0.0, margin, 0.0)
                    .with_detail(format!("max |phi| = {worst:.3e}")),
            );

            // Classification of the three ball families.
            let strong = shrinking_ball(2, Point::zeros(), 0.5, 3.0, (0.0, 0.05));
            let exact = shrinking_ball(2, Point::zeros(), 0.5, 2.0, (0.0, 0.05));
            let expanding = shrinking_ball(2, Point::zeros(), 0.5, -1.0, (0.0, 0.05));
            let cs = classify_strong(&strong, None, 128)?;
            let ce = classify_strong(&exact, None, 128)?;
            let cx = classify_strong(&expanding, None, 128)?;
            let ok = cs.strong && !ce.strong && ce.worst_phi.abs() < 1e-9 && !cx.strong
                && cx.worst_phi > 0.0;
            out.push(
                CheckRecord::new(scenario, "ClassifyStrong", ok, if ok { 1.0 } else { -1.0 }, 0.0)
                    .with_detail(format!(
                        "phi: strong {:.3e}, exact {:.3e}, expanding {:.3e}",
                        cs.worst_phi, ce.worst_phi, cx.worst_phi
                    )),
            );

            // Quadratic separation rate of the pinched barrier.
            let c = 0.8;
            let base = half_space(2, Point::new(1.0, 0.0, 0.0), 0.0, 0.0, (-1.0, 0.0), 2.0);
            let tb = perturb_barrier(&base, &Point::zeros(), c)?;
            let q = tb.project_to_boundary(&Point::new(0.0, 0.02, 0.0), 0.0)?;
            let ratio = q.x.abs() / q.norm_squared();
            let margin = 0.2 * c - (ratio - c).abs();
            out.push(
                CheckRecord::new(scenario, "PerturbRatio", margin >= 0.0, margin, 0.0)
                    .with_detail(format!("ratio {ratio:.4} vs c = {c}")),
            );
            Ok(out)
        }
    }
}
