//! Explicit time stepping of the level set equation with transport,
//!
//! ```text
//! u_t = |grad u| Div(grad u / |grad u|) - X . grad u,
//! ```
//!
//! on a narrow band around the zero set: central differences for the
//! curvature term with the gradient regularized as
//! `sqrt(|grad u|^2 + eps^2)`, first-order upwinding on the transport term,
//! and explicit Euler at parabolic CFL. Values outside the band and within
//! two cells of the box faces stay frozen.
//!
//! The frozen far field emulates a flow in all of space, so the moving front
//! must keep its distance from the faces: the run fails hard when interface
//! nodes enter the margin strip facing a wall head-on. Interfaces that meet a
//! face orthogonally (half-spaces, the box-minus-margin region) are legal;
//! the face acts like a symmetry plane for them.
//!
//! Reinitialization rebuilds the signed distance from the sub-cell zero
//! crossings with the seeded distance transform, so crossings do not move.

use crate::ambient::AmbientField;
use crate::dist::{distance_from_seeds, distance_transform};
use crate::error::{Error, Result};
use crate::field::{ClosedSetMask, MaskRepr, ScalarField, SpacetimeTrack, SIGN_TOL};
use crate::grid::Grid;


#[derive(Debug, Clone)]
pub struct FlowParams {
    /// Gradient regularization added in quadrature to `|grad u|`.
    pub eps_reg: f64,
    /// Parabolic CFL number in (0, 0.5]; `dt = cfl h^2 / (2 dim)`, further
    /// capped by `cfl h / chi` when a transport field is present.
    pub cfl: f64,
    /// Steps between reinitializations.
    pub reinit_every: usize,
    /// Half-width of the active band around the zero set; at least `4h`.
    pub band_width: f64,
    /// Evolution horizon.
    pub max_time: f64,
    /// Target spacing of stored samples (clamped to at least one step).
    pub sample_spacing: f64,
}

impl FlowParams {
    pub fn for_grid(grid: &Grid, max_time: f64) -> Self {
        let h = grid.spacing;
        FlowParams {
            eps_reg: h * h,
            cfl: 0.2,
            reinit_every: 20,
            band_width: 8.0 * h,
            max_time,
            sample_spacing: max_time / 160.0,
        }
    }

    pub fn with_band(mut self, w: f64) -> Self {
        self.band_width = w;
        self
    }

    pub fn with_sample_spacing(mut self, s: f64) -> Self {
        self.sample_spacing = s;
        self
    }

    pub fn time_step(&self, grid: &Grid, transport: Option<&AmbientField>) -> f64 {
        let h = grid.spacing;
        let chi = transport.map_or(0.0, |f| f.bound_sup_norm);
        let mut dt = self.cfl * h * h / (2.0 * grid.dim as f64);
        if chi > 0.0 {
            dt = dt.min(self.cfl * h / chi);
        }
        dt
    }

    fn validate(&self, h: f64) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(Error::InvalidArgument(format!("cfl {} outside (0, 0.5]", self.cfl)));
        }
        if self.eps_reg <= 0.0 {
            return Err(Error::InvalidArgument("eps_reg must be positive".into()));
        }
        if self.band_width < 4.0 * h - 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "band_width {} below 4h = {}",
                self.band_width,
                4.0 * h
            )));
        }
        if self.max_time <= 0.0 {
            return Err(Error::InvalidArgument("max_time must be positive".into()));
        }
        Ok(())
    }
}

struct Stencil<'a> {
    nx: usize,
    ny: usize,
    h: f64,
    eps2: f64,
    dim: usize,
    transport: Option<&'a [[f64; 3]]>,
}

impl Stencil<'_> {
    /// du/dt at an interior node.
    #[inline]
    fn rate(&self, u: &[f64], idx: usize) -> f64 {
        let h = self.h;
        let sy = self.nx;
        let sz = self.nx * self.ny;
        let inv2h = 0.5 / h;
        let invh2 = 1.0 / (h * h);

        let c = u[idx];
        let xm = u[idx - 1];
        let xp = u[idx + 1];
        let ym = u[idx - sy];
        let yp = u[idx + sy];
        let ux = (xp - xm) * inv2h;
        let uy = (yp - ym) * inv2h;
        let uxx = (xp - 2.0 * c + xm) * invh2;
        let uyy = (yp - 2.0 * c + ym) * invh2;
        let uxy = (u[idx + 1 + sy] - u[idx + 1 - sy] - u[idx - 1 + sy] + u[idx - 1 - sy])
            * (0.25 * invh2);

        let curv;
        let mut adv = 0.0;
        if self.dim == 2 {
            let den = ux * ux + uy * uy + self.eps2;
            curv = (uxx * (uy * uy + self.eps2) - 2.0 * ux * uy * uxy
                + uyy * (ux * ux + self.eps2))
                / den;
            if let Some(xv) = self.transport {
                let a = xv[idx];
                let invh = 1.0 / h;
                let dx = if a[0] > 0.0 { (c - xm) * invh } else { (xp - c) * invh };
                let dy = if a[1] > 0.0 { (c - ym) * invh } else { (yp - c) * invh };
                adv = a[0] * dx + a[1] * dy;
            }
        } else {
            let zm = u[idx - sz];
            let zp = u[idx + sz];
            let uz = (zp - zm) * inv2h;
            let uzz = (zp - 2.0 * c + zm) * invh2;
            let uxz = (u[idx + 1 + sz] - u[idx + 1 - sz] - u[idx - 1 + sz] + u[idx - 1 - sz])
                * (0.25 * invh2);
            let uyz = (u[idx + sy + sz] - u[idx + sy - sz] - u[idx - sy + sz]
                + u[idx - sy - sz])
                * (0.25 * invh2);
            let den = ux * ux + uy * uy + uz * uz + self.eps2;
            curv = (uxx * (uy * uy + uz * uz + self.eps2)
                + uyy * (ux * ux + uz * uz + self.eps2)
                + uzz * (ux * ux + uy * uy + self.eps2)
                - 2.0 * (ux * uy * uxy + ux * uz * uxz + uy * uz * uyz))
                / den;
            if let Some(xv) = self.transport {
                let a = xv[idx];
                let invh = 1.0 / h;
                let dx = if a[0] > 0.0 { (c - xm) * invh } else { (xp - c) * invh };
                let dy = if a[1] > 0.0 { (c - ym) * invh } else { (yp - c) * invh };
                let dz = if a[2] > 0.0 { (c - zm) * invh } else { (zp - c) * invh };
                adv = a[0] * dx + a[1] * dy + a[2] * dz;
            }
        }
        curv - adv
    }
}

/// Per-step reductions gathered during the band sweep.
#[derive(Clone, Copy)]
struct SweepStats {
    min_u: f64,
    min_abs: f64,
    max_abs: f64,
    max_du: f64,
}

impl SweepStats {
    fn empty() -> Self {
        SweepStats { min_u: f64::INFINITY, min_abs: f64::INFINITY, max_abs: 0.0, max_du: 0.0 }
    }

    fn merge(self, o: Self) -> Self {
        SweepStats {
            min_u: self.min_u.min(o.min_u),
            min_abs: self.min_abs.min(o.min_abs),
            max_abs: self.max_abs.max(o.max_abs),
            max_du: self.max_du.max(o.max_du),
        }
    }
}

/// Diagonal extent of the node set `{u <= tol}`; zero when empty.
fn band_extent(grid: &Grid, u: &[f64], tol: f64) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    let mut any = false;
    for (idx, &v) in u.iter().enumerate() {
        if v.abs() <= tol {
            any = true;
            let p = grid.pos(idx);
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
    }
    if !any {
        return 0.0;
    }
    ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2)).sqrt()
}

/// Active-band bookkeeping: per-row runs of updatable nodes, plus the frozen
/// remainder's reductions (frozen values only change at reinitialization).
struct Band {
    runs: Vec<Vec<(u32, u32)>>,
    frozen: SweepStats,
}

impl Band {
    fn rebuild(grid: &Grid, u: &[f64], band_width: f64) -> Band {
        let nx = grid.counts[0];
        let n_rows = grid.len() / nx;
        let two_cells = 2.0 * grid.spacing;
        let mut runs = vec![Vec::new(); n_rows];
        let mut frozen = SweepStats::empty();
        for r in 0..n_rows {
            let base = r * nx;
            let mut start: Option<u32> = None;
            for i in 0..nx {
                let idx = base + i;
                let active = u[idx].abs() <= band_width && grid.face_distance(idx) >= two_cells;
                if active {
                    if start.is_none() {
                        start = Some(i as u32);
                    }
                } else {
                    let v = u[idx];
                    frozen.min_u = frozen.min_u.min(v);
                    frozen.min_abs = frozen.min_abs.min(v.abs());
                    frozen.max_abs = frozen.max_abs.max(v.abs());
                    if let Some(s) = start.take() {
                        runs[r].push((s, i as u32));
                    }
                }
            }
            if let Some(s) = start.take() {
                runs[r].push((s, nx as u32));
            }
        }
        Band { runs, frozen }
    }
}

/// True when an interface node sits in the margin strip of a face it runs
/// parallel to (i.e. the front faces the wall head-on); interfaces meeting a
/// face orthogonally are allowed. The scan is restricted to nodes within the
/// margin strip of some face; everything deeper cannot violate it.
fn margin_violation(grid: &Grid, u: &[f64], margin: f64) -> bool {
    let h = grid.spacing;
    let [nx, ny, nz] = grid.counts;
    for idx in 0..grid.len() {
        if u[idx].abs() > 1.5 * h || grid.face_distance(idx) >= margin {
            continue;
        }
        let fd = grid.face_distance(idx);
        if fd >= margin {
            continue;
        }
        let (i, j, k) = grid.coords(idx);
        // One-sided gradient components (cells may be missing one side).
        let diff = |lo: Option<usize>, hi: Option<usize>| -> f64 {
            match (lo, hi) {
                (Some(a), Some(b)) => (u[b] - u[a]) * 0.5 / h,
                (None, Some(b)) => (u[b] - u[idx]) / h,
                (Some(a), None) => (u[idx] - u[a]) / h,
                (None, None) => 0.0,
            }
        };
        let gx = diff(
            (i > 0).then(|| grid.index(i - 1, j, k)),
            (i + 1 < nx).then(|| grid.index(i + 1, j, k)),
        );
        let gy = diff(
            (j > 0).then(|| grid.index(i, j - 1, k)),
            (j + 1 < ny).then(|| grid.index(i, j + 1, k)),
        );
        let gz = if grid.dim == 3 {
            diff(
                (k > 0).then(|| grid.index(i, j, k - 1)),
                (k + 1 < nz).then(|| grid.index(i, j, k + 1)),
            )
        } else {
            0.0
        };
        let norm = (gx * gx + gy * gy + gz * gz).sqrt();
        // Only nodes with a healthy distance gradient can testify about the
        // front's direction: kink cells of unsigned fields and cells leaning
        // on frozen rows carry spurious components of comparable size.
        if norm < 0.8 {
            continue;
        }
        // Which face is the node close to, and is the front facing it?
        let mut components = vec![
            (i.min(nx - 1 - i), gx.abs()),
            (j.min(ny - 1 - j), gy.abs()),
        ];
        if grid.dim == 3 {
            components.push((k.min(nz - 1 - k), gz.abs()));
        }
        for (cells, gcomp) in components {
            if (cells as f64) * h < margin && gcomp > 0.7 * norm {
                return true;
            }
        }
    }
    false
}

/// Time-steps `u0` to `params.max_time`, producing the discrete biggest flow
/// of its zero sublevel (or zero set, when `u0` is unsigned).
///
/// The returned track samples fields every `params.sample_spacing` of flow
/// time, always including the initial and final states. If the set vanishes,
/// stepping stops and the remaining samples repeat the final (empty) state;
/// the exact first-empty time is recorded on the track.
pub fn evolve(
    u0: &ScalarField,
    transport: Option<&AmbientField>,
    params: &FlowParams,
) -> Result<SpacetimeTrack> {
    let grid = u0.grid.clone();
    let h = grid.spacing;
    params.validate(h)?;

    let repr = if u0.values.iter().any(|&v| v < -SIGN_TOL) {
        MaskRepr::Sublevel
    } else {
        MaskRepr::ZeroSet
    };

    let dt = params.time_step(&grid, transport);
    let n_steps = (params.max_time / dt).round().max(1.0) as usize;
    let sample_every = ((params.sample_spacing / dt).round() as usize).clamp(1, n_steps);

    // Transport values are time-independent; evaluate once.
    let xvals: Option<Vec<[f64; 3]>> = transport.map(|f| {
        (0..grid.len())
            .map(|i| {
                let v = f.at(&grid.pos(i));
                [v.x, v.y, v.z]
            })
            .collect()
    });

    let mut u = u0.values.clone();
    let mut scratch = u.clone();
    let blowup_cap = 20.0 * grid.sentinel();
    let margin = params.band_width - 0.5 * h;

    let mut band = Band::rebuild(&grid, &u, params.band_width);
    if margin_violation(&grid, &u, margin) {
        return Err(Error::DomainTooSmall { time: u0.time });
    }

    let stencil = Stencil {
        nx: grid.counts[0],
        ny: grid.counts[1],
        h,
        eps2: params.eps_reg * params.eps_reg,
        dim: grid.dim,
        transport: xvals.as_deref(),
    };

    let mut samples: Vec<ScalarField> = Vec::with_capacity(n_steps / sample_every + 2);
    samples.push(ScalarField { grid: grid.clone(), values: u.clone(), time: u0.time });

    let initially_empty = match repr {
        MaskRepr::Sublevel => samples[0].sublevel_mask().is_empty(),
        MaskRepr::ZeroSet => samples[0].zeroset_mask().is_empty(),
    };
    let mut extinction: Option<f64> = if initially_empty { Some(u0.time) } else { None };

    let mut drift_since_reinit = 0.0f64;
    let row = grid.counts[0];
    let mut step = 0usize;

    while step < n_steps && extinction.is_none() {
        step += 1;
        let t = u0.time + step as f64 * dt;

        // Band sweep over the per-row runs. Non-band values are identical in
        // both buffers between reinits, so only band runs are written. The
        // per-step work is a few hundred microseconds, which is below the
        // fork-join overhead of a thread pool; the sweep stays sequential.
        let stats = {
            let u_ref: &[f64] = &u;
            let mut st = SweepStats::empty();
            for (r, out) in scratch.chunks_mut(row).enumerate() {
                let base = r * row;
                for &(lo, hi) in &band.runs[r] {
                    for i in lo as usize..hi as usize {
                        let idx = base + i;
                        let du = dt * stencil.rate(u_ref, idx);
                        let v = u_ref[idx] + du;
                        out[i] = v;
                        st.max_du = st.max_du.max(du.abs());
                        st.min_u = st.min_u.min(v);
                        st.min_abs = st.min_abs.min(v.abs());
                        st.max_abs = st.max_abs.max(v.abs());
                    }
                }
            }
            st
        };
        std::mem::swap(&mut u, &mut scratch);
        drift_since_reinit += stats.max_du;
        let whole = stats.merge(band.frozen);

        if !whole.max_abs.is_finite() || whole.max_abs > blowup_cap {
            return Err(Error::Unstable { time: t, max_abs: whole.max_abs });
        }

        // Extinction: for sublevel sets the minimum tells the story exactly;
        // for zero sets require a confirming extraction since `min |u|` can
        // sit above h transiently near an under-resolved neck.
        let looks_empty = match repr {
            MaskRepr::Sublevel => whole.min_u > SIGN_TOL,
            MaskRepr::ZeroSet => whole.min_abs > 1.5 * h,
        };
        if looks_empty {
            let f = ScalarField { grid: grid.clone(), values: u.clone(), time: t };
            let empty = match repr {
                MaskRepr::Sublevel => f.sublevel_mask().is_empty(),
                MaskRepr::ZeroSet => f.zeroset_mask().is_empty(),
            };
            if empty {
                extinction = Some(t);
                break;
            }
        }
        // A collapsed curve leaves a standing cone artifact whose minimum
        // never escapes the band; read extinction off the band's extent
        // instead (a live interface spans more than a few cells).
        if repr == MaskRepr::ZeroSet && step % params.reinit_every == 0 {
            if band_extent(&grid, &u, 1.5 * h) <= 4.0 * h {
                extinction = Some(t);
                break;
            }
        }

        if (step % params.reinit_every == 0 || drift_since_reinit > 2.0 * h) && step < n_steps {
            if margin_violation(&grid, &u, margin) {
                return Err(Error::DomainTooSmall { time: t });
            }
            // Sublevel fields skip the rebuild while the front has not moved
            // appreciably; unsigned fields always refresh, because their
            // kink minimum needs rebasing every window.
            let due = match repr {
                MaskRepr::Sublevel => drift_since_reinit >= h / 8.0,
                MaskRepr::ZeroSet => true,
            };
            if due {
                u = reinitialize_values(&grid, &u, repr, true);
                band = Band::rebuild(&grid, &u, params.band_width);
                drift_since_reinit = 0.0;
                scratch.copy_from_slice(&u);
            }
        }

        if step % sample_every == 0 || step == n_steps {
            samples.push(ScalarField { grid: grid.clone(), values: u.clone(), time: t });
        }
    }

    // Pad to the horizon after extinction so downstream consumers see the
    // empty set at every later sample; the padded states reuse the final
    // (empty-set) field so cadence and sample counts stay uniform across
    // tracks that share parameters.
    if extinction.is_some() {
        let last = ScalarField { grid: grid.clone(), values: u.clone(), time: 0.0 };
        let mut s = (step / sample_every) * sample_every;
        while s < n_steps {
            s += 1;
            if s % sample_every == 0 || s == n_steps {
                let mut f = last.clone();
                f.time = u0.time + s as f64 * dt;
                samples.push(f);
            }
        }
    }

    Ok(SpacetimeTrack {
        samples,
        start_time: u0.time,
        time_step: sample_every as f64 * dt,
        repr,
        extinction,
    })
}

/// Rebuilds a distance function with the zero crossings held in place.
///
/// Signed fields seed from every sign-change edge: the per-axis interpolated
/// crossing offsets are combined into the distance to the local interface
/// plane, so a rescaled distance function comes back normalized. Unsigned
/// fields (curve tracks) trust their near-field values within `1.5h` as
/// distances. If there is no zero set at all, the result is a constant field
/// at the sentinel magnitude carrying the input's sign.
pub fn reinitialize(u: &ScalarField) -> ScalarField {
    let repr = if u.values.iter().any(|&v| v < -SIGN_TOL) {
        MaskRepr::Sublevel
    } else {
        MaskRepr::ZeroSet
    };
    let values = reinitialize_values(&u.grid, &u.values, repr, false);
    ScalarField { grid: u.grid.clone(), values, time: u.time }
}

/// `preserve_near_field` keeps the exact field values on crossing-adjacent
/// nodes instead of re-deriving them, so the front does not creep when the
/// solver reinitializes hundreds of times; the public `reinitialize` uses the
/// normalizing variant instead.
fn reinitialize_values(grid: &Grid, u: &[f64], repr: MaskRepr, preserve_near_field: bool) -> Vec<f64> {
    let h = grid.spacing;
    let mut seeds: Vec<(usize, f64)> = Vec::new();
    match repr {
        MaskRepr::Sublevel => {
            let [nx, ny, nz] = grid.counts;
            let strides = [1usize, nx, nx * ny];
            let ends = [nx, ny, nz];
            let mut collar = vec![false; grid.len()];
            for idx in 0..grid.len() {
                let (i, j, k) = grid.coords(idx);
                let here = [i, j, k];
                if u[idx] == 0.0 {
                    collar[idx] = true;
                }
                for a in 0..grid.dim {
                    if here[a] + 1 >= ends[a] {
                        continue;
                    }
                    let nb = idx + strides[a];
                    if u[idx] * u[nb] < 0.0 {
                        collar[idx] = true;
                        collar[nb] = true;
                    }
                }
            }
            if preserve_near_field {
                // Solver-internal path: the crossing-adjacent values are the
                // interface position; keep them bit-exact.
                for (idx, &c) in collar.iter().enumerate() {
                    if c {
                        seeds.push((idx, u[idx].abs()));
                    }
                }
            } else {
                // Normalizing path: widen the collar and anchor it with the
                // local first-order distance |u| / |grad u|, which undoes a
                // smooth rescaling without moving crossings.
                let mut wide = collar.clone();
                let mut nbrs = Vec::with_capacity(6);
                for _ in 0..2 {
                    let snapshot = wide.clone();
                    for idx in 0..grid.len() {
                        if snapshot[idx] {
                            grid.neighbors(idx, &mut nbrs);
                            for &nb in &nbrs {
                                wide[nb] = true;
                            }
                        }
                    }
                }
                for idx in 0..grid.len() {
                    if !wide[idx] {
                        continue;
                    }
                    let (i, j, k) = grid.coords(idx);
                    let mut gn2 = 0.0;
                    let here = [i, j, k];
                    for a in 0..grid.dim {
                        let lo = if here[a] > 0 { u[idx - strides[a]] } else { u[idx] };
                        let hi = if here[a] + 1 < ends[a] { u[idx + strides[a]] } else { u[idx] };
                        let w = if here[a] > 0 && here[a] + 1 < ends[a] { 2.0 } else { 1.0 };
                        let g = (hi - lo) / (w * h);
                        gn2 += g * g;
                    }
                    let gn = gn2.sqrt();
                    if gn < 1e-8 {
                        continue;
                    }
                    seeds.push((idx, (u[idx].abs() / gn).min(6.0 * h)));
                }
            }
        }
        MaskRepr::ZeroSet => {
            // Unsigned fields have no crossings; the curve sits at the
            // valley bottoms. At a 1-d local minimum the neighbor difference
            // |u(+h) - u(-h)|/2 equals the node's distance to a straight
            // interface at any angle, and is immune to the uniform lift the
            // regularized stencil adds at the kink.
            let [nx, ny, nz] = grid.counts;
            let strides = [1usize, nx, nx * ny];
            let ends = [nx, ny, nz];
            for idx in 0..grid.len() {
                if u[idx].abs() > 1.5 * h {
                    continue;
                }
                let (i, j, k) = grid.coords(idx);
                let here = [i, j, k];
                let mut best = f64::INFINITY;
                for a in 0..grid.dim {
                    if here[a] == 0 || here[a] + 1 >= ends[a] {
                        continue;
                    }
                    let um = u[idx - strides[a]];
                    let up = u[idx + strides[a]];
                    // A genuine kink has upward curvature of order h in its
                    // 1-d section; directions running flat along the curve,
                    // and the smaller second differences that stencil noise
                    // or frozen-row mismatch produce, must not read as
                    // zero-offset valleys.
                    if u[idx] <= um && u[idx] <= up && um + up - 2.0 * u[idx] >= 0.6 * h {
                        best = best.min((0.5 * (up - um).abs()).min(1.5 * h));
                    }
                }
                if best.is_finite() {
                    seeds.push((idx, best));
                }
            }
        }
    }
    if seeds.is_empty() {
        let sign = if u.iter().all(|&v| v >= 0.0) { 1.0 } else { -1.0 };
        return vec![sign * grid.sentinel(); grid.len()];
    }
    // Solver-internal rebuilds only need fresh distances near the band;
    // values beyond the window keep their (stale, but conservatively large)
    // magnitudes. The public op rebuilds the whole box.
    let d = if preserve_near_field {
        let pad = (params_pad_cells(grid) as isize).max(1);
        let mut lo = [isize::MAX; 3];
        let mut hi = [isize::MIN; 3];
        for &(idx, _) in &seeds {
            let (i, j, k) = grid.coords(idx);
            for (a, v) in [i, j, k].into_iter().enumerate() {
                lo[a] = lo[a].min(v as isize);
                hi[a] = hi[a].max(v as isize);
            }
        }
        let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
        let lo = [
            clamp(lo[0] - pad, grid.counts[0]),
            clamp(lo[1] - pad, grid.counts[1]),
            clamp(lo[2] - pad, grid.counts[2]),
        ];
        let hi = [
            clamp(hi[0] + pad, grid.counts[0]),
            clamp(hi[1] + pad, grid.counts[1]),
            clamp(hi[2] + pad, grid.counts[2]),
        ];
        crate::dist::distance_from_seeds_window(grid, &seeds, lo, hi)
    } else {
        distance_from_seeds(grid, &seeds)
    };
    match repr {
        MaskRepr::Sublevel => d
            .iter()
            .zip(u)
            .map(|(&dist, &old)| {
                if dist.is_finite() {
                    if old < 0.0 {
                        -dist
                    } else {
                        dist
                    }
                } else {
                    old
                }
            })
            .collect(),
        MaskRepr::ZeroSet => d
            .iter()
            .zip(u)
            .map(|(&dist, &old)| if dist.is_finite() { dist } else { old })
            .collect(),
    }
}

/// Window padding for band-local rebuilds: the band half-width plus slack
/// for the front's motion between rebuilds, in cells.
fn params_pad_cells(grid: &Grid) -> usize {
    // Rebuilds happen at least every 2h of front motion; the widest band in
    // use is a couple dozen cells. 24 cells covers band_width defaults up to
    // 16h plus the forced-rebuild cap with room to spare.
    let _ = grid;
    24
}

/// Outcome of a track: when (if ever) the set vanished.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extinction {
    At(f64),
    Survived,
}

/// First sample time with an empty mask, preferring the solver's exact
/// record when present.
pub fn extinction_time(track: &SpacetimeTrack) -> Extinction {
    if let Some(t) = track.extinction {
        return Extinction::At(t);
    }
    for i in 0..track.len() {
        if track.mask_at(i).is_empty() {
            return Extinction::At(track.samples[i].time);
        }
    }
    Extinction::Survived
}

/// Time-of-arrival function extracted from a track of a shrinking (mean
/// convex) region: per node, the first time the field rises through zero,
/// linearly interpolated between samples; infinity where the front never
/// arrives.
#[derive(Debug, Clone)]
pub struct ArrivalTimeField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub domain: ClosedSetMask,
}

impl ArrivalTimeField {
    /// Superlevel set `{u >= t}`; these are nested by construction.
    pub fn superlevel(&self, t: f64) -> ClosedSetMask {
        let inside: Vec<bool> = self
            .values
            .iter()
            .zip(&self.domain.inside)
            .map(|(&u, &d)| d && u >= t)
            .collect();
        ClosedSetMask { grid: self.grid.clone(), inside, repr: MaskRepr::Sublevel }
    }

    /// Largest jump between adjacent finite values, in cells: the constant C
    /// in `|u(x) - u(y)| <= C h` for neighbors x, y.
    pub fn continuity_constant(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut nbrs = Vec::with_capacity(6);
        for idx in 0..self.grid.len() {
            if !self.values[idx].is_finite() {
                continue;
            }
            self.grid.neighbors(idx, &mut nbrs);
            for &n in &nbrs {
                if self.values[n].is_finite() {
                    worst = worst.max((self.values[idx] - self.values[n]).abs());
                }
            }
        }
        worst / self.grid.spacing
    }

    /// Nodes where the arrival time equals `t` (within `eps`) across a full
    /// neighborhood stencil: candidates for interior of the level set
    /// `{u = t}`. A sound arrival function has none at any level.
    pub fn plateau_nodes(&self, t: f64, eps: f64) -> usize {
        let mut nbrs = Vec::with_capacity(6);
        let mut count = 0;
        for idx in 0..self.grid.len() {
            if (self.values[idx] - t).abs() > eps {
                continue;
            }
            self.grid.neighbors(idx, &mut nbrs);
            if nbrs.len() == 2 * self.grid.dim
                && nbrs.iter().all(|&n| (self.values[n] - t).abs() <= eps)
            {
                count += 1;
            }
        }
        count
    }
}

/// Errors with the offending nodes if any node re-enters the set after
/// leaving it (the input was not mean-convex for this transport field).
pub fn arrival_time(track: &SpacetimeTrack, q0: &ClosedSetMask) -> Result<ArrivalTimeField> {
    let grid = track.grid().clone();
    assert!(grid.same_shape(&q0.grid), "arrival_time: grid mismatch");
    let h = grid.spacing;
    let n = grid.len();
    let mut values = vec![f64::INFINITY; n];
    let mut offenders: Vec<usize> = Vec::new();

    for idx in 0..n {
        if !q0.contains(idx) {
            continue;
        }
        let mut arrived_at: Option<f64> = None;
        let mut exited = false;
        for s in 1..track.len() {
            let (prev, cur) = (&track.samples[s - 1], &track.samples[s]);
            let (a, b) = (prev.values[idx], cur.values[idx]);
            if arrived_at.is_none() && a <= SIGN_TOL && b > SIGN_TOL {
                let theta = if (b - a).abs() > 0.0 { -a / (b - a) } else { 0.0 };
                arrived_at = Some(prev.time + theta * (cur.time - prev.time));
            }
            if b > 0.5 * h {
                exited = true;
            }
            if exited && b < -0.5 * h {
                offenders.push(idx);
                break;
            }
        }
        if let Some(t) = arrived_at {
            values[idx] = t;
        }
    }

    if !offenders.is_empty() {
        return Err(Error::NonMeanConvex { count: offenders.len(), first_node: offenders[0] });
    }
    Ok(ArrivalTimeField { grid, values, domain: q0.clone() })
}

/// One-step mean-convexity probe: runs a short burst of steps and reports
/// whether the field strictly increased on the initial interface band, i.e.
/// the flow immediately enters the region's interior.
pub fn check_mean_convex(
    u0: &ScalarField,
    transport: Option<&AmbientField>,
    params: &FlowParams,
    probe_steps: usize,
) -> Result<bool> {
    let dt = params.time_step(&u0.grid, transport);
    let mut p = params.clone();
    p.max_time = probe_steps.max(4) as f64 * dt;
    p.sample_spacing = p.max_time;
    let track = evolve(u0, transport, &p)?;
    let last = &track.samples[track.len() - 1];
    let h = u0.grid.spacing;
    for idx in 0..u0.grid.len() {
        if u0.values[idx].abs() <= 1.5 * h
            && u0.grid.face_distance(idx) >= 2.0 * h
            && last.values[idx] <= u0.values[idx]
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs `C` to time `s + t` directly, and by composing a stop at `s` with a
/// re-extraction, re-distancing, and a fresh run to `t`; returns both final
/// masks for comparison. With `s = 0` the two are identical by construction.
pub fn compose_flows(
    c: &ClosedSetMask,
    s: f64,
    t: f64,
    transport: Option<&AmbientField>,
    params: &FlowParams,
) -> Result<(ClosedSetMask, ClosedSetMask)> {
    assert!(s >= 0.0 && t > 0.0);
    let u0 = mask_signed_distance(c);
    let mut p_direct = params.clone();
    p_direct.max_time = s + t;
    let direct = evolve(&u0, transport, &p_direct)?;
    let mask_a = direct.mask_at(direct.len() - 1);

    if s == 0.0 {
        return Ok((mask_a.clone(), mask_a));
    }

    let mut p_first = params.clone();
    p_first.max_time = s;
    let first = evolve(&u0, transport, &p_first)?;
    let mid_mask = first.mask_at(first.len() - 1);
    if mid_mask.is_empty() {
        // The flow of the empty set is empty; re-distancing an extinct
        // (all-positive) state would misread its residual valley as a curve.
        return Ok((mask_a, mid_mask));
    }
    let mid = reinitialize(&first.samples[first.len() - 1]);
    let mut p_second = params.clone();
    p_second.max_time = t;
    let second = evolve(&mid, transport, &p_second)?;
    let mask_b = second.mask_at(second.len() - 1);
    Ok((mask_a, mask_b))
}

/// Node-based signed distance to a region mask: positive outside, negative
/// inside, O(h) placement of the interface.
pub fn mask_signed_distance(mask: &ClosedSetMask) -> ScalarField {
    let grid = mask.grid.clone();
    if mask.is_empty() {
        return ScalarField::constant(grid.clone(), 0.0, grid.sentinel());
    }
    let outside = ClosedSetMask {
        grid: grid.clone(),
        inside: mask.inside.iter().map(|&b| !b).collect(),
        repr: mask.repr,
    };
    if outside.is_empty() {
        return ScalarField::constant(grid.clone(), 0.0, -grid.sentinel());
    }
    let d_out = distance_transform(mask);
    let d_in = distance_transform(&outside);
    let values: Vec<f64> = d_out
        .field
        .values
        .iter()
        .zip(&d_in.field.values)
        .map(|(&o, &i)| o - i)
        .collect();
    ScalarField { grid, values, time: 0.0 }
}
