//! Analytic implicit barriers `K(t) = {f(., t) <= 0}` and exact evaluation of
//! the boundary quantities: outward normal `nu = grad f / |grad f|`, scalar
//! mean curvature `H = -Div(nu)`, normal velocity `v = -(1/|grad f|) df/dt`,
//! and the comparison quantities `Phi = v - H`, `Phi_X = Phi - X . nu`.
//!
//! The built-in library covers the shapes every downstream check leans on:
//! balls with the radius law `sqrt(delta^2 - c t)` (and their complements,
//! which include the exact shrinking-sphere solution at `c = 2m`),
//! half-spaces with constant drift, outward offsets of distance-like
//! barriers, and affine images.

use crate::ambient::AmbientField;
use crate::error::{Error, Result};
use crate::field::{ClosedSetMask, MaskRepr};
use crate::grid::Grid;
use crate::Point;
use nalgebra::Matrix3;
use std::fmt;
use std::sync::Arc;

/// Newton projection target for boundary membership.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Regular-value threshold for `|grad f|` on the boundary.
pub const GRAD_TOL: f64 = 1e-6;

type ScalarFn = Arc<dyn Fn(&Point, f64) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Point, f64) -> Point + Send + Sync>;
type HessFn = Arc<dyn Fn(&Point, f64) -> Matrix3<f64> + Send + Sync>;
type SeedFn = Arc<dyn Fn(f64, usize) -> Vec<Point> + Send + Sync>;

#[derive(Clone)]
pub struct ImplicitBarrier {
    pub name: String,
    pub dim: usize,
    pub time_interval: (f64, f64),
    f: ScalarFn,
    grad: GradFn,
    hess: HessFn,
    dft: ScalarFn,
    seeds: SeedFn,
}

impl fmt::Debug for ImplicitBarrier {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("ImplicitBarrier")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("time_interval", &self.time_interval)
            .finish()
    }
}

/// Exact values at one boundary point.
#[derive(Debug, Clone)]
pub struct BarrierPointReport {
    pub point: Point,
    pub time: f64,
    pub nu: Point,
    pub h: f64,
    pub v: f64,
    pub phi: f64,
    pub phi_x: f64,
}

#[derive(Debug, Clone)]
pub struct StrongClassification {
    pub strong: bool,
    pub worst_phi: f64,
    pub worst_point: Point,
    pub worst_time: f64,
}

impl ImplicitBarrier {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        time_interval: (f64, f64),
        f: impl Fn(&Point, f64) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Point, f64) -> Point + Send + Sync + 'static,
        hess: impl Fn(&Point, f64) -> Matrix3<f64> + Send + Sync + 'static,
        dft: impl Fn(&Point, f64) -> f64 + Send + Sync + 'static,
        seeds: impl Fn(f64, usize) -> Vec<Point> + Send + Sync + 'static,
    ) -> Self {
        assert!(dim == 2 || dim == 3);
        assert!(time_interval.0 <= time_interval.1);
        ImplicitBarrier {
            name: name.into(),
            dim,
            time_interval,
            f: Arc::new(f),
            grad: Arc::new(grad),
            hess: Arc::new(hess),
            dft: Arc::new(dft),
            seeds: Arc::new(seeds),
        }
    }

    pub fn value(&self, p: &Point, t: f64) -> f64 {
        (self.f)(p, t)
    }

    pub fn gradient(&self, p: &Point, t: f64) -> Point {
        (self.grad)(p, t)
    }

    pub fn hessian(&self, p: &Point, t: f64) -> Matrix3<f64> {
        (self.hess)(p, t)
    }

    pub fn time_derivative(&self, p: &Point, t: f64) -> f64 {
        (self.dft)(p, t)
    }

    /// Deterministic lattice of points on (or projected to) the boundary at
    /// time `t`.
    pub fn boundary_seeds(&self, t: f64, n: usize) -> Vec<Point> {
        (self.seeds)(t, n)
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t >= self.time_interval.0 - 1e-12 && t <= self.time_interval.1 + 1e-12
    }

    /// Newton projection of `p` onto `{f(., t) = 0}` along the gradient.
    pub fn project_to_boundary(&self, p: &Point, t: f64) -> Result<Point> {
        let mut x = *p;
        for _ in 0..80 {
            let fx = self.value(&x, t);
            if fx.abs() <= BOUNDARY_TOL {
                return Ok(x);
            }
            let g = self.gradient(&x, t);
            let gn2 = g.norm_squared();
            if gn2.sqrt() < GRAD_TOL {
                return Err(Error::NotRegularBoundaryPoint {
                    point: x,
                    time: t,
                    grad_norm: gn2.sqrt(),
                });
            }
            x -= g * (fx / gn2);
        }
        Err(Error::NotRegularBoundaryPoint {
            point: x,
            time: t,
            grad_norm: self.gradient(&x, t).norm(),
        })
    }

    /// `{f(., t) <= 0}` sampled to grid nodes.
    pub fn mask_on(&self, grid: &Grid, t: f64) -> ClosedSetMask {
        ClosedSetMask::from_predicate(grid.clone(), MaskRepr::Sublevel, |p| {
            self.value(&p, t) <= 0.0
        })
    }

    /// Outward offset by `eps`; exact when `f` is a signed distance in `x`,
    /// which holds for the built-in library. This is the fattening
    /// `K_eps(t) = {p: dist(p, K(t)) <= eps}`.
    pub fn offset_outward(&self, eps: f64) -> ImplicitBarrier {
        let f = self.f.clone();
        let grad = self.grad.clone();
        let hess = self.hess.clone();
        let dft = self.dft.clone();
        let seeds = self.seeds.clone();
        let g2 = self.grad.clone();
        ImplicitBarrier::new(
            format!("offset({}, {eps})", self.name),
            self.dim,
            self.time_interval,
            move |p, t| f(p, t) - eps,
            move |p, t| grad(p, t),
            move |p, t| hess(p, t),
            move |p, t| dft(p, t),
            move |t, n| {
                seeds(t, n)
                    .into_iter()
                    .map(|s| {
                        let g = g2(&s, t);
                        let gn = g.norm();
                        if gn > GRAD_TOL {
                            s + g * (eps / gn)
                        } else {
                            s
                        }
                    })
                    .collect()
            },
        )
    }

    /// Image under `x -> rot * x + shift` with `rot` orthogonal.
    pub fn affine_image(&self, rot: Matrix3<f64>, shift: Point) -> ImplicitBarrier {
        let rt = rot.transpose();
        let f = self.f.clone();
        let grad = self.grad.clone();
        let hess = self.hess.clone();
        let dft = self.dft.clone();
        let seeds = self.seeds.clone();
        ImplicitBarrier::new(
            format!("affine({})", self.name),
            self.dim,
            self.time_interval,
            move |p, t| f(&(rt * (p - shift)), t),
            move |p, t| rot * grad(&(rt * (p - shift)), t),
            move |p, t| {
                let y = rt * (p - shift);
                rot * hess(&y, t) * rt
            },
            move |p, t| dft(&(rt * (p - shift)), t),
            move |t, n| seeds(t, n).into_iter().map(|s| rot * s + shift).collect(),
        )
    }
}

/// Ball barrier with radius law `R(t) = sqrt(delta^2 - c t)`:
/// `K(t) = {|x - center| <= R(t)}`. `c = 0` gives a static ball, `c < 0` an
/// expanding one, `c > 2m` a strong shrinking one.
pub fn shrinking_ball(
    dim: usize,
    center: Point,
    delta: f64,
    c: f64,
    interval: (f64, f64),
) -> ImplicitBarrier {
    ball_like(dim, center, delta, c, interval, false)
}

/// Complement form `K(t) = {|x - center| >= R(t)}` with the same radius law.
/// With `c = 2m` this is the exact shrinking-sphere solution.
pub fn ball_complement(
    dim: usize,
    center: Point,
    delta: f64,
    c: f64,
    interval: (f64, f64),
) -> ImplicitBarrier {
    ball_like(dim, center, delta, c, interval, true)
}

fn ball_like(
    dim: usize,
    center: Point,
    delta: f64,
    c: f64,
    interval: (f64, f64),
    complement: bool,
) -> ImplicitBarrier {
    let radius = move |t: f64| -> f64 {
        let r2 = delta * delta - c * t;
        assert!(r2 > 0.0, "ball barrier radius vanished inside its time interval");
        r2.sqrt()
    };
    radius(interval.0);
    radius(interval.1);
    let sign = if complement { -1.0 } else { 1.0 };
    let name = if complement {
        format!("ball_complement(delta={delta}, c={c})")
    } else {
        format!("ball(delta={delta}, c={c})")
    };
    ImplicitBarrier::new(
        name,
        dim,
        interval,
        move |p: &Point, t| sign * (spatial_norm(dim, &(p - center)) - radius(t)),
        move |p: &Point, _t| {
            let d = p - center;
            let r = spatial_norm(dim, &d);
            sign * active(dim, &d) / r.max(1e-300)
        },
        move |p: &Point, _t| {
            // Hessian of |x|: (I - x x^T / |x|^2) / |x| over the active dims.
            let d = active(dim, &(p - center));
            let r = spatial_norm(dim, &(p - center)).max(1e-300);
            let mut m = Matrix3::zeros();
            for a in 0..dim {
                m[(a, a)] = 1.0;
            }
            m -= d * d.transpose() / (r * r);
            m * (sign / r)
        },
        move |_p, t| sign * c / (2.0 * radius(t)),
        move |t, n| sphere_lattice(dim, &center, radius(t), n),
    )
}

/// Half-space `K(t) = {x . normal <= offset + drift * t}`; the boundary plane
/// translates at speed `drift` along its unit normal.
pub fn half_space(
    dim: usize,
    normal: Point,
    offset: f64,
    drift: f64,
    interval: (f64, f64),
    seed_extent: f64,
) -> ImplicitBarrier {
    let n = active(dim, &normal).normalize();
    // A tangent frame for seeding points on the plane.
    let t1 = if dim == 2 {
        Point::new(-n.y, n.x, 0.0)
    } else if n.x.abs() < 0.9 {
        n.cross(&Point::new(1.0, 0.0, 0.0)).normalize()
    } else {
        n.cross(&Point::new(0.0, 1.0, 0.0)).normalize()
    };
    let t2 = if dim == 3 { n.cross(&t1) } else { Point::zeros() };
    ImplicitBarrier::new(
        format!("half_space(drift={drift})"),
        dim,
        interval,
        move |p: &Point, t| p.dot(&n) - offset - drift * t,
        move |_p, _t| n,
        move |_p, _t| Matrix3::zeros(),
        move |_p, _t| -drift,
        move |t, count| {
            let base = n * (offset + drift * t);
            if dim == 2 {
                (0..count)
                    .map(|i| {
                        let s = seed_extent * (2.0 * (i as f64 + 0.5) / count as f64 - 1.0);
                        base + t1 * s
                    })
                    .collect()
            } else {
                let side = (count as f64).sqrt().ceil() as usize;
                let mut out = Vec::with_capacity(side * side);
                for i in 0..side {
                    for j in 0..side {
                        let a = seed_extent * (2.0 * (i as f64 + 0.5) / side as f64 - 1.0);
                        let b = seed_extent * (2.0 * (j as f64 + 0.5) / side as f64 - 1.0);
                        out.push(base + t1 * a + t2 * b);
                    }
                }
                out
            }
        },
    )
}

fn spatial_norm(dim: usize, d: &Point) -> f64 {
    if dim == 2 {
        d.xy().norm()
    } else {
        d.norm()
    }
}

fn active(dim: usize, d: &Point) -> Point {
    if dim == 2 {
        Point::new(d.x, d.y, 0.0)
    } else {
        *d
    }
}

/// Uniform angles in 2-d, Fibonacci lattice in 3-d.
fn sphere_lattice(dim: usize, center: &Point, radius: f64, n: usize) -> Vec<Point> {
    if dim == 2 {
        (0..n)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
                center + Point::new(radius * th.cos(), radius * th.sin(), 0.0)
            })
            .collect()
    } else {
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let rho = (1.0 - z * z).sqrt();
                let th = golden * i as f64;
                center + Point::new(radius * rho * th.cos(), radius * rho * th.sin(), radius * z)
            })
            .collect()
    }
}

/// Projects `x` to the boundary at time `t` and evaluates the report there.
pub fn eval_barrier(
    b: &ImplicitBarrier,
    x: &Point,
    t: f64,
    field: Option<&AmbientField>,
) -> Result<BarrierPointReport> {
    if !b.contains_time(t) {
        return Err(Error::TimeOutsideInterval {
            time: t,
            start: b.time_interval.0,
            end: b.time_interval.1,
        });
    }
    let p = b.project_to_boundary(x, t)?;
    let g = b.gradient(&p, t);
    let gn = g.norm();
    if gn < GRAD_TOL {
        return Err(Error::NotRegularBoundaryPoint { point: p, time: t, grad_norm: gn });
    }
    let nu = g / gn;
    let hess = b.hessian(&p, t);
    let mut trace = 0.0;
    for a in 0..b.dim {
        trace += hess[(a, a)];
    }
    let h = -(trace - (nu.transpose() * hess * nu)[(0, 0)]) / gn;
    let v = -b.time_derivative(&p, t) / gn;
    let phi = v - h;
    let x_dot_nu = field.map_or(0.0, |f| f.at(&p).dot(&nu));
    Ok(BarrierPointReport {
        point: p,
        time: t,
        nu,
        h,
        v,
        phi,
        phi_x: phi - x_dot_nu,
    })
}

/// Samples the boundary on >= 20 time slices and classifies the barrier as
/// strong iff the worst sampled `Phi` (or `Phi_X`) stays below `-1e-6`.
pub fn classify_strong(
    b: &ImplicitBarrier,
    field: Option<&AmbientField>,
    samples: usize,
) -> Result<StrongClassification> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "classify_strong needs >= 100 boundary samples per slice, got {samples}"
        )));
    }
    let (a, end) = b.time_interval;
    let slices = 20;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_point = Point::zeros();
    let mut worst_time = a;
    for s in 0..=slices {
        let t = a + (end - a) * s as f64 / slices as f64;
        for seed in b.boundary_seeds(t, samples) {
            let rep = eval_barrier(b, &seed, t, field)?;
            let phi = if field.is_some() { rep.phi_x } else { rep.phi };
            if phi > worst {
                worst = phi;
                worst_point = rep.point;
                worst_time = t;
            }
        }
    }
    Ok(StrongClassification {
        strong: worst < -1e-6,
        worst_phi: worst,
        worst_point,
        worst_time,
    })
}

/// Mean curvature of a sphere of radius `r/2` in flat `R^(m+1)`; the finite
/// propagation speed used by the distance bounds.
pub fn finite_speed_bound(r: f64, m: usize) -> f64 {
    assert!(r > 0.0 && m >= 1);
    2.0 * m as f64 / r
}

/// Quintic-capped squared distance from `p`: equals `|x-p|^2` for
/// `|x-p| <= 1/2`, plateaus at 1 beyond `|x-p| = 1`, and is C^2 throughout.
fn capped_sq(dim: usize, p: &Point, x: &Point) -> (f64, Point, Matrix3<f64>) {
    let d = active(dim, &(x - p));
    let y = d.norm_squared();
    let (a0, b0) = (0.25, 1.0);
    let (val, d1, d2) = if y <= a0 {
        (y, 1.0, 0.0)
    } else if y >= b0 {
        (b0, 0.0, 0.0)
    } else {
        let w = b0 - a0;
        let tau = (y - a0) / w;
        let hq = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
        let hq1 = tau * tau * (30.0 + tau * (-60.0 + 30.0 * tau));
        let hq2 = tau * (60.0 + tau * (-180.0 + 120.0 * tau));
        (
            y + (b0 - y) * hq,
            1.0 - hq + (b0 - y) * hq1 / w,
            -2.0 * hq1 / w + (b0 - y) * hq2 / (w * w),
        )
    };
    // grad = blend'(y) * 2 d ; hess = 2 blend' I + 4 blend'' d d^T
    let grad = d * (2.0 * d1);
    let mut hess = Matrix3::zeros();
    for a in 0..dim {
        hess[(a, a)] = 2.0 * d1;
    }
    hess += d * d.transpose() * (4.0 * d2);
    (val, grad, hess)
}

/// Quadratic pinch of a barrier at a final-boundary point `p`: adds
/// `c (delta(x) - t)` to the (gradient-normalized) defining function, where
/// `delta` coincides with `dist(., p)^2` near `p`. The returned barrier ends
/// at time 0 (the input's end time is shifted there), lies in the interior of
/// the input for `t < 0`, and touches its boundary at time 0 only at `p`,
/// separating quadratically with rate `c`.
pub fn perturb_barrier(b: &ImplicitBarrier, p: &Point, c: f64) -> Result<ImplicitBarrier> {
    assert!(c > 0.0, "perturbation rate must be positive");
    let end = b.time_interval.1;
    let p_star = b.project_to_boundary(p, end)?;
    let g0 = b.gradient(&p_star, end).norm();
    if g0 < GRAD_TOL {
        return Err(Error::NotRegularBoundaryPoint {
            point: p_star,
            time: end,
            grad_norm: g0,
        });
    }
    let scale = 1.0 / g0;
    let dim = b.dim;
    let interval = (b.time_interval.0 - end, 0.0);

    let (bf, bg, bh, bd, bs) =
        (b.f.clone(), b.grad.clone(), b.hess.clone(), b.dft.clone(), b.seeds.clone());
    let pc = p_star;
    let tilde = ImplicitBarrier::new(
        format!("perturbed({}, c={c})", b.name),
        dim,
        interval,
        move |x, t| scale * bf(x, t + end) + c * (capped_sq(dim, &pc, x).0 - t),
        move |x, t| scale * bg(x, t + end) + capped_sq(dim, &pc, x).1 * c,
        move |x, t| scale * bh(x, t + end) + capped_sq(dim, &pc, x).2 * c,
        move |x, t| scale * bd(x, t + end) - c,
        move |t, n| bs(t + end, n),
    );

    // Wrap the seed generator so it lands on the perturbed boundary, then
    // check that the perturbation kept 0 a regular value there.
    let inner = tilde.clone();
    let inner2 = tilde.clone();
    let seeded = ImplicitBarrier::new(
        tilde.name.clone(),
        dim,
        interval,
        {
            let t = tilde.clone();
            move |x, s| t.value(x, s)
        },
        {
            let t = tilde.clone();
            move |x, s| t.gradient(x, s)
        },
        {
            let t = tilde.clone();
            move |x, s| t.hessian(x, s)
        },
        {
            let t = tilde.clone();
            move |x, s| t.time_derivative(x, s)
        },
        move |t, n| {
            inner
                .boundary_seeds(t, n)
                .iter()
                .filter_map(|s| inner2.project_to_boundary(s, t).ok())
                .collect()
        },
    );

    for seed in seeded.boundary_seeds(0.0, 256) {
        let g = seeded.gradient(&seed, 0.0).norm();
        if g < GRAD_TOL {
            return Err(Error::PerturbationTooLarge { point: seed });
        }
    }
    Ok(seeded)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    #[test]
    fn exact_shrinking_sphere_example() {
        // Complement-of-ball with c = 2m at m = 1: at t = -1 the boundary is
        // the circle of radius sqrt(2); v = sqrt(2)/2, H = 1/sqrt(2), Phi = 0.
        let b = ball_complement(2, Point::zeros(), 1e-9, 2.0, (-2.0, -0.5));
        let x = Point::new(2f64.sqrt(), 0.0, 0.0);
        let rep = eval_barrier(&b, &x, -1.0, None).unwrap();
        assert!((rep.v - 0.5 * 2f64.sqrt()).abs() < 1e-9);
        assert!((rep.h - 1.0 / 2f64.sqrt()).abs() < 1e-9);
        assert!(rep.phi.abs() < 1e-10);
        // nu points out of K = exterior region, i.e. toward the origin.
        assert!((rep.nu - Point::new(-1.0, 0.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn static_half_space_is_flat_and_stationary() {
        let b = half_space(2, Point::new(1.0, 0.0, 0.0), 0.0, 0.0, (0.0, 1.0), 2.0);
        let rep = eval_barrier(&b, &Point::new(0.3, 0.7, 0.0), 0.5, None).unwrap();
        assert!((rep.nu - Point::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert_eq!(rep.h, 0.0);
        assert_eq!(rep.v, 0.0);
        assert_eq!(rep.phi, 0.0);
    }

    #[test]
    fn static_disk_with_transport() {
        let b = shrinking_ball(2, Point::zeros(), 1.0, 0.0, (0.0, 1.0));
        let field = AmbientField::constant(Point::new(0.3, 0.0, 0.0));
        let rep = eval_barrier(&b, &Point::new(1.0, 0.0, 0.0), 0.0, Some(&field)).unwrap();
        assert!((rep.nu - Point::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((rep.h - (-1.0)).abs() < 1e-12);
        assert_eq!(rep.v, 0.0);
        assert!((rep.phi_x - 0.7).abs() < 1e-12);
        // Report consistency.
        assert_eq!(rep.phi, rep.v - rep.h);
    }

    #[test]
    fn classification_of_the_three_ball_families() {
        // Strong: c > 2m inside a short interval.
        let strong = shrinking_ball(2, Point::zeros(), 0.5, 3.0, (0.0, 0.05));
        let cls = classify_strong(&strong, None, 128).unwrap();
        assert!(cls.strong, "worst phi = {}", cls.worst_phi);

        // Exact solution: c = 2m, worst phi ~ 0.
        let exact = shrinking_ball(2, Point::zeros(), 0.5, 2.0, (0.0, 0.05));
        let cls = classify_strong(&exact, None, 128).unwrap();
        assert!(!cls.strong);
        assert!(cls.worst_phi.abs() < 1e-9);

        // Expanding: phi > 0.
        let exp = shrinking_ball(2, Point::zeros(), 0.5, -1.0, (0.0, 0.05));
        let cls = classify_strong(&exp, None, 128).unwrap();
        assert!(!cls.strong);
        assert!(cls.worst_phi > 0.0);
    }

    #[test]
    fn classify_requires_enough_samples() {
        let b = shrinking_ball(2, Point::zeros(), 0.5, 3.0, (0.0, 0.05));
        assert!(classify_strong(&b, None, 99).is_err());
    }

    #[test]
    fn exact_sphere_phi_vanishes_everywhere_sampled() {
        // m = 2 in 3-d; |Phi| <= 1e-10 at all sampled points and times.
        let b = ball_complement(3, Point::zeros(), 1e-9, 4.0, (-1.5, -0.2));
        let slices = 23;
        for s in 0..=slices {
            let t = -1.5 + 1.3 * s as f64 / slices as f64;
            for seed in b.boundary_seeds(t, 120) {
                let rep = eval_barrier(&b, &seed, t, None).unwrap();
                assert!(rep.phi.abs() <= 1e-10, "phi = {} at t = {t}", rep.phi);
            }
        }
    }

    #[test]
    fn rotation_equivariance() {
        let b = shrinking_ball(2, Point::new(0.4, -0.2, 0.0), 0.8, 2.5, (0.0, 0.1));
        let th: f64 = 0.73;
        let rot = Matrix3::new(
            th.cos(), -th.sin(), 0.0,
            th.sin(), th.cos(), 0.0,
            0.0, 0.0, 1.0,
        );
        let br = b.affine_image(rot, Point::zeros());
        let x = Point::new(1.1, -0.1, 0.0);
        let r1 = eval_barrier(&b, &x, 0.05, None).unwrap();
        let r2 = eval_barrier(&br, &(rot * x), 0.05, None).unwrap();
        assert!((rot * r1.nu - r2.nu).norm() < 1e-8);
        assert!((r1.h - r2.h).abs() < 1e-8);
        assert!((r1.v - r2.v).abs() < 1e-8);
        assert!((r1.phi - r2.phi).abs() < 1e-8);
    }

    #[test]
    fn fattened_strong_ball_stays_strong() {
        let b = shrinking_ball(2, Point::zeros(), 0.5, 3.0, (0.0, 0.05));
        let mut threshold = 0.0;
        for eps in [0.01, 0.02, 0.05, 0.1] {
            let fat = b.offset_outward(eps);
            let cls = classify_strong(&fat, None, 128).unwrap();
            if cls.strong {
                threshold = eps;
            }
        }
        assert!(threshold >= 0.1, "fattening threshold only {threshold}");
    }

    #[test]
    fn finite_speed_values() {
        assert_eq!(finite_speed_bound(1.0, 1), 2.0);
        assert_eq!(finite_speed_bound(2.0, 2), 2.0);
        let mut prev = f64::INFINITY;
        for r in [1.0, 2.0, 4.0, 8.0, 1e6] {
            let h = finite_speed_bound(r, 1);
            assert!(h < prev);
            prev = h;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn perturbed_half_space_is_a_tangent_paraboloid() {
        // f = x1, p = 0, c = 1: the perturbed boundary at t = 0 is
        // x1 = -|x|^2 near the origin (delta = dist^2), tangent to {x1 = 0}.
        let b = half_space(2, Point::new(1.0, 0.0, 0.0), 0.0, 0.0, (-1.0, 0.0), 2.0);
        let tb = perturb_barrier(&b, &Point::zeros(), 1.0).unwrap();
        for s in [0.05, 0.1, 0.2] {
            let x = Point::new(0.0, s, 0.0);
            // Solve f~(x1, s) = 0 for x1 by projection.
            let q = tb.project_to_boundary(&x, 0.0).unwrap();
            assert!((q.x + (q.x * q.x + q.y * q.y)).abs() < 1e-6, "q = {q:?}");
        }
        // Interior containment for t < 0: f~ > f means K~ strictly inside K.
        for t in [-0.5, -0.1, -0.01] {
            for seed in tb.boundary_seeds(t, 64) {
                assert!(b.value(&seed, t) < 0.0, "not interior at t = {t}");
            }
        }
        // Contact at t = 0 only at p (within a small radius).
        for seed in tb.boundary_seeds(0.0, 256) {
            if b.value(&seed, 0.0).abs() < 1e-6 {
                assert!(seed.norm() < 1e-3, "extra contact at {seed:?}");
            }
        }
    }

    #[test]
    fn quadratic_separation_rate_approaches_c() {
        let c = 0.8;
        let b = half_space(2, Point::new(1.0, 0.0, 0.0), 0.0, 0.0, (-1.0, 0.0), 2.0);
        let tb = perturb_barrier(&b, &Point::zeros(), c).unwrap();
        let mut last_ratio = 0.0;
        for s in [0.2, 0.1, 0.05, 0.02] {
            let q = tb.project_to_boundary(&Point::new(0.0, s, 0.0), 0.0).unwrap();
            // dist to {x1 = 0} is |q.x|; dist(q, p)^2 = |q|^2.
            last_ratio = q.x.abs() / q.norm_squared();
        }
        assert!((last_ratio - c).abs() <= 0.2 * c, "ratio {last_ratio} vs c {c}");
    }

    #[test]
    fn perturbation_phi_offset_is_analytic_and_vanishes_with_c() {
        let b = shrinking_ball(2, Point::zeros(), 1.0, 2.0, (-0.1, 0.0));
        let p = Point::new(1.0, 0.0, 0.0);
        let base = eval_barrier(&b, &p, 0.0, None).unwrap().phi;
        let m = 1.0;
        for c in [0.2, 0.05, 0.01] {
            let tb = perturb_barrier(&b, &p, c).unwrap();
            let phi = eval_barrier(&tb, &p, 0.0, None).unwrap().phi;
            // Offset of the added term at the contact point: c (1 + 2m).
            assert!(
                (phi - base - c * (1.0 + 2.0 * m)).abs() < 1e-6,
                "c = {c}: phi = {phi}, base = {base}"
            );
        }
        let tb = perturb_barrier(&b, &p, 1e-6).unwrap();
        let phi = eval_barrier(&tb, &p, 0.0, None).unwrap().phi;
        assert!((phi - base).abs() < 1e-5);
    }

    #[test]
    fn boundary_seeds_cover_the_circle() {
        let b = shrinking_ball(2, Point::zeros(), 1.0, 0.0, (0.0, 1.0));
        let seeds = b.boundary_seeds(0.0, 100);
        assert_eq!(seeds.len(), 100);
        let mut worst_gap = 0.0f64;
        for (i, s) in seeds.iter().enumerate() {
            assert!((s.norm() - 1.0).abs() < 1e-12);
            let next = seeds[(i + 1) % seeds.len()];
            worst_gap = worst_gap.max((s - next).norm());
        }
        assert!(worst_gap < 2.0 * TWO_PI / 100.0);
    }
}
