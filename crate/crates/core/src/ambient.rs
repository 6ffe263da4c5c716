//! The ambient transport field `X` with its Jacobian and the bounds the
//! comparison theorems need: `chi >= sup |X|`, `sup |grad X|`, and the lower
//! bound on the symmetrized Jacobian that plays the role of a Ricci bound in
//! flat space.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::Point;
use nalgebra::{Matrix2, Matrix3, SymmetricEigen};
use std::fmt;
use std::sync::Arc;

type VecFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
type JacFn = Arc<dyn Fn(&Point) -> Matrix3<f64> + Send + Sync>;

/// Smooth vector field on the run box, with analytic Jacobian.
#[derive(Clone)]
pub struct AmbientField {
    pub name: String,
    eval: VecFn,
    jac: JacFn,
    /// `chi`: bound on `|X|` over the run box.
    pub bound_sup_norm: f64,
    /// Bound on the Frobenius norm of `grad X` over the run box.
    pub bound_jac: f64,
}

impl fmt::Debug for AmbientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AmbientField")
            .field("name", &self.name)
            .field("bound_sup_norm", &self.bound_sup_norm)
            .field("bound_jac", &self.bound_jac)
            .finish()
    }
}

impl AmbientField {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&Point) -> Point + Send + Sync + 'static,
        jac: impl Fn(&Point) -> Matrix3<f64> + Send + Sync + 'static,
    ) -> Self {
        AmbientField {
            name: name.into(),
            eval: Arc::new(eval),
            jac: Arc::new(jac),
            bound_sup_norm: 0.0,
            bound_jac: 0.0,
        }
    }

    pub fn at(&self, p: &Point) -> Point {
        (self.eval)(p)
    }

    pub fn jacobian(&self, p: &Point) -> Matrix3<f64> {
        (self.jac)(p)
    }

    /// Computes the sup-norm bounds by sampling every node of the grid; the
    /// theorems only ever use the field inside the run box.
    pub fn bounded_on(mut self, grid: &Grid) -> Self {
        let mut sup = 0.0f64;
        let mut supj = 0.0f64;
        for i in 0..grid.len() {
            let p = grid.pos(i);
            sup = sup.max(self.at(&p).norm());
            supj = supj.max(self.jacobian(&p).norm());
        }
        self.bound_sup_norm = sup;
        self.bound_jac = supj;
        self
    }

    /// Checks the declared bounds against every grid node.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let tol = 1e-12;
        for i in 0..grid.len() {
            let p = grid.pos(i);
            let n = self.at(&p).norm();
            if n > self.bound_sup_norm + tol {
                return Err(Error::InvalidArgument(format!(
                    "|X| = {n} exceeds declared bound {} at {p:?}",
                    self.bound_sup_norm
                )));
            }
            let j = self.jacobian(&p).norm();
            if j > self.bound_jac + tol {
                return Err(Error::InvalidArgument(format!(
                    "|grad X| = {j} exceeds declared bound {} at {p:?}",
                    self.bound_jac
                )));
            }
        }
        Ok(())
    }

    pub fn zero() -> Self {
        AmbientField::new("zero", |_| Point::zeros(), |_| Matrix3::zeros())
    }

    pub fn constant(v: Point) -> Self {
        AmbientField::new(format!("constant({}, {}, {})", v.x, v.y, v.z), move |_| v, |_| {
            Matrix3::zeros()
        })
    }

    /// `X(x) = kappa * x`.
    pub fn radial(kappa: f64) -> Self {
        AmbientField::new(
            format!("radial({kappa})"),
            move |p: &Point| kappa * p,
            move |_| Matrix3::identity() * kappa,
        )
    }

    /// Rigid rotation in the xy-plane: `X = omega * (-y, x, 0)`.
    pub fn rotation(omega: f64) -> Self {
        AmbientField::new(
            format!("rotation({omega})"),
            move |p: &Point| Point::new(-omega * p.y, omega * p.x, 0.0),
            move |_| {
                Matrix3::new(0.0, -omega, 0.0, omega, 0.0, 0.0, 0.0, 0.0, 0.0)
            },
        )
    }

    /// Planar shear: `X = (a*y, 0, 0)`.
    pub fn shear(a: f64) -> Self {
        AmbientField::new(
            format!("shear({a})"),
            move |p: &Point| Point::new(a * p.y, 0.0, 0.0),
            move |_| Matrix3::new(0.0, a, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        )
    }

    /// Component-wise polynomial field. Each component is a list of
    /// `(coefficient, [px, py, pz])` monomials.
    pub fn polynomial(terms: [Vec<(f64, [u8; 3])>; 3]) -> Self {
        let t2 = terms.clone();
        let eval = move |p: &Point| {
            let mut out = Point::zeros();
            for c in 0..3 {
                for &(a, pw) in &terms[c] {
                    out[c] += a * mono(p, pw);
                }
            }
            out
        };
        let jac = move |p: &Point| {
            let mut m = Matrix3::zeros();
            for c in 0..3 {
                for &(a, pw) in &t2[c] {
                    for d in 0..3 {
                        if pw[d] > 0 {
                            let mut q = pw;
                            q[d] -= 1;
                            m[(c, d)] += a * pw[d] as f64 * mono(p, q);
                        }
                    }
                }
            }
            m
        };
        AmbientField::new("polynomial", eval, jac)
    }
}

fn mono(p: &Point, pw: [u8; 3]) -> f64 {
    p.x.powi(pw[0] as i32) * p.y.powi(pw[1] as i32) * p.z.powi(pw[2] as i32)
}

/// Lower bound for `Ric^X(v,v)/|v|^2` on the grid: in flat space this is the
/// smallest eigenvalue of the symmetrized Jacobian `(grad X + grad X^T)/2`,
/// minimized over nodes. Only the active `dim x dim` block enters.
pub fn ricx_lower_bound(field: &AmbientField, grid: &Grid) -> f64 {
    let mut lo = f64::INFINITY;
    for idx in 0..grid.len() {
        let p = grid.pos(idx);
        let j = field.jacobian(&p);
        let s = 0.5 * (j + j.transpose());
        let min_ev = if grid.dim == 2 {
            let b = Matrix2::new(s[(0, 0)], s[(0, 1)], s[(1, 0)], s[(1, 1)]);
            SymmetricEigen::new(b).eigenvalues.min()
        } else {
            SymmetricEigen::new(s).eigenvalues.min()
        };
        lo = lo.min(min_ev);
    }
    lo
}
