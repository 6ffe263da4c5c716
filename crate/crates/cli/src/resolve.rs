//! Turns a parsed scenario into runtime objects: grid, signed distance
//! fields for the named shapes, the ambient field with its sampled bounds,
//! and flow parameters. Name-resolution failures are reported distinctly
//! from parse and runtime errors.

use crate::config::{FieldConfig, ScenarioConfig, SetConfig};
use nalgebra::Vector2;
use setflow_core::ambient::{ricx_lower_bound, AmbientField};
use setflow_core::field::{ClosedSetMask, ScalarField};
use setflow_core::{FlowParams, Grid, Point};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct ResolveError(pub String);

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "resolution error: {}", self.0)
    }
}

impl std::error::Error for ResolveError {}

pub struct ResolvedSet {
    pub config: SetConfig,
    /// Signed distance to the shape (negative inside the region).
    pub sdf: ScalarField,
}

impl ResolvedSet {
    /// Field the solver starts from: signed for regions, unsigned for
    /// boundary tracks.
    pub fn initial_field(&self) -> ScalarField {
        if self.config.as_boundary {
            ScalarField {
                grid: self.sdf.grid.clone(),
                values: self.sdf.values.iter().map(|v| v.abs()).collect(),
                time: self.sdf.time,
            }
        } else {
            self.sdf.clone()
        }
    }

    pub fn mask(&self) -> ClosedSetMask {
        if self.config.as_boundary {
            self.sdf.zeroset_mask()
        } else {
            self.sdf.sublevel_mask()
        }
    }

    /// Unsigned distance to the shape's boundary, for interface tracks of a
    /// region set.
    pub fn boundary_field(&self) -> ScalarField {
        ScalarField {
            grid: self.sdf.grid.clone(),
            values: self.sdf.values.iter().map(|v| v.abs()).collect(),
            time: self.sdf.time,
        }
    }
}

pub struct Resolved {
    pub name: String,
    pub grid: Grid,
    pub sets: BTreeMap<String, ResolvedSet>,
    pub field: Option<AmbientField>,
    pub params: Option<FlowParams>,
    /// Sampled bounds recorded before the run.
    pub chi: f64,
    pub jac_bound: f64,
    pub lambda: f64,
}

impl Resolved {
    pub fn set(&self, id: &str) -> Result<&ResolvedSet, ResolveError> {
        self.sets
            .get(id)
            .ok_or_else(|| ResolveError(format!("unknown set id: {id}")))
    }

    pub fn params(&self) -> Result<&FlowParams, ResolveError> {
        self.params
            .as_ref()
            .ok_or_else(|| ResolveError("scenario has no [flow] section".into()))
    }
}

pub fn resolve(cfg: &ScenarioConfig, grid_override: Option<usize>) -> Result<Resolved, ResolveError> {
    let gc = &cfg.grid;
    if gc.dim != 2 && gc.dim != 3 {
        return Err(ResolveError(format!("dim must be 2 or 3, got {}", gc.dim)));
    }
    if gc.origin_len.len() != gc.dim || gc.extent_len.len() != gc.dim {
        return Err(ResolveError("origin/extent length must match dim".into()));
    }
    let spacing = match grid_override {
        Some(n) if n > 0 => 1.0 / n as f64,
        Some(_) => return Err(ResolveError("grid override must be positive".into())),
        None => gc.spacing_len,
    };
    if spacing <= 0.0 {
        return Err(ResolveError("spacing must be positive".into()));
    }
    let hi: Vec<f64> = gc
        .origin_len
        .iter()
        .zip(&gc.extent_len)
        .map(|(o, e)| o + e)
        .collect();
    let grid = Grid::from_box(gc.dim, &gc.origin_len, &hi, spacing);

    // Sets: unions may reference earlier-defined ids.
    let mut sdfs: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut sets = BTreeMap::new();
    for sc in &cfg.sets {
        let values = shape_sdf(sc, &grid, &sdfs)?;
        sdfs.insert(sc.id.clone(), values.clone());
        if sets
            .insert(
                sc.id.clone(),
                ResolvedSet {
                    config: sc.clone(),
                    sdf: ScalarField { grid: grid.clone(), values, time: 0.0 },
                },
            )
            .is_some()
        {
            return Err(ResolveError(format!("duplicate set id: {}", sc.id)));
        }
    }

    let field = ambient_field(&cfg.field, &grid)?;
    let (chi, jac_bound, lambda) = match &field {
        Some(f) => (f.bound_sup_norm, f.bound_jac, ricx_lower_bound(f, &grid)),
        None => (0.0, 0.0, 0.0),
    };

    let params = cfg.flow.as_ref().map(|fc| {
        let mut p = FlowParams::for_grid(&grid, fc.horizon_time);
        if let Some(c) = fc.cfl {
            p.cfl = c;
        }
        if let Some(b) = fc.band_width_len {
            p.band_width = b;
        }
        if let Some(s) = fc.sample_spacing_time {
            p.sample_spacing = s;
        }
        if let Some(e) = fc.grad_reg {
            p.eps_reg = e;
        }
        if let Some(r) = fc.reinit_every_steps {
            p.reinit_every = r;
        }
        p
    });

    Ok(Resolved {
        name: cfg.name.clone(),
        grid,
        sets,
        field,
        params,
        chi,
        jac_bound,
        lambda,
    })
}

fn point_of(v: &[f64]) -> Point {
    Point::new(
        v.first().copied().unwrap_or(0.0),
        v.get(1).copied().unwrap_or(0.0),
        v.get(2).copied().unwrap_or(0.0),
    )
}

fn shape_sdf(
    sc: &SetConfig,
    grid: &Grid,
    known: &BTreeMap<String, Vec<f64>>,
) -> Result<Vec<f64>, ResolveError> {
    let dim = grid.dim;
    let dist = |p: &Point, c: &Point| -> f64 {
        if dim == 2 {
            (p.xy() - c.xy()).norm()
        } else {
            (p - c).norm()
        }
    };
    let c = point_of(&sc.center_len);
    let values: Vec<f64> = match sc.shape.as_str() {
        "ball" => {
            if sc.radius_len <= 0.0 {
                return Err(ResolveError(format!("set {}: ball needs radius_len > 0", sc.id)));
            }
            (0..grid.len()).map(|i| dist(&grid.pos(i), &c) - sc.radius_len).collect()
        }
        "ball_complement" => {
            (0..grid.len()).map(|i| sc.radius_len - dist(&grid.pos(i), &c)).collect()
        }
        "annulus" => {
            let (ri, ro) = (sc.inner_radius_len, sc.outer_radius_len);
            if !(0.0 < ri && ri < ro) {
                return Err(ResolveError(format!(
                    "set {}: annulus needs 0 < inner_radius_len < outer_radius_len",
                    sc.id
                )));
            }
            (0..grid.len())
                .map(|i| {
                    let d = dist(&grid.pos(i), &c);
                    (ri - d).max(d - ro)
                })
                .collect()
        }
        "half_space" => {
            if sc.normal.is_empty() {
                return Err(ResolveError(format!("set {}: half_space needs a normal", sc.id)));
            }
            let n = point_of(&sc.normal).normalize();
            (0..grid.len()).map(|i| grid.pos(i).dot(&n) - sc.offset_len).collect()
        }
        "union" => {
            if sc.of.is_empty() {
                return Err(ResolveError(format!("set {}: union needs member ids", sc.id)));
            }
            let mut acc = vec![f64::INFINITY; grid.len()];
            for id in &sc.of {
                let part = known
                    .get(id)
                    .ok_or_else(|| ResolveError(format!("set {}: unknown member {id}", sc.id)))?;
                for (a, &b) in acc.iter_mut().zip(part) {
                    *a = a.min(b);
                }
            }
            acc
        }
        "polygon" => {
            if sc.points_len.len() < 3 {
                return Err(ResolveError(format!("set {}: polygon needs >= 3 points", sc.id)));
            }
            if dim != 2 {
                return Err(ResolveError("polygon sets are 2-d only".into()));
            }
            let pts: Vec<Vector2<f64>> =
                sc.points_len.iter().map(|p| Vector2::new(p[0], p[1])).collect();
            (0..grid.len())
                .map(|i| {
                    let q = grid.pos(i).xy();
                    polygon_signed_distance(&pts, &q)
                })
                .collect()
        }
        other => {
            return Err(ResolveError(format!("set {}: unknown shape {other}", sc.id)));
        }
    };
    Ok(values)
}

fn polygon_signed_distance(pts: &[Vector2<f64>], q: &Vector2<f64>) -> f64 {
    let n = pts.len();
    let mut d = f64::INFINITY;
    let mut inside = false;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let ab = b - a;
        let t = ((q - a).dot(&ab) / ab.norm_squared().max(1e-300)).clamp(0.0, 1.0);
        d = d.min((q - (a + ab * t)).norm());
        // Even-odd ray crossing.
        if (a.y > q.y) != (b.y > q.y) {
            let x_cross = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if q.x < x_cross {
                inside = !inside;
            }
        }
    }
    if inside {
        -d
    } else {
        d
    }
}

fn ambient_field(fc: &FieldConfig, grid: &Grid) -> Result<Option<AmbientField>, ResolveError> {
    let kind = fc.kind.as_deref().unwrap_or("zero");
    let field = match kind {
        "zero" => return Ok(None),
        "constant" => {
            if fc.vector_len_per_time.is_empty() {
                return Err(ResolveError("constant field needs vector_len_per_time".into()));
            }
            AmbientField::constant(point_of(&fc.vector_len_per_time))
        }
        "radial" => AmbientField::radial(fc.strength_per_time),
        "rotation" => AmbientField::rotation(fc.strength_per_time),
        "shear" => AmbientField::shear(fc.strength_per_time),
        "polynomial" => {
            let conv = |terms: &[[f64; 4]]| -> Vec<(f64, [u8; 3])> {
                terms
                    .iter()
                    .map(|t| (t[0], [t[1] as u8, t[2] as u8, t[3] as u8]))
                    .collect()
            };
            AmbientField::polynomial([conv(&fc.poly_x), conv(&fc.poly_y), conv(&fc.poly_z)])
        }
        other => return Err(ResolveError(format!("unknown field kind: {other}"))),
    };
    let field = field.bounded_on(grid);
    field
        .validate(grid)
        .map_err(|e| ResolveError(format!("field bound validation failed: {e}")))?;
    Ok(Some(field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    const MINIMAL: &str = r#"
name = "t"
[grid]
dim = 2
origin_len = [-1.0, -1.0]
extent_len = [2.0, 2.0]
spacing_len = 0.125

[[sets]]
id = "a"
shape = "ball"
center_len = [0.0, 0.0]
radius_len = 0.5

[[sets]]
id = "b"
shape = "ball"
center_len = [0.5, 0.0]
radius_len = 0.25

[[sets]]
id = "both"
shape = "union"
of = ["a", "b"]

[flow]
horizon_time = 0.1

[[checks]]
kind = "Compactness"
"#;

    #[test]
    fn minimal_scenario_resolves() {
        let cfg = ScenarioConfig::parse(MINIMAL).unwrap();
        let r = resolve(&cfg, None).unwrap();
        assert_eq!(r.sets.len(), 3);
        assert!(r.field.is_none());
        let a = r.set("a").unwrap();
        assert!(a.sdf.at(&Point::zeros()) < 0.0);
        let u = r.set("both").unwrap();
        assert!(u.sdf.at(&Point::new(0.7, 0.0, 0.0)) < 0.0);
        assert!(r.set("missing").is_err());
    }

    #[test]
    fn grid_override_changes_spacing() {
        let cfg = ScenarioConfig::parse(MINIMAL).unwrap();
        let r = resolve(&cfg, Some(32)).unwrap();
        assert!((r.grid.spacing - 1.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn polygon_sdf_signs() {
        let pts = vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.0, 1.0),
        ];
        assert!(polygon_signed_distance(&pts, &Vector2::new(0.5, 0.5)) < 0.0);
        assert!(polygon_signed_distance(&pts, &Vector2::new(1.5, 0.5)) > 0.0);
        let d = polygon_signed_distance(&pts, &Vector2::new(2.0, 0.5));
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_shape_is_resolution_error() {
        let bad = MINIMAL.replace("shape = \"union\"", "shape = \"blob\"");
        let cfg = ScenarioConfig::parse(&bad).unwrap();
        assert!(resolve(&cfg, None).is_err());
    }
}
