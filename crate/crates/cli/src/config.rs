//! Scenario configuration: one human-readable TOML tree per scenario.
//! Physical quantities carry units in their key names: `_len` for lengths in
//! box units, `_time` for times in flow units, `_per_time` for rates.

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: GridConfig,
    #[serde(default)]
    pub sets: Vec<SetConfig>,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub flow: Option<FlowConfig>,
    pub checks: Vec<CheckConfig>,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub origin_len: Vec<f64>,
    pub extent_len: Vec<f64>,
    pub spacing_len: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetConfig {
    pub id: String,
    pub shape: String,
    #[serde(default)]
    pub center_len: Vec<f64>,
    #[serde(default)]
    pub radius_len: f64,
    #[serde(default)]
    pub inner_radius_len: f64,
    #[serde(default)]
    pub outer_radius_len: f64,
    #[serde(default)]
    pub normal: Vec<f64>,
    #[serde(default)]
    pub offset_len: f64,
    /// Member ids for `shape = "union"`.
    #[serde(default)]
    pub of: Vec<String>,
    /// Vertices for `shape = "polygon"`.
    #[serde(default)]
    pub points_len: Vec<[f64; 2]>,
    /// Evolve the boundary (zero set) instead of the region.
    #[serde(default)]
    pub as_boundary: bool,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default)]
    pub kind: Option<String>,
    /// kappa / omega / shear rate, depending on kind.
    #[serde(default)]
    pub strength_per_time: f64,
    /// Constant-field vector.
    #[serde(default)]
    pub vector_len_per_time: Vec<f64>,
    /// Per-component monomials `[coeff, px, py, pz]` for `kind = "polynomial"`.
    #[serde(default)]
    pub poly_x: Vec<[f64; 4]>,
    #[serde(default)]
    pub poly_y: Vec<[f64; 4]>,
    #[serde(default)]
    pub poly_z: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub horizon_time: f64,
    #[serde(default)]
    pub cfl: Option<f64>,
    #[serde(default)]
    pub band_width_len: Option<f64>,
    #[serde(default)]
    pub sample_spacing_time: Option<f64>,
    #[serde(default)]
    pub grad_reg: Option<f64>,
    #[serde(default)]
    pub reinit_every_steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    /// Dump every k-th sample of each configured set's track (0 = off).
    #[serde(default)]
    pub dump_every: usize,
    #[serde(default)]
    pub report: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum CheckConfig {
    /// Extinction time of one evolved set against an expected value.
    CircleExtinction { set: String, expected_time: f64, tol_time: f64 },
    /// min(eps, dist)^2 + c t nondecreasing for random probes, plus the
    /// backward bound at on-track points.
    ShrinkingBall {
        sets: Vec<String>,
        #[serde(default = "default_probes")]
        probes: usize,
    },
    FiniteSpeed { set: String, probe_len: Vec<f64> },
    Avoidance { y: String, z: String },
    /// Exponential gap bound, optionally cross-checked against a per-pair
    /// ODE oracle.
    LongTime {
        y: String,
        z: String,
        #[serde(default)]
        oracle: Option<OracleConfig>,
    },
    KeyProposition { z: String, barrier: BarrierConfig },
    /// Midsurface half-gap bounds via the separator.
    DistanceTheorem { y: String, z: String },
    StrongBarrierEquiv { z: String, barrier: BarrierConfig },
    FirstContact {
        z: String,
        barrier: BarrierConfig,
        #[serde(default = "default_phi_tol")]
        phi_tol: f64,
    },
    BoundaryFlow { region: String },
    Semigroup { set: String, s_time: f64, t_time: f64 },
    Containment { set: String, levels: Vec<f64> },
    Compactness {},
    BrakkeInequality {
        curve: CurveConfig,
        #[serde(default = "default_vertices")]
        vertices: usize,
        dt_time: f64,
        horizon_time: f64,
        #[serde(default = "default_true")]
        refinement: bool,
    },
    BrakkeWeakFlow {
        curve: CurveConfig,
        dt_time: f64,
        horizon_time: f64,
        #[serde(default = "default_vertices")]
        vertices: usize,
    },
    Separator {
        x: String,
        y: String,
        #[serde(default)]
        level: f64,
        #[serde(default)]
        log_profile: bool,
        #[serde(default)]
        max_angle_deg: Option<f64>,
    },
    ArrivalTime {
        region: String,
        /// Disk radius for the closed-form comparison (1 - |x|^2)/2-style.
        #[serde(default)]
        disk_radius_len: Option<f64>,
        #[serde(default = "default_probe_radius")]
        probe_radius_len: f64,
    },
    BarrierExactness {},
}

fn default_probes() -> usize {
    20
}
fn default_phi_tol() -> f64 {
    0.15
}
fn default_vertices() -> usize {
    256
}
fn default_true() -> bool {
    true
}
fn default_probe_radius() -> f64 {
    0.9
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierConfig {
    /// ball | ball_complement | half_space
    pub shape: String,
    #[serde(default)]
    pub center_len: Vec<f64>,
    #[serde(default)]
    pub delta_len: f64,
    /// Radius-law rate c in sqrt(delta^2 - c t).
    #[serde(default)]
    pub rate: f64,
    #[serde(default)]
    pub normal: Vec<f64>,
    #[serde(default)]
    pub offset_len: f64,
    #[serde(default)]
    pub drift_per_time: f64,
    pub t0_time: f64,
    pub t1_time: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    /// circle | ellipse
    pub shape: String,
    #[serde(default)]
    pub center_len: Vec<f64>,
    #[serde(default)]
    pub radius_len: f64,
    #[serde(default)]
    pub a_len: f64,
    #[serde(default)]
    pub b_len: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "model", deny_unknown_fields)]
pub enum OracleConfig {
    /// Concentric disk inside a shrinking hole; both radii follow
    /// r' = -1/r + kappa r.
    Concentric { r_inner: f64, r_outer: f64 },
    /// Two disks whose centers scale with the radial field.
    SideBySide { centers: [[f64; 2]; 2], radii: [f64; 2] },
    /// Two disks carried rigidly by a rotation field.
    Rotating { centers: [[f64; 2]; 2], radii: [f64; 2] },
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<ScenarioConfig, toml::de::Error> {
        toml::from_str(text)
    }
}
