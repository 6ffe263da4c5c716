//! Bundled scenarios, embedded at compile time. The set mirrors the
//! acceptance suite one-to-one, plus a few barrier-vs-flow extras.

pub const SCENARIOS: &[(&str, &str)] = &[
    ("circle-extinction", include_str!("../scenarios/circle-extinction.toml")),
    (
        "shrinking-ball-monotonicity",
        include_str!("../scenarios/shrinking-ball-monotonicity.toml"),
    ),
    ("finite-speed-static", include_str!("../scenarios/finite-speed-static.toml")),
    ("finite-speed-drift", include_str!("../scenarios/finite-speed-drift.toml")),
    ("finite-speed-rotation", include_str!("../scenarios/finite-speed-rotation.toml")),
    ("avoidance-disjoint", include_str!("../scenarios/avoidance-disjoint.toml")),
    ("avoidance-radial-out", include_str!("../scenarios/avoidance-radial-out.toml")),
    ("avoidance-radial-in", include_str!("../scenarios/avoidance-radial-in.toml")),
    ("avoidance-rotation", include_str!("../scenarios/avoidance-rotation.toml")),
    ("semigroup", include_str!("../scenarios/semigroup.toml")),
    ("containment-levels", include_str!("../scenarios/containment-levels.toml")),
    ("boundary-flow-disk", include_str!("../scenarios/boundary-flow-disk.toml")),
    ("boundary-flow-annulus", include_str!("../scenarios/boundary-flow-annulus.toml")),
    ("arrival-time-disk", include_str!("../scenarios/arrival-time-disk.toml")),
    ("brakke-circle", include_str!("../scenarios/brakke-circle.toml")),
    ("brakke-ellipse", include_str!("../scenarios/brakke-ellipse.toml")),
    ("brakke-stationary", include_str!("../scenarios/brakke-stationary.toml")),
    ("separator-halfspaces", include_str!("../scenarios/separator-halfspaces.toml")),
    ("separator-disks", include_str!("../scenarios/separator-disks.toml")),
    ("separator-annulus", include_str!("../scenarios/separator-annulus.toml")),
    ("barrier-exactness", include_str!("../scenarios/barrier-exactness.toml")),
    ("barrier-vs-flow", include_str!("../scenarios/barrier-vs-flow.toml")),
    ("distance-midsurface", include_str!("../scenarios/distance-midsurface.toml")),
];

pub fn get(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn names() -> Vec<&'static str> {
    SCENARIOS.iter().map(|(n, _)| *n).collect()
}
