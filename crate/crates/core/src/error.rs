use crate::Point;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the solvers and checks. Grid-shape mismatches between
/// fields that are documented to share a grid are programming errors and
/// panic instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not a regular boundary point: |grad f| = {grad_norm:.3e} at {point:?}, t = {time}")]
    NotRegularBoundaryPoint { point: Point, time: f64, grad_norm: f64 },

    #[error("time {time} outside barrier interval [{start}, {end}]")]
    TimeOutsideInterval { time: f64, start: f64, end: f64 },

    #[error("perturbation constant too large, regularity lost at {point:?}")]
    PerturbationTooLarge { point: Point },

    #[error("barrier is not strong (worst Phi = {worst_phi:.3e} at {point:?}, t = {time})")]
    BarrierNotStrong { worst_phi: f64, point: Point, time: f64 },

    #[error("domain too small: moving set reached the frozen margin at t = {time}")]
    DomainTooSmall { time: f64 },

    #[error("time stepping unstable at t = {time} (max |u| = {max_abs:.3e})")]
    Unstable { time: f64, max_abs: f64 },

    #[error("initial sets overlap or are closer than the required gap ({dist} < {required})")]
    SetsTooClose { dist: f64, required: f64 },

    #[error("input is not mean-convex: {count} nodes re-entered after exit (first at node {first_node})")]
    NonMeanConvex { count: usize, first_node: usize },

    #[error("need at least two tracks for a Kuratowski limit, got {got}")]
    InsufficientTracks { got: usize },

    #[error("level {level} outside the resolved band (half-width {band_half})")]
    LevelOutOfBand { level: f64, band_half: f64 },

    #[error("in-between region is disconnected: no component touches both Dirichlet sets")]
    DisconnectedDomain,

    #[error("harmonic solve did not converge: residual {residual:.3e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("separator leaks: flood fill reached the far set through {path_len} nodes (first leak near {leak_point:?})")]
    SeparatorLeak { path_len: usize, leak_point: Point },

    #[error("level {level} is not discrete-regular for the harmonic field")]
    LevelNotRegular { level: f64 },

    #[error("polygonal flow singular at this resolution: self-intersection at t = {time}")]
    CurveSelfIntersection { time: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
