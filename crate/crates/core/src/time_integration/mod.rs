//! Time stepping of `M u'' + K0 u + K1(t) u + H (L u) = F(t)`.
//!
//! [`solve_direct`] keeps the instantaneous part of `L` implicit and the
//! kernel history explicit. [`solve_picard`] freezes the memory term at the
//! previous iterate and re-solves the memory-free problem until the iterates
//! settle, optionally on restart segments from [`restart_horizon`].

mod newmark;
mod picard;
mod trajectory;

pub use newmark::{solve_direct, BeamProblem, NewmarkParams, NewmarkStepper};
pub use picard::{
    bisect_root, restart_horizon, solve_picard, AtomSplit, HorizonPlan, PicardDiagnostics, PicardOptions, Segment,
    SegmentDiagnostics,
};
pub use trajectory::{dominant_frequency, e_norm, Trajectory, TrajectoryState};
