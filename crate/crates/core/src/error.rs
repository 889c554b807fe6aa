use alloc::boxed::Box;

use crate::hjb::Solution;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("orbital energy {energy:e} km^2/s^2 is too close to zero: elements undefined for a parabolic state")]
    ParabolicState { energy: f64 },
    #[error("semilatus rectum {p:e} km is not positive: degenerate conic")]
    DegenerateConic { p: f64 },
    #[error("state at the origin (rho = {rho:e} km)")]
    OriginSingularity { rho: f64 },
    #[error("angle step {step} rad does not divide a full turn")]
    InvalidStep { step: f64 },
    #[error("invalid grid axis {axis}: {reason}")]
    InvalidBounds { axis: usize, reason: &'static str },
    #[error("index {index} out of range for {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("field has {got} entries, grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("linear solve stagnated after {iterations} iterations (residual {residual:e}, target {target:e})")]
    LinearSolveStagnation { iterations: usize, residual: f64, target: f64 },
    #[error("no convergence after {} iterations (last update {:e})", .partial.iterations, .partial.residual)]
    MaxItersExceeded { partial: Box<Solution> },
}
