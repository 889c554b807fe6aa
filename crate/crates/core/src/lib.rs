//! Dynamic-programming synthesis of static feedback for planar low-thrust
//! orbit transfer.
//!
//! The value function of a discounted infinite-horizon problem is computed on
//! a circular-crown grid in polar coordinates `(rho, theta, v_rho, v_theta)`
//! by a first-order semi-Lagrangian scheme with multilinear interpolation.
//! Two fixed-point engines are provided: plain value iteration and policy
//! iteration with sparse Krylov policy evaluation and warm-started policy
//! improvement. The resulting value function defines a feedback law, which
//! [`feedback`] runs in closed loop against a plant that may carry
//! aerodynamic drag the solver never saw.
//!
//! The crate is `no_std` (with `alloc`) when built without the default
//! `std` feature; the `parallel` feature spreads per-node sweeps over rayon.
//!
//! Units are km, s and kg throughout.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod math;
mod par;

pub mod dynamics;
pub mod error;
pub mod feedback;
pub mod grid;
pub mod hjb;
pub mod orbital;

pub use dynamics::{control_set, polar_rhs, rk2_step, rk4_step, Control, DragParams, StateDerivative};
pub use error::{Error, Result};
pub use feedback::{
    metrics, simulate, Feedback, FeedbackDecision, PlantConfig, Trajectory, TransferMetrics,
};
pub use grid::{Cell, CrownGrid, Stencil};
pub use hjb::{
    running_cost, CostWeights, EvaluationSystem, Problem, Scheme, Solution, SolverConfig,
    TargetOrbit,
};
pub use orbital::{CartesianState, GravConstant, OrbitalElements, PolarState};
