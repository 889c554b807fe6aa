//! Semi-Lagrangian discretization of the stationary HJB equation.
//!
//! At every grid node `x_j` the scheme solves the fixed-point problem
//!
//! ```text
//! v_j = min_f { dt * l(x_j, f) + exp(-lambda dt) * I[V](x_j + dt * Phi(x_j, f)) }
//! ```
//!
//! where `Phi` is one Heun step of the controlled dynamics, `I[V]` the
//! multilinear interpolant of the nodal values and `f` ranges over the
//! tabulated controls. Landing points outside the crown are charged the
//! penalty `M` as a stopping cost.

mod linear;
mod policy;
mod refine;
mod value_iteration;

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{self, control_set, Control};
use crate::error::{Error, Result};
use crate::grid::{Cell, CrownGrid};
use crate::math::{self, sin_cos};
use crate::orbital::{self, GravConstant, PolarState};

pub use linear::{gmres, CsrMatrix, GmresReport};
pub use policy::EvaluationSystem;
pub use refine::{golden_section_min, refine_angle};

/// Operative orbit the running cost steers towards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetOrbit {
    /// Semi-major axis, km.
    pub a_bar: f64,
    pub e_bar: f64,
    /// Argument of perigee, rad.
    pub omega_bar: f64,
}

impl TargetOrbit {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_bar > 0.0 && self.a_bar.is_finite()) {
            return Err(Error::InvalidParameter { name: "target.a", reason: "must be positive" });
        }
        if !(0.0..1.0).contains(&self.e_bar) {
            return Err(Error::InvalidParameter { name: "target.e", reason: "must lie in [0, 1)" });
        }
        if !self.omega_bar.is_finite() {
            return Err(Error::InvalidParameter { name: "target.omega", reason: "must be finite" });
        }
        Ok(())
    }

    /// Cartesian components of the target eccentricity vector.
    pub fn eccentricity_vector(&self) -> (f64, f64) {
        let (s, c) = sin_cos(self.omega_bar);
        (self.e_bar * c, self.e_bar * s)
    }

    /// Orbital period, s.
    pub fn period(&self, mu: GravConstant) -> f64 {
        math::TAU * math::sqrt(self.a_bar * self.a_bar * self.a_bar / mu.mu())
    }
}

/// Weights of the running cost and the discount rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostWeights {
    /// Weight of the thrust magnitude, s^2/km.
    pub alpha: f64,
    /// Weight of `(a - a_bar)^2`, 1/km^2.
    pub beta: f64,
    /// Weight of the eccentricity-vector mismatch.
    pub gamma: f64,
    /// Discount rate, 1/s.
    pub lambda: f64,
}

impl CostWeights {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("cost.alpha", self.alpha),
            ("cost.beta", self.beta),
            ("cost.gamma", self.gamma),
            ("cost.lambda", self.lambda),
        ];
        for (name, x) in checks {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParameter { name, reason: "must be positive" });
            }
        }
        Ok(())
    }
}

/// Physical problem: gravity, target, cost and thrust authority.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Problem {
    pub mu: GravConstant,
    pub target: TargetOrbit,
    pub weights: CostWeights,
    /// Full-thrust acceleration `T / m`, km/s^2.
    pub u_max: f64,
}

impl Problem {
    /// Orbit raising towards a 7000 km, e = 0.001 LEO orbit.
    pub fn leo_example() -> Self {
        Problem {
            mu: GravConstant::EARTH,
            target: TargetOrbit { a_bar: 7000.0, e_bar: 0.001, omega_bar: 0.0 },
            weights: CostWeights { alpha: 2.04e-8, beta: 2.31e-2, gamma: 1.5, lambda: 1e-3 },
            u_max: 5e-7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.target.validate()?;
        self.weights.validate()?;
        if !(self.u_max > 0.0 && self.u_max.is_finite()) {
            return Err(Error::InvalidParameter { name: "u_max", reason: "must be positive" });
        }
        Ok(())
    }
}

/// Numerical parameters of the scheme and of both engines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Pseudo-time step, s.
    pub dt: f64,
    /// Sup-norm stopping tolerance on the value function.
    pub tol: f64,
    /// Sweep budget (value iteration) or evaluation budget (policy iteration).
    pub max_iters: usize,
    /// State-constraint penalty `M`; `None` selects the default derived from
    /// the largest tabulated running cost.
    pub penalty: Option<f64>,
    /// Angular step of the thrust tabulation, rad.
    pub angle_step: f64,
    /// Golden-section refinement of the synthesized feedback angle.
    pub refine: bool,
    /// Relative sup-norm residual target of each policy evaluation.
    pub linear_tol: f64,
    /// Krylov subspace dimension between GMRES restarts.
    pub gmres_restart: usize,
    /// Restart budget of each policy evaluation.
    pub max_restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 10.0,
            tol: 1e-7,
            max_iters: 20_000,
            penalty: None,
            angle_step: 5f64.to_radians(),
            refine: false,
            linear_tol: 1e-15,
            gmres_restart: 30,
            max_restarts: 500,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, weights: &CostWeights) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter { name: "solver.dt", reason: "must be positive" });
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter { name: "solver.tol", reason: "must be positive" });
        }
        if !(math::exp(-weights.lambda * self.dt) < 1.0) {
            return Err(Error::InvalidParameter {
                name: "solver.dt",
                reason: "discount exp(-lambda dt) must be below one",
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter { name: "solver.max_iters", reason: "must be positive" });
        }
        if let Some(m) = self.penalty {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidParameter { name: "solver.penalty", reason: "must be positive" });
            }
        }
        if !(self.linear_tol > 0.0) {
            return Err(Error::InvalidParameter { name: "solver.linear_tol", reason: "must be positive" });
        }
        if self.gmres_restart == 0 || self.max_restarts == 0 {
            return Err(Error::InvalidParameter { name: "solver.gmres", reason: "budgets must be positive" });
        }
        Ok(())
    }
}

/// State part of the running cost,
/// `beta (a - a_bar)^2 + gamma |e_vec - e_vec_bar|^2`.
pub fn state_cost(s: &PolarState, target: &TargetOrbit, w: &CostWeights, mu: GravConstant) -> Result<f64> {
    let el = orbital::elements(s, mu)?;
    let (ex, ey) = el.eccentricity_vector();
    let (tx, ty) = target.eccentricity_vector();
    let da = el.a - target.a_bar;
    Ok(w.beta * da * da + w.gamma * ((ex - tx) * (ex - tx) + (ey - ty) * (ey - ty)))
}

/// Running cost `alpha u_bar + beta (a - a_bar)^2 + gamma |e_vec - e_vec_bar|^2`.
pub fn running_cost(
    s: &PolarState,
    c: &Control,
    target: &TargetOrbit,
    w: &CostWeights,
    mu: GravConstant,
) -> Result<f64> {
    Ok(w.alpha * c.u_bar() + state_cost(s, target, w, mu)?)
}

/// Result of a fixed-point solve.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub values: Vec<f64>,
    /// Index into the control tabulation, per node.
    pub policy: Vec<u32>,
    /// Value-iteration sweeps or policy evaluations performed.
    pub iterations: usize,
    /// Last sup-norm change of the value function.
    pub residual: f64,
    /// Sup-norm change after every iteration.
    pub history: Vec<f64>,
    /// Total GMRES iterations (policy iteration only).
    pub linear_iterations: usize,
}

/// The discretized problem on a fixed grid: tabulated controls, nodal
/// running costs, discount factor and penalty.
#[derive(Clone, Debug)]
pub struct Scheme {
    grid: CrownGrid,
    problem: Problem,
    cfg: SolverConfig,
    controls: Vec<Control>,
    node_cost: Vec<f64>,
    max_node_cost: f64,
    penalty: f64,
    discount: f64,
}

impl Scheme {
    pub fn new(grid: CrownGrid, problem: Problem, cfg: SolverConfig) -> Result<Self> {
        problem.validate()?;
        cfg.validate(&problem.weights)?;
        let controls = control_set(cfg.angle_step, problem.u_max)?;

        let mut node_cost = vec![0.0; grid.len()];
        crate::par::fill(&mut node_cost, |j| {
            state_cost(&grid.node(j), &problem.target, &problem.weights, problem.mu)
                .unwrap_or(f64::NAN)
        });
        // Nodes with undefined elements take the largest valid cost.
        let max_node_cost = node_cost.iter().copied().filter(|c| !c.is_nan()).fold(0.0, f64::max);
        for c in node_cost.iter_mut().filter(|c| c.is_nan()) {
            *c = max_node_cost;
        }

        let discount = math::exp(-problem.weights.lambda * cfg.dt);
        let penalty = cfg.penalty.unwrap_or_else(|| {
            let l_max = max_node_cost + problem.weights.alpha * problem.u_max;
            10.0 * l_max * cfg.dt / (1.0 - discount)
        });
        Ok(Scheme { grid, problem, cfg, controls, node_cost, max_node_cost, penalty, discount })
    }

    #[inline]
    pub fn grid(&self) -> &CrownGrid {
        &self.grid
    }

    #[inline]
    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    #[inline]
    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    #[inline]
    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    /// Penalty `M` charged for landings outside the crown.
    #[inline]
    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    /// `exp(-lambda dt)`.
    #[inline]
    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// State part of the running cost at node `j`.
    #[inline]
    pub fn node_cost(&self, j: usize) -> f64 {
        self.node_cost[j]
    }

    pub fn max_node_cost(&self) -> f64 {
        self.max_node_cost
    }

    /// `dt * l(x_j, f)`.
    #[inline]
    pub fn step_cost(&self, j: usize, c: usize) -> f64 {
        self.cfg.dt * (self.node_cost[j] + self.problem.weights.alpha * self.controls[c].u_bar())
    }

    /// Interpolation cell of the Heun landing point of node `j` under
    /// control `c`, or `None` when it leaves the crown.
    #[inline]
    pub fn landing(&self, j: usize, c: usize) -> Option<Cell> {
        let x = self.grid.node(j);
        let thrust = self.controls[c].acceleration();
        let y = dynamics::heun(&x, thrust, self.cfg.dt, self.problem.mu.mu()).ok()?;
        self.grid.locate(&y)
    }

    fn check_len(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.grid.len() {
            return Err(Error::LengthMismatch { expected: self.grid.len(), got: field.len() });
        }
        Ok(())
    }

    #[inline]
    fn continuation(&self, cell: Option<Cell>, field: &[f64]) -> f64 {
        self.discount * cell.map_or(self.penalty, |cell| cell.interpolate(field))
    }

    /// Right-hand side of the scheme at node `j` for tabulated control `c`.
    #[inline]
    pub fn bellman_rhs(&self, j: usize, field: &[f64], c: usize) -> f64 {
        self.step_cost(j, c) + self.continuation(self.landing(j, c), field)
    }

    /// Same as [`Scheme::bellman_rhs`] for an arbitrary (untabulated) control.
    pub fn bellman_rhs_with(&self, j: usize, field: &[f64], c: &Control) -> f64 {
        let x = self.grid.node(j);
        let cost = self.cfg.dt * (self.node_cost[j] + self.problem.weights.alpha * c.u_bar());
        let cell = dynamics::heun(&x, c.acceleration(), self.cfg.dt, self.problem.mu.mu())
            .ok()
            .and_then(|y| self.grid.locate(&y));
        cost + self.continuation(cell, field)
    }

    /// Minimum of the scheme over the tabulation at node `j`, with the
    /// minimizing control index. Ties go to the lowest index, so coasting
    /// (index 0) wins ties.
    pub fn bellman_update(&self, j: usize, field: &[f64]) -> (f64, u32) {
        let mut best = (f64::INFINITY, 0u32);
        for c in 0..self.controls.len() {
            let q = self.bellman_rhs(j, field, c);
            if q < best.0 {
                best = (q, c as u32);
            }
        }
        best
    }

    /// One application of the Bellman operator to every node.
    pub fn apply(&self, field: &[f64]) -> Result<(Vec<f64>, Vec<u32>)> {
        self.check_len(field)?;
        let n = self.grid.len();
        let mut values = vec![0.0; n];
        let mut policy = vec![0u32; n];
        crate::par::fill2(&mut values, &mut policy, |j| self.bellman_update(j, field));
        Ok((values, policy))
    }

    /// Upper bound `M + dt l_max / (1 - exp(-lambda dt))` of converged values.
    pub fn value_bound(&self) -> f64 {
        let l_max = self.max_node_cost + self.problem.weights.alpha * self.problem.u_max;
        self.penalty + self.cfg.dt * l_max / (1.0 - self.discount)
    }
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
