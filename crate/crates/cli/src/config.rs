//! TOML experiment configuration.
//!
//! Every field is optional and defaults to the 7000 km LEO orbit-raising
//! example, so an empty file is a complete configuration. Units are km, s
//! and kg throughout, except the `[drag]` section which takes the area in
//! m^2 and the air density in kg/m^3.
//!
//! ```toml
//! engine = "policy-iteration"   # or "value-iteration"
//! mu = 398600.4
//!
//! [grid]
//! rho = [6930.0, 7070.0]
//! v_rho = [-0.01, 0.01]
//! v_theta = [7.526, 7.566]
//! counts = [110, 30, 30, 30]    # rho, theta, v_rho, v_theta
//!
//! [target]
//! a = 7000.0
//! e = 0.001
//! omega = 0.0                   # rad
//!
//! [cost]
//! alpha = 2.04e-8
//! beta = 2.31e-2
//! gamma = 1.5
//! lambda = 1e-3
//!
//! [thrust]
//! u_max = 5e-7                  # km/s^2
//!
//! [solver]
//! dt = 10.0
//! tol = 1e-7
//! max_iters = 20000
//! # penalty = 1e7               # defaults to 10x the worst discounted cost
//! angle_step_deg = 5.0
//! refine = false
//! linear_tol = 1e-15
//! gmres_restart = 30
//! max_restarts = 500
//!
//! [plant]
//! step = 1.0
//! tau = 10.0
//! horizon = 800000.0
//! start_radius = 6978.0         # circular start orbit
//! band = 1.0                    # km, target band on the semi-major axis
//!
//! [drag]                        # only used by `simulate --drag`
//! c_d = 2.2
//! area = 2.25
//! mass = 350.0
//! density = 8.09e-14
//! ```

use std::path::Path;

use leo_hjb::hjb::{CostWeights, TargetOrbit};
use leo_hjb::{CrownGrid, DragParams, GravConstant, PlantConfig, PolarState, Problem, Scheme, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    PolicyIteration,
    ValueIteration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub engine: Engine,
    pub mu: f64,
    pub grid: GridSection,
    pub target: TargetSection,
    pub cost: CostSection,
    pub thrust: ThrustSection,
    pub solver: SolverSection,
    pub plant: PlantSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drag: Option<DragSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub rho: [f64; 2],
    pub v_rho: [f64; 2],
    pub v_theta: [f64; 2],
    pub counts: [usize; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSection {
    pub a: f64,
    pub e: f64,
    pub omega: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSection {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThrustSection {
    pub u_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub tol: f64,
    pub max_iters: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
    pub angle_step_deg: f64,
    pub refine: bool,
    pub linear_tol: f64,
    pub gmres_restart: usize,
    pub max_restarts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    pub step: f64,
    pub tau: f64,
    pub horizon: f64,
    pub start_radius: f64,
    pub band: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DragSection {
    pub c_d: f64,
    /// m^2
    pub area: f64,
    /// kg
    pub mass: f64,
    /// kg/m^3
    pub density: f64,
}

impl Default for ConfigFile {
    fn default() -> Self {
        ConfigFile {
            engine: Engine::PolicyIteration,
            mu: GravConstant::EARTH.mu(),
            grid: GridSection::default(),
            target: TargetSection::default(),
            cost: CostSection::default(),
            thrust: ThrustSection::default(),
            solver: SolverSection::default(),
            plant: PlantSection::default(),
            drag: None,
        }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { rho: [6930.0, 7070.0], v_rho: [-0.01, 0.01], v_theta: [7.526, 7.566], counts: [110, 30, 30, 30] }
    }
}

impl Default for TargetSection {
    fn default() -> Self {
        let t = Problem::leo_example().target;
        TargetSection { a: t.a_bar, e: t.e_bar, omega: t.omega_bar }
    }
}

impl Default for CostSection {
    fn default() -> Self {
        let w = Problem::leo_example().weights;
        CostSection { alpha: w.alpha, beta: w.beta, gamma: w.gamma, lambda: w.lambda }
    }
}

impl Default for ThrustSection {
    fn default() -> Self {
        ThrustSection { u_max: Problem::leo_example().u_max }
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverSection {
            dt: s.dt,
            tol: s.tol,
            max_iters: s.max_iters,
            penalty: s.penalty,
            angle_step_deg: 5.0,
            refine: s.refine,
            linear_tol: s.linear_tol,
            gmres_restart: s.gmres_restart,
            max_restarts: s.max_restarts,
        }
    }
}

impl Default for PlantSection {
    fn default() -> Self {
        let p = PlantConfig::default();
        PlantSection { step: p.step, tau: p.tau, horizon: p.horizon, start_radius: 6978.0, band: 1.0 }
    }
}

impl Default for DragSection {
    fn default() -> Self {
        let d = DragParams::LEO_EXAMPLE;
        DragSection { c_d: d.c_d, area: d.area, mass: d.mass, density: d.density }
    }
}

/// Validated experiment: problem, grid, solver, plant and drag settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemConfig {
    pub engine: Engine,
    pub grid: CrownGrid,
    pub problem: Problem,
    pub solver: SolverConfig,
    pub plant: PlantConfig,
    pub start_radius: f64,
    pub band: f64,
    /// Drag of the perturbed plant; `None` when the file has no `[drag]`.
    pub drag: Option<DragParams>,
    file: ConfigFile,
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_file(file: ConfigFile) -> Result<Self, CliError> {
        let mu = GravConstant::new(file.mu).map_err(|e| invalid("mu", e))?;
        let g = &file.grid;
        let grid = CrownGrid::crown((g.rho[0], g.rho[1]), (g.v_rho[0], g.v_rho[1]), (g.v_theta[0], g.v_theta[1]), g.counts)
            .map_err(|e| invalid("grid", e))?;
        let problem = Problem {
            mu,
            target: TargetOrbit { a_bar: file.target.a, e_bar: file.target.e, omega_bar: file.target.omega },
            weights: CostWeights {
                alpha: file.cost.alpha,
                beta: file.cost.beta,
                gamma: file.cost.gamma,
                lambda: file.cost.lambda,
            },
            u_max: file.thrust.u_max,
        };
        problem.validate().map_err(|e| invalid("problem", e))?;
        let s = &file.solver;
        if !(s.angle_step_deg > 0.0 && s.angle_step_deg <= 180.0) {
            return Err(invalid("solver.angle_step_deg", "must lie in (0, 180]"));
        }
        let solver = SolverConfig {
            dt: s.dt,
            tol: s.tol,
            max_iters: s.max_iters,
            penalty: s.penalty,
            angle_step: s.angle_step_deg.to_radians(),
            refine: s.refine,
            linear_tol: s.linear_tol,
            gmres_restart: s.gmres_restart,
            max_restarts: s.max_restarts,
        };
        solver.validate(&problem.weights).map_err(|e| invalid("solver", e))?;
        let p = &file.plant;
        let plant = PlantConfig { step: p.step, tau: p.tau, horizon: p.horizon, drag: None };
        plant.validate().map_err(|e| invalid("plant", e))?;
        let drag = match &file.drag {
            Some(d) => {
                let d = DragParams { c_d: d.c_d, area: d.area, mass: d.mass, density: d.density };
                d.validate().map_err(|e| invalid("drag", e))?;
                Some(d)
            }
            None => None,
        };

        let t = &problem.target;
        let (peri, apo) = (t.a_bar * (1.0 - t.e_bar), t.a_bar * (1.0 + t.e_bar));
        if peri < g.rho[0] || apo > g.rho[1] {
            return Err(invalid(
                "grid.rho",
                format!("target radii [{peri}, {apo}] km fall outside [{}, {}]", g.rho[0], g.rho[1]),
            ));
        }
        let start = PolarState::circular(p.start_radius, 0.0, mu);
        if !grid.contains(&start) {
            return Err(invalid("plant.start_radius", "circular start orbit lies outside the grid"));
        }
        if !(p.band > 0.0) {
            return Err(invalid("plant.band", "must be positive"));
        }
        Ok(ProblemConfig {
            engine: file.engine,
            grid,
            problem,
            solver,
            plant,
            start_radius: p.start_radius,
            band: p.band,
            drag,
            file,
        })
    }

    /// The configuration as a fully populated file.
    pub fn file(&self) -> &ConfigFile {
        &self.file
    }

    /// Deterministic TOML rendering with every field spelled out.
    pub fn canonical_text(&self) -> String {
        toml::to_string(&self.file).expect("config sections serialize")
    }

    pub fn scheme(&self) -> Result<Scheme, CliError> {
        Scheme::new(self.grid, self.problem, self.solver).map_err(|e| invalid("scheme", e))
    }

    pub fn start_state(&self) -> PolarState {
        PolarState::circular(self.start_radius, 0.0, self.problem.mu)
    }

    /// Plant settings, with drag from the `[drag]` section (or the reference
    /// satellite when absent) if `with_drag` is set.
    pub fn plant(&self, with_drag: bool) -> PlantConfig {
        let drag = with_drag.then(|| self.drag.unwrap_or(DragParams::LEO_EXAMPLE));
        PlantConfig { drag, ..self.plant }
    }
}
