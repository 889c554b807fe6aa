//! Static feedback synthesized from a value function, and closed-loop
//! simulation against a plant that may include drag.

use alloc::vec::Vec;

use crate::dynamics::{self, Control, DragParams};
use crate::error::{Error, Result};
use crate::hjb::{self, refine_angle, Scheme, TargetOrbit};
use crate::math;
use crate::orbital::{self, GravConstant, OrbitalElements, PolarState};

/// Plant integration and feedback sampling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantConfig {
    /// RK4 substep, s.
    pub step: f64,
    /// Feedback update interval (zero-order hold), s.
    pub tau: f64,
    /// Simulated time span, s.
    pub horizon: f64,
    /// Drag acting on the plant only; the value function never sees it.
    pub drag: Option<DragParams>,
}

impl Default for PlantConfig {
    fn default() -> Self {
        PlantConfig { step: 1.0, tau: 10.0, horizon: 8e5, drag: None }
    }
}

impl PlantConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= self.tau) {
            return Err(Error::InvalidParameter { name: "plant.step", reason: "need 0 < step <= tau" });
        }
        if !(self.horizon >= self.tau && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter { name: "plant.horizon", reason: "need horizon >= tau" });
        }
        if let Some(d) = &self.drag {
            d.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedbackDecision {
    pub control: Control,
    /// Tabulation index of the coarse minimizer.
    pub index: usize,
    /// The state lies outside the crown; the control is null.
    pub exited: bool,
}

/// The feedback map
/// `F(y) = argmin_f { tau l(y, f) + exp(-lambda tau) I[V](y + tau Phi(y, f)) }`
/// over the tabulated controls, evaluated at the current state `y`.
#[derive(Clone, Copy, Debug)]
pub struct Feedback<'a> {
    scheme: &'a Scheme,
    values: &'a [f64],
    tau: f64,
    discount: f64,
}

impl<'a> Feedback<'a> {
    pub fn new(scheme: &'a Scheme, values: &'a [f64], tau: f64) -> Result<Self> {
        if values.len() != scheme.grid().len() {
            return Err(Error::LengthMismatch { expected: scheme.grid().len(), got: values.len() });
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter { name: "plant.tau", reason: "must be positive" });
        }
        let discount = math::exp(-scheme.problem().weights.lambda * tau);
        Ok(Feedback { scheme, values, tau, discount })
    }

    pub fn scheme(&self) -> &Scheme {
        self.scheme
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Objective minimized by the feedback at state `s`.
    pub fn objective(&self, s: &PolarState, c: &Control) -> f64 {
        let p = self.scheme.problem();
        let state = hjb::state_cost(s, &p.target, &p.weights, p.mu).unwrap_or(self.scheme.max_node_cost());
        self.objective_with(s, c, state)
    }

    #[inline]
    fn objective_with(&self, s: &PolarState, c: &Control, state_cost: f64) -> f64 {
        let p = self.scheme.problem();
        let cost = self.tau * (state_cost + p.weights.alpha * c.u_bar());
        let landing = dynamics::heun(s, c.acceleration(), self.tau, p.mu.mu()).ok();
        let next = match landing {
            Some(y) => self.scheme.grid().interpolate(self.values, &y, self.scheme.penalty()),
            None => self.scheme.penalty(),
        };
        cost + self.discount * next
    }

    pub fn decide(&self, s: &PolarState) -> FeedbackDecision {
        if !self.scheme.grid().contains(s) {
            return FeedbackDecision { control: Control::NULL, index: 0, exited: true };
        }
        let p = self.scheme.problem();
        let state = hjb::state_cost(s, &p.target, &p.weights, p.mu).unwrap_or(self.scheme.max_node_cost());
        let controls = self.scheme.controls();
        let mut best = (f64::INFINITY, 0usize);
        for (i, c) in controls.iter().enumerate() {
            let q = self.objective_with(s, c, state);
            if q < best.0 {
                best = (q, i);
            }
        }
        let mut control = controls[best.1];
        if self.scheme.config().refine && !control.is_null() {
            let phi = refine_angle(control.phi(), self.scheme.config().angle_step, |phi| {
                self.objective_with(s, &Control::thrust(p.u_max, phi), state)
            });
            control = Control::thrust(p.u_max, phi);
        }
        FeedbackDecision { control, index: best.1, exited: false }
    }
}

/// Closed-loop run sampled once per feedback interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PolarState>,
    /// Control held from each sample to the next.
    pub controls: Vec<Control>,
    /// Osculating elements per sample; `None` where undefined.
    pub elements: Vec<Option<OrbitalElements>>,
    /// The plant left the crown and the run was truncated.
    pub exited: bool,
    pub final_time: f64,
    pub final_state: PolarState,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Simulates the plant under zero-order-hold feedback, integrating with
/// RK4 substeps. Stops at the horizon or when the state leaves the crown.
pub fn simulate(fb: &Feedback<'_>, s0: &PolarState, plant: &PlantConfig) -> Result<Trajectory> {
    plant.validate()?;
    s0.validate()?;
    let mu = fb.scheme.problem().mu;
    let substeps = math::round(fb.tau / plant.step).max(1.0) as usize;
    let h = fb.tau / substeps as f64;
    let intervals = math::floor(plant.horizon / fb.tau + 1e-9) as usize;
    let drag_k = plant.drag.as_ref().map_or(0.0, DragParams::coefficient_per_km);

    let mut traj = Trajectory {
        times: Vec::with_capacity(intervals),
        states: Vec::with_capacity(intervals),
        controls: Vec::with_capacity(intervals),
        elements: Vec::with_capacity(intervals),
        exited: false,
        final_time: 0.0,
        final_state: *s0,
    };
    let mut s = PolarState::new(s0.rho, s0.theta, s0.v_rho, s0.v_theta);
    let mut t = 0.0;
    for i in 0..intervals {
        let decision = fb.decide(&s);
        if decision.exited {
            traj.exited = true;
            break;
        }
        traj.times.push(t);
        traj.states.push(s);
        traj.controls.push(decision.control);
        traj.elements.push(orbital::elements(&s, mu).ok());
        let thrust = decision.control.acceleration();
        for _ in 0..substeps {
            match dynamics::rk4(&s, thrust, drag_k, h, mu.mu()) {
                Ok(next) => s = next,
                Err(_) => {
                    traj.exited = true;
                    break;
                }
            }
        }
        t = (i + 1) as f64 * fb.tau;
        if traj.exited {
            break;
        }
    }
    traj.final_time = t;
    traj.final_state = s;
    Ok(traj)
}

/// Transfer figures of merit of a closed-loop run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMetrics {
    /// First time from which `|a - a_bar| < band` holds for a full target
    /// period.
    pub band_entry: Option<f64>,
    /// Start of the final all-null suffix of the control history.
    pub switch_off: Option<f64>,
    /// Start of the first coasting stretch lasting at least one target
    /// period.
    pub first_switch_off: Option<f64>,
    /// `|a - a_bar|` at the end of the run, km.
    pub final_radius_error: Option<f64>,
    /// Integral of the thrust magnitude, km/s.
    pub fuel: f64,
    /// Null-to-thrust transitions after the first switch-off.
    pub reactivations: usize,
}

pub fn metrics(traj: &Trajectory, target: &TargetOrbit, band: f64, mu: GravConstant) -> TransferMetrics {
    let n = traj.len();
    let period = target.period(mu);
    let end = traj.final_time;
    let time_after = |i: usize| if i + 1 < n { traj.times[i + 1] } else { end };

    let fuel = (0..n).map(|i| traj.controls[i].u_bar() * (time_after(i) - traj.times[i])).sum();

    let in_band: Vec<bool> = traj
        .elements
        .iter()
        .map(|e| e.is_some_and(|e| (e.a - target.a_bar).abs() < band))
        .collect();
    let mut band_entry = None;
    let mut next_out = None::<usize>;
    for i in (0..n).rev() {
        if !in_band[i] {
            next_out = Some(i);
            continue;
        }
        let t = traj.times[i];
        let holds = next_out.map_or(true, |k| traj.times[k] > t + period);
        if holds && t + period <= end {
            band_entry = Some(t);
        }
    }

    let switch_off = match traj.controls.iter().rposition(|c| !c.is_null()) {
        None if n > 0 => Some(traj.times[0]),
        None => None,
        Some(last) if last + 1 < n => Some(traj.times[last + 1]),
        Some(_) => None,
    };

    let mut first_switch_off = None;
    let mut i = 0;
    while i < n {
        if traj.controls[i].is_null() {
            let start = i;
            while i < n && traj.controls[i].is_null() {
                i += 1;
            }
            let stop = if i < n { traj.times[i] } else { end };
            if stop - traj.times[start] >= period {
                first_switch_off = Some(start);
                break;
            }
        } else {
            i += 1;
        }
    }
    let reactivations = first_switch_off.map_or(0, |start| {
        (start + 1..n)
            .filter(|&k| traj.controls[k - 1].is_null() && !traj.controls[k].is_null())
            .count()
    });

    let final_radius_error =
        orbital::elements(&traj.final_state, mu).ok().map(|e| (e.a - target.a_bar).abs());

    TransferMetrics {
        band_entry,
        switch_off,
        first_switch_off: first_switch_off.map(|i| traj.times[i]),
        final_radius_error,
        fuel,
        reactivations,
    }
}

#[cfg(test)]
mod tests;
