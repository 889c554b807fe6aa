//! Controlled planar two-body dynamics in polar form, the tabulated control
//! set, and the explicit Runge-Kutta steps used by the scheme (Heun) and by
//! the plant (classical RK4).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, sin_cos, TAU};
use crate::orbital::{GravConstant, PolarState};

/// Thrust command: magnitude `u_bar` in `{0, u_max}` (km/s^2) and
/// orientation `phi` measured from the radial direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Control {
    u_bar: f64,
    phi: f64,
    radial: f64,
    tangential: f64,
}

impl Control {
    pub const NULL: Control = Control { u_bar: 0.0, phi: 0.0, radial: 0.0, tangential: 0.0 };

    /// Full-thrust control. A non-positive magnitude yields the null control.
    pub fn thrust(u_max: f64, phi: f64) -> Self {
        if !(u_max > 0.0) {
            return Self::NULL;
        }
        let phi = math::wrap_two_pi(phi);
        let (s, c) = sin_cos(phi);
        Control { u_bar: u_max, phi, radial: u_max * c, tangential: u_max * s }
    }

    #[inline]
    pub fn u_bar(&self) -> f64 {
        self.u_bar
    }

    #[inline]
    pub fn phi(&self) -> f64 {
        self.phi
    }

    #[inline]
    pub fn is_null(&self) -> bool {
        self.u_bar == 0.0
    }

    /// `(u_bar cos phi, u_bar sin phi)`.
    #[inline]
    pub fn acceleration(&self) -> (f64, f64) {
        (self.radial, self.tangential)
    }
}

/// Tabulated controls: index 0 is the null control, followed by full thrust
/// at `phi = k * angle_step` for `k = 0 .. 2pi / angle_step`.
pub fn control_set(angle_step: f64, u_max: f64) -> Result<Vec<Control>> {
    if !(angle_step > 0.0) || !angle_step.is_finite() {
        return Err(Error::InvalidStep { step: angle_step });
    }
    let count = TAU / angle_step;
    let n = math::round(count);
    if n < 1.0 || (count - n).abs() > 1e-9 * n {
        return Err(Error::InvalidStep { step: angle_step });
    }
    if !(u_max > 0.0) || !u_max.is_finite() {
        return Err(Error::InvalidParameter { name: "u_max", reason: "must be positive" });
    }
    let n = n as usize;
    let step = TAU / n as f64;
    let mut set = Vec::with_capacity(n + 1);
    set.push(Control::NULL);
    set.extend((0..n).map(|k| Control::thrust(u_max, k as f64 * step)));
    Ok(set)
}

/// Aerodynamic drag with constant atmospheric density. Inputs are in SI
/// (m^2, kg, kg/m^3); the derived coefficient is carried per km.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DragParams {
    pub c_d: f64,
    pub area: f64,
    pub mass: f64,
    pub density: f64,
}

impl DragParams {
    /// The constant-density model of the LEO robustness experiment.
    pub const LEO_EXAMPLE: DragParams =
        DragParams { c_d: 2.2, area: 2.25, mass: 350.0, density: 8.09e-14 };

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !(ok(self.c_d) && ok(self.area) && ok(self.density)) {
            return Err(Error::InvalidParameter { name: "drag", reason: "coefficients must be >= 0" });
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter { name: "drag.mass", reason: "must be positive" });
        }
        Ok(())
    }

    /// `C = C_D S rho_D / (2 m)`, converted from 1/m to 1/km.
    pub fn coefficient_per_km(&self) -> f64 {
        self.c_d * self.area * self.density / (2.0 * self.mass) * 1e3
    }
}

/// Time derivative of a [`PolarState`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDerivative {
    pub d_rho: f64,
    pub d_theta: f64,
    pub d_v_rho: f64,
    pub d_v_theta: f64,
}

/// Right-hand side of the polar equations of motion.
///
/// Drag acts componentwise as `-C v_i |v_i|`, so it opposes motion for
/// either sign of the velocity components.
pub fn polar_rhs(
    s: &PolarState,
    c: &Control,
    drag: Option<&DragParams>,
    mu: GravConstant,
) -> Result<StateDerivative> {
    if !(s.rho > 0.0) {
        return Err(Error::OriginSingularity { rho: s.rho });
    }
    let k = drag.map_or(0.0, DragParams::coefficient_per_km);
    Ok(rhs(s, c.acceleration(), k, mu.mu()))
}

#[inline(always)]
fn rhs(s: &PolarState, (ar, at): (f64, f64), drag_k: f64, mu: f64) -> StateDerivative {
    let inv_rho = 1.0 / s.rho;
    StateDerivative {
        d_rho: s.v_rho,
        d_theta: s.v_theta * inv_rho,
        d_v_rho: s.v_theta * s.v_theta * inv_rho - mu * inv_rho * inv_rho + ar
            - drag_k * s.v_rho * s.v_rho.abs(),
        d_v_theta: -s.v_rho * s.v_theta * inv_rho + at - drag_k * s.v_theta * s.v_theta.abs(),
    }
}

#[inline(always)]
fn advance(s: &PolarState, d: &StateDerivative, h: f64) -> PolarState {
    PolarState {
        rho: s.rho + h * d.d_rho,
        theta: s.theta + h * d.d_theta,
        v_rho: s.v_rho + h * d.d_v_rho,
        v_theta: s.v_theta + h * d.d_v_theta,
    }
}

#[inline(always)]
fn check(s: PolarState) -> Result<PolarState> {
    if s.rho > 0.0 {
        Ok(s)
    } else {
        Err(Error::OriginSingularity { rho: s.rho })
    }
}

/// One Heun (explicit trapezoid) step with the control held constant.
/// `theta` is wrapped into `[0, 2pi)` on return.
pub fn rk2_step(s: &PolarState, c: &Control, dt: f64, mu: GravConstant) -> Result<PolarState> {
    heun(s, c.acceleration(), dt, mu.mu())
}

#[inline]
pub(crate) fn heun(s: &PolarState, thrust: (f64, f64), dt: f64, mu: f64) -> Result<PolarState> {
    let s = check(*s)?;
    let k1 = rhs(&s, thrust, 0.0, mu);
    let mid = check(advance(&s, &k1, dt))?;
    let k2 = rhs(&mid, thrust, 0.0, mu);
    let half = 0.5 * dt;
    let out = PolarState {
        rho: s.rho + half * (k1.d_rho + k2.d_rho),
        theta: math::wrap_two_pi(s.theta + half * (k1.d_theta + k2.d_theta)),
        v_rho: s.v_rho + half * (k1.d_v_rho + k2.d_v_rho),
        v_theta: s.v_theta + half * (k1.d_v_theta + k2.d_v_theta),
    };
    check(out)
}

/// One classical fourth-order Runge-Kutta step, optionally with drag.
pub fn rk4_step(
    s: &PolarState,
    c: &Control,
    dt: f64,
    mu: GravConstant,
    drag: Option<&DragParams>,
) -> Result<PolarState> {
    let k = drag.map_or(0.0, DragParams::coefficient_per_km);
    rk4(s, c.acceleration(), k, dt, mu.mu())
}

pub(crate) fn rk4(
    s: &PolarState,
    thrust: (f64, f64),
    drag_k: f64,
    dt: f64,
    mu: f64,
) -> Result<PolarState> {
    let s = check(*s)?;
    let k1 = rhs(&s, thrust, drag_k, mu);
    let s2 = check(advance(&s, &k1, 0.5 * dt))?;
    let k2 = rhs(&s2, thrust, drag_k, mu);
    let s3 = check(advance(&s, &k2, 0.5 * dt))?;
    let k3 = rhs(&s3, thrust, drag_k, mu);
    let s4 = check(advance(&s, &k3, dt))?;
    let k4 = rhs(&s4, thrust, drag_k, mu);
    let w = dt / 6.0;
    let comb = |a: f64, b: f64, c: f64, d: f64| w * (a + 2.0 * b + 2.0 * c + d);
    check(PolarState {
        rho: s.rho + comb(k1.d_rho, k2.d_rho, k3.d_rho, k4.d_rho),
        theta: math::wrap_two_pi(s.theta + comb(k1.d_theta, k2.d_theta, k3.d_theta, k4.d_theta)),
        v_rho: s.v_rho + comb(k1.d_v_rho, k2.d_v_rho, k3.d_v_rho, k4.d_v_rho),
        v_theta: s.v_theta + comb(k1.d_v_theta, k2.d_v_theta, k3.d_v_theta, k4.d_v_theta),
    })
}
