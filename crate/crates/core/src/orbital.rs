//! Two-body orbital elements of planar states.
//!
//! The solver works in the rotating polar frame `(rho, theta, v_rho, v_theta)`;
//! the running cost needs the osculating conic of each state. All functions
//! here are pure.

use crate::error::{Error, Result};
use crate::math::{self, atan2, sin_cos, sqrt};

/// Gravitational parameter `mu`, km^3/s^2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GravConstant(f64);

impl GravConstant {
    pub const EARTH: GravConstant = GravConstant(398_600.4);

    pub fn new(mu: f64) -> Result<Self> {
        if mu.is_finite() && mu > 0.0 {
            Ok(Self(mu))
        } else {
            Err(Error::InvalidParameter { name: "mu", reason: "must be positive and finite" })
        }
    }

    #[inline]
    pub fn mu(self) -> f64 {
        self.0
    }
}

impl Default for GravConstant {
    fn default() -> Self {
        Self::EARTH
    }
}

/// Satellite state in polar coordinates: radius (km), polar angle (rad),
/// radial and tangential velocity (km/s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarState {
    pub rho: f64,
    pub theta: f64,
    pub v_rho: f64,
    pub v_theta: f64,
}

impl PolarState {
    /// Builds a state, wrapping `theta` into `[0, 2pi)`.
    pub fn new(rho: f64, theta: f64, v_rho: f64, v_theta: f64) -> Self {
        Self { rho, theta: math::wrap_two_pi(theta), v_rho, v_theta }
    }

    /// Circular orbit of radius `rho` at polar angle `theta`.
    pub fn circular(rho: f64, theta: f64, mu: GravConstant) -> Self {
        Self::new(rho, theta, 0.0, circular_velocity(rho, mu))
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.rho.is_finite()
            && self.theta.is_finite()
            && self.v_rho.is_finite()
            && self.v_theta.is_finite();
        if !finite {
            return Err(Error::InvalidParameter { name: "state", reason: "non-finite component" });
        }
        if self.rho <= 0.0 {
            return Err(Error::OriginSingularity { rho: self.rho });
        }
        Ok(())
    }

    #[inline]
    pub fn speed_squared(&self) -> f64 {
        self.v_rho * self.v_rho + self.v_theta * self.v_theta
    }

    pub fn to_cartesian(&self) -> CartesianState {
        let (s, c) = sin_cos(self.theta);
        CartesianState {
            y1: self.rho * c,
            y2: self.rho * s,
            v1: self.v_rho * c - self.v_theta * s,
            v2: self.v_rho * s + self.v_theta * c,
        }
    }
}

/// Position (km) and velocity (km/s) in the inertial plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartesianState {
    pub y1: f64,
    pub y2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl CartesianState {
    pub fn to_polar(&self) -> Result<PolarState> {
        let rho = libm::hypot(self.y1, self.y2);
        if rho == 0.0 || !rho.is_finite() {
            return Err(Error::OriginSingularity { rho });
        }
        let theta = atan2(self.y2, self.y1);
        let v_rho = (self.y1 * self.v1 + self.y2 * self.v2) / rho;
        let v_theta = (self.y1 * self.v2 - self.y2 * self.v1) / rho;
        Ok(PolarState::new(rho, theta, v_rho, v_theta))
    }
}

/// Osculating planar conic of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitalElements {
    /// Semi-major axis, km.
    pub a: f64,
    /// Scalar eccentricity.
    pub e: f64,
    /// Argument of perigee in `[0, 2pi)`.
    pub omega: f64,
    /// True anomaly in `(-pi, pi]`.
    pub theta_star: f64,
    /// Specific orbital energy, km^2/s^2.
    pub energy: f64,
    /// Specific angular momentum, km^2/s.
    pub h: f64,
    /// Semilatus rectum, km.
    pub p: f64,
}

impl OrbitalElements {
    /// Cartesian components `(e cos omega, e sin omega)` of the eccentricity vector.
    pub fn eccentricity_vector(&self) -> (f64, f64) {
        let (s, c) = sin_cos(self.omega);
        (self.e * c, self.e * s)
    }
}

/// Below this eccentricity the perigee direction is undefined and omega := theta.
pub const CIRCULAR_ECCENTRICITY: f64 = 1e-12;

#[inline]
pub fn energy(s: &PolarState, mu: GravConstant) -> f64 {
    -mu.mu() / s.rho + 0.5 * s.speed_squared()
}

#[inline]
pub fn angular_momentum(s: &PolarState) -> f64 {
    s.rho * s.v_theta
}

/// `a = -mu / (2E)`.
pub fn semi_major_axis(s: &PolarState, mu: GravConstant) -> Result<f64> {
    semi_major_axis_from_energy(energy(s, mu), s.rho, mu)
}

fn semi_major_axis_from_energy(energy: f64, rho: f64, mu: GravConstant) -> Result<f64> {
    // Relative to the local potential depth mu / rho.
    if energy.abs() <= 1e-12 * mu.mu() / rho {
        return Err(Error::ParabolicState { energy });
    }
    Ok(-mu.mu() / (2.0 * energy))
}

/// `e = sqrt(1 + 2 E h^2 / mu^2)`.
///
/// With `x = rho v_theta^2 / mu` the radicand equals
/// `(x - 1)^2 + (rho v_rho v_theta / mu)^2` exactly; that sum of squares is
/// evaluated instead, since the closed form cancels catastrophically near
/// circular orbits (a radicand of 1e-16 from roundoff would read as e ~ 1e-8).
/// It is nonnegative by construction, so no clamping is needed.
pub fn eccentricity(s: &PolarState, mu: GravConstant) -> f64 {
    let m = mu.mu();
    let x = s.rho * s.v_theta * s.v_theta / m;
    libm::hypot(x - 1.0, s.rho * s.v_rho * s.v_theta / m)
}

/// True anomaly from the half-angle relation
/// `tan(theta*/2) = rho v_rho sqrt(p/mu) / (rho (e - 1) + p)`.
///
/// The relation is evaluated through its double angle,
/// `theta* = atan2(rho v_rho sqrt(p/mu), p - rho)`, because numerator and
/// denominator of the half-angle form both vanish at apogee. Result lies in
/// `(-pi, pi]`; apogee maps to `pi`.
pub fn true_anomaly(s: &PolarState, e: f64, p: f64, mu: GravConstant) -> Result<f64> {
    if !(p > 1e-12 * s.rho) {
        return Err(Error::DegenerateConic { p });
    }
    if e < CIRCULAR_ECCENTRICITY {
        return Ok(0.0);
    }
    let y = s.rho * s.v_rho * sqrt(p / mu.mu());
    let x = p - s.rho;
    Ok(math::wrap_pi(atan2(y, x)))
}

pub fn elements(s: &PolarState, mu: GravConstant) -> Result<OrbitalElements> {
    let energy = energy(s, mu);
    let h = angular_momentum(s);
    let a = semi_major_axis_from_energy(energy, s.rho, mu)?;
    let e = eccentricity(s, mu);
    let p = a * (1.0 - e * e);
    let theta_star = true_anomaly(s, e, p, mu)?;
    let omega = math::wrap_two_pi(s.theta - theta_star);
    Ok(OrbitalElements { a, e, omega, theta_star, energy, h, p })
}

/// `sqrt(mu / rho)`.
#[inline]
pub fn circular_velocity(rho: f64, mu: GravConstant) -> f64 {
    sqrt(mu.mu() / rho)
}

/// State on the conic `(a, e, omega)` at true anomaly `theta_star`.
pub fn state_from_elements(
    a: f64,
    e: f64,
    omega: f64,
    theta_star: f64,
    mu: GravConstant,
) -> PolarState {
    let p = a * (1.0 - e * e);
    let (s, c) = sin_cos(theta_star);
    let rho = p / (1.0 + e * c);
    let k = sqrt(mu.mu() / p);
    PolarState::new(rho, omega + theta_star, k * e * s, k * (1.0 + e * c))
}
