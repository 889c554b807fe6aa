// Thin libm shims so the numerics are identical with and without `std`.

pub(crate) use core::f64::consts::{PI, TAU};

#[inline(always)]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline(always)]
pub(crate) fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

#[inline(always)]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline(always)]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline(always)]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline(always)]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Wraps an angle into `[0, 2pi)`.
#[inline]
pub(crate) fn wrap_two_pi(angle: f64) -> f64 {
    let mut a = libm::fmod(angle, TAU);
    if a < 0.0 {
        a += TAU;
    }
    // -tiny % TAU + TAU rounds to TAU itself.
    if a >= TAU {
        a = 0.0;
    }
    a
}

/// Wraps an angle into `(-pi, pi]`.
#[inline]
pub(crate) fn wrap_pi(angle: f64) -> f64 {
    let a = wrap_two_pi(angle);
    if a > PI {
        a - TAU
    } else {
        a
    }
}
