use super::Scheme;
use crate::dynamics::Control;
use crate::math::sqrt;

/// Golden-section search for a minimizer of `f` on `[lo, hi]`, returning
/// `(x, f(x))` once the bracket is narrower than `tol`.
pub fn golden_section_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (sqrt(5.0) - 1.0) / 2.0;
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // Each step shrinks the bracket by 1/phi; the cap only guards tol = 0.
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Refines a tabulated thrust angle inside `[phi - step, phi + step]`.
/// The refined angle is returned only when it strictly lowers `objective`.
pub fn refine_angle(phi: f64, step: f64, mut objective: impl FnMut(f64) -> f64) -> f64 {
    let coarse = objective(phi);
    let (best, value) = golden_section_min(&mut objective, phi - step, phi + step, 1e-7);
    if value < coarse {
        best
    } else {
        phi
    }
}

impl Scheme {
    /// Golden-section refinement of the thrust angle of tabulated control
    /// `coarse` at node `j`. The null control is never refined.
    pub fn refine_control(&self, j: usize, field: &[f64], coarse: usize) -> Control {
        let c = self.controls[coarse];
        if c.is_null() {
            return c;
        }
        let u = self.problem.u_max;
        let phi = refine_angle(c.phi(), self.cfg.angle_step, |phi| {
            self.bellman_rhs_with(j, field, &Control::thrust(u, phi))
        });
        Control::thrust(u, phi)
    }
}
