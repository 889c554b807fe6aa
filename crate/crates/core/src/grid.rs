//! The circular-crown state grid.
//!
//! A tensor-product lattice over `(rho, theta, v_rho, v_theta)`. The `theta`
//! axis is periodic; the others are bounded and vertex-centered, with the
//! first and last nodes exactly on the bounds. Nodes are numbered row-major
//! with `rho` slowest and `v_theta` fastest:
//!
//! ```text
//! flat = ((i_rho * n_theta + i_theta) * n_v_rho + i_v_rho) * n_v_theta + i_v_theta
//! ```
//!
//! This layout is part of the persisted archive format.

use crate::error::{Error, Result};
use crate::math::{self, TAU};
use crate::orbital::PolarState;

pub const RHO: usize = 0;
pub const THETA: usize = 1;
pub const V_RHO: usize = 2;
pub const V_THETA: usize = 3;

/// Coordinates closer than this (in cell units) to a node snap onto it.
const SNAP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub periodic: bool,
    step: f64,
}

impl Axis {
    fn new(axis: usize, (lo, hi): (f64, f64), n: usize, periodic: bool) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidBounds { axis, reason: "bounds must be finite" });
        }
        if !(lo < hi) {
            return Err(Error::InvalidBounds { axis, reason: "lower bound must be below upper bound" });
        }
        if n < 2 {
            return Err(Error::InvalidBounds { axis, reason: "at least two nodes per axis" });
        }
        let step = if periodic { (hi - lo) / n as f64 } else { (hi - lo) / (n - 1) as f64 };
        Ok(Self { lo, hi, n, periodic, step })
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        if !self.periodic && i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.step
        }
    }

    /// Lower node index, upper node index and fractional position of `x`
    /// inside its cell; `None` outside a bounded axis.
    #[inline]
    fn locate(&self, x: f64) -> Option<(usize, usize, f64)> {
        let n = self.n;
        if self.periodic {
            if !x.is_finite() {
                return None;
            }
            let period = n as f64;
            let mut t = libm::fmod((x - self.lo) / self.step, period);
            if t < 0.0 {
                t += period;
            }
            let r = math::round(t);
            if (t - r).abs() < SNAP {
                t = r;
            }
            if t >= period {
                t -= period;
            }
            let i = (math::floor(t) as usize).min(n - 1);
            let next = if i + 1 == n { 0 } else { i + 1 };
            Some((i, next, t - i as f64))
        } else {
            if !(x >= self.lo && x <= self.hi) {
                return None;
            }
            let mut t = (x - self.lo) / self.step;
            let r = math::round(t);
            if (t - r).abs() < SNAP {
                t = r;
            }
            let i = (math::floor(t) as usize).min(n - 2);
            let f = (t - i as f64).clamp(0.0, 1.0);
            Some((i, i + 1, f))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrownGrid {
    axes: [Axis; 4],
    strides: [usize; 4],
    len: usize,
}

impl CrownGrid {
    /// Generic tensor grid over `[rho, theta, v_rho, v_theta]`.
    pub fn build(bounds: [(f64, f64); 4], counts: [usize; 4], periodic: [bool; 4]) -> Result<Self> {
        let mut axes = [Axis { lo: 0.0, hi: 1.0, n: 2, periodic: false, step: 1.0 }; 4];
        for a in 0..4 {
            axes[a] = Axis::new(a, bounds[a], counts[a], periodic[a])?;
        }
        let len = counts.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
        let len = match len {
            Some(len) if len <= u32::MAX as usize => len,
            _ => return Err(Error::InvalidBounds { axis: 0, reason: "too many nodes" }),
        };
        let strides = [counts[1] * counts[2] * counts[3], counts[2] * counts[3], counts[3], 1];
        Ok(Self { axes, strides, len })
    }

    /// Crown with `theta` periodic over `[0, 2pi)`.
    pub fn crown(
        rho: (f64, f64),
        v_rho: (f64, f64),
        v_theta: (f64, f64),
        counts: [usize; 4],
    ) -> Result<Self> {
        Self::build([rho, (0.0, TAU), v_rho, v_theta], counts, [false, true, false, false])
    }

    /// Number of nodes.
    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn counts(&self) -> [usize; 4] {
        [self.axes[0].n, self.axes[1].n, self.axes[2].n, self.axes[3].n]
    }

    pub fn flat_index(&self, multi: [usize; 4]) -> Result<usize> {
        let mut flat = 0;
        for a in 0..4 {
            if multi[a] >= self.axes[a].n {
                return Err(Error::IndexOutOfRange { index: multi[a], len: self.axes[a].n });
            }
            flat += multi[a] * self.strides[a];
        }
        Ok(flat)
    }

    pub fn multi_index(&self, flat: usize) -> Result<[usize; 4]> {
        if flat >= self.len {
            return Err(Error::IndexOutOfRange { index: flat, len: self.len });
        }
        Ok(self.multi_index_unchecked(flat))
    }

    #[inline]
    fn multi_index_unchecked(&self, flat: usize) -> [usize; 4] {
        let mut rest = flat;
        let mut multi = [0; 4];
        for a in 0..4 {
            multi[a] = rest / self.strides[a];
            rest %= self.strides[a];
        }
        multi
    }

    pub fn node_state(&self, flat: usize) -> Result<PolarState> {
        if flat >= self.len {
            return Err(Error::IndexOutOfRange { index: flat, len: self.len });
        }
        Ok(self.node(flat))
    }

    #[inline]
    pub(crate) fn node(&self, flat: usize) -> PolarState {
        let m = self.multi_index_unchecked(flat);
        PolarState {
            rho: self.axes[RHO].coordinate(m[RHO]),
            theta: self.axes[THETA].coordinate(m[THETA]),
            v_rho: self.axes[V_RHO].coordinate(m[V_RHO]),
            v_theta: self.axes[V_THETA].coordinate(m[V_THETA]),
        }
    }

    /// Containing cell of `q`, or `None` when a bounded coordinate leaves
    /// its (closed) range.
    #[inline]
    pub fn locate(&self, q: &PolarState) -> Option<Cell> {
        let coords = [q.rho, q.theta, q.v_rho, q.v_theta];
        let mut cell = Cell { offsets: [[0; 2]; 4], frac: [0.0; 4] };
        for a in 0..4 {
            let (i, j, f) = self.axes[a].locate(coords[a])?;
            let s = self.strides[a];
            cell.offsets[a] = [(i * s) as u32, (j * s) as u32];
            cell.frac[a] = f;
        }
        Some(cell)
    }

    #[inline]
    pub fn contains(&self, q: &PolarState) -> bool {
        self.locate(q).is_some()
    }

    pub fn stencil(&self, q: &PolarState) -> Option<Stencil> {
        self.locate(q).map(|c| c.stencil())
    }

    /// Multilinear interpolation of `field` at `q`; `penalty` outside the crown.
    pub fn interpolate(&self, field: &[f64], q: &PolarState, penalty: f64) -> f64 {
        debug_assert_eq!(field.len(), self.len);
        match self.locate(q) {
            Some(cell) => cell.interpolate(field),
            None => penalty,
        }
    }
}

/// A located query point: per-axis flat offsets of the two bracketing node
/// layers and the fractional position between them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    offsets: [[u32; 2]; 4],
    frac: [f64; 4],
}

impl Cell {
    #[inline(always)]
    fn pair_weights(&self, a: usize, b: usize) -> [f64; 4] {
        let (fa, fb) = (self.frac[a], self.frac[b]);
        let (ga, gb) = (1.0 - fa, 1.0 - fb);
        [ga * gb, fa * gb, ga * fb, fa * fb]
    }

    /// Visits the 16 corners as `(flat index, weight)`. Corner `k` takes the
    /// upper node on axis `a` when bit `a` of `k` is set.
    #[inline(always)]
    pub fn for_each_corner(&self, mut f: impl FnMut(usize, f64)) {
        let w01 = self.pair_weights(0, 1);
        let w23 = self.pair_weights(2, 3);
        let o = &self.offsets;
        for hi in 0..4 {
            let base_hi = o[2][hi & 1] + o[3][hi >> 1];
            for lo in 0..4 {
                let idx = base_hi + o[0][lo & 1] + o[1][lo >> 1];
                f(idx as usize, w01[lo] * w23[hi]);
            }
        }
    }

    #[inline(always)]
    pub fn interpolate(&self, field: &[f64]) -> f64 {
        let mut acc = 0.0;
        self.for_each_corner(|i, w| acc += w * field[i]);
        acc
    }

    pub fn stencil(&self) -> Stencil {
        let mut st = Stencil { indices: [0; 16], weights: [0.0; 16] };
        let mut k = 0;
        self.for_each_corner(|i, w| {
            st.indices[k] = i as u32;
            st.weights[k] = w;
            k += 1;
        });
        st
    }
}

/// Node indices and convex weights of a multilinear interpolation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    pub indices: [u32; 16],
    pub weights: [f64; 16],
}

impl Stencil {
    pub fn apply(&self, field: &[f64]) -> f64 {
        self.indices.iter().zip(&self.weights).map(|(&i, &w)| w * field[i as usize]).sum()
    }
}
