use alloc::vec;
use alloc::vec::Vec;

use super::{sup_diff, Scheme, Solution};
use crate::error::{Error, Result};
use crate::grid::Cell;

/// Landing cells are cached when nodes x controls stays below this.
const CACHE_LIMIT: usize = 4_000_000;

impl Scheme {
    /// Picard iteration of the Bellman operator from `initial` (zero when
    /// absent).
    ///
    /// Stops once the a-posteriori bound `g / (1 - g) * |V_{k+1} - V_k|_inf`
    /// on the distance to the fixed point, with `g = exp(-lambda dt)`, drops
    /// below `tol`. The returned policy is the argmin of the final sweep.
    pub fn value_iteration(&self, initial: Option<&[f64]>) -> Result<Solution> {
        let n = self.grid.len();
        let k = self.controls.len();
        let mut values = match initial {
            Some(v) => {
                self.check_len(v)?;
                v.to_vec()
            }
            None => vec![0.0; n],
        };
        let mut next = vec![0.0; n];
        let mut policy = vec![0u32; n];

        let cache: Option<Vec<Option<Cell>>> = (n * k <= CACHE_LIMIT).then(|| {
            let mut cells = vec![None; n * k];
            crate::par::fill(&mut cells, |i| self.landing(i / k, i % k));
            cells
        });

        let stop = self.cfg.tol * (1.0 - self.discount) / self.discount;
        let mut history = Vec::new();
        for sweep in 1..=self.cfg.max_iters {
            match &cache {
                Some(cells) => crate::par::fill2(&mut next, &mut policy, |j| {
                    let mut best = (f64::INFINITY, 0u32);
                    for c in 0..k {
                        let q = self.step_cost(j, c) + self.continuation(cells[j * k + c], &values);
                        if q < best.0 {
                            best = (q, c as u32);
                        }
                    }
                    best
                }),
                None => crate::par::fill2(&mut next, &mut policy, |j| {
                    self.bellman_update(j, &values)
                }),
            }
            let delta = sup_diff(&next, &values);
            core::mem::swap(&mut values, &mut next);
            history.push(delta);
            if delta <= stop {
                return Ok(Solution {
                    values,
                    policy,
                    iterations: sweep,
                    residual: delta,
                    history,
                    linear_iterations: 0,
                });
            }
        }
        let residual = history.last().copied().unwrap_or(f64::INFINITY);
        Err(Error::MaxItersExceeded {
            partial: alloc::boxed::Box::new(Solution {
                values,
                policy,
                iterations: self.cfg.max_iters,
                residual,
                history,
                linear_iterations: 0,
            }),
        })
    }
}
