//! Policy iteration: sparse policy evaluation and warm-started improvement.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::linear::{gmres, CsrMatrix, GmresReport};
use super::{sup_diff, Scheme, Solution};
use crate::error::{Error, Result};

/// Linear system `(I - g P_f) v = dt l_f` of a frozen policy `f`, where the
/// rows of `P_f` hold the landing stencils and `g = exp(-lambda dt)`.
/// Rows whose landing leaves the crown are identity rows with the penalty
/// folded into the right-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Row-wise sum of `P_f`: 1 for in-crown landings, 0 for penalty rows.
    pub transition_mass: Vec<f64>,
}

type Row = ([(u32, f64); 17], u8);

impl Scheme {
    fn check_policy(&self, policy: &[u32]) -> Result<()> {
        if policy.len() != self.grid.len() {
            return Err(Error::LengthMismatch { expected: self.grid.len(), got: policy.len() });
        }
        if let Some(&bad) = policy.iter().find(|&&c| c as usize >= self.controls.len()) {
            return Err(Error::IndexOutOfRange { index: bad as usize, len: self.controls.len() });
        }
        Ok(())
    }

    pub fn assemble_evaluation(&self, policy: &[u32]) -> Result<EvaluationSystem> {
        self.check_policy(policy)?;
        let n = self.grid.len();
        let g = self.discount;
        let mut rows: Vec<Row> = vec![([(0, 0.0); 17], 0); n];
        let mut rhs = vec![0.0; n];
        let mut mass = vec![0.0; n];
        crate::par::fill(&mut rows, |j| {
            let mut row = [(0u32, 0.0); 17];
            row[0] = (j as u32, 1.0);
            let mut len = 1usize;
            if let Some(cell) = self.landing(j, policy[j] as usize) {
                cell.for_each_corner(|i, w| {
                    if w == 0.0 {
                        return;
                    }
                    let i = i as u32;
                    match row[..len].iter_mut().find(|(c, _)| *c == i) {
                        Some(entry) => entry.1 -= g * w,
                        None => {
                            row[len] = (i, -g * w);
                            len += 1;
                        }
                    }
                });
                row[..len].sort_unstable_by_key(|e| e.0);
            }
            (row, len as u8)
        });
        crate::par::fill2(&mut rhs, &mut mass, |j| {
            let c = policy[j] as usize;
            let cost = self.step_cost(j, c);
            match self.landing(j, c) {
                Some(_) => (cost, 1.0),
                None => (cost + g * self.penalty, 0.0),
            }
        });
        let matrix = CsrMatrix::from_rows(n, rows.iter().map(|(r, len)| &r[..*len as usize]));
        Ok(EvaluationSystem { matrix, rhs, transition_mass: mass })
    }

    /// Solves an evaluation system by GMRES, warm-started from `initial`.
    pub fn solve_evaluation(&self, sys: &EvaluationSystem, initial: &[f64]) -> Result<(Vec<f64>, GmresReport)> {
        self.check_len(initial)?;
        let mut x = initial.to_vec();
        let report = gmres(
            &sys.matrix,
            &sys.rhs,
            &mut x,
            self.cfg.linear_tol,
            self.cfg.gmres_restart,
            self.cfg.max_restarts,
        )?;
        Ok((x, report))
    }

    /// Exhaustive argmin at node `j` over the tabulation (lowest index on ties).
    fn scan(&self, j: usize, field: &[f64]) -> (u32, f64) {
        let (v, c) = self.bellman_update(j, field);
        (c, v)
    }

    /// Local search from the previous control: the angles form a cycle that
    /// is walked one tabulation step at a time while the scheme value
    /// strictly decreases; the null control is compared at the end.
    /// Starting from the null control, every angle is a neighbor, which
    /// amounts to a full scan.
    fn walk(&self, j: usize, field: &[f64], prev: u32) -> (u32, f64) {
        if prev == 0 {
            return self.scan(j, field);
        }
        let angles = self.controls.len() - 1;
        let next = |c: usize| if c == angles { 1 } else { c + 1 };
        let back = |c: usize| if c == 1 { angles } else { c - 1 };
        let q = |c: usize| self.bellman_rhs(j, field, c);

        let null_value = q(0);
        let mut cur = prev as usize;
        let mut value = q(cur);
        let (fwd, bwd) = (next(cur), back(cur));
        let (qf, qb) = (q(fwd), q(bwd));
        let (mut cand, mut cand_value, step): (usize, f64, fn(usize, usize) -> usize) =
            if qb < value && qb <= qf {
                (bwd, qb, |c, n| if c == 1 { n } else { c - 1 })
            } else if qf < value {
                (fwd, qf, |c, n| if c == n { 1 } else { c + 1 })
            } else {
                (cur, value, |c, _| c)
            };
        let mut steps = 0;
        while cand != cur && steps < angles {
            cur = cand;
            value = cand_value;
            cand = step(cur, angles);
            cand_value = q(cand);
            if !(cand_value < value) {
                break;
            }
            steps += 1;
        }
        if null_value <= value {
            (0, null_value)
        } else {
            (cur as u32, value)
        }
    }

    /// Policy improvement on `field`. With `exhaustive` every node scans the
    /// whole tabulation; otherwise it walks from its previous control. A
    /// node switches only when the new control strictly lowers the scheme
    /// value. Returns the new policy and the number of switched nodes.
    pub fn improve_policy(&self, field: &[f64], prev: &[u32], exhaustive: bool) -> Result<(Vec<u32>, usize)> {
        self.check_len(field)?;
        self.check_policy(prev)?;
        let mut policy = vec![0u32; prev.len()];
        crate::par::fill(&mut policy, |j| {
            let (best, best_value) = if exhaustive { self.scan(j, field) } else { self.walk(j, field, prev[j]) };
            if best == prev[j] {
                return best;
            }
            let current = self.bellman_rhs(j, field, prev[j] as usize);
            if best_value < current {
                best
            } else {
                prev[j]
            }
        });
        let changed = policy.iter().zip(prev).filter(|(a, b)| a != b).count();
        Ok((policy, changed))
    }

    /// Howard's policy iteration from the all-coasting policy.
    ///
    /// Each outer iteration evaluates the current policy by a sparse linear
    /// solve and improves it greedily: by a full scan on the first iteration
    /// and by the warm-started walk afterwards. When the walk changes
    /// nothing, a full scan confirms convergence. Iteration stops once the
    /// policy is stable under the full scan or the value changes by less
    /// than `tol` between evaluations.
    pub fn policy_iteration(&self, initial_policy: Option<&[u32]>, initial_values: Option<&[f64]>) -> Result<Solution> {
        let n = self.grid.len();
        let mut policy = match initial_policy {
            Some(p) => {
                self.check_policy(p)?;
                p.to_vec()
            }
            None => vec![0u32; n],
        };
        let mut values = match initial_values {
            Some(v) => {
                self.check_len(v)?;
                v.to_vec()
            }
            None => vec![0.0; n],
        };
        let mut history = Vec::new();
        let mut linear_iterations = 0;
        let mut previous: Option<Vec<f64>> = None;

        for k in 0..self.cfg.max_iters {
            let sys = self.assemble_evaluation(&policy)?;
            let (v, report) = self.solve_evaluation(&sys, &values)?;
            values = v;
            linear_iterations += report.iterations;
            let delta = previous.as_deref().map_or(f64::INFINITY, |p| sup_diff(&values, p));
            if previous.is_some() {
                history.push(delta);
            }

            let exhaustive = k == 0;
            let (mut next, mut changed) = self.improve_policy(&values, &policy, exhaustive)?;
            if changed == 0 && !exhaustive {
                (next, changed) = self.improve_policy(&values, &policy, true)?;
            }
            if changed == 0 || delta < self.cfg.tol {
                return Ok(Solution {
                    values,
                    policy: next,
                    iterations: k + 1,
                    residual: if delta.is_finite() { delta } else { 0.0 },
                    history,
                    linear_iterations,
                });
            }
            policy = next;
            previous = Some(values.clone());
        }
        let residual = history.last().copied().unwrap_or(f64::INFINITY);
        Err(Error::MaxItersExceeded {
            partial: Box::new(Solution {
                values,
                policy,
                iterations: self.cfg.max_iters,
                residual,
                history,
                linear_iterations,
            }),
        })
    }
}
