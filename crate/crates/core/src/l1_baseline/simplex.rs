//! Dense two-phase primal simplex for `min cᵀw s.t. Aw = b, w ≥ 0`.
//!
//! Pricing is Dantzig's most-negative reduced cost. After `2m` consecutive
//! degenerate pivots the solver switches to Bland's smallest-index rule
//! until the objective moves again, which rules out cycling. The final
//! basic solution is recomputed from an LU solve with the original basis
//! columns so tableau roundoff does not leak into `w`.

use serde::{Deserialize, Serialize};

use crate::numlin::{Matrix, Vector};
use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-11;

/// `min cᵀw` subject to `Aw = b`, `w ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpStandardForm {
    pub cost: Vector,
    pub a: Matrix,
    pub b: Vector,
}

impl LpStandardForm {
    pub fn new(cost: Vector, a: Matrix, b: Vector) -> Result<Self> {
        if a.ncols() != cost.len() || a.nrows() != b.len() {
            return Err(Error::invalid(format!(
                "LP dimensions disagree: A is {}x{}, c has {}, b has {}",
                a.nrows(),
                a.ncols(),
                cost.len(),
                b.len()
            )));
        }
        if !(cost.iter().chain(a.iter()).chain(b.iter())).all(|v| v.is_finite()) {
            return Err(Error::invalid("LP data must be finite"));
        }
        Ok(Self { cost, a, b })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub w: Vector,
    pub objective: f64,
    pub status: LpStatus,
    pub pivots: usize,
}

struct Tableau {
    /// `B⁻¹[A | I]`, `m × (n + m)`.
    body: Matrix,
    rhs: Vector,
    /// Reduced costs for the current objective.
    reduced: Vec<f64>,
    basis: Vec<usize>,
    n_struct: usize,
    pivots: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn price(&mut self, cost: &[f64]) {
        let cols = self.body.ncols();
        self.reduced = (0..cols)
            .map(|j| {
                let basic: f64 = (0..self.basis.len())
                    .map(|i| cost[self.basis[i]] * self.body[(i, j)])
                    .sum();
                cost[j] - basic
            })
            .collect();
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis.iter().zip(self.rhs.iter()).map(|(&j, v)| cost[j] * v).sum()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.body[(row, col)];
        let cols = self.body.ncols();
        for j in 0..cols {
            self.body[(row, j)] /= p;
        }
        self.rhs[row] /= p;
        for i in 0..self.body.nrows() {
            if i == row {
                continue;
            }
            let factor = self.body[(i, col)];
            if factor != 0.0 {
                for j in 0..cols {
                    let v = self.body[(row, j)];
                    self.body[(i, j)] -= factor * v;
                }
                self.body[(i, col)] = 0.0;
                self.rhs[i] -= factor * self.rhs[row];
            }
        }
        let factor = self.reduced[col];
        if factor != 0.0 {
            for j in 0..cols {
                self.reduced[j] -= factor * self.body[(row, j)];
            }
            self.reduced[col] = 0.0;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    fn run_phase(&mut self, allowed: usize, max_pivots: usize) -> PhaseEnd {
        let m = self.body.nrows();
        let mut degenerate_run = 0;
        let mut bland = false;
        loop {
            let entering = if bland {
                (0..allowed).find(|&j| self.reduced[j] < -OPT_TOL)
            } else {
                (0..allowed)
                    .filter(|&j| self.reduced[j] < -OPT_TOL)
                    .min_by(|&a, &b| self.reduced[a].total_cmp(&self.reduced[b]))
            };
            let Some(col) = entering else {
                return PhaseEnd::Optimal;
            };
            if self.pivots >= max_pivots {
                return PhaseEnd::IterationLimit;
            }
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.body[(i, col)];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * best.abs().max(1.0);
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[r]
                            } else {
                                a > self.body[(r, col)]
                            }
                        } else {
                            ratio < best
                        };
                        if better { Some((i, ratio)) } else { Some((r, best)) }
                    }
                };
            }
            let Some((row, ratio)) = leave else {
                return PhaseEnd::Unbounded;
            };
            if ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run >= 2 * m {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            self.pivot(row, col);
        }
    }
}

/// Solves the LP; never fails on feasible finite data except through
/// [`LpStatus::IterationLimit`].
pub fn simplex_solve(lp: &LpStandardForm, feas_tol: f64, max_pivots: usize) -> LpSolution {
    let (m, n) = lp.a.shape();
    let mut a = lp.a.clone();
    let mut b = lp.b.clone();
    for i in 0..m {
        if b[i] < 0.0 {
            b[i] = -b[i];
            a.row_mut(i).neg_mut();
        }
    }
    let mut body = Matrix::zeros(m, n + m);
    body.view_mut((0, 0), (m, n)).copy_from(&a);
    body.view_mut((0, n), (m, m)).fill_with_identity();
    let mut tab = Tableau {
        body,
        rhs: b.clone(),
        reduced: Vec::new(),
        basis: (n..n + m).collect(),
        n_struct: n,
        pivots: 0,
    };

    // phase 1: minimize the sum of artificials
    let phase1_cost: Vec<f64> = (0..n + m).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
    tab.price(&phase1_cost);
    let fail = |status, tab: &Tableau| LpSolution {
        w: Vector::zeros(n),
        objective: f64::NAN,
        status,
        pivots: tab.pivots,
    };
    match tab.run_phase(n + m, max_pivots) {
        PhaseEnd::Optimal => {}
        PhaseEnd::IterationLimit => return fail(LpStatus::IterationLimit, &tab),
        // phase 1 is bounded below by zero
        PhaseEnd::Unbounded => return fail(LpStatus::Infeasible, &tab),
    }
    if tab.objective(&phase1_cost) > feas_tol * (1.0 + b.norm()) {
        return fail(LpStatus::Infeasible, &tab);
    }
    // drive zero-level artificials out where a structural pivot exists
    for row in 0..m {
        if tab.basis[row] >= n {
            if let Some(col) = (0..n).find(|&j| tab.body[(row, j)].abs() > PIVOT_TOL) {
                tab.pivot(row, col);
            }
        }
    }

    let mut phase2_cost: Vec<f64> = lp.cost.iter().cloned().collect();
    phase2_cost.extend(std::iter::repeat_n(0.0, m));
    tab.price(&phase2_cost);
    match tab.run_phase(tab.n_struct, max_pivots) {
        PhaseEnd::Optimal => {}
        PhaseEnd::IterationLimit => return fail(LpStatus::IterationLimit, &tab),
        PhaseEnd::Unbounded => return fail(LpStatus::Unbounded, &tab),
    }

    let w = refine(&tab, &a, &b);
    LpSolution {
        objective: lp.cost.dot(&w),
        w,
        status: LpStatus::Optimal,
        pivots: tab.pivots,
    }
}

/// Basic solution from a fresh LU solve with the final basis.
fn refine(tab: &Tableau, a: &Matrix, b: &Vector) -> Vector {
    let (m, n) = a.shape();
    let basis_matrix = Matrix::from_fn(m, m, |i, k| {
        let j = tab.basis[k];
        if j < n {
            a[(i, j)]
        } else if i == j - n {
            1.0
        } else {
            0.0
        }
    });
    let values = basis_matrix.lu().solve(b).unwrap_or_else(|| tab.rhs.clone());
    let mut w = Vector::zeros(n);
    for (k, &j) in tab.basis.iter().enumerate() {
        if j < n {
            w[j] = values[k].max(0.0);
        }
    }
    w
}
