//! ℓ1 linearization baseline.
//!
//! From `x₁ = 0` each step solves `min ‖p‖₁ s.t. f_k + J_k p = 0` and takes
//! the full step `x_{k+1} = x_k + p_k`. The subproblem is posed as an LP in
//! `w = (u; v) ≥ 0` with `p = u − v` and solved by the dense simplex in
//! [`simplex`].

mod simplex;

pub use simplex::{simplex_solve, LpSolution, LpStandardForm, LpStatus};

use crate::greedy_gn::{SolveReport, SolveStatus, SolverConfig, SupportSet, TraceRow};
use crate::numlin::{Matrix, Vector};
use crate::problems::NonlinearSystem;
use crate::{Error, Result};

pub const LP_FEAS_TOL: f64 = 1e-9;
/// Iterates with `‖x‖` above this abort the run as diverged.
pub const L1_DIVERGENCE_BOUND: f64 = 1e6;

/// The LP whose optimum gives the ℓ1-minimal correction for `(J, f)`.
pub fn l1_program(jac: &Matrix, f: &Vector) -> Result<LpStandardForm> {
    let (m, n) = jac.shape();
    if f.len() != m {
        return Err(Error::invalid(format!("jacobian has {m} rows but f has {}", f.len())));
    }
    let mut a = Matrix::zeros(m, 2 * n);
    a.view_mut((0, 0), (m, n)).copy_from(jac);
    a.view_mut((0, n), (m, n)).copy_from(&(-jac));
    LpStandardForm::new(Vector::from_element(2 * n, 1.0), a, -f)
}

pub fn max_pivots(m: usize, n_vars: usize) -> usize {
    50 * (m + 2 * n_vars)
}

/// Minimum ℓ1-norm `p` with `f + Jp = 0`.
///
/// The LP is solved for `f/‖f‖` and rescaled, so the simplex tolerances
/// stay meaningful as `f` shrinks.
pub fn l1_step(jac: &Matrix, f: &Vector) -> Result<Vector> {
    let n = jac.ncols();
    let scale = f.norm();
    if scale == 0.0 {
        l1_program(jac, f)?;
        return Ok(Vector::zeros(n));
    }
    let lp = l1_program(jac, &(f / scale))?;
    let sol = simplex_solve(&lp, LP_FEAS_TOL, max_pivots(jac.nrows(), n));
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(sol.status));
    }
    Ok(Vector::from_fn(n, |i, _| {
        let (u, v) = (sol.w[i], sol.w[n + i]);
        let overlap = u.min(v);
        scale * ((u - overlap) - (v - overlap))
    }))
}

/// Runs the ℓ1 method with full steps from `x = 0`.
///
/// Uses `k_max`, `eps_f`, `delta_x` and `record_iterates` from `cfg`; the
/// greedy-only settings are ignored. `converged` reflects the iteration's
/// own stopping test on the last iterate. Thresholding the many small ℓ1
/// entries can raise `final_f_norm` above `eps_f`, so that field is reported
/// separately and not folded into the flag.
pub fn l1_solve(sys: &dyn NonlinearSystem, cfg: &SolverConfig) -> Result<SolveReport> {
    l1_solve_with_observer(sys, cfg, &mut |_| {})
}

/// Like [`l1_solve`], calling `observer` on every trace row as it is produced.
pub fn l1_solve_with_observer(
    sys: &dyn NonlinearSystem,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&TraceRow),
) -> Result<SolveReport> {
    cfg.validate()?;
    let n_vars = sys.n_vars();
    let mut x = Vector::zeros(n_vars);
    let mut f = sys.eval(&x)?;
    let mut trace = Vec::new();
    let mut iterates = cfg.record_iterates.then(Vec::new);
    let mut status = SolveStatus::IterationLimit;
    let mut reached = false;

    for k in 1.. {
        let f_norm = f.norm();
        if let Some(it) = iterates.as_mut() {
            it.push(x.as_slice().to_vec());
        }
        let mut row = TraceRow {
            k,
            f_norm,
            support_size: x.iter().filter(|v| **v != 0.0).count(),
            added: None,
            alpha: None,
            restart: false,
            score: None,
        };
        if !(f_norm > cfg.eps_f && k < cfg.k_max) {
            reached = f_norm <= cfg.eps_f;
            observer(&row);
            trace.push(row);
            break;
        }
        let step = sys.jacobian(&x).and_then(|jac| l1_step(&jac, &f));
        let p = match step {
            Ok(p) => p,
            Err(e) => {
                status = match e {
                    Error::Lp(_) => SolveStatus::LpFailure,
                    _ => SolveStatus::EvaluationFailure,
                };
                observer(&row);
                trace.push(row);
                break;
            }
        };
        row.alpha = Some(1.0);
        observer(&row);
        trace.push(row);
        x += p;
        if x.norm() > L1_DIVERGENCE_BOUND {
            status = SolveStatus::Diverged;
            break;
        }
        match sys.eval(&x) {
            Ok(v) if v.iter().all(|e| e.is_finite()) => f = v,
            _ => {
                status = SolveStatus::EvaluationFailure;
                break;
            }
        }
    }

    for v in x.iter_mut() {
        if v.abs() <= cfg.delta_x {
            *v = 0.0;
        }
    }
    let support = SupportSet::from_threshold(&x, cfg.delta_x);
    let final_f_norm = sys.eval(&x).map(|f| f.norm()).unwrap_or(f64::INFINITY);
    let converged = reached;
    if converged {
        status = SolveStatus::Converged;
    }
    Ok(SolveReport {
        method: "l1".to_string(),
        x,
        support,
        converged,
        status,
        iterations: trace.len(),
        restarts: 0,
        final_f_norm,
        trace,
        iterates,
    })
}
