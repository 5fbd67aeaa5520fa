use rand::Rng;

use super::select::{descent_direction, fixed_front_direction, select_column, select_column_omf};
use super::{line_search, SelectionScore, SolveReport, SolveStatus, SolverConfig, Strategy, SupportSet, TraceRow};
use crate::numlin::Vector;
use crate::problems::{seeded_rng, NonlinearSystem, ProblemKind};
use crate::{Error, Result};

/// Sparse random restart point: each entry is uniform in `(−1, 1)` with
/// probability `prob` and zero otherwise.
pub fn restart_vector<R: Rng>(n_vars: usize, prob: f64, rng: &mut R) -> Vector {
    let values: Vec<f64> = (0..n_vars).map(|_| rng.random::<f64>()).collect();
    let mask: Vec<f64> = (0..n_vars).map(|_| rng.random::<f64>()).collect();
    Vector::from_iterator(
        n_vars,
        values
            .iter()
            .zip(&mask)
            .map(|(v, m)| if *m < prob { 2.0 * v - 1.0 } else { 0.0 }),
    )
}

/// Runs the greedy solver from `x = 0`.
pub fn solve(sys: &dyn NonlinearSystem, cfg: &SolverConfig) -> Result<SolveReport> {
    solve_with_observer(sys, cfg, &mut |_| {})
}

/// Like [`solve`], calling `observer` on every trace row as it is produced.
pub fn solve_with_observer(
    sys: &dyn NonlinearSystem,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&TraceRow),
) -> Result<SolveReport> {
    cfg.validate()?;
    let (n_vars, m) = (sys.n_vars(), sys.n_eqs());
    if m >= n_vars {
        return Err(Error::invalid(format!("system must be underdetermined, got m={m} N={n_vars}")));
    }
    let guard = cfg
        .divergence_guard
        .unwrap_or(sys.meta().kind == ProblemKind::Exponential);
    let mut rng = seeded_rng(cfg.seed);

    let mut x = Vector::zeros(n_vars);
    let mut f = sys.eval(&x)?;
    let mut support = SupportSet::empty(n_vars);
    let mut k = 1;
    let mut restarts = 0;
    let mut trace = Vec::new();
    let mut iterates = cfg.record_iterates.then(Vec::new);

    loop {
        let f_norm = f.norm();
        if let Some(it) = iterates.as_mut() {
            it.push(x.as_slice().to_vec());
        }
        if !(f_norm > cfg.eps_f && k < cfg.k_max) {
            let row = TraceRow {
                k,
                f_norm,
                support_size: support.len(),
                added: None,
                alpha: None,
                restart: false,
                score: None,
            };
            observer(&row);
            trace.push(row);
            break;
        }

        let step = take_step(sys, cfg, &x, &f, &support, guard);
        let row_support = support.len();
        let (added, alpha, score, restart) = match step {
            Ok(StepOutcome::Accepted { x_new, f_new, support_new, selection, alpha }) => {
                x = x_new;
                f = f_new;
                support = support_new;
                (selection.map(|s| s.index), alpha, selection.map(|s| s.score), false)
            }
            Ok(StepOutcome::Restart { selection, alpha }) => {
                (selection.map(|s| s.index), alpha, selection.map(|s| s.score), true)
            }
            Err(_) => (None, 0.0, None, true),
        };
        if restart {
            restarts += 1;
            let (x_new, f_new) = restart_point(sys, cfg, &mut rng)?;
            x = x_new;
            f = f_new;
            support = SupportSet::from_threshold(&x, cfg.delta_x);
        }
        let row = TraceRow {
            k,
            f_norm,
            support_size: row_support,
            added,
            alpha: Some(alpha),
            restart,
            score,
        };
        observer(&row);
        trace.push(row);
        k += 1;
    }

    for v in x.iter_mut() {
        if v.abs() <= cfg.delta_x {
            *v = 0.0;
        }
    }
    let support = SupportSet::from_threshold(&x, cfg.delta_x);
    let final_f_norm = sys.eval(&x).map(|f| f.norm()).unwrap_or(f64::INFINITY);
    let converged = final_f_norm <= cfg.eps_f;
    Ok(SolveReport {
        method: cfg.strategy.name().to_string(),
        x,
        support,
        converged,
        status: if converged { SolveStatus::Converged } else { SolveStatus::IterationLimit },
        iterations: trace.len(),
        restarts,
        final_f_norm,
        trace,
        iterates,
    })
}

enum StepOutcome {
    Accepted {
        x_new: Vector,
        f_new: Vector,
        support_new: SupportSet,
        selection: Option<SelectionScore>,
        alpha: f64,
    },
    Restart {
        selection: Option<SelectionScore>,
        alpha: f64,
    },
}

/// One pass of select / direction / line search / restart test.
fn take_step(
    sys: &dyn NonlinearSystem,
    cfg: &SolverConfig,
    x: &Vector,
    f: &Vector,
    support: &SupportSet,
    guard: bool,
) -> Result<StepOutcome> {
    let jac = sys.jacobian(x)?;
    let mut support_new = support.clone();
    let (selection, p) = if cfg.strategy == Strategy::FixedFrontOm {
        match select_column_omf(&jac, f, support, cfg.sel_tol)? {
            Some((sel, delta, d)) => {
                let p = fixed_front_direction(support, &d, sel.index, delta);
                support_new.insert(sel.index)?;
                (Some(sel), p)
            }
            None => (None, descent_direction(&jac, f, support)?),
        }
    } else {
        let sel = select_column(cfg.strategy, &jac, f, support, cfg.sel_tol)?;
        if let Some(s) = sel {
            support_new.insert(s.index)?;
        }
        (sel, descent_direction(&jac, f, &support_new)?)
    };

    let gradient = jac.tr_mul(f);
    let slope0 = p.dot(&gradient);
    let stationary = gradient.norm() / f.norm() < cfg.delta_grad;
    if support_new.is_empty() || !(slope0 < 0.0) || stationary {
        return Ok(StepOutcome::Restart { selection, alpha: 0.0 });
    }

    let phi0 = 0.5 * f.norm_squared();
    let (alpha, accepted) = line_search(
        |a| sys.eval(&(x + &p * a)).ok().map(|fa| 0.5 * fa.norm_squared()),
        phi0,
        slope0,
        &cfg.line_search,
        cfg.delta_alpha,
    );
    if !accepted || alpha < cfg.delta_alpha {
        return Ok(StepOutcome::Restart { selection, alpha });
    }
    let x_new = x + &p * alpha;
    if guard && x_new.amax() > cfg.divergence_bound {
        return Ok(StepOutcome::Restart { selection, alpha });
    }
    let f_new = sys.eval(&x_new)?;
    Ok(StepOutcome::Accepted {
        x_new,
        f_new,
        support_new,
        selection,
        alpha,
    })
}

const MAX_RESTART_DRAWS: usize = 1000;

fn restart_point<R: Rng>(
    sys: &dyn NonlinearSystem,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<(Vector, Vector)> {
    let mut last_err = None;
    for _ in 0..MAX_RESTART_DRAWS {
        let x = restart_vector(sys.n_vars(), cfg.prob, rng);
        match sys.eval(&x) {
            Ok(f) => return Ok((x, f)),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one draw"))
}
