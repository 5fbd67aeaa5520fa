//! Greedy column rules and the restricted Gauss-Newton directions.

use serde::{Deserialize, Serialize};

use super::{Strategy, SupportSet};
use crate::numlin::{min_norm_lstsq, select_columns, Matrix, RangeBasis, Vector};
use crate::{Error, Result};

/// MD skips candidates with `‖Pa‖ ≤ CANDIDATE_FLOOR · ‖a‖`, i.e. columns
/// numerically inside `range(L)`.
pub const CANDIDATE_FLOOR: f64 = 1e-12;

/// The winning column of a greedy rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionScore {
    pub index: usize,
    /// Value of the maximized objective.
    pub score: f64,
    /// `−p_tᵀJᵀf` for the joint minimum-norm step on `Ω ∪ {t}`.
    pub descent: f64,
}

/// Quantities shared by all rules at one `(J, f, Ω)`.
struct Projected {
    /// `P·J`, column by column.
    pj: Matrix,
    /// `fᵀLL⁺f`.
    front_descent: f64,
}

fn check_dims(jac: &Matrix, f: &Vector, support: &SupportSet) -> Result<()> {
    if jac.nrows() != f.len() {
        return Err(Error::invalid(format!(
            "Jacobian has {} rows but f has length {}",
            jac.nrows(),
            f.len()
        )));
    }
    if jac.ncols() != support.n_vars() {
        return Err(Error::invalid(format!(
            "Jacobian has {} columns but support is over {} variables",
            jac.ncols(),
            support.n_vars()
        )));
    }
    Ok(())
}

fn project(jac: &Matrix, f: &Vector, support: &SupportSet) -> Result<Projected> {
    check_dims(jac, f, support)?;
    if !f.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("f has non-finite entries"));
    }
    let basis = RangeBasis::new(&select_columns(jac, support.active()))?;
    let front = basis.project_onto(f);
    Ok(Projected {
        pj: basis.project_out_columns(jac),
        front_descent: front.norm_squared(),
    })
}

/// Argmax over the complement with smallest-index tie-breaking.
fn argmax(
    support: &SupportSet,
    sel_tol: f64,
    mut score_of: impl FnMut(usize) -> Option<(f64, f64)>,
) -> Option<SelectionScore> {
    let mut best: Option<SelectionScore> = None;
    for t in support.complement() {
        if let Some((score, descent)) = score_of(t) {
            if best.is_none_or(|b| score > b.score) {
                best = Some(SelectionScore {
                    index: t,
                    score,
                    descent,
                });
            }
        }
    }
    best.filter(|b| b.score > sel_tol)
}

/// Maximum-descent rule: `argmax_t |fᵀPa| / ‖Pa‖`.
pub fn select_column_md(
    jac: &Matrix,
    f: &Vector,
    support: &SupportSet,
    sel_tol: f64,
) -> Result<Option<SelectionScore>> {
    let proj = project(jac, f, support)?;
    Ok(argmax(support, sel_tol, |t| {
        let a_norm = jac.column(t).norm();
        let pa = proj.pj.column(t);
        let pa_norm = pa.norm();
        if a_norm == 0.0 || pa_norm <= CANDIDATE_FLOOR * a_norm {
            return None;
        }
        let score = pa.dot(f).abs() / pa_norm;
        Some((score, proj.front_descent + score * score))
    }))
}

/// Orthogonal-matching rule: `argmax_t |fᵀPa| / ‖a‖`.
pub fn select_column_om(
    jac: &Matrix,
    f: &Vector,
    support: &SupportSet,
    sel_tol: f64,
) -> Result<Option<SelectionScore>> {
    let proj = project(jac, f, support)?;
    Ok(argmax(support, sel_tol, |t| {
        let a_norm = jac.column(t).norm();
        if a_norm == 0.0 {
            return None;
        }
        let pa = proj.pj.column(t);
        let correlation = pa.dot(f).abs();
        let pa_sq = pa.norm_squared();
        let gain = if pa_sq > 0.0 { correlation * correlation / pa_sq } else { 0.0 };
        Some((correlation / a_norm, proj.front_descent + gain))
    }))
}

/// OM selection plus the fixed-front coefficients.
///
/// Returns the selection, `δ_t = −aᵀPf / ‖a‖²` and `d = −L⁺f`; the step
/// `p̃` has `p̃(Ω) = d`, `p̃(t) = δ_t` and zeros elsewhere.
pub fn select_column_omf(
    jac: &Matrix,
    f: &Vector,
    support: &SupportSet,
    sel_tol: f64,
) -> Result<Option<(SelectionScore, f64, Vector)>> {
    let Some(sel) = select_column_om(jac, f, support, sel_tol)? else {
        return Ok(None);
    };
    let front = select_columns(jac, support.active());
    let d = -min_norm_lstsq(&front, f)?;
    let a = jac.column(sel.index);
    let residual = f + &front * &d;
    let delta = -a.dot(&residual) / a.norm_squared();
    Ok(Some((sel, delta, d)))
}

/// Dispatches on `strategy`; OMF selects like OM.
pub fn select_column(
    strategy: Strategy,
    jac: &Matrix,
    f: &Vector,
    support: &SupportSet,
    sel_tol: f64,
) -> Result<Option<SelectionScore>> {
    match strategy {
        Strategy::MaxDescent => select_column_md(jac, f, support, sel_tol),
        Strategy::OrthogonalMatching | Strategy::FixedFrontOm => {
            select_column_om(jac, f, support, sel_tol)
        }
    }
}

/// `p(Ω) = −J(:, Ω)⁺f`, zero elsewhere.
pub fn descent_direction(jac: &Matrix, f: &Vector, support: &SupportSet) -> Result<Vector> {
    check_dims(jac, f, support)?;
    let coef = min_norm_lstsq(&select_columns(jac, support.active()), f)?;
    let mut p = Vector::zeros(support.n_vars());
    for (&i, c) in support.active().iter().zip(coef.iter()) {
        p[i] = -c;
    }
    Ok(p)
}

/// Assembles `p̃` from the front step `d` on `support` and `delta` at `t`.
pub fn fixed_front_direction(support: &SupportSet, d: &Vector, t: usize, delta: f64) -> Vector {
    let mut p = Vector::zeros(support.n_vars());
    for (&i, c) in support.active().iter().zip(d.iter()) {
        p[i] = *c;
    }
    p[t] = delta;
    p
}
