//! The Greedy Gauss-Newton solver.
//!
//! Each iteration evaluates `f_k` and `J_k`, picks one new column of `J_k`
//! with a greedy rule, takes the minimum-norm Gauss-Newton step restricted
//! to the active support, and globalizes with a backtracking Armijo search.
//! Collapsing step lengths and stationary points trigger a restart from a
//! sparse random vector.
//!
//! Column rules (`L = J_k(:, Ω)`, `P = I − LL⁺`, `a = J_k(:, t)`):
//!
//! | rule | score                  |
//! |------|------------------------|
//! | MD   | `|fᵀPa| / ‖Pa‖`         |
//! | OM   | `|fᵀPa| / ‖a‖`          |
//! | OMF  | OM selection, step keeps `d = −L⁺f` fixed and appends `δ = −aᵀPf/‖a‖²` |
//!
//! MD maximizes the descent `−pᵀJᵀf` over all one-column extensions and so
//! minimizes the linearized residual; OM is orthogonal matching on the
//! linearized problem. Per iteration MD costs about `2m(n_k+1)(N−n_k)` flops
//! and OM about `4mn_k² + 2m(N−n_k)`.

mod config;
mod line_search;
mod report;
mod select;
mod solve;
mod support;

pub use config::{SolverConfig, Strategy};
pub use line_search::{line_search, LineSearchParams};
pub use report::{SolveReport, SolveStatus, TraceRow, TRACE_HEADER};
pub use select::{
    descent_direction, fixed_front_direction, select_column, select_column_md, select_column_om,
    select_column_omf, SelectionScore, CANDIDATE_FLOOR,
};
pub use solve::{restart_vector, solve, solve_with_observer};
pub use support::SupportSet;
