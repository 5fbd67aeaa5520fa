//! Sparse solutions of underdetermined nonlinear systems `f(x) = 0`.
//!
//! The crate implements the Greedy Gauss-Newton method: a line-search
//! Gauss-Newton iteration that starts from `x = 0` and grows the active set
//! of Jacobian columns by one index per iteration. Two greedy column rules
//! are provided:
//!
//! * **Maximum descent (MD)** picks the column whose projection onto the
//!   orthogonal complement of the active columns is most parallel to `f`.
//! * **Orthogonal matching (OM)** picks the column most correlated with the
//!   linearized residual `r = f + L d`, `d = -L⁺f`.
//!
//! For comparison the iterated ℓ1-linearization method is included
//! ([`l1_baseline`]), backed by a small dense simplex solver, together with
//! seeded test-problem generators ([`problems`]) and a grid benchmark
//! harness ([`bench`]).
//!
//! ```
//! use sparse_gn::greedy_gn::{solve, SolverConfig, Strategy};
//! use sparse_gn::problems::small_problem;
//!
//! let sys = small_problem();
//! let cfg = SolverConfig { strategy: Strategy::MaxDescent, ..SolverConfig::default() };
//! let report = solve(&sys, &cfg).unwrap();
//! assert!(report.converged);
//! assert_eq!(report.support.active(), &[4, 5]);
//! ```

pub mod bench;
pub mod cli;
mod error;
pub mod greedy_gn;
pub mod l1_baseline;
pub mod numlin;
pub mod problems;

pub use error::{Error, Result};
