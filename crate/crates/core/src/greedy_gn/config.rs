use serde::{Deserialize, Serialize};

use super::line_search::LineSearchParams;
use crate::{Error, Result};

/// Column-selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Maximum descent.
    #[serde(rename = "md")]
    MaxDescent,
    /// Orthogonal matching.
    #[serde(rename = "om")]
    OrthogonalMatching,
    /// Orthogonal matching with the fixed-front step `p̃`.
    #[serde(rename = "omf")]
    FixedFrontOm,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::MaxDescent => "md",
            Strategy::OrthogonalMatching => "om",
            Strategy::FixedFrontOm => "omf",
        }
    }
}

/// Tolerances and limits for [`super::solve`] and the ℓ1 baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Iteration budget, counted across restarts.
    pub k_max: usize,
    /// Stop once `‖f‖ ≤ eps_f`.
    pub eps_f: f64,
    /// Entries with `|x(i)| ≤ delta_x` are dropped from the support.
    pub delta_x: f64,
    /// Restart when the accepted step length falls below this.
    pub delta_alpha: f64,
    /// A column is added only if its score exceeds this.
    pub sel_tol: f64,
    /// Restart when `‖Jᵀf‖/‖f‖` falls below this.
    pub delta_grad: f64,
    /// Probability of a nonzero entry in a restart vector.
    pub prob: f64,
    /// Restart when `max|x(i)|` exceeds this (only if the guard is active).
    pub divergence_bound: f64,
    /// `None` enables the divergence guard for exponential problems only.
    pub divergence_guard: Option<bool>,
    pub line_search: LineSearchParams,
    pub seed: u64,
    pub strategy: Strategy,
    /// Keep every iterate in the report.
    pub record_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k_max: 200,
            eps_f: 1e-13,
            delta_x: 1e-8,
            delta_alpha: 1e-3,
            sel_tol: 1e-10,
            delta_grad: 1e-16,
            prob: 0.02,
            divergence_bound: 1e3,
            divergence_guard: None,
            line_search: LineSearchParams::default(),
            seed: 0,
            strategy: Strategy::MaxDescent,
            record_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps_f", self.eps_f),
            ("delta_x", self.delta_x),
            ("delta_alpha", self.delta_alpha),
            ("sel_tol", self.sel_tol),
            ("delta_grad", self.delta_grad),
            ("divergence_bound", self.divergence_bound),
            ("c1", self.line_search.c1),
            ("alpha_init", self.line_search.alpha_init),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.prob > 0.0 && self.prob <= 1.0) {
            return Err(Error::invalid(format!("prob must lie in (0, 1], got {}", self.prob)));
        }
        if !(self.line_search.shrink > 0.0 && self.line_search.shrink < 1.0) {
            return Err(Error::invalid("line-search shrink factor must lie in (0, 1)"));
        }
        if self.line_search.c1 >= 1.0 {
            return Err(Error::invalid("Armijo constant c1 must be below 1"));
        }
        if self.k_max == 0 {
            return Err(Error::invalid("k_max must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = SolverConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.k_max, 200);
        assert_eq!(cfg.delta_x, 1e-8);
        assert_eq!(cfg.eps_f, 1e-13);
        assert_eq!(cfg.delta_alpha, 1e-3);
        assert_eq!(cfg.sel_tol, 1e-10);
        assert_eq!(cfg.delta_grad, 1e-16);
    }

    #[test]
    fn invalid_values_rejected() {
        for cfg in [
            SolverConfig { prob: 0.0, ..Default::default() },
            SolverConfig { prob: 1.5, ..Default::default() },
            SolverConfig { eps_f: -1.0, ..Default::default() },
            SolverConfig { k_max: 0, ..Default::default() },
            SolverConfig {
                line_search: LineSearchParams { shrink: 1.0, ..Default::default() },
                ..Default::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }
}
