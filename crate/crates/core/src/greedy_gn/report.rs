use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::SupportSet;
use crate::numlin::Vector;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    IterationLimit,
    /// The ℓ1 subproblem had no optimal solution.
    LpFailure,
    /// The ℓ1 iterate grew past its divergence bound.
    Diverged,
    /// `f` could not be evaluated at an iterate.
    EvaluationFailure,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::IterationLimit => "iteration-limit",
            SolveStatus::LpFailure => "lp-failure",
            SolveStatus::Diverged => "diverged",
            SolveStatus::EvaluationFailure => "evaluation-failure",
        }
    }
}

/// One row per iterate `x_k`; step fields describe the move away from it
/// and are empty on the final row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub f_norm: f64,
    pub support_size: usize,
    pub added: Option<usize>,
    pub alpha: Option<f64>,
    pub restart: bool,
    pub score: Option<f64>,
}

pub const TRACE_HEADER: &str = "k,f_norm,support_size,added,alpha,restart,score";

impl TraceRow {
    /// CSV line matching [`TRACE_HEADER`]; `added` is `-1` when no column was added.
    pub fn csv_line(&self) -> String {
        format!(
            "{},{:.16e},{},{},{},{},{}",
            self.k,
            self.f_norm,
            self.support_size,
            self.added.map_or(-1, |i| i as i64),
            self.alpha.map_or(String::new(), |a| format!("{a:.16e}")),
            u8::from(self.restart),
            self.score.map_or(String::new(), |s| format!("{s:.16e}")),
        )
    }
}

/// Outcome of a greedy or ℓ1 run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: String,
    /// Final iterate after zeroing entries with `|x(i)| ≤ delta_x`.
    #[serde(with = "crate::problems::vector_serde")]
    pub x: Vector,
    /// Support of the thresholded iterate, ascending.
    pub support: SupportSet,
    pub converged: bool,
    pub status: SolveStatus,
    /// Number of iterates `x_1, …, x_K`; equals the trace length.
    pub iterations: usize,
    pub restarts: usize,
    /// `‖f(x)‖` at the thresholded iterate.
    pub final_f_norm: f64,
    pub trace: Vec<TraceRow>,
    /// Every iterate before thresholding, when requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iterates: Option<Vec<Vec<f64>>>,
}

impl SolveReport {
    /// `‖x‖₀` of the thresholded iterate.
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# method={} status={}", self.method, self.status.name())?;
        writeln!(
            out,
            "# converged={} iterations={} restarts={} sparsity={} final_f_norm={:.16e}",
            self.converged,
            self.iterations,
            self.restarts,
            self.sparsity(),
            self.final_f_norm
        )?;
        writeln!(out, "# support={}", join(self.support.active()))?;
        writeln!(out, "{TRACE_HEADER}")?;
        for row in &self.trace {
            writeln!(out, "{}", row.csv_line())?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }

    pub fn write_table<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "method      {}", self.method)?;
        writeln!(out, "status      {}", self.status.name())?;
        writeln!(out, "iterations  {}", self.iterations)?;
        writeln!(out, "restarts    {}", self.restarts)?;
        writeln!(out, "sparsity    {}", self.sparsity())?;
        writeln!(out, "‖f(x)‖      {:.6e}", self.final_f_norm)?;
        writeln!(out, "support     {{{}}}", join(self.support.active()))?;
        writeln!(out)?;
        writeln!(out, "{:>5} {:>14} {:>5} {:>6} {:>11} {:>7}", "k", "‖f‖", "|Ω|", "added", "alpha", "restart")?;
        for row in &self.trace {
            writeln!(
                out,
                "{:>5} {:>14.6e} {:>5} {:>6} {:>11} {:>7}",
                row.k,
                row.f_norm,
                row.support_size,
                row.added.map_or("-".to_string(), |i| i.to_string()),
                row.alpha.map_or("-".to_string(), |a| format!("{a:.4e}")),
                if row.restart { "yes" } else { "" }
            )?;
        }
        Ok(())
    }
}

fn join(indices: &[usize]) -> String {
    indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}
