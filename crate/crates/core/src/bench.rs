//! Seeded (m, n) grid experiments over the generated test problems.
//!
//! Every trial draws its instance and restart stream from a seed derived
//! from `(base_seed, m, n, trial)` alone, so all methods see the same
//! instances and results do not depend on evaluation order or thread count.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::greedy_gn::{solve, SolveReport, SolverConfig, Strategy};
use crate::l1_baseline::l1_solve;
use crate::problems::{make_exponential, make_quadratic, NonlinearSystem, ProblemKind};
use crate::{Error, Result};

pub const GRID_FORMAT: &str = "sparse-gn-grid";
pub const GRID_VERSION: u32 = 1;

/// A solver run by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Method {
    Greedy(Strategy),
    L1,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Greedy(Strategy::MaxDescent),
        Method::Greedy(Strategy::OrthogonalMatching),
        Method::Greedy(Strategy::FixedFrontOm),
        Method::L1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Greedy(s) => s.name(),
            Method::L1 => "l1",
        }
    }

    /// Runs this method on `sys`; `cfg.strategy` is overridden for greedy methods.
    pub fn run(self, sys: &dyn NonlinearSystem, cfg: &SolverConfig) -> Result<SolveReport> {
        match self {
            Method::Greedy(strategy) => solve(sys, &SolverConfig { strategy, ..cfg.clone() }),
            Method::L1 => l1_solve(sys, cfg),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?}, expected md, om, omf or l1")))
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.name().to_string()
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Quadratic,
    Exponential,
}

impl GridKind {
    pub fn name(self) -> &'static str {
        match self {
            GridKind::Quadratic => "quadratic",
            GridKind::Exponential => "exponential",
        }
    }

    /// Restart density used for this problem family at `m` equations.
    pub fn restart_prob(self, m: usize) -> f64 {
        match self {
            GridKind::Quadratic => 0.02,
            GridKind::Exponential => (2.0 + m as f64 / 10.0) / 100.0,
        }
    }
}

impl From<GridKind> for ProblemKind {
    fn from(k: GridKind) -> Self {
        match k {
            GridKind::Quadratic => ProblemKind::Quadratic,
            GridKind::Exponential => ProblemKind::Exponential,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: GridKind,
    pub n_vars: usize,
    pub s: usize,
    /// Rank drop of the exponential outer matrix; unused for quadratic grids.
    pub p: usize,
    pub m_values: Vec<usize>,
    pub n_values: Vec<usize>,
    /// Extra cells at `n = m − d` for each `d` here.
    pub n_offsets: Vec<usize>,
    /// Cells need `n ≤ m − margin`.
    pub margin: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    /// Record mean wall time per cell; timings are not reproducible.
    pub timing: bool,
}

impl GridSpec {
    pub fn quadratic() -> Self {
        Self {
            kind: GridKind::Quadratic,
            n_vars: 100,
            s: 2,
            p: 0,
            m_values: vec![20],
            n_values: vec![6],
            n_offsets: Vec::new(),
            margin: 6,
            trials: 10,
            base_seed: 0,
            methods: vec![Method::Greedy(Strategy::MaxDescent)],
            timing: false,
        }
    }

    pub fn exponential() -> Self {
        Self {
            kind: GridKind::Exponential,
            s: 4,
            p: 2,
            m_values: vec![40],
            ..Self::quadratic()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("grid needs at least one method"));
        }
        if self.m_values.is_empty() {
            return Err(Error::invalid("grid needs at least one m value"));
        }
        if self.n_vars < 2 {
            return Err(Error::invalid("grid needs N >= 2"));
        }
        Ok(())
    }

    /// Admissible `(m, n)` cells in row-major order: listed `n` values first,
    /// then the offsets, without duplicates.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &m in &self.m_values {
            let offset_ns = self.n_offsets.iter().filter_map(|&d| m.checked_sub(d));
            let mut seen = Vec::new();
            for n in self.n_values.iter().copied().chain(offset_ns) {
                if n >= 1 && n + self.margin <= m && !seen.contains(&n) {
                    seen.push(n);
                    out.push((m, n));
                }
            }
        }
        out
    }
}

/// Aggregates for one `(m, n, method)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub m: usize,
    pub n: usize,
    pub method: Method,
    pub trials: usize,
    /// Runs with `converged` set.
    pub successes: usize,
    /// Successful runs with final sparsity at most `n`.
    pub recovered: usize,
    pub generator_failures: usize,
    pub solver_errors: usize,
    /// `None` when no trial produced a report.
    pub success_rate: Option<f64>,
    pub recovery_rate: Option<f64>,
    pub mean_sparsity: Option<f64>,
    pub mean_iterations: Option<f64>,
    pub mean_restarts: Option<f64>,
    pub mean_wall_seconds: Option<f64>,
}

impl CellResult {
    pub fn failures(&self) -> usize {
        self.trials - self.successes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub spec: GridSpec,
    pub cells: Vec<CellResult>,
}

impl GridResult {
    pub fn cell(&self, m: usize, n: usize, method: Method) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.m == m && c.n == n && c.method == method)
    }
}

/// `m / (2 ln N)`, the OMP recovery estimate for `n`.
pub fn recovery_boundary(n_vars: usize, m: usize) -> f64 {
    recovery_boundary_real(n_vars as f64, m)
}

/// [`recovery_boundary`] for a non-integer `N`.
pub fn recovery_boundary_real(n_vars: f64, m: usize) -> f64 {
    m as f64 / (2.0 * n_vars.ln())
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` in cell `(m, n)`.
pub fn trial_seed(base_seed: u64, m: usize, n: usize, trial: usize) -> u64 {
    [m as u64, n as u64, trial as u64]
        .into_iter()
        .fold(splitmix(base_seed), |h, v| splitmix(h ^ v))
}

struct TrialOutcome {
    converged: bool,
    sparsity: usize,
    iterations: usize,
    restarts: usize,
    seconds: f64,
}

enum Trial {
    GeneratorFailure,
    Runs(Vec<Option<TrialOutcome>>),
}

fn build(spec: &GridSpec, m: usize, n: usize, seed: u64) -> Result<Box<dyn NonlinearSystem>> {
    Ok(match spec.kind {
        GridKind::Quadratic => Box::new(make_quadratic(spec.n_vars, m, n, spec.s, seed)?.0),
        GridKind::Exponential => Box::new(make_exponential(spec.n_vars, m, n, spec.s, spec.p, seed)?.0),
    })
}

fn run_trial(spec: &GridSpec, m: usize, n: usize, trial: usize) -> Trial {
    let seed = trial_seed(spec.base_seed, m, n, trial);
    let Ok(sys) = build(spec, m, n, seed) else {
        return Trial::GeneratorFailure;
    };
    let cfg = SolverConfig {
        seed,
        prob: spec.kind.restart_prob(m),
        ..SolverConfig::default()
    };
    Trial::Runs(
        spec.methods
            .iter()
            .map(|method| {
                let start = Instant::now();
                let report = method.run(sys.as_ref(), &cfg).ok()?;
                Some(TrialOutcome {
                    converged: report.converged,
                    sparsity: report.sparsity(),
                    iterations: report.iterations,
                    restarts: report.restarts,
                    seconds: start.elapsed().as_secs_f64(),
                })
            })
            .collect(),
    )
}

/// Runs every trial of every admissible cell, in parallel.
pub fn run_grid(spec: &GridSpec) -> Result<GridResult> {
    spec.validate()?;
    let cells = spec.cells();
    let jobs: Vec<(usize, usize, usize)> = cells
        .iter()
        .flat_map(|&(m, n)| (0..spec.trials).map(move |t| (m, n, t)))
        .collect();
    let outcomes: Vec<Trial> = jobs.par_iter().map(|&(m, n, t)| run_trial(spec, m, n, t)).collect();

    let mut results = Vec::new();
    for (ci, &(m, n)) in cells.iter().enumerate() {
        let trials = &outcomes[ci * spec.trials..(ci + 1) * spec.trials];
        for (mi, &method) in spec.methods.iter().enumerate() {
            results.push(aggregate(spec, m, n, method, trials, mi));
        }
    }
    Ok(GridResult {
        spec: spec.clone(),
        cells: results,
    })
}

fn aggregate(spec: &GridSpec, m: usize, n: usize, method: Method, trials: &[Trial], mi: usize) -> CellResult {
    let mut generator_failures = 0;
    let mut solver_errors = 0;
    let mut runs = Vec::new();
    for trial in trials {
        match trial {
            Trial::GeneratorFailure => generator_failures += 1,
            Trial::Runs(r) => match &r[mi] {
                Some(o) => runs.push(o),
                None => solver_errors += 1,
            },
        }
    }
    let successes = runs.iter().filter(|o| o.converged).count();
    let recovered = runs.iter().filter(|o| o.converged && o.sparsity <= n).count();
    let mean = |values: &mut dyn Iterator<Item = f64>| {
        let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        (count > 0).then(|| sum / count as f64)
    };
    let rate = |k: usize| (!trials.is_empty()).then(|| k as f64 / trials.len() as f64);
    CellResult {
        m,
        n,
        method,
        trials: trials.len(),
        successes,
        recovered,
        generator_failures,
        solver_errors,
        success_rate: rate(successes),
        recovery_rate: rate(recovered),
        mean_sparsity: mean(&mut runs.iter().map(|o| o.sparsity as f64)),
        mean_iterations: mean(&mut runs.iter().map(|o| o.iterations as f64)),
        mean_restarts: mean(&mut runs.iter().map(|o| o.restarts as f64)),
        mean_wall_seconds: if spec.timing {
            mean(&mut runs.iter().map(|o| o.seconds))
        } else {
            None
        },
    }
}

/// Output encoding for [`export_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    Csv,
    Json,
}

const CSV_HEADER: [&str; 16] = [
    "m",
    "n",
    "method",
    "trials",
    "successes",
    "recovered",
    "generator_failures",
    "solver_errors",
    "success_rate",
    "recovery_rate",
    "mean_sparsity",
    "mean_iterations",
    "mean_restarts",
    "mean_wall_seconds",
    "boundary",
    "boundary_constant",
];

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v:.16e}"))
}

/// Writes the grid as CSV: a `#` line carrying format, version and the
/// JSON-encoded spec, the header row, then one row per cell and method.
/// `boundary` is `m / (2 ln N)`; `boundary_constant` is `2 ln N`.
pub fn write_grid_csv<W: Write>(result: &GridResult, mut out: W) -> Result<()> {
    let spec_json = serde_json::to_string(&result.spec).map_err(|e| Error::invalid(e.to_string()))?;
    let io_err = |e: io::Error| Error::io("<grid output>", e);
    writeln!(out, "# {GRID_FORMAT} v{GRID_VERSION} {spec_json}").map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::invalid(format!("writing grid CSV: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let constant = 2.0 * (result.spec.n_vars as f64).ln();
    for c in &result.cells {
        w.write_record([
            c.m.to_string(),
            c.n.to_string(),
            c.method.name().to_string(),
            c.trials.to_string(),
            c.successes.to_string(),
            c.recovered.to_string(),
            c.generator_failures.to_string(),
            c.solver_errors.to_string(),
            fmt_opt(c.success_rate),
            fmt_opt(c.recovery_rate),
            fmt_opt(c.mean_sparsity),
            fmt_opt(c.mean_iterations),
            fmt_opt(c.mean_restarts),
            fmt_opt(c.mean_wall_seconds),
            format!("{:.16e}", recovery_boundary(result.spec.n_vars, c.m)),
            format!("{constant:.16e}"),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct JsonEnvelope {
    format: String,
    version: u32,
    #[serde(flatten)]
    result: GridResult,
}

pub fn write_grid_json<W: Write>(result: &GridResult, mut out: W) -> Result<()> {
    let env = JsonEnvelope {
        format: GRID_FORMAT.to_string(),
        version: GRID_VERSION,
        result: result.clone(),
    };
    serde_json::to_writer_pretty(&mut out, &env).map_err(|e| Error::invalid(e.to_string()))?;
    writeln!(out).map_err(|e| Error::io("<grid output>", e))
}

/// Writes `result` to `path`.
pub fn export_grid(result: &GridResult, path: &Path, format: GridFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        GridFormat::Csv => write_grid_csv(result, &mut out),
        GridFormat::Json => write_grid_json(result, &mut out),
    }
    .map_err(|e| relabel(e, path))?;
    out.flush().map_err(|e| Error::io(path, e))
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

/// Reads a file written by [`export_grid`] in either format.
pub fn import_grid(path: &Path) -> Result<GridResult> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    if text.trim_start().starts_with('{') {
        let env: JsonEnvelope = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if env.format != GRID_FORMAT || env.version != GRID_VERSION {
            return Err(bad(format!("unsupported format {} v{}", env.format, env.version)));
        }
        return Ok(env.result);
    }
    parse_grid_csv(&text).map_err(bad)
}

fn parse_grid_csv(text: &str) -> std::result::Result<GridResult, String> {
    let (first, body) = text.split_once('\n').ok_or("missing header line")?;
    let prefix = format!("# {GRID_FORMAT} v{GRID_VERSION} ");
    let spec_json = first
        .strip_prefix(&prefix)
        .ok_or_else(|| format!("expected header starting with {prefix:?}"))?;
    let spec: GridSpec = serde_json::from_str(spec_json).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?;
    if headers.iter().ne(CSV_HEADER) {
        return Err("unexpected column header".to_string());
    }
    let mut cells = Vec::new();
    for record in reader.records() {
        let r = record.map_err(|e| e.to_string())?;
        let int = |i: usize| r[i].parse::<usize>().map_err(|e| format!("column {}: {e}", CSV_HEADER[i]));
        let opt = |i: usize| -> std::result::Result<Option<f64>, String> {
            if r[i].is_empty() {
                Ok(None)
            } else {
                r[i].parse().map(Some).map_err(|e| format!("column {}: {e}", CSV_HEADER[i]))
            }
        };
        cells.push(CellResult {
            m: int(0)?,
            n: int(1)?,
            method: r[2].parse().map_err(|e: Error| e.to_string())?,
            trials: int(3)?,
            successes: int(4)?,
            recovered: int(5)?,
            generator_failures: int(6)?,
            solver_errors: int(7)?,
            success_rate: opt(8)?,
            recovery_rate: opt(9)?,
            mean_sparsity: opt(10)?,
            mean_iterations: opt(11)?,
            mean_restarts: opt(12)?,
            mean_wall_seconds: opt(13)?,
        });
    }
    Ok(GridResult { spec, cells })
}
