//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a solve did not converge, 2 usage or input error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{export_grid, run_grid, GridFormat, GridKind, GridResult, GridSpec, Method};
use crate::greedy_gn::{
    solve_with_observer, LineSearchParams, SolveReport, SolverConfig, Strategy, TraceRow, TRACE_HEADER,
};
use crate::l1_baseline::l1_solve_with_observer;
use crate::problems::{
    make_exponential, make_quadratic, read_instance, small_problem, verify_family, write_instance, Instance,
    NonlinearSystem, VerificationSummary,
};
use crate::{Error, Result};

/// Default directory for generated files when `--out` is absent.
pub const OUT_DIR_ENV: &str = "SPARSE_GN_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sparse-gn", version, about = "Sparse solutions of underdetermined nonlinear systems")]
pub struct Cli {
    /// Generator seed, restart seed, or bench base seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (instance for gen, report for solve, grid for bench).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Progress on stderr; repeat for per-iteration rows.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Md,
    Om,
    Omf,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Md => Strategy::MaxDescent,
            StrategyArg::Om => Strategy::OrthogonalMatching,
            StrategyArg::Omf => Strategy::FixedFrontOm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Md,
    Om,
    Omf,
    L1,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Md => Method::Greedy(Strategy::MaxDescent),
            MethodArg::Om => Method::Greedy(Strategy::OrthogonalMatching),
            MethodArg::Omf => Method::Greedy(Strategy::FixedFrontOm),
            MethodArg::L1 => Method::L1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Small,
    Quadratic,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKindArg {
    Quadratic,
    Exponential,
}

impl From<GridKindArg> for GridKind {
    fn from(k: GridKindArg) -> Self {
        match k {
            GridKindArg::Quadratic => GridKind::Quadratic,
            GridKindArg::Exponential => GridKind::Exponential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GuardArg {
    Auto,
    On,
    Off,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the 5×8 example with a greedy rule and with ℓ1, printing the iterates.
    DemoSmall {
        #[arg(long, value_enum, default_value_t = StrategyArg::Md)]
        strategy: StrategyArg,
    },
    /// Generate a test instance and print its self-checks.
    Gen(GenArgs),
    /// Solve an instance file.
    Solve(SolveArgs),
    /// Run a seeded (m, n) grid and export the aggregates.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Number of variables N.
    #[arg(long, default_value_t = 100)]
    pub vars: usize,
    /// Number of equations.
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    /// Target sparsity.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Dimension of the solution family.
    #[arg(long)]
    pub s: Option<usize>,
    /// Rank drop of the exponential outer matrix.
    #[arg(long, default_value_t = 2)]
    pub p: usize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Md)]
    pub strategy: MethodArg,
    /// Stream trace rows to this CSV file as they are produced.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Overrides for every solver setting.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long, default_value_t = 200)]
    pub kmax: usize,
    #[arg(long, default_value_t = 1e-13)]
    pub eps_f: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub delta_x: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub delta_alpha: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub sel_tol: f64,
    #[arg(long, default_value_t = 1e-16)]
    pub delta_grad: f64,
    /// Restart density; defaults to the instance family's value.
    #[arg(long)]
    pub prob: Option<f64>,
    #[arg(long, default_value_t = 1e3)]
    pub divergence_bound: f64,
    #[arg(long, value_enum, default_value_t = GuardArg::Auto)]
    pub divergence_guard: GuardArg,
    #[arg(long, default_value_t = 1e-4)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub shrink: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha_init: f64,
    /// Include every iterate in the report.
    #[arg(long)]
    pub record_iterates: bool,
}

impl ConfigArgs {
    fn to_config(&self, seed: u64, default_prob: f64) -> SolverConfig {
        SolverConfig {
            k_max: self.kmax,
            eps_f: self.eps_f,
            delta_x: self.delta_x,
            delta_alpha: self.delta_alpha,
            sel_tol: self.sel_tol,
            delta_grad: self.delta_grad,
            prob: self.prob.unwrap_or(default_prob),
            divergence_bound: self.divergence_bound,
            divergence_guard: match self.divergence_guard {
                GuardArg::Auto => None,
                GuardArg::On => Some(true),
                GuardArg::Off => Some(false),
            },
            line_search: LineSearchParams {
                c1: self.c1,
                shrink: self.shrink,
                alpha_init: self.alpha_init,
            },
            seed,
            strategy: Strategy::MaxDescent,
            record_iterates: self.record_iterates,
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = GridKindArg::Quadratic)]
    pub kind: GridKindArg,
    #[arg(long, default_value_t = 100)]
    pub vars: usize,
    /// Defaults to 2 for quadratic and 4 for exponential grids.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    /// Comma-separated equation counts.
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    /// Comma-separated target sparsities.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Also run `n = m − d` for each listed `d`.
    #[arg(long, value_delimiter = ',')]
    pub n_offset: Vec<usize>,
    /// Skip cells with `n > m − margin`; defaults to 6 (quadratic) or 0 (exponential).
    #[arg(long)]
    pub margin: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "md")]
    pub strategies: Vec<MethodArg>,
    /// Record mean wall time per cell (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{text}");
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::DemoSmall { strategy } => demo_small(cli, (*strategy).into(), stdout, stderr),
        Command::Gen(args) => gen(cli, args, stdout, stderr),
        Command::Solve(args) => solve_cmd(cli, args, stdout, stderr),
        Command::Bench(args) => bench_cmd(cli, args, stdout, stderr),
    }
}

fn out_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn default_path(name: &str) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => Path::new(&dir).join(name),
        None => PathBuf::from(name),
    }
}

fn demo_small(cli: &Cli, strategy: Strategy, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let sys = small_problem();
    let cfg = SolverConfig {
        strategy,
        seed: cli.seed,
        record_iterates: true,
        ..SolverConfig::default()
    };
    let greedy = Method::Greedy(strategy).run(&sys, &cfg)?;
    let l1 = Method::L1.run(&sys, &cfg)?;
    match cli.format {
        Format::Table => {
            for (label, report) in [(format!("X ({})", strategy.name()), &greedy), ("X_l1".to_string(), &l1)] {
                writeln!(stdout, "{label}, {} iterations", report.iterations).map_err(out_err)?;
                write_iterate_matrix(report, stdout).map_err(out_err)?;
                writeln!(stdout).map_err(out_err)?;
            }
            for report in [&greedy, &l1] {
                writeln!(
                    stdout,
                    "{:<4} converged={} sparsity={} ‖f‖={:.3e} x={}",
                    report.method,
                    report.converged,
                    report.sparsity(),
                    report.final_f_norm,
                    fmt_vector(report.x.as_slice())
                )
                .map_err(out_err)?;
            }
        }
        Format::Csv => {
            writeln!(stdout, "method,row,k,value").map_err(out_err)?;
            for report in [&greedy, &l1] {
                let iterates = report.iterates.as_deref().unwrap_or_default();
                for row in 0..sys.n_vars() {
                    for (k, x) in iterates.iter().enumerate() {
                        writeln!(stdout, "{},{},{},{:.16e}", report.method, row + 1, k + 1, x[row])
                            .map_err(out_err)?;
                    }
                }
            }
        }
        Format::Json => {
            let doc = serde_json::json!({ "greedy": greedy, "l1": l1 });
            serde_json::to_writer_pretty(&mut *stdout, &doc).map_err(|e| Error::invalid(e.to_string()))?;
            writeln!(stdout).map_err(out_err)?;
        }
    }
    if greedy.converged && l1.converged {
        Ok(EXIT_OK)
    } else {
        writeln!(stderr, "demo-small: a method did not converge").map_err(out_err)?;
        Ok(EXIT_NOT_CONVERGED)
    }
}

/// Prints iterates as columns, one row per variable.
fn write_iterate_matrix(report: &SolveReport, out: &mut dyn Write) -> std::io::Result<()> {
    let iterates = report.iterates.as_deref().unwrap_or_default();
    let n = iterates.first().map_or(0, Vec::len);
    for row in 0..n {
        let line: Vec<String> = iterates
            .iter()
            .map(|x| {
                if x[row] == 0.0 {
                    format!("{:>10}", 0)
                } else {
                    format!("{:>10.3e}", x[row])
                }
            })
            .collect();
        writeln!(out, "  {}", line.join(" "))?;
    }
    Ok(())
}

fn fmt_vector(x: &[f64]) -> String {
    let items: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
    format!("({})", items.join(", "))
}

fn gen(cli: &Cli, args: &GenArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let (instance, summary, name) = match args.kind {
        KindArg::Small => (Instance::Small, None, "small.json".to_string()),
        KindArg::Quadratic => {
            let s = args.s.unwrap_or(2);
            let (sys, family) = make_quadratic(args.vars, args.m, args.n, s, cli.seed)?;
            let summary = verify_family(&sys, &family, cli.seed)?;
            let name = format!("quadratic-N{}-m{}-n{}-s{}-seed{}.json", args.vars, args.m, args.n, s, cli.seed);
            (Instance::Quadratic(sys), Some(summary), name)
        }
        KindArg::Exponential => {
            let s = args.s.unwrap_or(4);
            let (sys, family) = make_exponential(args.vars, args.m, args.n, s, args.p, cli.seed)?;
            let summary = verify_family(&sys, &family, cli.seed)?;
            let name = format!(
                "exponential-N{}-m{}-n{}-s{}-p{}-seed{}.json",
                args.vars, args.m, args.n, s, args.p, cli.seed
            );
            (Instance::Exponential(sys), Some(summary), name)
        }
    };
    let path = cli.out.clone().unwrap_or_else(|| default_path(&name));
    write_instance(&instance, &path)?;
    if cli.verbose > 0 {
        writeln!(stderr, "wrote {}", path.display()).map_err(out_err)?;
    }
    write_summary(cli.format, &path, summary.as_ref(), stdout).map_err(out_err)?;
    Ok(EXIT_OK)
}

fn write_summary(
    format: Format,
    path: &Path,
    summary: Option<&VerificationSummary>,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    let fields: Vec<(&str, String)> = match summary {
        None => Vec::new(),
        Some(s) => vec![
            ("jacobian_rank_at_x_bar", s.jacobian_rank_at_x_bar.to_string()),
            ("residual_at_x_bar", format!("{:.16e}", s.residual_at_x_bar)),
            ("max_family_residual", format!("{:.16e}", s.max_family_residual)),
            ("sparse_solution_residual", format!("{:.16e}", s.sparse_solution_residual)),
            ("sparse_solution_nnz", s.sparse_solution_nnz.to_string()),
        ],
    };
    match format {
        Format::Table => {
            writeln!(out, "instance                  {}", path.display())?;
            for (k, v) in &fields {
                writeln!(out, "{k:<25} {v}")?;
            }
        }
        Format::Csv => {
            writeln!(out, "field,value")?;
            writeln!(out, "instance,{}", path.display())?;
            for (k, v) in &fields {
                writeln!(out, "{k},{v}")?;
            }
        }
        Format::Json => {
            let doc = serde_json::json!({ "instance": path, "verification": summary });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn solve_cmd(cli: &Cli, args: &SolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let instance = read_instance(&args.instance)?;
    let default_prob = match &instance {
        Instance::Exponential(_) => GridKind::Exponential.restart_prob(instance.n_eqs()),
        _ => GridKind::Quadratic.restart_prob(instance.n_eqs()),
    };
    let method: Method = args.strategy.into();
    let mut cfg = args.config.to_config(cli.seed, default_prob);
    if let Method::Greedy(strategy) = method {
        cfg.strategy = strategy;
    }

    let mut trace_file = match &args.trace_out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(file);
            writeln!(w, "{TRACE_HEADER}").map_err(|e| Error::io(path, e))?;
            Some((path.clone(), w))
        }
        None => None,
    };
    let mut trace_error = None;
    let verbose = cli.verbose;
    let mut observer = |row: &TraceRow| {
        if let Some((path, w)) = trace_file.as_mut() {
            if let Err(e) = writeln!(w, "{}", row.csv_line()).and_then(|_| w.flush()) {
                trace_error.get_or_insert(Error::io(path.clone(), e));
            }
        }
        if verbose > 1 {
            let _ = writeln!(stderr, "{}", row.csv_line());
        }
    };
    let report = match method {
        Method::Greedy(_) => solve_with_observer(&instance, &cfg, &mut observer)?,
        Method::L1 => l1_solve_with_observer(&instance, &cfg, &mut observer)?,
    };
    if let Some(e) = trace_error {
        return Err(e);
    }

    match &cli.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(file);
            write_report(cli.format, &report, &mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(path, e))?;
        }
        None => write_report(cli.format, &report, stdout).map_err(out_err)?,
    }
    if report.converged {
        Ok(EXIT_OK)
    } else {
        writeln!(
            stderr,
            "{}: not converged ({}), ‖f‖ = {:.3e} after {} iterations",
            report.method,
            report.status.name(),
            report.final_f_norm,
            report.iterations
        )
        .map_err(out_err)?;
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn write_report(format: Format, report: &SolveReport, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Table => report.write_table(out),
        Format::Csv => report.write_csv(out),
        Format::Json => report.write_json(out),
    }
}

fn bench_cmd(cli: &Cli, args: &BenchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let base = match args.kind {
        GridKindArg::Quadratic => GridSpec::quadratic(),
        GridKindArg::Exponential => GridSpec {
            margin: 0,
            ..GridSpec::exponential()
        },
    };
    let spec = GridSpec {
        kind: args.kind.into(),
        n_vars: args.vars,
        s: args.s.unwrap_or(base.s),
        p: args.p,
        m_values: if args.m.is_empty() { base.m_values.clone() } else { args.m.clone() },
        n_values: if args.n.is_empty() { base.n_values.clone() } else { args.n.clone() },
        n_offsets: args.n_offset.clone(),
        margin: args.margin.unwrap_or(base.margin),
        trials: args.trials,
        base_seed: cli.seed,
        methods: args.strategies.iter().map(|&m| m.into()).collect(),
        timing: args.timing,
    };
    if spec.cells().is_empty() {
        return Err(Error::invalid("no admissible (m, n) cells in the requested grid"));
    }
    let result = run_grid(&spec)?;
    let format = if cli.format == Format::Json { GridFormat::Json } else { GridFormat::Csv };
    let ext = if format == GridFormat::Json { "json" } else { "csv" };
    let path = cli.out.clone().unwrap_or_else(|| {
        default_path(&format!("grid-{}-seed{}.{ext}", spec.kind.name(), spec.base_seed))
    });
    export_grid(&result, &path, format)?;
    if cli.verbose > 0 {
        writeln!(stderr, "wrote {} ({} rows)", path.display(), result.cells.len()).map_err(out_err)?;
    }
    if cli.format == Format::Table {
        write_grid_table(&result, stdout).map_err(out_err)?;
    }
    Ok(EXIT_OK)
}

fn write_grid_table(result: &GridResult, out: &mut dyn Write) -> std::io::Result<()> {
    let fmt = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |v| format!("{v:.p$}"));
    writeln!(
        out,
        "{:>4} {:>4} {:>6} {:>7} {:>8} {:>9} {:>7} {:>9}",
        "m", "n", "method", "success", "recovery", "sparsity", "iters", "restarts"
    )?;
    for c in &result.cells {
        writeln!(
            out,
            "{:>4} {:>4} {:>6} {:>7} {:>8} {:>9} {:>7} {:>9}",
            c.m,
            c.n,
            c.method.name(),
            fmt(c.success_rate, 2),
            fmt(c.recovery_rate, 2),
            fmt(c.mean_sparsity, 1),
            fmt(c.mean_iterations, 1),
            fmt(c.mean_restarts, 2)
        )?;
    }
    Ok(())
}
