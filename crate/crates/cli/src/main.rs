//! `dichotomy`: divergences, strong converse exponents, finite-copy
//! transformation tables and the property suite from the command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dichotomy_core::channel_opt::{
    finite_n_table, max_transform_count, write_finite_csv, DistanceKind, FiniteBlockResult,
};
use dichotomy_core::divergence::{d_max, renyi_divergence, umegaki, DivergenceKind};
use dichotomy_core::exponent::{
    f_flat_alpha_form, f_minimax_delta_form, rate_grid, sc_exponent_purified,
    sc_exponent_trace_pure, sweep, write_sweep_csv, Dichotomy, ExponentResult, SweepRow,
};
use dichotomy_core::format::g12;
use dichotomy_core::operator::{read_state_file, DensityOperator};
use dichotomy_core::verify::{self, SuiteConfig};
use dichotomy_core::Error;

const THREADS_VAR: &str = "DICHOTOMY_THREADS";

/// Divergences between normalized states below this magnitude print as 0.
const DISPLAY_ZERO: f64 = 1e-12;

const EXIT_VALIDATION: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "dichotomy", version, about = "Quantum dichotomy transformation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one Rényi divergence between two state files.
    Div(DivArgs),
    /// Strong converse exponent at one rate.
    Exponent(ExponentArgs),
    /// Exponent over a grid of rates.
    Sweep(SweepArgs),
    /// Exact optimal error for n = 1..N input copies at a fixed rate.
    FiniteN(FiniteArgs),
    /// Largest number of target copies reachable within an error budget.
    Mmax(MmaxArgs),
    /// Run the property suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DivKind {
    Sandwiched,
    Petz,
    LogEuclidean,
    Umegaki,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum Distance {
    Purified,
    Trace,
}

impl From<Distance> for DistanceKind {
    fn from(d: Distance) -> Self {
        match d {
            Distance::Purified => DistanceKind::Purified,
            Distance::Trace => DistanceKind::Trace,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceSet {
    Purified,
    Trace,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExponentForm {
    /// Purified-distance exponent.
    Purified,
    /// Trace-distance exponent; needs a pure rho2.
    TracePure,
    /// Log-Euclidean bound, sup over the order.
    Flat,
    /// Log-Euclidean bound, minimax form.
    Minimax,
}

#[derive(Args)]
struct DivArgs {
    #[arg(long, value_enum)]
    kind: DivKind,
    /// Rényi order; ignored for umegaki and max.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    rho: PathBuf,
    #[arg(long)]
    sigma: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
}

/// Two dichotomies, each from state files or from probability vectors.
#[derive(Args)]
struct DichotomyArgs {
    #[arg(long, conflicts_with = "p1")]
    rho1: Option<PathBuf>,
    #[arg(long, conflicts_with = "q1")]
    sigma1: Option<PathBuf>,
    #[arg(long, conflicts_with = "p2")]
    rho2: Option<PathBuf>,
    #[arg(long, conflicts_with = "q2")]
    sigma2: Option<PathBuf>,
    /// Diagonal rho1 as comma-separated probabilities.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    p1: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    q1: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    p2: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    q2: Option<Vec<f64>>,
}

#[derive(Args)]
struct ExponentArgs {
    #[command(flatten)]
    pair: DichotomyArgs,
    #[arg(long)]
    r: f64,
    #[arg(long, value_enum, default_value = "purified")]
    form: ExponentForm,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    pair: DichotomyArgs,
    #[arg(long)]
    r_start: f64,
    #[arg(long)]
    r_stop: f64,
    #[arg(long, default_value_t = 21)]
    count: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FiniteArgs {
    #[command(flatten)]
    pair: DichotomyArgs,
    #[arg(long)]
    r: f64,
    /// Largest number of input copies.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "both")]
    kind: DistanceSet,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write each optimal channel as Choi-matrix JSON into this directory.
    #[arg(long)]
    channel_dir: Option<PathBuf>,
}

#[derive(Args)]
struct MmaxArgs {
    #[command(flatten)]
    pair: DichotomyArgs,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum, default_value = "purified")]
    kind: Distance,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Only run checks whose names start with this prefix; repeatable.
    #[arg(long)]
    only: Vec<String>,
    /// Also run the corrupted data-processing check, which must fail.
    #[arg(long)]
    self_test: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: ReportFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self { code: EXIT_VALIDATION, message: message.into() }
    }
}

type CliResult<T> = Result<T, Failure>;

/// Attaches the responsible flag to a library error.
fn at(flag: &'static str) -> impl Fn(Error) -> Failure {
    move |e| {
        let code = match e {
            Error::NonConvergence { .. } => EXIT_SOLVER,
            _ => EXIT_VALIDATION,
        };
        Failure { code, message: format!("{flag}: {e}") }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", one_line(&e.to_string()));
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let outcome = configure_threads().and_then(|()| run(cli.command));
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", one_line(&f.message));
            ExitCode::from(f.code)
        }
    }
}

/// Joins a multi-line clap diagnostic up to its usage block.
fn one_line(text: &str) -> String {
    text.lines()
        .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Failure::validation(format!("{THREADS_VAR}: expected a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::validation(format!("{THREADS_VAR}: {e}")))
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Div(a) => div(a),
        Command::Exponent(a) => exponent(a),
        Command::Sweep(a) => run_sweep(a),
        Command::FiniteN(a) => finite_n(a),
        Command::Mmax(a) => mmax(a),
        Command::Verify(a) => run_verify(a),
    }
    .map(|()| 0)
    .or_else(|f| if f.code == EXIT_VERIFY && f.message.is_empty() { Ok(EXIT_VERIFY) } else { Err(f) })
}

fn read_state(path: &Path, flag: &'static str) -> CliResult<DensityOperator> {
    let op = read_state_file(path).map_err(at(flag))?;
    DensityOperator::new(op).map_err(at(flag))
}

fn diagonal(p: &[f64], flag: &'static str) -> CliResult<DensityOperator> {
    DensityOperator::diagonal(p).map_err(at(flag))
}

impl DichotomyArgs {
    fn load(&self) -> CliResult<(Dichotomy, Dichotomy)> {
        let first = Self::one(&self.rho1, &self.sigma1, &self.p1, &self.q1, ["--rho1", "--sigma1", "--p1", "--q1"])?;
        let second = Self::one(&self.rho2, &self.sigma2, &self.p2, &self.q2, ["--rho2", "--sigma2", "--p2", "--q2"])?;
        Ok((first, second))
    }

    fn one(
        rho: &Option<PathBuf>,
        sigma: &Option<PathBuf>,
        p: &Option<Vec<f64>>,
        q: &Option<Vec<f64>>,
        flags: [&'static str; 4],
    ) -> CliResult<Dichotomy> {
        let rho = match (rho, p) {
            (Some(path), None) => read_state(path, flags[0])?,
            (None, Some(v)) => diagonal(v, flags[2])?,
            _ => return Err(Failure::validation(format!("{}: give exactly one of {} or {}", flags[0], flags[0], flags[2]))),
        };
        let sigma = match (sigma, q) {
            (Some(path), None) => read_state(path, flags[1])?,
            (None, Some(v)) => diagonal(v, flags[3])?,
            _ => return Err(Failure::validation(format!("{}: give exactly one of {} or {}", flags[1], flags[1], flags[3]))),
        };
        Dichotomy::new(rho, sigma).map_err(at(flags[1]))
    }
}

/// JSON number at 12 significant digits; non-finite values become strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        let v: f64 = g12(x).parse().expect("formatted float parses");
        json!(v)
    } else {
        json!(g12(x))
    }
}

fn output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| Failure::validation(format!("--output: {}: {e}", p.display()))),
    }
}

fn io_failure(e: io::Error) -> Failure {
    Failure::validation(format!("write failed: {e}"))
}

fn print_json(w: &mut dyn Write, v: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v).expect("json values serialize");
    writeln!(w, "{text}").map_err(io_failure)
}

fn div(a: DivArgs) -> CliResult<()> {
    let rho = read_state(&a.rho, "--rho")?;
    let sigma = read_state(&a.sigma, "--sigma")?;
    let alpha = || a.alpha.ok_or_else(|| Failure::validation("--alpha: required for this divergence kind"));
    let value = match a.kind {
        DivKind::Umegaki => umegaki(&rho, &sigma).map_err(at("--sigma"))?,
        DivKind::Max => d_max(&rho, &sigma).map_err(at("--sigma"))?,
        DivKind::Sandwiched => renyi_divergence(DivergenceKind::Sandwiched, alpha()?, &rho, &sigma).map_err(at("--alpha"))?,
        DivKind::Petz => renyi_divergence(DivergenceKind::Petz, alpha()?, &rho, &sigma).map_err(at("--alpha"))?,
        DivKind::LogEuclidean => {
            renyi_divergence(DivergenceKind::LogEuclidean, alpha()?, &rho, &sigma).map_err(at("--alpha"))?
        }
    };
    let shown = if value.value.abs() < DISPLAY_ZERO { 0.0 } else { value.value };
    if value.near_one {
        eprintln!("warning: order within 1e-4 of 1, evaluated as the relative entropy");
    }
    let mut w = output(&None)?;
    match a.format {
        TextFormat::Text => writeln!(w, "{}", g12(shown)).map_err(io_failure)?,
        TextFormat::Json => print_json(
            &mut w,
            &json!({
                "kind": value.kind.name(),
                "order": serde_json::to_value(value.order).expect("order serializes"),
                "value": num(shown),
                "near_one": value.near_one,
            }),
        )?,
    }
    w.flush().map_err(io_failure)
}

fn exponent_json(e: &ExponentResult) -> Value {
    json!({
        "value": num(e.value),
        "argmax_order": num(e.argmax_order),
        "order_parameter": serde_json::to_value(e.order_parameter).expect("serializes"),
        "rate_threshold": num(e.rate_threshold.as_f64()),
        "cross_check_gap": e.cross_check_gap.map(num),
    })
}

fn exponent(a: ExponentArgs) -> CliResult<()> {
    let (d1, d2) = a.pair.load()?;
    let mut extra = None;
    let result = match a.form {
        ExponentForm::Purified => sc_exponent_purified(&d1, &d2, a.r),
        ExponentForm::TracePure => sc_exponent_trace_pure(&d1, &d2, a.r),
        ExponentForm::Flat => f_flat_alpha_form(&d1, &d2, a.r),
        ExponentForm::Minimax => f_minimax_delta_form(&d1, &d2, a.r).map(|m| {
            extra = Some(m.objective_at_optimizers);
            m.exponent
        }),
    }
    .map_err(at("--r"))?;
    let mut w = output(&None)?;
    match a.format {
        TextFormat::Text => {
            let mut text = format!(
                "value {}\nargmax_order {}\nrate_threshold {}\n",
                g12(result.value),
                g12(result.argmax_order),
                g12(result.rate_threshold.as_f64())
            );
            if let Some(gap) = result.cross_check_gap {
                text += &format!("cross_check_gap {}\n", g12(gap));
            }
            if let Some(v) = extra {
                text += &format!("objective_at_optimizers {}\n", g12(v));
            }
            write!(w, "{text}").map_err(io_failure)?;
        }
        TextFormat::Json => {
            let mut v = exponent_json(&result);
            if let Some(x) = extra {
                v["objective_at_optimizers"] = num(x);
            }
            print_json(&mut w, &v)?;
        }
    }
    w.flush().map_err(io_failure)
}

fn sweep_json(rows: &[SweepRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "r": num(r.r),
                    "exponent": num(r.exponent),
                    "argmax_order": num(r.argmax_order),
                    "rate_threshold": num(r.rate_threshold),
                })
            })
            .collect(),
    )
}

fn run_sweep(a: SweepArgs) -> CliResult<()> {
    let grid = rate_grid(a.r_start, a.r_stop, a.count).map_err(at("--count"))?;
    let (d1, d2) = a.pair.load()?;
    let rows = sweep(&d1, &d2, &grid).map_err(at("--r-start"))?;
    let mut w = output(&a.output)?;
    match a.format {
        TableFormat::Csv => write_sweep_csv(&mut w, &rows).map_err(at("--output"))?,
        TableFormat::Json => print_json(&mut w, &sweep_json(&rows))?,
    }
    w.flush().map_err(io_failure)
}

fn finite_json(rows: &[FiniteBlockResult]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "n": r.n,
                    "m": r.m,
                    "kind": r.kind.name(),
                    "error": num(r.optimal_error),
                    "fidelity_sq": num(r.optimal_fidelity_sq),
                    "neg_log_fid_rate": num(r.neg_log_fid_rate()),
                    "solver_gap": num(r.solver_gap),
                    "tp_residual": num(r.tp_residual),
                    "sigma_residual": num(r.sigma_residual),
                    "iterations": r.iterations,
                    "path": format!("{:?}", r.path).to_lowercase(),
                })
            })
            .collect(),
    )
}

fn finite_n(a: FiniteArgs) -> CliResult<()> {
    if a.n == 0 {
        return Err(Failure::validation("--n: need at least one input copy"));
    }
    if !(a.tol > 0.0) {
        return Err(Failure::validation(format!("--tol: must be positive, got {}", a.tol)));
    }
    let (d1, d2) = a.pair.load()?;
    let kinds: &[DistanceKind] = match a.kind {
        DistanceSet::Purified => &[DistanceKind::Purified],
        DistanceSet::Trace => &[DistanceKind::Trace],
        DistanceSet::Both => &[DistanceKind::Purified, DistanceKind::Trace],
    };
    let ns: Vec<usize> = (1..=a.n).collect();
    let rows = finite_n_table(&d1, &d2, a.r, &ns, kinds, a.tol).map_err(at("--n"))?;
    if let Some(dir) = &a.channel_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::validation(format!("--channel-dir: {e}")))?;
        for row in &rows {
            match &row.channel {
                Some(ch) => {
                    let path = dir.join(format!("channel_n{}_m{}_{}.json", row.n, row.m, row.kind.name()));
                    ch.write_json(&path).map_err(at("--channel-dir"))?;
                }
                None => eprintln!(
                    "warning: n={} m={} {}: channel too large to write out, skipped",
                    row.n,
                    row.m,
                    row.kind.name()
                ),
            }
        }
    }
    let mut w = output(&a.output)?;
    match a.format {
        TableFormat::Csv => write_finite_csv(&mut w, &rows).map_err(at("--output"))?,
        TableFormat::Json => print_json(&mut w, &finite_json(&rows))?,
    }
    w.flush().map_err(io_failure)
}

fn mmax(a: MmaxArgs) -> CliResult<()> {
    if !(a.tol > 0.0) {
        return Err(Failure::validation(format!("--tol: must be positive, got {}", a.tol)));
    }
    let (d1, d2) = a.pair.load()?;
    let res = max_transform_count(&d1, &d2, a.n, a.eps, a.kind.into(), a.tol).map_err(at("--eps"))?;
    for (lo, hi) in &res.monotonicity_violations {
        eprintln!("warning: optimal fidelity increased from m={lo} to m={hi}");
    }
    let mut w = output(&None)?;
    match a.format {
        TextFormat::Text => writeln!(w, "{}", res.m).map_err(io_failure)?,
        TextFormat::Json => print_json(
            &mut w,
            &json!({
                "m": res.m,
                "limit": res.limit,
                "visited": res.visited.iter().map(|&(m, f, e)| json!({
                    "m": m, "fidelity_sq": num(f), "error": num(e),
                })).collect::<Vec<_>>(),
                "monotonicity_violations": res.monotonicity_violations,
            }),
        )?,
    }
    w.flush().map_err(io_failure)
}

fn run_verify(a: VerifyArgs) -> CliResult<()> {
    let mut cfg = SuiteConfig::new(a.seed, a.trials, &a.dims, a.tolerance);
    if !a.only.is_empty() {
        let prefixes: Vec<&str> = a.only.iter().map(String::as_str).collect();
        cfg = cfg.only(&prefixes);
    }
    let report = verify::run(&cfg).map_err(at("--dims"))?;
    let control = a.self_test.then(|| verify::mutation_control(a.seed, a.trials.min(50), &report.dims_tested, a.tolerance));
    let mut w = output(&a.output)?;
    match a.format {
        ReportFormat::Table => {
            write!(w, "{}", report.to_table()).map_err(io_failure)?;
            if let Some(c) = &control {
                writeln!(
                    w,
                    "self-test {}: worst {} ({})",
                    c.name,
                    g12(c.worst_slack),
                    if c.pass { "NOT caught" } else { "caught" }
                )
                .map_err(io_failure)?;
            }
        }
        ReportFormat::Json => {
            let mut v = serde_json::to_value(&report).expect("report serializes");
            if let Some(c) = &control {
                v["self_test"] = serde_json::to_value(c).expect("check serializes");
            }
            print_json(&mut w, &v)?;
        }
    }
    w.flush().map_err(io_failure)?;
    let control_ok = control.map_or(true, |c| !c.pass);
    if report.all_pass() && control_ok {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VERIFY, message: String::new() })
    }
}
