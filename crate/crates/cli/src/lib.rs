//! Command-line front end. Every subcommand validates its flags before any
//! computation and writes its outputs atomically.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fracdiff::harness::BUILTIN_PROBLEMS;
use fracdiff::stability::{DEFAULT_Q_TAU, DEFAULT_SAMPLES};
use fracdiff::stepper::{DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
use fracdiff::{
    boundary_curve, builtin_problem, integrate, refinement_study, report, Axis, CoeffTable,
    FractionalOrder, Problem, Retention, SolverOptions, StudyOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

fn registry_help() -> String {
    let mut s = String::from("Built-in problems:\n");
    for (name, desc) in BUILTIN_PROBLEMS {
        s.push_str(&format!("  {name:<10} {desc}\n"));
    }
    s.push_str(
        "\nCustom problems (--config FILE.toml) combine registry forms:\n  \
         coefficients: constant, power, exponential, piecewise\n  \
         reactions:    zero, linear, cubic, sine\n  \
         initial data: zero, quartic_bump, logistic_pulse, sine_mode\n\n\
         Exit status: 0 success, 1 numerical failure, 2 usage error, 3 I/O error.",
    );
    s
}

#[derive(Debug, Parser)]
#[command(
    name = "fracdiff",
    version,
    about = "IIF2 solver for two-sided space-fractional diffusion-reaction equations",
    after_help = registry_help()
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one problem and write the trajectory as `t,x,u` CSV.
    Solve(SolveArgs),
    /// Temporal convergence study on a fixed grid.
    ConvergeTime(ConvergeArgs),
    /// Spatial convergence study with a fixed time step.
    ConvergeSpace(ConvergeArgs),
    /// Linear stability boundary curves as `qtau,theta,lambda_r,lambda_i` CSV.
    Stability(StabilityArgs),
    /// L1 weights as `i,a,g` CSV.
    Coeffs(CoeffsArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Built-in problem name.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub problem: Option<String>,
    /// TOML problem description.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fractional order in (0.5, 1); overrides the config value.
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<FractionalOrder>,
    /// Fixed-point tolerance (max norm of successive iterates).
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Fixed-point iteration limit per step.
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Number of spatial intervals N.
    #[arg(long)]
    pub nx: usize,
    /// Number of time steps M.
    #[arg(long)]
    pub nt: usize,
    /// Keep every K-th time level instead of all of them.
    #[arg(long)]
    pub every: Option<usize>,
    /// Trajectory CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the operator matrix as CSV.
    #[arg(long)]
    pub dump_operator: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Reference resolution (both N and M).
    #[arg(long, default_value_t = fracdiff::harness::FULL_REFERENCE)]
    pub r#ref: usize,
    /// Spatial intervals: a comma-separated list for converge-space, a single
    /// fixed value for converge-time (defaults to --ref).
    #[arg(long, value_delimiter = ',')]
    pub nx: Vec<usize>,
    /// Time steps: a comma-separated list for converge-time, a single fixed
    /// value for converge-space (defaults to --ref).
    #[arg(long, value_delimiter = ',')]
    pub nt: Vec<usize>,
    /// Worker threads for the coarse solves.
    #[arg(long, env = "FRACDIFF_JOBS", default_value_t = 1)]
    pub jobs: usize,
    /// Table CSV path; a `.json` report is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Comma-separated q*tau values.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_Q_TAU)]
    pub qtau: Vec<f64>,
    /// Uniform theta samples per curve (the closing point is added).
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: FractionalOrder,
    /// Number of weights.
    #[arg(long)]
    pub n: usize,
    /// Output path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_alpha(s: &str) -> Result<FractionalOrder, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    FractionalOrder::new(v).map_err(|e| e.to_string())
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Numerical(_) => EXIT_NUMERICAL,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<fracdiff::Error> for Failure {
    fn from(e: fracdiff::Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

/// Writes every `(path, contents)` pair through a temporary file in the target
/// directory; nothing is renamed into place until all temporaries are written.
pub fn write_atomically(files: &[(&Path, &str)]) -> Result<(), Failure> {
    let io = |path: &Path, e: std::io::Error| Failure::Io(format!("{}: {e}", path.display()));
    let mut staged = Vec::with_capacity(files.len());
    for (path, contents) in files {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(path, e))?;
        tmp.write_all(contents.as_bytes())
            .map_err(|e| io(path, e))?;
        tmp.flush().map_err(|e| io(path, e))?;
        staged.push((tmp, *path));
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| io(path, e.error))?;
    }
    Ok(())
}

fn load_problem(args: &ProblemArgs) -> Result<Problem, Failure> {
    let problem = match (&args.problem, &args.config) {
        (Some(name), _) => {
            let alpha = args
                .alpha
                .ok_or_else(|| Failure::Usage("--alpha is required with --problem".into()))?;
            builtin_problem(name, alpha)?
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let p = Problem::from_toml(&text)?;
            match args.alpha {
                Some(alpha) => p.with_alpha(alpha),
                None => p,
            }
        }
        (None, None) => return Err(Failure::Usage("need --problem or --config".into())),
    };
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(Failure::Usage(format!(
            "--tol must be positive, got {}",
            args.tol
        )));
    }
    if args.max_iter == 0 {
        return Err(Failure::Usage("--max-iter must be at least 1".into()));
    }
    Ok(problem)
}

fn json_sibling(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let problem = load_problem(&args.problem)?;
    let options = SolverOptions {
        tolerance: args.problem.tol,
        max_iterations: args.problem.max_iter,
        retention: match args.every {
            Some(k) => Retention::Every(k),
            None => Retention::All,
        },
    };
    let traj = integrate(&problem, args.nx, args.nt, &options)?;
    let csv = report::trajectory_csv(&traj);
    match &args.dump_operator {
        Some(path) => {
            let op_csv = report::operator_csv(&problem.operator(args.nx)?);
            write_atomically(&[(&args.out, &csv), (path, &op_csv)])
        }
        None => write_atomically(&[(&args.out, &csv)]),
    }
}

fn single(values: &[usize], flag: &str, default: usize) -> Result<usize, Failure> {
    match values {
        [] => Ok(default),
        [v] => Ok(*v),
        _ => Err(Failure::Usage(format!("{flag} takes a single value here"))),
    }
}

fn converge(args: &ConvergeArgs, axis: Axis) -> Result<(), Failure> {
    let problem = load_problem(&args.problem)?;
    let (fixed, varying) = match axis {
        Axis::Time => (single(&args.nx, "--nx", args.r#ref)?, &args.nt),
        Axis::Space => (single(&args.nt, "--nt", args.r#ref)?, &args.nx),
    };
    if varying.is_empty() {
        let flag = if axis == Axis::Time { "--nt" } else { "--nx" };
        return Err(Failure::Usage(format!(
            "{flag} needs a list of resolutions"
        )));
    }
    let options = StudyOptions {
        tolerance: args.problem.tol,
        max_iterations: args.problem.max_iter,
        jobs: args.jobs,
    };
    let table = refinement_study(
        &problem, axis, fixed, varying, args.r#ref, args.r#ref, &options,
    )?;
    let csv = report::convergence_csv(&table);
    let json = report::convergence_json(&table);
    write_atomically(&[(&args.out, &csv), (&json_sibling(&args.out), &json)])
}

fn stability(args: &StabilityArgs) -> Result<(), Failure> {
    let curves = args
        .qtau
        .iter()
        .map(|&q| boundary_curve(q, args.samples))
        .collect::<Result<Vec<_>, _>>()?;
    write_atomically(&[(&args.out, &report::stability_csv(&curves))])
}

fn coeffs(args: &CoeffsArgs) -> Result<(), Failure> {
    let table = CoeffTable::for_order(args.alpha, args.n)?;
    let csv = report::coeffs_csv(&table);
    match &args.out {
        Some(path) => write_atomically(&[(path, &csv)]),
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

pub fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::ConvergeTime(a) => converge(a, Axis::Time),
        Command::ConvergeSpace(a) => converge(a, Axis::Space),
        Command::Stability(a) => stability(a),
        Command::Coeffs(a) => coeffs(a),
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// status. Diagnostics go to standard error as a single line.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("fracdiff: {}", failure.message().replace('\n', " "));
            failure.code()
        }
    }
}
