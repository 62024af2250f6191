//! Command-line driver: config ingestion, command dispatch and result files.
//!
//! Exit codes: 0 on success, 1 on computational or IO failure, 2 on a bad config.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use halfspace::continuation::{detect_fold, trace_branch};
use halfspace::discretization::{build_grid, weighted_norm, Field, GridSpec};
use halfspace::exponents::{check_admissible, critical_exponents};
use halfspace::kernels::Dimension;
use halfspace::operators::{assemble_green, linearized_spectrum, poisson_trace};
use halfspace::solver::{estimate_kappa_star, monotone_iterate, Problem};
use halfspace::verify::{self, CheckReport};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{write_branch, write_reports, write_solution, write_summary, Summary};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<halfspace::Error> for CliError {
    fn from(e: halfspace::Error) -> Self {
        match e {
            halfspace::Error::Config(m) => CliError::Config(m),
            halfspace::Error::TooLarge { .. } => CliError::Config(e.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "halfspace", version, about = "Semilinear boundary problems on the half space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides the config and the environment).
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical exponents and admissible (q, α) for dimension N and power p.
    Exponents {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        p: f64,
        /// Check one pair instead of scanning.
        #[arg(long, requires = "alpha")]
        q: Option<f64>,
        #[arg(long, requires = "q")]
        alpha: Option<f64>,
    },
    /// Minimal solution by monotone iteration.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Bisection bracket for the existence threshold.
    KappaStar {
        #[command(flatten)]
        run: RunArgs,
    },
    /// First eigenvalue of the linearization at the minimal solution.
    Eigen {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Solution branch through the fold.
    Branch {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Empirical checks of kernel identities, integral bounds and solution structure.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Kernels,
    Gintest,
    Glaa,
    Structure,
    All,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("halfspace: {e}");
            e.exit_code()
        }
    }
}

struct Context {
    config: RunConfig,
    output_dir: PathBuf,
}

impl Context {
    fn load(run: &RunArgs) -> Result<Self, CliError> {
        let config = RunConfig::from_path(&run.config)?;
        let output_dir = config.resolve_output_dir(run.output_dir.as_deref());
        Ok(Context { config, output_dir })
    }

    fn problem(&self) -> Result<Problem, CliError> {
        let grid = Arc::new(build_grid(self.config.grid_spec()?)?);
        let kernel = Arc::new(assemble_green(grid.clone())?);
        let trace = poisson_trace(grid, &self.config.problem.mu)?;
        Ok(Problem::new(kernel, trace, self.config.problem.p)?)
    }

    fn kappa(&self, flag: Option<f64>) -> Result<f64, CliError> {
        let kappa = flag
            .or(self.config.problem.kappa)
            .ok_or_else(|| CliError::Config("no kappa given (use --kappa or problem.kappa)".into()))?;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(CliError::Config(format!("kappa must be positive, got {kappa}")));
        }
        Ok(kappa)
    }

    fn summary<'a, R: Serialize>(&'a self, command: &'a str, results: R) -> Summary<'a, R> {
        Summary {
            command,
            version: VERSION,
            seed: self.config.seed,
            config: Some(&self.config),
            results,
        }
    }

    fn lq_norm(&self, u: &Field) -> f64 {
        let (q, alpha) = self.config.norm_exponents();
        weighted_norm(u, q, alpha)
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Exponents { n, p, q, alpha } => exponents(n, p, q.zip(alpha)),
        Command::Solve { run, kappa } => solve(&Context::load(&run)?, kappa),
        Command::KappaStar { run } => kappa_star(&Context::load(&run)?),
        Command::Eigen { run, kappa } => eigen(&Context::load(&run)?, kappa),
        Command::Branch { run } => branch(&Context::load(&run)?),
        Command::Verify { run, suite } => verify_suite(&Context::load(&run)?, suite),
    }
}

fn exponents(n: usize, p: f64, pair: Option<(f64, f64)>) -> Result<i32, CliError> {
    if n == 0 {
        return Err(CliError::Config("N must be positive".into()));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(CliError::Config(format!("p must exceed 1, got {p}")));
    }
    let c = critical_exponents(n);
    println!("N={n} p={p}");
    println!("p_S={}", c.sobolev);
    println!("p_JL={}", c.joseph_lundgren);
    let regime = if p < c.sobolev.value() {
        "subcritical (p < p_S)"
    } else if p < c.joseph_lundgren.value() {
        "p_S ≤ p < p_JL"
    } else {
        "p ≥ p_JL"
    };
    println!("regime: {regime}");
    if let Some((q, alpha)) = pair {
        let res = check_admissible(n, p, q, alpha);
        println!("(q, alpha)=({q}, {alpha}) admissible: {}", res.valid);
        for v in &res.violated_conditions {
            println!("  violated: {}", v.describe());
        }
        return Ok(0);
    }
    // for each q on a grid the admissible α form [0, α_max(q))
    let nf = n as f64;
    let mut admissible = Vec::new();
    for k in 1..=400 {
        let q = p + 0.05 * k as f64;
        let alpha_max = (2.0 / p - 1.0 / q).min(2.0 / (p - 1.0) - nf / q);
        if alpha_max > 0.0 && check_admissible(n, p, q, 0.0).valid {
            admissible.push((q, alpha_max));
        }
    }
    match (admissible.first(), admissible.last()) {
        (Some(first), Some(last)) => {
            println!(
                "admissibility scan: {} of 400 values q ∈ ({p}, {}] admit α ∈ [0, α_max(q)); q from {:.2}, α_max from {:.4} to {:.4}",
                admissible.len(),
                p + 20.0,
                first.0,
                first.1,
                last.1
            );
        }
        _ => println!("admissibility scan: no admissible (q, α) with q ≤ {}", p + 20.0),
    }
    Ok(0)
}

fn solve(ctx: &Context, kappa: Option<f64>) -> Result<i32, CliError> {
    let kappa = ctx.kappa(kappa)?;
    let problem = ctx.problem()?;
    let res = monotone_iterate(&problem, kappa, &ctx.config.iteration_options())?;
    let status = res.status;
    let results = json!({
        "kappa": kappa,
        "status": status,
        "iterations": res.iterations,
        "residual_sup": res.residual_sup,
        "sup_norm": res.solution.as_ref().map(Field::sup_norm),
        "lq_alpha_norm": res.solution.as_ref().map(|u| ctx.lq_norm(u)),
    });
    if let Some(u) = &res.solution {
        write_solution(&ctx.output_dir, kappa, u)?;
    }
    write_summary(&ctx.output_dir, &ctx.summary("solve", &results))?;
    println!("{}", serde_json::to_string(&results).expect("json value"));
    if res.converged() {
        Ok(0)
    } else {
        Err(CliError::Compute(format!("monotone iteration ended with status {status:?} at κ = {kappa}")))
    }
}

fn kappa_star(ctx: &Context) -> Result<i32, CliError> {
    let problem = ctx.problem()?;
    let [lo, hi] = ctx.config.solver.bracket;
    let est = estimate_kappa_star(&problem, (lo, hi), ctx.config.solver.bracket_tol, &ctx.config.iteration_options())?;
    let results = json!({ "kappa_star": est, "midpoint": est.midpoint() });
    write_summary(&ctx.output_dir, &ctx.summary("kappa-star", &results))?;
    println!("{}", serde_json::to_string(&results).expect("json value"));
    Ok(0)
}

fn eigen(ctx: &Context, kappa: Option<f64>) -> Result<i32, CliError> {
    let kappa = ctx.kappa(kappa)?;
    let problem = ctx.problem()?;
    let res = monotone_iterate(&problem, kappa, &ctx.config.iteration_options())?;
    let u = res
        .solution
        .ok_or_else(|| CliError::Compute(format!("no minimal solution at κ = {kappa} ({:?})", res.status)))?;
    let eig = linearized_spectrum(problem.kernel(), &u, problem.p())?;
    let results = json!({
        "kappa": kappa,
        "lambda": eig.lambda,
        "rho": eig.rho,
        "iterations": eig.iterations,
        "residual": eig.residual,
        "stable": eig.lambda > 1.0,
    });
    write_solution(&ctx.output_dir, kappa, &u)?;
    write_summary(&ctx.output_dir, &ctx.summary("eigen", &results))?;
    println!("{}", serde_json::to_string(&results).expect("json value"));
    Ok(0)
}

fn branch(ctx: &Context) -> Result<i32, CliError> {
    let problem = ctx.problem()?;
    let branch = trace_branch(&problem, &ctx.config.continuation_options())?;
    let fold = detect_fold(&branch).ok();
    let crossing = branch.points.windows(2).position(|w| (w[0].lambda - 1.0) * (w[1].lambda - 1.0) <= 0.0);
    let results = json!({
        "points": branch.len(),
        "fold_index": branch.fold_index,
        "fold_kappa": fold.as_ref().map(|f| f.0),
        "fold_lambda": fold.as_ref().map(|f| f.1.lambda),
        "lambda_crossing_index": crossing.map(|i| i + 1),
        "final_kappa": branch.points.last().map(|p| p.kappa),
    });
    write_branch(&ctx.output_dir, &branch)?;
    write_summary(&ctx.output_dir, &ctx.summary("branch", &results))?;
    println!("{}", serde_json::to_string(&results).expect("json value"));
    Ok(0)
}

fn run_suite(ctx: &Context, suite: Suite) -> Result<Vec<CheckReport>, CliError> {
    let dim = ctx.config.dimension()?;
    let seed = ctx.config.seed;
    let mut reports = Vec::new();
    if matches!(suite, Suite::Kernels | Suite::All) {
        reports.extend(verify::verify_kernel_identities(dim, 10_000, seed));
    }
    if matches!(suite, Suite::Gintest | Suite::All) {
        for (n, s, theta) in verify::GINTEST_TRIPLES {
            let d = Dimension::try_from(n)?;
            reports.push(verify::verify_gintest_scaling(d, s, theta, &verify::GINTEST_HEIGHTS)?);
        }
    }
    if matches!(suite, Suite::Glaa | Suite::All) {
        for tuple in verify::GLAA_TUPLES {
            reports.push(verify::verify_glaa_boundedness(GridSpec::half_line(10.0, 400, 2.0), tuple, 12, seed)?);
        }
        for sigma in [0.6, 0.8] {
            reports.push(verify::verify_glaa_sharpness(dim, 2.0, sigma)?);
        }
    }
    if matches!(suite, Suite::Structure | Suite::All) {
        reports.push(verify::verify_solution_structure(&ctx.problem()?, &[0.2, 0.4, 0.8], 10)?);
    }
    Ok(reports)
}

fn verify_suite(ctx: &Context, suite: Suite) -> Result<i32, CliError> {
    let reports = run_suite(ctx, suite)?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    write_reports(&ctx.output_dir, &reports)?;
    let results = json!({
        "suite": suite,
        "checks": reports.len(),
        "failed": failed,
    });
    write_summary(&ctx.output_dir, &ctx.summary("verify", &results))?;
    println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialize"));
    if failed.is_empty() {
        Ok(0)
    } else {
        Err(CliError::Compute(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
    }
}
