use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use cfbvp_core::existence::{check_existence, compute_lambda1, Verdict, VerdictStatus};
use cfbvp_core::fmt::fmt_sig;
use cfbvp_core::kernel::{eval_G, eval_H, eval_K, verify_bounds, BoundKind};
use cfbvp_core::problem::builtin;
use cfbvp_core::solver::{solve_nonlinear, SolveOptions, SolveResult, SolverError};
use cfbvp_core::{ConeParams, ExistenceReport, KernelParams, ProblemSpec, QuadratureConfig};

/// Exit status for a solve that did not converge.
const NOT_CONVERGED: u8 = 3;
/// Exit status for invalid input.
const INVALID: u8 = 2;

/// Quadrature tolerance for certificate constants.
const CHECK_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "cfbvp", version, about = "Conformable fractional BVP solver and existence checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the Green's kernels
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Solve a problem file by damped Picard iteration and write `t,x` CSV
    Solve(SolveArgs),
    /// Evaluate the existence conditions for a problem file
    Check(CheckArgs),
    /// Run a built-in demonstration problem and check its known quantities
    Examples {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
    },
}

#[derive(Subcommand)]
enum KernelCommand {
    /// Print G(t,s), H(eta,s) and K(t,s)
    Eval {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        s: f64,
    },
    /// Sample the kernel inequalities at random points
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0.25)]
        theta: f64,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct ParamArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    eta: f64,
}

impl ParamArgs {
    fn build(&self) -> Result<KernelParams> {
        Ok(KernelParams::new(self.alpha, self.lambda, self.eta)?)
    }
}

#[derive(clap::Args)]
struct SolveArgs {
    /// JSON problem file
    file: PathBuf,
    #[arg(long, default_value_t = 400)]
    grid_n: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.5)]
    damping: f64,
    /// Cone parameter for the reported cone ratio
    #[arg(long, default_value_t = 0.25)]
    theta: f64,
    /// Output CSV path
    #[arg(long, default_value = "solution.csv")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct CheckArgs {
    /// JSON problem file
    file: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    theta_min: f64,
    #[arg(long, default_value_t = 0.45)]
    theta_max: f64,
    #[arg(long, default_value_t = 41)]
    theta_steps: usize,
    /// Output JSON path; the report goes to stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INVALID)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Kernel(KernelCommand::Eval { params, t, s }) => kernel_eval(&params, t, s),
        Command::Kernel(KernelCommand::Verify { params, theta, samples, seed }) => {
            kernel_verify(&params, theta, samples, seed)
        }
        Command::Solve(args) => solve(&args),
        Command::Check(args) => check(&args),
        Command::Examples { which } => examples(which),
    }
}

fn kernel_eval(args: &ParamArgs, t: f64, s: f64) -> Result<ExitCode> {
    let p = args.build()?;
    for (name, v) in [("t", t), ("s", s)] {
        anyhow::ensure!((0.0..=1.0).contains(&v), "{name} must lie in [0, 1], got {v}");
    }
    println!("G(t,s) = {}", fmt_sig(eval_G(p.alpha(), t, s)));
    println!("H(eta,s) = {}", fmt_sig(eval_H(p.alpha(), p.eta(), s)));
    println!("K(t,s) = {}", fmt_sig(eval_K(&p, t, s)));
    Ok(ExitCode::SUCCESS)
}

fn kernel_verify(args: &ParamArgs, theta: f64, samples: u64, seed: u64) -> Result<ExitCode> {
    let p = args.build()?;
    let cone = ConeParams::new(theta)?;
    let report = verify_bounds(&p, cone, samples as usize, seed, 1e-12);
    println!("samples: {} (seed {seed}, theta {})", report.samples, fmt_sig(theta));
    for (i, kind) in BoundKind::ALL.iter().enumerate() {
        println!(
            "{}: {} violations, worst margin {}",
            kind.label(),
            report.violations[i],
            fmt_sig(report.worst_margin[i])
        );
    }
    println!("total violations: {}", report.total_violations());
    Ok(ExitCode::SUCCESS)
}

fn load(path: &Path) -> Result<ProblemSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    ProblemSpec::from_json(&text).with_context(|| format!("invalid problem file {}", path.display()))
}

fn solution_csv(result: &SolveResult) -> String {
    let x = &result.solution;
    let mut out = String::from("t,x\n");
    for (t, v) in x.nodes().iter().zip(x.values()) {
        out.push_str(&format!("{},{}\n", fmt_sig(*t), fmt_sig(*v)));
    }
    out
}

fn print_summary(result: &SolveResult) {
    let r = &result.residuals;
    println!("status: {}", result.status.label());
    println!("iterations: {}", result.iterations);
    println!("last update: {}", fmt_sig(result.update_norm));
    println!("ode residual (sup over [0.05, 0.95]): {}", fmt_sig(r.ode_residual_sup));
    println!("x(0) residual: {}", fmt_sig(r.bc0_residual));
    println!("nonlocal boundary residual: {}", fmt_sig(r.bc1_residual));
    println!("min x: {}", fmt_sig(r.min_value));
    println!(
        "cone ratio on [{}, {}]: {} (theta^2 = {})",
        fmt_sig(r.theta),
        fmt_sig(1.0 - r.theta),
        fmt_sig(r.cone_ratio),
        fmt_sig(r.theta * r.theta)
    );
}

fn solve(args: &SolveArgs) -> Result<ExitCode> {
    let problem = load(&args.file)?;
    let opts = SolveOptions {
        grid_n: args.grid_n,
        tol: args.tol,
        max_iter: args.max_iter,
        damping: args.damping,
        theta: args.theta,
        ..SolveOptions::default()
    };
    let result = match solve_nonlinear(&problem, &opts) {
        Ok(r) => r,
        Err(e @ (SolverError::Option(_) | SolverError::Kernel(_))) => return Err(e.into()),
        Err(e) => {
            eprintln!("error: solver failed: {e}");
            return Ok(ExitCode::from(NOT_CONVERGED));
        }
    };
    fs::write(&args.out, solution_csv(&result)).with_context(|| format!("cannot write {}", args.out.display()))?;
    print_summary(&result);
    println!("wrote {} rows to {}", result.solution.len(), args.out.display());
    if result.converged() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: not converged; {} holds the last iterate", args.out.display());
        Ok(ExitCode::from(NOT_CONVERGED))
    }
}

fn verdict_line(key: &str, what: &str, v: &Verdict, total: usize) -> String {
    let mut line = format!("{key} ({what}): {}", v.status.label());
    if v.status == VerdictStatus::Satisfied && total > 0 && !v.witnesses.is_empty() {
        line.push_str(&format!(" at {} of {total} theta", v.witnesses.len()));
    }
    line
}

fn verdict_lines(report: &ExistenceReport) -> Vec<String> {
    let n = report.lambda1_curve.len();
    let mut lines = vec![
        verdict_line("thm31", "f^inf < Lambda2/2 and f0 > Lambda1(theta)", &report.superlinear_at_zero, n),
        verdict_line("thm32", "f^0 < Lambda2 and f_inf > Lambda1(theta)", &report.superlinear_at_infinity, n),
        verdict_line("cor31", "f0 = inf, f^inf = 0 or f^0 = 0, f_inf = inf", &report.limiting_case, 0),
    ];
    if report.growth.any_estimated() {
        lines.push(
            "note: some growth limits were estimated by sampling f, which cannot certify a limit; \
             assert them under \"limits\" in the problem file to override"
                .to_string(),
        );
    }
    lines
}

fn run_check(problem: &ProblemSpec, min: f64, max: f64, steps: usize) -> Result<ExistenceReport> {
    let cfg = QuadratureConfig::default().with_tol(CHECK_TOL);
    Ok(check_existence(problem, min, max, steps, &cfg)?)
}

fn check(args: &CheckArgs) -> Result<ExitCode> {
    let problem = load(&args.file)?;
    let report = run_check(&problem, args.theta_min, args.theta_max, args.theta_steps)?;
    let json = serde_json::to_string_pretty(&report.to_json())? + "\n";
    match &args.out {
        Some(path) => {
            fs::write(path, &json).with_context(|| format!("cannot write {}", path.display()))?;
            for line in verdict_lines(&report) {
                println!("{line}");
            }
        }
        None => {
            for line in verdict_lines(&report) {
                eprintln!("{line}");
            }
            print!("{json}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// `1/Λ₁(θ)` in closed form for `α = 3/2`, `λ = 8/5`, `η = 1/2`.
fn inverse_lambda1_closed_form(theta: f64) -> f64 {
    let st = theta.sqrt();
    theta.powi(4) / 30.0
        * ((24.0 * theta - 35.0) * theta * st + 3.0 * (6.0 + 3.0 * theta - 4.0 * theta * theta) * (1.0 - theta).sqrt()
            - 4.0 * 2f64.sqrt())
}

struct Tally {
    failed: usize,
}

impl Tally {
    fn record(&mut self, ok: bool, what: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} {what}", if ok { "PASS" } else { "FAIL" });
    }
}

fn examples(which: u8) -> Result<ExitCode> {
    let problem = builtin(which).context("unknown built-in problem")?;
    let mut tally = Tally { failed: 0 };
    match which {
        1 => example_one(&problem, &mut tally)?,
        _ => example_two(&problem, &mut tally)?,
    }
    Ok(if tally.failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn example_one(problem: &ProblemSpec, tally: &mut Tally) -> Result<()> {
    let report = run_check(problem, 0.05, 0.45, 41)?;
    let g = &report.growth;
    tally.record(
        report.limiting_case.status == VerdictStatus::Satisfied,
        format!("cor31 limiting case holds: f0 = {}, f^inf = {}", g.f0.value, g.f_supinf.value),
    );
    let result = solve_nonlinear(problem, &SolveOptions::default())?;
    let r = &result.residuals;
    tally.record(
        result.converged(),
        format!("solve converged in {} iterations (last update {})", result.iterations, fmt_sig(result.update_norm)),
    );
    let x = &result.solution;
    let interior_min = x
        .nodes()
        .iter()
        .zip(x.values())
        .filter(|(&t, _)| t > 0.0 && t < 1.0)
        .fold(f64::INFINITY, |m, (_, &v)| m.min(v));
    tally.record(interior_min > 0.0, format!("x > 0 on (0, 1): interior min {}", fmt_sig(interior_min)));
    tally.record(
        r.bc0_residual <= 1e-6 && r.bc1_residual <= 1e-6,
        format!("boundary residuals {} and {} <= 1e-6", fmt_sig(r.bc0_residual), fmt_sig(r.bc1_residual)),
    );
    tally.record(
        r.cone_ratio >= r.theta * r.theta,
        format!("cone ratio {} >= theta^2 = {}", fmt_sig(r.cone_ratio), fmt_sig(r.theta * r.theta)),
    );
    Ok(())
}

fn example_two(problem: &ProblemSpec, tally: &mut Tally) -> Result<()> {
    let report = run_check(problem, 0.38, 0.42, 51)?;
    tally.record(
        (report.lambda2 - 1.875).abs() <= 1e-10,
        format!("Lambda2 = {} (expected 1.875)", fmt_sig(report.lambda2)),
    );
    let worst = report.lambda1_curve.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
    let below = report.lambda1_curve.iter().filter(|&&(_, v)| v < 400.0).count();
    tally.record(
        below == 51,
        format!("Lambda1(theta) < 400 at {below} of 51 grid points in [0.38, 0.42] (max {})", fmt_sig(worst)),
    );
    let cfg = QuadratureConfig::default().with_tol(CHECK_TOL);
    let mut worst_rel: f64 = 0.0;
    for theta in [0.38, 0.4, 0.42] {
        let numeric = compute_lambda1(&problem.params, theta, &cfg)?;
        let exact = 1.0 / inverse_lambda1_closed_form(theta);
        worst_rel = worst_rel.max((numeric - exact).abs() / exact);
    }
    tally.record(
        worst_rel <= 1e-9,
        format!("Lambda1 matches its closed form at theta = 0.38, 0.4, 0.42 (worst rel diff {worst_rel:.1e})"),
    );
    tally.record(
        report.superlinear_at_zero.status == VerdictStatus::Satisfied,
        format!(
            "thm31 holds with f0 = {}, f^inf = {}: {} witness theta",
            report.growth.f0.value,
            report.growth.f_supinf.value,
            report.superlinear_at_zero.witnesses.len()
        ),
    );
    Ok(())
}
