use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use stfosls::exact::ProblemKind;
use stfosls::mesh::Scaling;
use stfosls::par;
use stfosls::solver::{Method, PreconditionerKind, SolveOptions};
use stfosls::study::{check_rates, default_levels, run_study, StudyConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProblemArg {
    #[value(name = "smooth_1d")]
    Smooth1d,
    #[value(name = "nonsmooth_1d")]
    Nonsmooth1d,
    #[value(name = "smooth_2d")]
    Smooth2d,
    #[value(name = "nonsmooth_2d")]
    Nonsmooth2d,
}

impl From<ProblemArg> for ProblemKind {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Smooth1d => ProblemKind::Smooth1d,
            ProblemArg::Nonsmooth1d => ProblemKind::Nonsmooth1d,
            ProblemArg::Smooth2d => ProblemKind::Smooth2d,
            ProblemArg::Nonsmooth2d => ProblemKind::Nonsmooth2d,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScalingArg {
    Equal,
    Parabolic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Cg,
    Direct,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PrecondArg {
    Block,
    Jacobi,
}

/// Convergence study of the space-time least-squares method for the heat equation.
#[derive(Debug, Parser)]
#[command(name = "stfosls", version)]
struct Args {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long, value_enum, default_value = "equal")]
    scaling: ScalingArg,
    /// Number of reported refinement levels [default: depends on the problem]
    #[arg(long)]
    levels: Option<usize>,
    /// CSV output path
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "cg")]
    solver: SolverArg,
    /// Preconditioner for cg
    #[arg(long, value_enum, default_value = "block")]
    precond: PrecondArg,
    /// Relative residual tolerance, in (0, 1e-4]
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Fourier terms per coordinate for the non-smooth solutions
    #[arg(long, default_value_t = 100)]
    fourier_terms: u32,
    /// Stop before any level with more unknowns than this
    #[arg(long, default_value_t = 2_000_000)]
    dof_budget: usize,
    /// Run everything on the calling thread
    #[arg(long)]
    serial: bool,
    /// Exit with status 1 if an expected convergence rate is not met
    #[arg(long)]
    check_rates: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    if args.serial {
        par::set_parallel(false);
    }
    let problem = ProblemKind::from(args.problem);
    let scaling = match args.scaling {
        ScalingArg::Equal => Scaling::Equal,
        ScalingArg::Parabolic => Scaling::Parabolic,
    };
    let config = StudyConfig {
        problem,
        scaling,
        levels: args.levels.unwrap_or_else(|| default_levels(problem, scaling)),
        solver: SolveOptions {
            method: match args.solver {
                SolverArg::Cg => Method::Cg,
                SolverArg::Direct => Method::Direct,
            },
            tol: args.tol,
            max_iter: args.max_iter,
            preconditioner: match args.precond {
                PrecondArg::Block => PreconditionerKind::Block,
                PrecondArg::Jacobi => PreconditionerKind::Jacobi,
            },
        },
        fourier_terms: args.fourier_terms,
        dof_budget: args.dof_budget,
        out: args.out,
    };

    let result = match run_study(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!("{} s={}", problem, scaling.exponent());
    for l in &result.levels {
        println!(
            "level {:>2}  dofs {:>9}  h_t {:.3e}  h_x {:.3e}  cg {:>5}  {:>8.2}s  ls {:.6e}",
            l.level, l.report.dofs, l.h_t, l.h_x, l.iterations, l.seconds, l.report.ls_error
        );
    }
    if result.partial {
        println!("partial: dof budget of {} reached", config.dof_budget);
    }
    println!("\nEOC per level pair:\n{}", result.rates);
    if args.check_rates {
        let outcomes = check_rates(&result);
        let mut ok = true;
        for o in &outcomes {
            println!("{o}");
            ok &= o.passed;
        }
        if !ok {
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}
