//! Convergence studies: refine, assemble, solve, measure, and report rates.

use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use crate::assembly::{assemble_rhs, System};
use crate::error::{Error, Result};
use crate::errors::{compute_errors, ErrorReport};
use crate::exact::{ProblemData, ProblemKind};
use crate::mesh::{Scaling, TensorMesh};
use crate::quadrature::ErrorQuadrature;
use crate::solver::{solve_system, SolveOptions};
use crate::spaces::{build_layout, count_dofs};

pub const CSV_HEADER: &str = "dofs,estimators,estimators_f,estimators_g,estimators_u0,estimators_u,estimators_Pf,estimators_sigma,estimators_u1";

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub problem: ProblemKind,
    pub scaling: Scaling,
    /// Number of reported levels.
    pub levels: usize,
    pub solver: SolveOptions,
    pub fourier_terms: u32,
    pub dof_budget: usize,
    pub out: Option<PathBuf>,
}

impl StudyConfig {
    pub fn new(problem: ProblemKind, scaling: Scaling) -> Self {
        Self {
            problem,
            scaling,
            levels: default_levels(problem, scaling),
            solver: SolveOptions::default(),
            fourier_terms: 100,
            dof_budget: 2_000_000,
            out: None,
        }
    }

    /// The coarsest reported level. The initial mesh is skipped for the
    /// non-smooth problems, whose kink at `x = 1/2` is resolved from level 1 on.
    pub fn first_level(&self) -> usize {
        if self.problem.is_smooth() {
            0
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::InvalidConfig(format!(
                "at least 2 levels are needed, got {}",
                self.levels
            )));
        }
        if self.fourier_terms == 0 {
            return Err(Error::InvalidConfig("fourier terms must be positive".into()));
        }
        self.solver.validate()
    }
}

/// Level counts that keep every study within a few minutes on one core.
pub fn default_levels(problem: ProblemKind, scaling: Scaling) -> usize {
    // the finest level should stay below ~10^6 unknowns
    match (problem, scaling) {
        (ProblemKind::Smooth1d, Scaling::Equal) => 7,
        (ProblemKind::Nonsmooth1d, Scaling::Equal) => 8,
        (_, Scaling::Parabolic) if problem.dim() == 1 => 7,
        (ProblemKind::Smooth2d, Scaling::Equal) => 6,
        (_, Scaling::Equal) => 5,
        (ProblemKind::Smooth2d, Scaling::Parabolic) => 5,
        (_, Scaling::Parabolic) => 4,
    }
}

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub level: usize,
    pub h_t: f64,
    pub h_x: f64,
    pub report: ErrorReport,
    pub iterations: usize,
    pub relative_residual: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub levels: Vec<LevelResult>,
    /// Set when the dof budget stopped the study before all levels ran.
    pub partial: bool,
    pub rates: RateTable,
}

impl StudyResult {
    pub fn reports(&self) -> Vec<ErrorReport> {
        self.levels.iter().map(|l| l.report).collect()
    }
}

/// Runs one convergence study and writes the CSV if `config.out` is set.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let data = ProblemData::with_fourier_terms(config.problem, config.fourier_terms);
    let quad = ErrorQuadrature::new(config.problem.dim());
    let mut mesh = TensorMesh::initial(config.problem.domain(), config.scaling)
        .refined(config.first_level());
    let mut levels = Vec::with_capacity(config.levels);
    let mut partial = false;
    for _ in 0..config.levels {
        let level = mesh.level;
        let dofs = count_dofs(&mesh).total();
        if dofs > config.dof_budget {
            log::warn!(
                "level {level} needs {dofs} dofs, above the budget of {}; stopping",
                config.dof_budget
            );
            partial = true;
            break;
        }
        let start = Instant::now();
        let at = |e: Error| Error::AtLevel { level, source: Box::new(e) };
        let disc = build_layout(&mesh, 1, 1).map_err(at)?;
        let system = System::assemble(&disc).map_err(at)?;
        let rhs = assemble_rhs(&data, &disc, &quad).map_err(at)?;
        let (sol, stats) = solve_system(&system, &rhs, &config.solver).map_err(at)?;
        drop(system);
        let report = compute_errors(&data, &disc, &sol, &quad);
        let ms = mesh.stats();
        let result = LevelResult {
            level,
            h_t: ms.h_t,
            h_x: ms.h_x,
            report,
            iterations: stats.iterations,
            relative_residual: stats.relative_residual,
            seconds: start.elapsed().as_secs_f64(),
        };
        log::info!(
            "{} s={} level {level}: dofs {dofs}, {} iterations, ls {:.3e}, {:.2}s",
            config.problem,
            config.scaling.exponent(),
            result.iterations,
            report.ls_error,
            result.seconds
        );
        levels.push(result);
        mesh = mesh.refine_uniform();
    }
    let reports: Vec<ErrorReport> = levels.iter().map(|l| l.report).collect();
    let rates = RateTable::from_reports(&reports, 10.0 * config.solver.tol);
    let result = StudyResult {
        config: config.clone(),
        levels,
        partial,
        rates,
    };
    if let Some(path) = &config.out {
        let mut file = std::fs::File::create(path)?;
        file.write_all(csv_string(&reports).as_bytes())?;
    }
    Ok(result)
}

/// The CSV file contents: header plus one row per level, floats with 16
/// significant digits.
pub fn csv_string(reports: &[ErrorReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        write!(s, "{}", r.dofs).unwrap();
        for v in r.values() {
            write!(s, ",{v:.15e}").unwrap();
        }
        s.push('\n');
    }
    s
}

/// Per-pair empirical orders `log(e_{i+1}/e_i) / log(dofs_{i+1}/dofs_i)`.
///
/// A pair gets `None` when either error is not above `floor`, or an entry is
/// not positive.
pub fn compute_eoc(errors: &[f64], dofs: &[f64], floor: f64) -> Vec<Option<f64>> {
    assert_eq!(errors.len(), dofs.len());
    errors
        .windows(2)
        .zip(dofs.windows(2))
        .map(|(e, d)| {
            let ok = e.iter().all(|&v| v > floor && v.is_finite()) && d[0] > 0.0 && d[1] > d[0];
            ok.then(|| (e[1] / e[0]).ln() / (d[1] / d[0]).ln())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub dofs: Vec<usize>,
    /// `columns[k]` holds the per-pair EOCs of `ErrorReport::COLUMNS[k]`.
    pub columns: Vec<Vec<Option<f64>>>,
}

impl RateTable {
    pub fn from_reports(reports: &[ErrorReport], floor: f64) -> Self {
        let dofs: Vec<f64> = reports.iter().map(|r| r.dofs as f64).collect();
        let columns = (0..ErrorReport::COLUMNS.len())
            .map(|k| {
                let e: Vec<f64> = reports.iter().map(|r| r.values()[k]).collect();
                compute_eoc(&e, &dofs, floor)
            })
            .collect();
        Self {
            dofs: reports.iter().map(|r| r.dofs).collect(),
            columns,
        }
    }

    pub fn column(&self, name: &str) -> Option<&[Option<f64>]> {
        let k = ErrorReport::COLUMNS.iter().position(|&c| c == name)?;
        Some(&self.columns[k])
    }

    /// Mean of the defined EOCs among the last `n` pairs.
    pub fn average_last(&self, name: &str, n: usize) -> Option<f64> {
        let col = self.column(name)?;
        let tail: Vec<f64> = col[col.len().saturating_sub(n)..].iter().flatten().copied().collect();
        (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64)
    }
}

impl fmt::Display for RateTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>10} -> {:<10}", "dofs", "dofs")?;
        for c in ErrorReport::COLUMNS {
            write!(f, " {c:>19}")?;
        }
        writeln!(f)?;
        for p in 0..self.dofs.len().saturating_sub(1) {
            write!(f, "{:>10} -> {:<10}", self.dofs[p], self.dofs[p + 1])?;
            for col in &self.columns {
                match col[p] {
                    Some(v) => write!(f, " {v:>19.3}")?,
                    None => write!(f, " {:>19}", "-")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// One acceptance condition on a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expectation {
    /// Average EOC over the last three pairs inside `[lo, hi]`.
    Rate { column: &'static str, lo: f64, hi: f64 },
    /// Strictly decreasing along the levels.
    MonotoneDecay { column: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub expectation: Expectation,
    /// The measured average EOC, if the expectation is a rate.
    pub measured: Option<f64>,
    pub passed: bool,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "ok" } else { "FAILED" };
        match self.expectation {
            Expectation::Rate { column, lo, hi } => match self.measured {
                Some(v) => write!(f, "{column}: eoc {v:.3} in [{lo:.2}, {hi:.2}] {verdict}"),
                None => write!(f, "{column}: eoc undefined, expected [{lo:.2}, {hi:.2}] {verdict}"),
            },
            Expectation::MonotoneDecay { column } => write!(f, "{column}: monotone decay {verdict}"),
        }
    }
}

/// EOC bands expected for each experiment.
pub fn expectations(problem: ProblemKind, scaling: Scaling) -> Vec<Expectation> {
    use Expectation::*;
    let rate = |column, lo, hi| Rate { column, lo, hi };
    match (problem, scaling) {
        (ProblemKind::Smooth1d, Scaling::Equal) => vec![
            rate("ls_error", -0.55, -0.45),
            rate("err_u_L2Q", -1.10, -0.90),
            rate("err_Pf", -1.10, -0.90),
            rate("err_u0", -1.10, -0.90),
            rate("err_uT", -1.10, -0.90),
            rate("err_sigma", -0.60, -0.45),
        ],
        (ProblemKind::Smooth1d, Scaling::Parabolic) => vec![
            rate("ls_error", -0.38, -0.28),
            rate("err_u_L2Q", -0.72, -0.60),
            rate("err_sigma", -0.72, -0.60),
        ],
        (ProblemKind::Nonsmooth1d, Scaling::Equal) => vec![
            rate("ls_error", -0.43, -0.33),
            rate("err_u_L2Q", -0.68, -0.58),
            rate("err_uT", -1.10, -0.85),
        ],
        (ProblemKind::Nonsmooth1d, Scaling::Parabolic) => vec![
            rate("ls_error", -0.38, -0.28),
            rate("err_u_L2Q", -0.72, -0.60),
            rate("err_sigma", -0.56, -0.44),
            rate("err_u0", -0.56, -0.44),
        ],
        (ProblemKind::Smooth2d, Scaling::Equal) => vec![
            rate("ls_error", -0.38, -0.28),
            rate("err_u_L2Q", -0.72, -0.58),
        ],
        (ProblemKind::Smooth2d, Scaling::Parabolic) => vec![
            rate("ls_error", -0.30, -0.20),
            rate("err_u_L2Q", -0.56, -0.44),
        ],
        (ProblemKind::Nonsmooth2d, Scaling::Equal) => vec![
            rate("ls_error", -0.30, -0.20),
            MonotoneDecay { column: "err_uT" },
        ],
        (ProblemKind::Nonsmooth2d, Scaling::Parabolic) => vec![
            rate("ls_error", -0.30, -0.20),
            rate("err_u_L2Q", -0.56, -0.44),
        ],
    }
}

/// Evaluates the expectations of the study's experiment.
pub fn check_rates(result: &StudyResult) -> Vec<CheckOutcome> {
    expectations(result.config.problem, result.config.scaling)
        .into_iter()
        .map(|expectation| match expectation {
            Expectation::Rate { column, lo, hi } => {
                let measured = result.rates.average_last(column, 3);
                let passed = measured.is_some_and(|v| v >= lo && v <= hi);
                CheckOutcome { expectation, measured, passed }
            }
            Expectation::MonotoneDecay { column } => {
                let values: Vec<f64> = result
                    .levels
                    .iter()
                    .map(|l| l.report.get(column).unwrap_or(f64::NAN))
                    .collect();
                let passed = values.len() >= 2 && values.windows(2).all(|w| w[1] < w[0]);
                CheckOutcome { expectation, measured: None, passed }
            }
        })
        .collect()
}
