//! Benchmark problems and the reference-as-exact convergence protocol.
//!
//! A study solves the problem once on a fine reference mesh, then on a sequence
//! of coarser meshes whose nodes and time levels are exact subsets of the
//! reference ones. Errors are maxima over coincident space-time points; no
//! interpolation is involved.

use rayon::prelude::*;
use serde::Serialize;

use crate::coeffs::FractionalOrder;
use crate::error::{Error, Result};
use crate::problem::{Coefficient, InitialCondition, Problem, Reaction};
use crate::stepper::{
    integrate, Retention, SolverOptions, StepStats, Trajectory, MAX_STORED_ENTRIES,
};

/// Reference resolution used by the published tables.
pub const FULL_REFERENCE: usize = 1024;
/// Reference resolution for quick runs.
pub const DESK_REFERENCE: usize = 512;

/// Registered problem names with a one-line description.
pub const BUILTIN_PROBLEMS: [(&str, &str); 2] = [
    (
        "example1",
        "[0,1], T=1, d+=(1-x)^alpha, d-=x^alpha, u0=10x^2(1-x)^2, f(u)=100u(u-0.5)(1-u)",
    ),
    (
        "example2",
        "[-1,1], T=1, d+=1.5e^-x (x<0) / 1 (x>=0), d-=1, u0=4e^10x/(e^10x+1)^2, f(u)=sin u",
    ),
];

/// Endpoint tolerance for registry problems whose initial data is only
/// approximately compatible with the zero boundary values.
const REGISTRY_BOUNDARY_TOLERANCE: f64 = 1e-3;

pub fn builtin_problem(name: &str, alpha: FractionalOrder) -> Result<Problem> {
    let problem = match name {
        "example1" => Problem {
            name: name.into(),
            left: 0.0,
            right: 1.0,
            horizon: 1.0,
            alpha,
            d_plus: Coefficient::Power {
                scale: 1.0,
                anchor: 1.0,
                exponent: None,
            },
            d_minus: Coefficient::Power {
                scale: 1.0,
                anchor: 0.0,
                exponent: None,
            },
            reaction: Reaction::Cubic {
                scale: 100.0,
                threshold: 0.5,
            },
            initial: InitialCondition::QuarticBump { scale: 10.0 },
            boundary_tolerance: REGISTRY_BOUNDARY_TOLERANCE,
        },
        "example2" => Problem {
            name: name.into(),
            left: -1.0,
            right: 1.0,
            horizon: 1.0,
            alpha,
            d_plus: Coefficient::Piecewise {
                breakpoint: 0.0,
                left: Box::new(Coefficient::Exponential {
                    scale: 1.5,
                    rate: -1.0,
                }),
                right: Box::new(Coefficient::Constant { value: 1.0 }),
            },
            d_minus: Coefficient::Constant { value: 1.0 },
            reaction: Reaction::Sine { scale: 1.0 },
            initial: InitialCondition::LogisticPulse {
                scale: 4.0,
                rate: 10.0,
            },
            boundary_tolerance: REGISTRY_BOUNDARY_TOLERANCE,
        },
        _ => {
            return Err(Error::UnknownProblem {
                name: name.into(),
                available: BUILTIN_PROBLEMS
                    .iter()
                    .map(|(n, _)| *n)
                    .collect::<Vec<_>>()
                    .join(", "),
            })
        }
    };
    problem.validate()?;
    Ok(problem)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub h: f64,
    pub tau: f64,
    pub error: f64,
    pub compared_points: usize,
}

/// Max-norm difference between `approx` and `reference` over every stored
/// level of `approx` and every node `0..=N`, boundary nodes included.
pub fn max_error(reference: &Trajectory, approx: &Trajectory) -> Result<ErrorReport> {
    let (rg, ag) = (reference.grid(), approx.grid());
    let (rm, am) = (reference.mesh(), approx.mesh());
    if rg.left() != ag.left() || rg.right() != ag.right() {
        return Err(Error::Nesting(format!(
            "domains differ: [{}, {}] vs [{}, {}]",
            rg.left(),
            rg.right(),
            ag.left(),
            ag.right()
        )));
    }
    if rm.horizon() != am.horizon() {
        return Err(Error::Nesting(format!(
            "horizons differ: {} vs {}",
            rm.horizon(),
            am.horizon()
        )));
    }
    if rg.intervals() % ag.intervals() != 0 || rm.steps() % am.steps() != 0 {
        return Err(Error::Nesting(format!(
            "reference (N={}, M={}) is not a refinement of (N={}, M={})",
            rg.intervals(),
            rm.steps(),
            ag.intervals(),
            am.steps()
        )));
    }
    let space_ratio = rg.intervals() / ag.intervals();
    let time_ratio = rm.steps() / am.steps();

    let mut error = 0.0f64;
    let mut compared = 0;
    for (&j, coarse) in approx.levels().iter().zip(approx.states()) {
        let fine = reference.state_at(j * time_ratio).ok_or_else(|| {
            Error::Nesting(format!(
                "reference did not store level {} (needed for coarse level {j})",
                j * time_ratio
            ))
        })?;
        // interior node i of the coarse grid sits at interior node i * ratio
        for (i, &value) in coarse.iter().enumerate() {
            let fine_value = fine[(i + 1) * space_ratio - 1];
            error = error.max((fine_value - value).abs());
        }
        compared += ag.intervals() + 1;
    }
    Ok(ErrorReport {
        h: ag.spacing(),
        tau: am.tau(),
        error,
        compared_points: compared,
    })
}

/// Observed order between two runs with step sizes `s_coarse > s_fine`.
pub fn rate(err_coarse: f64, err_fine: f64, s_coarse: f64, s_fine: f64) -> Result<f64> {
    if !(err_coarse > 0.0 && err_fine > 0.0) {
        return Err(Error::UndefinedRate(format!(
            "errors must be positive, got {err_coarse:e} and {err_fine:e}"
        )));
    }
    if !(s_fine > 0.0 && s_coarse > s_fine) {
        return Err(Error::UndefinedRate(format!(
            "step sizes must satisfy s_coarse > s_fine > 0, got {s_coarse} and {s_fine}"
        )));
    }
    Ok((err_coarse / err_fine).ln() / (s_coarse / s_fine).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Fixed grid, varying number of time steps.
    Time,
    /// Fixed time step, varying number of intervals.
    Space,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Time => "time",
            Axis::Space => "space",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    /// Number of time steps (time axis) or intervals (space axis).
    pub resolution: usize,
    /// The varying step size, `tau` or `h`.
    pub step: f64,
    pub error: f64,
    pub rate: Option<f64>,
    pub report: ErrorReport,
    pub step_stats: Vec<StepStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub problem: String,
    pub alpha: f64,
    pub axis: Axis,
    pub fixed_resolution: usize,
    pub reference_intervals: usize,
    pub reference_steps: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    /// Rates of rows after the first.
    pub fn rates(&self) -> Vec<Option<f64>> {
        self.rows.iter().skip(1).map(|r| r.rate).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Coarse solves run concurrently on this many threads.
    pub jobs: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        let solver = SolverOptions::default();
        Self {
            tolerance: solver.tolerance,
            max_iterations: solver.max_iterations,
            jobs: 1,
        }
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Refinement study along one axis.
///
/// On the time axis the grid is fixed at `fixed_resolution` intervals and each
/// entry of `varying` is a number of time steps; on the space axis the roles
/// are swapped. The reference solution uses `reference_intervals` and
/// `reference_steps` and is computed once.
pub fn refinement_study(
    problem: &Problem,
    axis: Axis,
    fixed_resolution: usize,
    varying: &[usize],
    reference_intervals: usize,
    reference_steps: usize,
    options: &StudyOptions,
) -> Result<ConvergenceTable> {
    if varying.is_empty() {
        return Err(Error::Validation("no resolutions to study".into()));
    }
    if varying.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation(format!(
            "resolutions must strictly increase, got {varying:?}"
        )));
    }
    if options.jobs == 0 {
        return Err(Error::Validation("jobs must be at least 1".into()));
    }
    let (fixed_ref, varying_ref) = match axis {
        Axis::Time => (reference_intervals, reference_steps),
        Axis::Space => (reference_steps, reference_intervals),
    };
    if fixed_resolution == 0 || fixed_ref % fixed_resolution != 0 {
        return Err(Error::Nesting(format!(
            "fixed resolution {fixed_resolution} does not divide reference {fixed_ref}"
        )));
    }
    if let Some(bad) = varying.iter().find(|&&r| r == 0 || varying_ref % r != 0) {
        return Err(Error::Nesting(format!(
            "resolution {bad} does not divide reference {varying_ref}"
        )));
    }

    let solver = |retention| SolverOptions {
        tolerance: options.tolerance,
        max_iterations: options.max_iterations,
        retention,
    };

    // Every time level any coarse run will ask for.
    let coarse_steps = match axis {
        Axis::Time => varying.iter().fold(1, |acc, &m| lcm(acc, m)),
        Axis::Space => fixed_resolution,
    };
    let full = (reference_steps + 1).saturating_mul(reference_intervals - 1) <= MAX_STORED_ENTRIES;
    let reference_retention = if full {
        Retention::All
    } else {
        Retention::Every(reference_steps / coarse_steps)
    };
    let reference = integrate(
        problem,
        reference_intervals,
        reference_steps,
        &solver(reference_retention),
    )?;

    let run = |&resolution: &usize| -> Result<ConvergenceRow> {
        let (n, m) = match axis {
            Axis::Time => (fixed_resolution, resolution),
            Axis::Space => (resolution, fixed_resolution),
        };
        let approx = integrate(problem, n, m, &solver(Retention::All))?;
        let report = max_error(&reference, &approx)?;
        Ok(ConvergenceRow {
            resolution,
            step: match axis {
                Axis::Time => report.tau,
                Axis::Space => report.h,
            },
            error: report.error,
            rate: None,
            report,
            step_stats: approx.stats().to_vec(),
        })
    };

    let mut rows = if options.jobs == 1 {
        varying.iter().map(run).collect::<Result<Vec<_>>>()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?
            .install(|| varying.par_iter().map(run).collect::<Result<Vec<_>>>())?
    };

    for k in 1..rows.len() {
        let (prev, cur) = (&rows[k - 1], &rows[k]);
        rows[k].rate = rate(prev.error, cur.error, prev.step, cur.step).ok();
    }

    Ok(ConvergenceTable {
        problem: problem.name.clone(),
        alpha: problem.alpha.value(),
        axis,
        fixed_resolution,
        reference_intervals,
        reference_steps,
        rows,
    })
}
