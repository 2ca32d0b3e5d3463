//! Second-order implicit integration factor time stepping:
//!
//! ```text
//! u^{j+1} = E (u^j + tau/2 f(u^j)) + tau/2 f(u^{j+1}),    E = exp(-tau A)
//! ```
//!
//! The diffusion part is propagated exactly; the implicit reaction term is
//! resolved by fixed-point iteration.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expm::{propagator, Propagator};
use crate::operator::Grid;
use crate::problem::Problem;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITERATIONS: usize = 200;

/// Upper bound on `stored states x interior values` for full retention.
pub const MAX_STORED_ENTRIES: usize = 1 << 26;

/// Uniform time levels `t_j = j tau`, `tau = T / M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMesh {
    horizon: f64,
    steps: usize,
    tau: f64,
}

impl TimeMesh {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain {
                name: "T",
                value: horizon,
                range: "(0, inf)",
            });
        }
        if steps == 0 {
            return Err(Error::Validation("need at least one time step".into()));
        }
        Ok(Self {
            horizon,
            steps,
            tau: horizon / steps as f64,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepStats {
    pub iterations: usize,
    /// Max-norm of the last difference between successive iterates.
    pub residual: f64,
    pub converged: bool,
}

/// Which time levels a run keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retention {
    All,
    /// Levels `j` with `j % stride == 0`, plus the final level.
    Every(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub retention: Retention,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            retention: Retention::All,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Domain {
                name: "tol",
                value: self.tolerance,
                range: "(0, inf)",
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::Validation("max_iter must be at least 1".into()));
        }
        if self.retention == Retention::Every(0) {
            return Err(Error::Validation(
                "retention stride must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Stored solution states of one run. Boundary values are implicitly zero.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Grid,
    mesh: TimeMesh,
    levels: Vec<usize>,
    states: Vec<Vec<f64>>,
    stats: Vec<StepStats>,
    warnings: Vec<String>,
}

impl Trajectory {
    /// Wraps externally produced states (e.g. read back from disk). `levels`
    /// must be strictly increasing, start at 0 and stay within the mesh; each
    /// state holds the `N - 1` interior values.
    pub fn from_states(
        grid: Grid,
        mesh: TimeMesh,
        levels: Vec<usize>,
        states: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if levels.len() != states.len() || levels.first() != Some(&0) {
            return Err(Error::Shape(
                "need one state per level, starting at level 0".into(),
            ));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) || levels[levels.len() - 1] > mesh.steps() {
            return Err(Error::Validation(format!(
                "levels must increase within 0..={}",
                mesh.steps()
            )));
        }
        if let Some(bad) = states.iter().find(|s| s.len() != grid.interior_len()) {
            return Err(Error::Shape(format!(
                "state of length {} on a grid with {} interior nodes",
                bad.len(),
                grid.interior_len()
            )));
        }
        Ok(Self {
            grid,
            mesh,
            levels,
            states,
            stats: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    /// Time-level indices `j` of the stored states, increasing.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().map(|&j| self.mesh.time(j))
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    /// Interior state at level `j`, if it was stored.
    pub fn state_at(&self, j: usize) -> Option<&[f64]> {
        self.levels
            .binary_search(&j)
            .ok()
            .map(|k| self.states[k].as_slice())
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory always holds u^0")
    }

    /// One entry per step taken.
    pub fn stats(&self) -> &[StepStats] {
        &self.stats
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn max_iterations_used(&self) -> usize {
        self.stats.iter().map(|s| s.iterations).max().unwrap_or(0)
    }
}

fn reaction_into(f: &impl Fn(f64) -> f64, u: &[f64], out: &mut [f64]) {
    for (o, &x) in out.iter_mut().zip(u) {
        *o = f(x);
    }
}

struct StepWork {
    rhs: DVector<f64>,
    known: DVector<f64>,
    f_old: Vec<f64>,
    f_iter: Vec<f64>,
}

impl StepWork {
    fn new(dim: usize) -> Self {
        Self {
            rhs: DVector::zeros(dim),
            known: DVector::zeros(dim),
            f_old: vec![0.0; dim],
            f_iter: vec![0.0; dim],
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn step_into(
    current: &[f64],
    next: &mut [f64],
    prop: &Propagator,
    f: &impl Fn(f64) -> f64,
    tolerance: f64,
    max_iterations: usize,
    step: usize,
    work: &mut StepWork,
) -> Result<StepStats> {
    let half_tau = 0.5 * prop.tau();
    reaction_into(f, current, &mut work.f_old);
    for ((r, &u), &fu) in work.rhs.iter_mut().zip(current).zip(&work.f_old) {
        *r = u + half_tau * fu;
    }
    work.known.gemv(1.0, prop.matrix(), &work.rhs, 0.0);

    // explicit predictor seed
    for ((n, &v), &fu) in next.iter_mut().zip(work.known.iter()).zip(&work.f_old) {
        *n = v + half_tau * fu;
    }

    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iterations {
        reaction_into(f, next, &mut work.f_iter);
        residual = 0.0;
        for ((n, &v), &fu) in next.iter_mut().zip(work.known.iter()).zip(&work.f_iter) {
            let updated = v + half_tau * fu;
            residual = f64::max(residual, (updated - *n).abs());
            *n = updated;
        }
        if !residual.is_finite() {
            return Err(Error::NonFinite { step });
        }
        if residual <= tolerance {
            return Ok(StepStats {
                iterations: iteration,
                residual,
                converged: true,
            });
        }
    }
    Err(Error::NonConvergence {
        step,
        iterations: max_iterations,
        residual,
        tolerance,
    })
}

/// One IIF2 step from `current`. A non-converged fixed-point iteration is an
/// error; the step index it reports is 1 for a standalone call.
pub fn iif2_step(
    current: &[f64],
    prop: &Propagator,
    f: impl Fn(f64) -> f64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<(Vec<f64>, StepStats)> {
    if current.len() != prop.dim() {
        return Err(Error::Shape(format!(
            "state of length {} does not match propagator of dimension {}",
            current.len(),
            prop.dim()
        )));
    }
    SolverOptions {
        tolerance,
        max_iterations,
        retention: Retention::All,
    }
    .validate()?;
    let mut next = vec![0.0; current.len()];
    let mut work = StepWork::new(current.len());
    let stats = step_into(
        current,
        &mut next,
        prop,
        &f,
        tolerance,
        max_iterations,
        1,
        &mut work,
    )?;
    Ok((next, stats))
}

/// Contraction factor `tau L_f / 2` of the fixed-point map, with `L_f`
/// estimated over the range spanned by the initial data and zero.
pub fn contraction_estimate(problem: &Problem, initial: &[f64], tau: f64) -> f64 {
    let lo = initial.iter().copied().fold(0.0, f64::min);
    let hi = initial.iter().copied().fold(0.0, f64::max);
    0.5 * tau * problem.reaction.lipschitz_estimate(lo, hi)
}

/// Solves `problem` on `n` intervals with `m` time steps.
pub fn integrate(
    problem: &Problem,
    n: usize,
    m: usize,
    options: &SolverOptions,
) -> Result<Trajectory> {
    problem.validate()?;
    options.validate()?;
    let grid = problem.grid(n)?;
    let mesh = TimeMesh::new(problem.horizon, m)?;
    let dim = grid.interior_len();

    let stride = match options.retention {
        Retention::All => {
            if (m + 1).saturating_mul(dim) > MAX_STORED_ENTRIES {
                return Err(Error::Validation(format!(
                    "storing all {} states of {dim} values exceeds {MAX_STORED_ENTRIES} entries; \
                     request a retention stride",
                    m + 1
                )));
            }
            1
        }
        Retention::Every(stride) => stride,
    };

    let op = problem.operator(n)?;
    let prop = propagator(&op, mesh.tau())?;

    let initial = problem.initial_state(&grid);
    let mut warnings = Vec::new();
    let contraction = contraction_estimate(problem, &initial, mesh.tau());
    if contraction >= 1.0 {
        let msg = format!(
            "tau * L_f / 2 = {contraction:.3} >= 1: fixed-point iteration may not contract"
        );
        log::warn!("{}: {msg}", problem.name);
        warnings.push(msg);
    }

    let f = |u: f64| problem.reaction.eval(u);
    let mut levels = vec![0];
    let mut states = vec![initial.clone()];
    let mut stats = Vec::with_capacity(m);
    let mut current = initial;
    let mut next = vec![0.0; dim];
    let mut work = StepWork::new(dim);

    for j in 1..=m {
        let s = step_into(
            &current,
            &mut next,
            &prop,
            &f,
            options.tolerance,
            options.max_iterations,
            j,
            &mut work,
        )?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: j });
        }
        stats.push(s);
        std::mem::swap(&mut current, &mut next);
        if j % stride == 0 || j == m {
            levels.push(j);
            states.push(current.clone());
        }
    }

    Ok(Trajectory {
        grid,
        mesh,
        levels,
        states,
        stats,
        warnings,
    })
}
