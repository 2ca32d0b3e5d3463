//! Solver for the nonlinear two-sided space-fractional diffusion equation
//!
//! ```text
//! u_t + D^a_C (d+(x) D^a_{x,b} u) + D^a_{C,b} (d-(x) D^a_{a,x} u) = f(u),   1/2 < a < 1
//! ```
//!
//! on `[a, b] x [0, T]` with `u(a,t) = u(b,t) = 0`.
//!
//! Space is discretized with the L1 formula ([`coeffs`], [`operator`]), giving
//! the stiff system `u' + A u = f(u)`. Time is advanced with the second-order
//! implicit integration factor scheme ([`stepper`]), which propagates the
//! diffusion exactly through `exp(-tau A)` ([`expm`]) and treats the reaction
//! implicitly. [`stability`] produces the scheme's linear stability boundary
//! and [`harness`] runs the reference-solution convergence studies.

pub mod coeffs;
pub mod error;
pub mod expm;
pub mod harness;
pub mod operator;
pub mod problem;
pub mod report;
pub mod stability;
pub mod stepper;

pub use coeffs::{gamma, CoeffTable, FractionalOrder};
pub use error::{Error, Result};
pub use expm::{expm, propagator, Propagator};
pub use harness::{
    builtin_problem, max_error, rate, refinement_study, Axis, ConvergenceRow, ConvergenceTable,
    ErrorReport, StudyOptions,
};
pub use operator::{
    apply_direct, assemble_operator, assemble_operator_with_blocks, caputo_l1_left,
    DiffusionSamples, Grid, Operator,
};
pub use problem::{Coefficient, InitialCondition, Problem, Reaction};
pub use stability::{
    boundary_curve, boundary_point, boundary_residual, closed_form_lambda, StabilityCurve,
    StabilityPoint,
};
pub use stepper::{
    iif2_step, integrate, Retention, SolverOptions, StepStats, TimeMesh, Trajectory,
};
