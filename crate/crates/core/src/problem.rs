//! Problem definitions: domain, horizon, diffusion coefficients, reaction and
//! initial data. Coefficient and reaction shapes come from a fixed registry of
//! parametrized forms so problems can be described in a config file without an
//! expression language.

use serde::{Deserialize, Serialize};

use crate::coeffs::FractionalOrder;
use crate::error::{Error, Result};
use crate::operator::{assemble_operator, DiffusionSamples, Grid, Operator};

/// A diffusion coefficient `d(x) >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficient {
    Constant {
        value: f64,
    },
    /// `scale * |x - anchor|^exponent`; the exponent defaults to the
    /// fractional order of the problem.
    Power {
        #[serde(default = "one")]
        scale: f64,
        anchor: f64,
        #[serde(default)]
        exponent: Option<f64>,
    },
    /// `scale * exp(rate * x)`
    Exponential {
        scale: f64,
        rate: f64,
    },
    /// `left` on `x < breakpoint`, `right` on `x >= breakpoint`.
    Piecewise {
        breakpoint: f64,
        left: Box<Coefficient>,
        right: Box<Coefficient>,
    },
}

fn one() -> f64 {
    1.0
}

impl Coefficient {
    pub fn eval(&self, x: f64, alpha: FractionalOrder) -> f64 {
        match self {
            Coefficient::Constant { value } => *value,
            Coefficient::Power {
                scale,
                anchor,
                exponent,
            } => scale * (x - anchor).abs().powf(exponent.unwrap_or(alpha.value())),
            Coefficient::Exponential { scale, rate } => scale * (rate * x).exp(),
            Coefficient::Piecewise {
                breakpoint,
                left,
                right,
            } => {
                if x < *breakpoint {
                    left.eval(x, alpha)
                } else {
                    right.eval(x, alpha)
                }
            }
        }
    }
}

/// Pointwise reaction term `f(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reaction {
    Zero,
    /// `rate * u`
    Linear {
        rate: f64,
    },
    /// `scale * u (u - threshold) (1 - u)`
    Cubic {
        scale: f64,
        threshold: f64,
    },
    /// `scale * sin(u)`
    Sine {
        #[serde(default = "one")]
        scale: f64,
    },
}

impl Reaction {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Reaction::Zero => 0.0,
            Reaction::Linear { rate } => rate * u,
            Reaction::Cubic { scale, threshold } => scale * u * (u - threshold) * (1.0 - u),
            Reaction::Sine { scale } => scale * u.sin(),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            Reaction::Zero => 0.0,
            Reaction::Linear { rate } => rate,
            Reaction::Cubic { scale, threshold } => {
                // d/du [-u^3 + (1 + c) u^2 - c u]
                scale * (-3.0 * u * u + 2.0 * (1.0 + threshold) * u - threshold)
            }
            Reaction::Sine { scale } => scale * u.cos(),
        }
    }

    /// Largest `|f'(u)|` seen on a uniform sample of `[lo, hi]`.
    pub fn lipschitz_estimate(&self, lo: f64, hi: f64) -> f64 {
        const SAMPLES: usize = 256;
        (0..=SAMPLES)
            .map(|k| lo + (hi - lo) * k as f64 / SAMPLES as f64)
            .map(|u| self.derivative(u).abs())
            .fold(0.0, f64::max)
    }
}

/// Initial profile `u0(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Zero,
    /// `scale * (x - a)^2 (b - x)^2` on the problem domain `[a, b]`.
    QuarticBump {
        scale: f64,
    },
    /// `scale * e^(rate x) / (e^(rate x) + 1)^2`
    LogisticPulse {
        scale: f64,
        rate: f64,
    },
    /// `amplitude * sin(mode * pi * (x - a) / (b - a))`
    SineMode {
        amplitude: f64,
        mode: u32,
    },
}

impl InitialCondition {
    pub fn eval(&self, x: f64, a: f64, b: f64) -> f64 {
        match *self {
            InitialCondition::Zero => 0.0,
            InitialCondition::QuarticBump { scale } => {
                let (l, r) = (x - a, b - x);
                scale * l * l * r * r
            }
            InitialCondition::LogisticPulse { scale, rate } => {
                // symmetric in rate * x; written so the exponential never overflows
                let e = (-(rate * x).abs()).exp();
                scale * e / ((1.0 + e) * (1.0 + e))
            }
            InitialCondition::SineMode { amplitude, mode } => {
                amplitude * (mode as f64 * std::f64::consts::PI * (x - a) / (b - a)).sin()
            }
        }
    }
}

fn default_boundary_tolerance() -> f64 {
    1e-12
}

/// One instance of the two-sided fractional diffusion-reaction problem with
/// homogeneous Dirichlet data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub name: String,
    pub left: f64,
    pub right: f64,
    pub horizon: f64,
    pub alpha: FractionalOrder,
    pub d_plus: Coefficient,
    pub d_minus: Coefficient,
    pub reaction: Reaction,
    pub initial: InitialCondition,
    /// Allowed `|u0|` at the two endpoints.
    #[serde(default = "default_boundary_tolerance")]
    pub boundary_tolerance: f64,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        if !(self.left.is_finite() && self.right.is_finite() && self.right > self.left) {
            return Err(Error::Validation(format!(
                "domain [{}, {}] must be finite with right > left",
                self.left, self.right
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Domain {
                name: "T",
                value: self.horizon,
                range: "(0, inf)",
            });
        }
        for x in [self.left, self.right] {
            let u0 = self.initial.eval(x, self.left, self.right);
            if u0.is_nan() || u0.abs() > self.boundary_tolerance {
                return Err(Error::Validation(format!(
                    "initial data u0({x}) = {u0:e} incompatible with zero boundary values \
                     (tolerance {:e})",
                    self.boundary_tolerance
                )));
            }
        }
        Ok(())
    }

    pub fn with_alpha(mut self, alpha: FractionalOrder) -> Self {
        self.alpha = alpha;
        self
    }

    /// Parses a TOML problem description.
    pub fn from_toml(text: &str) -> Result<Self> {
        let problem: Problem = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        problem.validate()?;
        Ok(problem)
    }

    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::new(self.left, self.right, n)
    }

    pub fn diffusion_samples(&self, grid: &Grid) -> Result<DiffusionSamples> {
        DiffusionSamples::sample(
            grid,
            |x| self.d_plus.eval(x, self.alpha),
            |x| self.d_minus.eval(x, self.alpha),
        )
    }

    pub fn operator(&self, n: usize) -> Result<Operator> {
        let grid = self.grid(n)?;
        assemble_operator(&grid, self.alpha, &self.diffusion_samples(&grid)?)
    }

    /// `u0` at the interior nodes.
    pub fn initial_state(&self, grid: &Grid) -> Vec<f64> {
        (1..grid.intervals())
            .map(|i| self.initial.eval(grid.node(i), self.left, self.right))
            .collect()
    }
}
