//! Linear stability boundary of the IIF2 scheme for the scalar model
//! `u' = -q u + r u`, `q > 0`.
//!
//! With `lambda = r tau` and a unit-modulus amplification factor `e^{i theta}`
//! the scheme requires
//!
//! ```text
//! e^{i theta} = e^{-q tau} (1 + lambda/2) + lambda e^{i theta} / 2
//! ```
//!
//! whose solution traces a closed curve in the `lambda` plane. The stable set is
//! its exterior.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_Q_TAU: [f64; 3] = [0.7, 1.2, 2.5];
pub const DEFAULT_SAMPLES: usize = 720;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityPoint {
    pub theta: f64,
    pub q_tau: f64,
    pub lambda_r: f64,
    pub lambda_i: f64,
    /// `(1 - e^{-q tau})^2 + 2 (1 + cos theta) e^{-q tau}`
    pub c: f64,
}

impl StabilityPoint {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda_r, self.lambda_i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCurve {
    pub q_tau: f64,
    pub points: Vec<StabilityPoint>,
}

impl StabilityCurve {
    pub fn min_lambda_r(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.lambda_r)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_modulus(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.lambda().norm())
            .fold(0.0, f64::max)
    }
}

fn check_q_tau(q_tau: f64) -> Result<()> {
    if q_tau > 0.0 && q_tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "q_tau",
            value: q_tau,
            range: "(0, inf)",
        })
    }
}

pub fn boundary_point(q_tau: f64, theta: f64) -> Result<StabilityPoint> {
    check_q_tau(q_tau)?;
    let decay = (-q_tau).exp();
    let c = (-q_tau).exp_m1().powi(2) + 2.0 * (1.0 + theta.cos()) * decay;
    let lambda_r = -2.0 * (-2.0 * q_tau).exp_m1() / c;
    let lambda_i = 4.0 * theta.sin() * decay / c;
    Ok(StabilityPoint {
        theta,
        q_tau,
        lambda_r,
        lambda_i,
        c,
    })
}

/// `samples + 1` points on a uniform grid over `[0, 2 pi]`; both ends included.
pub fn boundary_curve(q_tau: f64, samples: usize) -> Result<StabilityCurve> {
    check_q_tau(q_tau)?;
    if samples < 8 {
        return Err(Error::Validation(format!(
            "need at least 8 samples per curve, got {samples}"
        )));
    }
    let step = std::f64::consts::TAU / samples as f64;
    let points = (0..=samples)
        .map(|k| {
            let theta = if k == samples {
                std::f64::consts::TAU
            } else {
                k as f64 * step
            };
            boundary_point(q_tau, theta)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityCurve { q_tau, points })
}

/// Modulus of the defect of the amplification equation at `point`.
pub fn boundary_residual(point: &StabilityPoint) -> f64 {
    let z = Complex64::from_polar(1.0, point.theta);
    let decay = (-point.q_tau).exp();
    let lambda = point.lambda();
    (z - decay * (1.0 + lambda / 2.0) - lambda * z / 2.0).norm()
}

/// `lambda = 2 (e^{i theta} - e^{-q tau}) / (e^{i theta} + e^{-q tau})`,
/// the amplification equation solved directly in complex arithmetic.
pub fn closed_form_lambda(q_tau: f64, theta: f64) -> Complex64 {
    let z = Complex64::from_polar(1.0, theta);
    let decay = (-q_tau).exp();
    2.0 * (z - decay) / (z + decay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn real_axis_crossings() {
        for theta in [0.0, PI] {
            assert!(boundary_point(1.2, theta).unwrap().lambda_i.abs() < 1e-15);
        }
        let p = boundary_point(0.7, PI).unwrap();
        assert!((p.lambda_r - 5.945_735_454_537_853).abs() < 1e-12);
        let p0 = boundary_point(0.7, 0.0).unwrap();
        assert!((p0.lambda_r - 0.672_751_088_672_664_4).abs() < 1e-13);
    }

    #[test]
    fn large_q_tau_approaches_two() {
        let p = boundary_point(50.0, PI).unwrap();
        assert!((p.lambda_r - 2.0).abs() < 1e-6 && p.lambda_i.abs() < 1e-6);
    }

    #[test]
    fn residual_detects_perturbation() {
        let mut p = boundary_point(0.7, 1.0).unwrap();
        assert!(boundary_residual(&p) <= 1e-12);
        p.lambda_r += 1e-3;
        assert!(boundary_residual(&p) >= 1e-4);
    }

    #[test]
    fn curve_is_closed() {
        let curve = boundary_curve(2.5, 8).unwrap();
        assert_eq!(curve.points.len(), 9);
        let (first, last) = (curve.points[0], curve.points[8]);
        assert!((first.lambda_r - last.lambda_r).abs() < 1e-15);
        assert!((first.lambda_i - last.lambda_i).abs() < 1e-15);
    }

    #[test]
    fn invalid_arguments() {
        assert!(boundary_point(0.0, 1.0).is_err());
        assert!(boundary_point(-1.0, 1.0).is_err());
        assert!(boundary_curve(1.0, 7).is_err());
    }
}
