//! Dense matrix exponential by scaling and squaring with diagonal Padé
//! approximants, and the propagator `exp(-tau A)` built from it.

use std::cell::Cell;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::Operator;

/// Largest 1-norm for which the `[m/m]` Padé approximant meets unit-roundoff
/// backward error, for m = 3, 5, 7, 9, 13.
#[allow(clippy::excessive_precision)]
const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_230e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
    (13, 5.371_920_351_148_152),
];

/// Coefficients `b_0..b_m` of the `[m/m]` Padé numerator, `b_0 = 1`.
fn pade_coefficients(m: usize) -> Vec<f64> {
    let mut b = Vec::with_capacity(m + 1);
    b.push(1.0);
    for j in 0..m {
        let next = b[j] * (m - j) as f64 / ((j + 1) as f64 * (2 * m - j) as f64);
        b.push(next);
    }
    b
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn add_scaled_identity(m: &mut DMatrix<f64>, c: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += c;
    }
}

/// Returns `(U, V)` with `r_m(A) = (V - U)^{-1} (V + U)`.
fn pade_terms(a: &DMatrix<f64>, m: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = pade_coefficients(m);
    let n = a.nrows();
    let a2 = a * a;

    if m == 13 {
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;

        let mut odd_high = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
        odd_high = &a6 * odd_high;
        let mut odd = odd_high + &a6 * b[7] + &a4 * b[5] + &a2 * b[3];
        add_scaled_identity(&mut odd, b[1]);
        let u = a * odd;

        let even_high = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
        let mut v = even_high + &a6 * b[6] + &a4 * b[4] + &a2 * b[2];
        add_scaled_identity(&mut v, b[0]);
        return (u, v);
    }

    // Powers A^0, A^2, .., A^{m-1}
    let mut powers = vec![DMatrix::identity(n, n), a2.clone()];
    while 2 * powers.len() <= m {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut odd = DMatrix::zeros(n, n);
    let mut v = DMatrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        odd += p * b[2 * k + 1];
        v += p * b[2 * k];
    }
    (a * odd, v)
}

/// `exp(m)` for a dense square matrix.
pub fn expm(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation(
            "matrix exponential input has non-finite entries".into(),
        ));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(m.clone());
    }

    let norm = norm1(m);
    let (degree, squarings) = match THETA[..4].iter().find(|(_, theta)| norm <= *theta) {
        Some(&(deg, _)) => (deg, 0),
        None => {
            let theta13 = THETA[4].1;
            let s = (norm / theta13).log2().ceil().max(0.0) as i32;
            (13, s)
        }
    };

    let scaled = if squarings > 0 {
        m * 2f64.powi(-squarings)
    } else {
        m.clone()
    };
    let (u, v) = pade_terms(&scaled, degree);
    let denominator = &v - &u;
    let numerator = v + u;
    let mut x = denominator.lu().solve(&numerator).ok_or_else(|| {
        Error::Numerical("singular Padé denominator in matrix exponential".into())
    })?;
    for _ in 0..squarings {
        x = &x * &x;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "matrix exponential produced non-finite entries".into(),
        ));
    }
    Ok(x)
}

thread_local! {
    static PROPAGATOR_BUILDS: Cell<usize> = const { Cell::new(0) };
}

/// Number of propagators built on the current thread so far.
pub fn propagator_builds() -> usize {
    PROPAGATOR_BUILDS.with(Cell::get)
}

/// `exp(-tau A)` for one operator and step size.
#[derive(Debug, Clone)]
pub struct Propagator {
    matrix: DMatrix<f64>,
    tau: f64,
}

impl Propagator {
    /// Wraps a precomputed matrix; used for small hand-built systems.
    pub fn from_matrix(matrix: DMatrix<f64>, tau: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape("propagator must be square".into()));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Domain {
                name: "tau",
                value: tau,
                range: "(0, inf)",
            });
        }
        Ok(Self { matrix, tau })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Builds `exp(-tau A)`.
pub fn propagator(op: &Operator, tau: f64) -> Result<Propagator> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
            range: "(0, inf)",
        });
    }
    PROPAGATOR_BUILDS.with(|c| c.set(c.get() + 1));
    let matrix = expm(&(op.matrix() * -tau))?;
    Ok(Propagator { matrix, tau })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        (x - y).amax()
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let e = expm(&DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(e, DMatrix::identity(4, 4));
    }

    #[test]
    fn diagonal_matrix() {
        let e = expm(&DMatrix::from_diagonal(&nalgebra::dvector![-1.0, -2.0])).unwrap();
        assert!((e[(0, 0)] - (-1f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - (-2f64).exp()).abs() < 1e-15);
        assert_eq!(e[(0, 1)], 0.0);
        assert_eq!(e[(1, 0)], 0.0);
    }

    #[test]
    fn nilpotent_matrix() {
        let m = nalgebra::dmatrix![0.0, 1.0; 0.0, 0.0];
        let e = expm(&m).unwrap();
        let expected = nalgebra::dmatrix![1.0, 1.0; 0.0, 1.0];
        assert!(max_abs_diff(&e, &expected) < 1e-15);
    }

    #[test]
    fn large_norm_uses_squaring() {
        // exp of a rotation generator scaled up: stays a rotation
        let t = 40.0;
        let m = nalgebra::dmatrix![0.0, -t; t, 0.0];
        let e = expm(&m).unwrap();
        let expected = nalgebra::dmatrix![t.cos(), -t.sin(); t.sin(), t.cos()];
        assert!(max_abs_diff(&e, &expected) < 1e-12);
    }

    #[test]
    fn pade_coefficients_degree_three() {
        let b = pade_coefficients(3);
        let expected = [1.0, 0.5, 0.1, 1.0 / 120.0];
        for (x, y) in b.iter().zip(expected) {
            assert!((x - y).abs() < 1e-16);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(expm(&DMatrix::zeros(2, 3)), Err(Error::Shape(_))));
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(expm(&m), Err(Error::Validation(_))));
        assert!(Propagator::from_matrix(DMatrix::identity(2, 2), 0.0).is_err());
    }
}
