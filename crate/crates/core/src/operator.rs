//! Spatial discretization: the grid, sampled diffusion coefficients and the
//! dense two-sided operator `A` of the semi-discrete system `u' + A u = f(u)`.
//!
//! The operator is assembled from five blocks built out of the L1 weights:
//!
//! ```text
//! A = eta * (G_L+ D+ G_R+  +  G_L- D- G_R-),    eta = h^(-2 alpha)
//! ```
//!
//! where `G~` is the `(N-1) x (N-1)` lower-triangular Toeplitz matrix with first
//! column `g_0..g_{N-2}`. With homogeneous Dirichlet data the Caputo and
//! Riemann-Liouville derivatives coincide, so no boundary correction terms
//! appear. [`apply_direct`] evaluates the same operator by literal summation and
//! serves as the reference for the block assembly.

use nalgebra::{DMatrix, DVector};

use crate::coeffs::{CoeffTable, FractionalOrder};
use crate::error::{Error, Result};

/// Uniform grid `x_i = a + i h`, `0 <= i <= N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::Validation(format!(
                "domain [{a}, {b}] must be finite with b > a"
            )));
        }
        if n < 2 {
            return Err(Error::Validation(format!(
                "grid needs N >= 2 intervals, got {n}"
            )));
        }
        Ok(Self {
            a,
            b,
            n,
            h: (b - a) / n as f64,
        })
    }

    pub fn left(&self) -> f64 {
        self.a
    }

    pub fn right(&self) -> f64 {
        self.b
    }

    /// Number of intervals `N`; there are `N - 1` interior unknowns.
    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn interior_len(&self) -> usize {
        self.n - 1
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Node `x_i`; the last node is `b` exactly.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n);
        if i == self.n {
            self.b
        } else {
            self.a + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(|i| self.node(i))
    }
}

/// `d+` sampled at `x_0..x_{N-1}` and `d-` sampled at `x_1..x_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSamples {
    d_plus: Vec<f64>,
    d_minus: Vec<f64>,
}

impl DiffusionSamples {
    pub fn new(d_plus: Vec<f64>, d_minus: Vec<f64>) -> Result<Self> {
        if d_plus.len() != d_minus.len() {
            return Err(Error::Shape(format!(
                "d+ has {} samples but d- has {}",
                d_plus.len(),
                d_minus.len()
            )));
        }
        if let Some(bad) = d_plus
            .iter()
            .chain(&d_minus)
            .find(|d| !(d.is_finite() && **d >= 0.0))
        {
            return Err(Error::Validation(format!(
                "diffusion coefficients must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(Self { d_plus, d_minus })
    }

    /// Samples the two coefficient functions at the nodes each one is needed on.
    pub fn sample(
        grid: &Grid,
        d_plus: impl Fn(f64) -> f64,
        d_minus: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let n = grid.intervals();
        Self::new(
            (0..n).map(|i| d_plus(grid.node(i))).collect(),
            (1..=n).map(|i| d_minus(grid.node(i))).collect(),
        )
    }

    pub fn d_plus(&self) -> &[f64] {
        &self.d_plus
    }

    pub fn d_minus(&self) -> &[f64] {
        &self.d_minus
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if self.d_plus.len() != grid.intervals() {
            return Err(Error::Shape(format!(
                "expected {} diffusion samples per side for N = {}, got {}",
                grid.intervals(),
                grid.intervals(),
                self.d_plus.len()
            )));
        }
        Ok(())
    }
}

/// The five factors of the operator, kept only when requested.
#[derive(Debug, Clone)]
pub struct OperatorBlocks {
    /// `(N-1) x (N-1)` lower-triangular Toeplitz matrix of `g_0..g_{N-2}`.
    pub toeplitz: DMatrix<f64>,
    pub left_plus: DMatrix<f64>,
    pub right_plus: DMatrix<f64>,
    pub left_minus: DMatrix<f64>,
    pub right_minus: DMatrix<f64>,
}

/// Dense `(N-1) x (N-1)` operator together with the data it was built from.
#[derive(Debug, Clone)]
pub struct Operator {
    matrix: DMatrix<f64>,
    eta: f64,
    alpha: FractionalOrder,
    grid: Grid,
    blocks: Option<OperatorBlocks>,
}

impl Operator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Scaling `h^(-2 alpha)`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn blocks(&self) -> Option<&OperatorBlocks> {
        self.blocks.as_ref()
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim() {
            return Err(Error::Shape(format!(
                "operator of dimension {} applied to vector of length {}",
                self.dim(),
                u.len()
            )));
        }
        let out = &self.matrix * DVector::from_column_slice(u);
        Ok(out.as_slice().to_vec())
    }
}

/// `h^(-2 alpha)`, refusing values that overflow `f64`.
pub fn eta(h: f64, alpha: FractionalOrder) -> Result<f64> {
    let log_eta = -2.0 * alpha.value() * h.ln();
    if log_eta.is_nan() || log_eta >= f64::MAX.ln() {
        return Err(Error::Numerical(format!(
            "scaling h^(-2 alpha) overflows for h = {h}, alpha = {alpha}"
        )));
    }
    Ok(h.powf(-2.0 * alpha.value()))
}

/// Left-sided L1 Caputo derivative at the interior nodes of a grid with spacing
/// `h`, given all `N + 1` nodal values.
pub fn caputo_l1_left(u: &[f64], table: &CoeffTable, h: f64) -> Result<Vec<f64>> {
    if u.len() < 3 {
        return Err(Error::Shape(format!(
            "need at least 3 nodal values, got {}",
            u.len()
        )));
    }
    let n = u.len() - 1;
    if table.len() < n {
        return Err(Error::Shape(format!(
            "coefficient table has {} weights, need {n}",
            table.len()
        )));
    }
    let a = table.a();
    let scale = h.powf(-table.alpha());
    Ok((1..n)
        .map(|i| {
            let history: f64 = (1..i).map(|k| (a[i - k - 1] - a[i - k]) * u[k]).sum();
            scale * (a[0] * u[i] - history - a[i - 1] * u[0])
        })
        .collect())
}

fn toeplitz_lower(g: &[f64], dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| if i >= j { g[i - j] } else { 0.0 })
}

fn build_blocks(table: &CoeffTable, n: usize) -> OperatorBlocks {
    let a = table.a();
    let g = table.g();
    let m = n - 1;
    let toeplitz = toeplitz_lower(g, m);

    // [a+ | G~], a+ = -(a_0, .., a_{N-2})
    let left_plus = DMatrix::from_fn(
        m,
        n,
        |i, j| {
            if j == 0 {
                -a[i]
            } else {
                toeplitz[(i, j - 1)]
            }
        },
    );
    // [g+ | G~]^T, g+ = (g_1, .., g_{N-1})
    let right_plus = DMatrix::from_fn(n, m, |i, j| {
        if i == 0 {
            g[j + 1]
        } else {
            toeplitz[(j, i - 1)]
        }
    });
    // [G~^T | a-], a- = -(a_{N-2}, .., a_0)
    let left_minus = DMatrix::from_fn(m, n, |i, j| {
        if j == m {
            -a[m - 1 - i]
        } else {
            toeplitz[(j, i)]
        }
    });
    // G~ stacked above (g_{N-1}, .., g_1)
    let right_minus = DMatrix::from_fn(
        n,
        m,
        |i, j| {
            if i == m {
                g[m - j]
            } else {
                toeplitz[(i, j)]
            }
        },
    );

    OperatorBlocks {
        toeplitz,
        left_plus,
        right_plus,
        left_minus,
        right_minus,
    }
}

fn assemble(
    grid: &Grid,
    alpha: FractionalOrder,
    coeffs: &DiffusionSamples,
    keep_blocks: bool,
) -> Result<Operator> {
    coeffs.check(grid)?;
    let n = grid.intervals();
    let eta = eta(grid.spacing(), alpha)?;
    let table = CoeffTable::for_order(alpha, n)?;
    let blocks = build_blocks(&table, n);

    let mut scaled_plus = blocks.right_plus.clone();
    for (mut row, &d) in scaled_plus.row_iter_mut().zip(coeffs.d_plus()) {
        row *= d;
    }
    let mut scaled_minus = blocks.right_minus.clone();
    for (mut row, &d) in scaled_minus.row_iter_mut().zip(coeffs.d_minus()) {
        row *= d;
    }

    let mut matrix = &blocks.left_plus * scaled_plus;
    matrix.gemm(1.0, &blocks.left_minus, &scaled_minus, 1.0);
    matrix *= eta;

    Ok(Operator {
        matrix,
        eta,
        alpha,
        grid: *grid,
        blocks: keep_blocks.then_some(blocks),
    })
}

/// Assembles the dense operator.
pub fn assemble_operator(
    grid: &Grid,
    alpha: FractionalOrder,
    coeffs: &DiffusionSamples,
) -> Result<Operator> {
    assemble(grid, alpha, coeffs, false)
}

/// Same as [`assemble_operator`] but keeps the factor blocks on the result.
pub fn assemble_operator_with_blocks(
    grid: &Grid,
    alpha: FractionalOrder,
    coeffs: &DiffusionSamples,
) -> Result<Operator> {
    assemble(grid, alpha, coeffs, true)
}

/// Evaluates the semi-discrete operator row by row with the nested sums written
/// out term for term. `O(N^3)`; intended as a check on [`assemble_operator`].
pub fn apply_direct(
    u: &[f64],
    grid: &Grid,
    alpha: FractionalOrder,
    coeffs: &DiffusionSamples,
) -> Result<Vec<f64>> {
    coeffs.check(grid)?;
    let n = grid.intervals();
    if u.len() != n - 1 {
        return Err(Error::Shape(format!(
            "expected {} interior values, got {}",
            n - 1,
            u.len()
        )));
    }
    let eta = eta(grid.spacing(), alpha)?;
    let table = CoeffTable::for_order(alpha, n)?;
    let (a, g) = (table.a(), table.g());

    // Nodal values with homogeneous boundary data, indexed 0..=N.
    let mut nodal = vec![0.0; n + 1];
    nodal[1..n].copy_from_slice(u);
    // d_{+,i} for i in 0..N, d_{-,i} for i in 1..=N
    let d_plus = |i: usize| coeffs.d_plus()[i];
    let d_minus = |i: usize| coeffs.d_minus()[i - 1];

    let tail_plus: f64 = (1..n).map(|k| g[k] * nodal[k]).sum();
    let tail_minus: f64 = (1..n).map(|k| g[k] * nodal[n - k]).sum();

    Ok((1..n)
        .map(|i| {
            let mut left = 0.0;
            for s in 0..i {
                let inner: f64 = (0..=(n - 1 - i + s)).map(|k| g[k] * nodal[i - s + k]).sum();
                left += g[s] * d_plus(i - s) * inner;
            }
            left -= a[i - 1] * d_plus(0) * tail_plus;

            let mut right = 0.0;
            for s in 0..=(n - 1 - i) {
                let inner: f64 = (0..=(i + s - 1)).map(|k| g[k] * nodal[i + s - k]).sum();
                right += g[s] * d_minus(i + s) * inner;
            }
            right -= a[n - 1 - i] * d_minus(n) * tail_minus;

            eta * (left + right)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(alpha: f64) -> FractionalOrder {
        FractionalOrder::new(alpha).unwrap()
    }

    #[test]
    fn grid_endpoints_exact() {
        let grid = Grid::new(-1.0, 1.0, 7).unwrap();
        assert_eq!(grid.node(0), -1.0);
        assert_eq!(grid.node(7), 1.0);
        assert_eq!(grid.nodes().count(), 8);
        assert!(Grid::new(1.0, 1.0, 4).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn block_shapes() {
        let grid = Grid::new(0.0, 1.0, 5).unwrap();
        let coeffs = DiffusionSamples::sample(&grid, |_| 1.0, |_| 1.0).unwrap();
        let op = assemble_operator_with_blocks(&grid, order(0.7), &coeffs).unwrap();
        let blocks = op.blocks().unwrap();
        assert_eq!(op.matrix().shape(), (4, 4));
        assert_eq!(blocks.left_plus.shape(), (4, 5));
        assert_eq!(blocks.left_minus.shape(), (4, 5));
        assert_eq!(blocks.right_plus.shape(), (5, 4));
        assert_eq!(blocks.right_minus.shape(), (5, 4));
        assert!(assemble_operator(&grid, order(0.7), &coeffs)
            .unwrap()
            .blocks()
            .is_none());
    }

    #[test]
    fn toeplitz_structure() {
        let grid = Grid::new(0.0, 1.0, 9).unwrap();
        let coeffs = DiffusionSamples::sample(&grid, |_| 1.0, |_| 1.0).unwrap();
        let op = assemble_operator_with_blocks(&grid, order(0.8), &coeffs).unwrap();
        let blocks = op.blocks().unwrap();
        let t = &blocks.toeplitz;
        for i in 0..t.nrows() {
            for j in 0..t.ncols() {
                if i < j {
                    assert_eq!(t[(i, j)], 0.0);
                } else {
                    assert_eq!(t[(i, j)], t[(i - j, 0)]);
                }
            }
        }
        let m = t.nrows();
        assert_eq!(blocks.right_minus.rows(0, m), t.rows(0, m));
        let g = CoeffTable::new(0.8, 9).unwrap();
        for j in 0..m {
            assert_eq!(blocks.right_minus[(m, j)], g.g()[m - j]);
        }
    }

    #[test]
    fn two_interval_operator_is_scalar() {
        let alpha = order(0.65);
        let grid = Grid::new(0.0, 1.0, 2).unwrap();
        let coeffs = DiffusionSamples::sample(&grid, |_| 1.0, |_| 1.0).unwrap();
        let op = assemble_operator(&grid, alpha, &coeffs).unwrap();
        let t = CoeffTable::for_order(alpha, 2).unwrap();
        let (a, g) = (t.a(), t.g());
        let eta = 0.5f64.powf(-1.3);
        let expected = eta * (2.0 * g[0] * g[0] - 2.0 * a[0] * g[1]);
        assert!((op.matrix()[(0, 0)] - expected).abs() < 1e-13 * expected);
        let direct = apply_direct(&[1.0], &grid, alpha, &coeffs).unwrap();
        assert!((direct[0] - expected).abs() < 1e-13 * expected);
    }

    #[test]
    fn eta_scales_with_refinement() {
        let alpha = order(0.7);
        let coarse = Grid::new(0.0, 1.0, 16).unwrap();
        let fine = Grid::new(0.0, 1.0, 32).unwrap();
        let e1 = eta(coarse.spacing(), alpha).unwrap();
        let e2 = eta(fine.spacing(), alpha).unwrap();
        assert_eq!(e1, coarse.spacing().powf(-1.4));
        assert!((e2 / e1 - 2f64.powf(1.4)).abs() < 1e-13);
        assert!(eta(1e-300, order(0.99)).is_err());
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(matches!(
            DiffusionSamples::new(vec![1.0, -0.1], vec![1.0, 1.0]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            DiffusionSamples::new(vec![1.0], vec![1.0, 1.0]),
            Err(Error::Shape(_))
        ));
        let grid = Grid::new(0.0, 1.0, 4).unwrap();
        let wrong = DiffusionSamples::new(vec![1.0; 3], vec![1.0; 3]).unwrap();
        assert!(matches!(
            assemble_operator(&grid, order(0.7), &wrong),
            Err(Error::Shape(_))
        ));
        assert!(apply_direct(
            &[0.0; 2],
            &grid,
            order(0.7),
            &DiffusionSamples::new(vec![1.0; 4], vec![1.0; 4]).unwrap()
        )
        .is_err());
    }

    #[test]
    fn l1_annihilates_constants() {
        let t = CoeffTable::new(0.6, 10).unwrap();
        let zero = caputo_l1_left(&[0.0; 11], &t, 0.1).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        let c = caputo_l1_left(&[3.5; 11], &t, 0.1).unwrap();
        assert_eq!(c.len(), 9);
        assert!(c.iter().all(|v| v.abs() < 1e-12), "{c:?}");
    }

    #[test]
    fn l1_exact_for_linear_data() {
        let alpha = 0.7;
        let n = 20;
        let h = 1.0 / n as f64;
        let t = CoeffTable::new(alpha, n).unwrap();
        let u: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let d = caputo_l1_left(&u, &t, h).unwrap();
        // Caputo derivative of x is x^(1 - alpha) / Gamma(2 - alpha)
        let gamma_13 = 0.897_470_696_306_277_2;
        for (i, v) in d.iter().enumerate() {
            let x = (i + 1) as f64 * h;
            let exact = x.powf(1.0 - alpha) / gamma_13;
            assert!((v - exact).abs() < 1e-13, "{i}: {v} vs {exact}");
        }
    }

    #[test]
    fn l1_shape_errors() {
        let t = CoeffTable::new(0.6, 3).unwrap();
        assert!(caputo_l1_left(&[0.0; 2], &t, 0.1).is_err());
        assert!(caputo_l1_left(&[0.0; 6], &t, 0.1).is_err());
    }
}
