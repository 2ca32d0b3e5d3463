//! L1 quadrature weights.
//!
//! For an order `alpha` the normalized L1 weights are
//! `a_i = ((i+1)^(1-alpha) - i^(1-alpha)) / Gamma(2-alpha)` and the convolution
//! weights are their first differences, `g_0 = a_0`, `g_k = a_k - a_{k-1}`.
//! Every discrete fractional operator in this crate is built from these two
//! sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Order of the space-fractional derivatives, restricted to `0.5 < alpha < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.5 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::Domain {
                name: "alpha",
                value: alpha,
                range: "(0.5, 1)",
            })
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(order: FractionalOrder) -> f64 {
        order.0
    }
}

impl std::fmt::Display for FractionalOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function on `(0.5, 2)`, the range needed for `Gamma(2 - alpha)`.
///
/// Lanczos approximation with `g = 7`, nine terms.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.5 && x < 2.0) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            range: "(0.5, 2)",
        });
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (k, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum)
}

/// Below this index the weight difference is formed directly; above it the
/// two powers agree in too many leading digits.
const STABLE_FORM_THRESHOLD: usize = 16;

/// Unnormalized weight `(i+1)^beta - i^beta` with `beta = 1 - alpha`.
fn raw_weight(i: usize, beta: f64) -> f64 {
    if i < STABLE_FORM_THRESHOLD {
        ((i + 1) as f64).powf(beta) - (i as f64).powf(beta)
    } else {
        let x = i as f64;
        x.powf(beta) * (beta * (1.0 / x).ln_1p()).exp_m1()
    }
}

/// The sequences `a_0..a_{n-1}` and `g_0..g_{n-1}` for one order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    alpha: f64,
    a: Vec<f64>,
    g: Vec<f64>,
}

impl CoeffTable {
    /// Builds `n` weights of each kind. The L1 weights are well defined for any
    /// `0 < alpha < 1`, so this accepts the wider range; problem-level code goes
    /// through [`FractionalOrder`] and [`CoeffTable::for_order`].
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain {
                name: "alpha",
                value: alpha,
                range: "(0, 1)",
            });
        }
        if n == 0 {
            return Err(Error::Validation(
                "coefficient table needs at least one weight".into(),
            ));
        }
        let beta = 1.0 - alpha;
        let scale = 1.0 / gamma(2.0 - alpha)?;
        let a: Vec<f64> = (0..n).map(|i| scale * raw_weight(i, beta)).collect();
        let g = std::iter::once(a[0])
            .chain(a.windows(2).map(|w| w[1] - w[0]))
            .collect();
        Ok(Self { alpha, a, g })
    }

    pub fn for_order(alpha: FractionalOrder, n: usize) -> Result<Self> {
        Self::new(alpha.value(), n)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Normalized L1 weights, `a[0] = 1 / Gamma(2 - alpha)`.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Convolution weights; `g[0] > 0` and every later entry is negative.
    pub fn g(&self) -> &[f64] {
        &self.g
    }
}
