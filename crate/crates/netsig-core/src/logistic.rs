//! Mean logistic loss `(1/n) Σ log(1 + exp(-yᵢ ηᵢ))` and its derivatives.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Numerically stable `ln(1 + eᵗ)`.
#[inline]
pub fn log1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + libm::log1p(libm::exp(-t))
    } else {
        libm::log1p(libm::exp(t))
    }
}

#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + libm::exp(-t))
    } else {
        let e = libm::exp(t);
        e / (1.0 + e)
    }
}

pub fn mean_loss(eta: &[f64], y: &[f64]) -> f64 {
    let n = eta.len() as f64;
    eta.iter()
        .zip(y)
        .map(|(e, yi)| log1p_exp(-yi * e))
        .sum::<f64>()
        / n
}

/// Writes `∂L/∂ηᵢ = -yᵢ σ(-yᵢ ηᵢ) / n` into `out`, so that the gradient with
/// respect to a column is its dot product with `out`.
#[inline]
pub fn loss_derivative(eta: &[f64], y: &[f64], out: &mut [f64]) {
    let n = eta.len() as f64;
    for ((o, e), yi) in out.iter_mut().zip(eta).zip(y) {
        *o = -yi * sigmoid(-yi * e) / n;
    }
}

/// Optimal intercept of the model with no features: `ln(n₊ / n₋)`.
pub fn intercept_only(y: &[f64]) -> f64 {
    let pos = y.iter().filter(|&&v| v > 0.0).count() as f64;
    let neg = y.len() as f64 - pos;
    libm::log(pos / neg)
}

/// Gradient of the mean loss with respect to every column, at `η = b`.
pub fn null_gradient(x: &Matrix, y: &[f64]) -> Vec<f64> {
    let eta = alloc::vec![intercept_only(y); y.len()];
    let mut d = alloc::vec![0.0; y.len()];
    loss_derivative(&eta, y, &mut d);
    x.tr_mul_vec(&d)
}

pub(crate) fn check_problem(x: &Matrix, y: &[f64], lambda: f64) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::Shape(alloc::format!(
            "{} rows but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if let Some(v) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidLabel(alloc::format!("{v}")));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::SingleClass);
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(())
}

/// Convergence settings shared by the penalized solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Maximum KKT residual accepted as converged.
    pub kkt_tol: f64,
    /// A coefficient (or group norm) above this counts as selected.
    pub activation_tol: f64,
    pub max_sweeps: usize,
    /// Keep the objective value after every sweep.
    pub record_objective: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            kkt_tol: 1e-6,
            activation_tol: 1e-8,
            max_sweeps: 10_000,
            record_objective: false,
        }
    }
}
