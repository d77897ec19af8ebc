//! L1-penalized logistic regression.
//!
//! Proximal Newton: each outer iteration replaces the mean logistic loss by
//! its second-order expansion at the current fit, minimizes that model plus
//! the L1 term by cyclic coordinate descent, then backtracks along the
//! resulting direction until the true objective decreases enough. A fit is
//! converged once the full KKT residual drops below `kkt_tol`.

use alloc::vec::Vec;

use crate::error::Result;
use crate::logistic::{self, check_problem, loss_derivative, SolverOptions};
use crate::matrix::{dot, Matrix};
use crate::model::{LambdaGrid, SelectionPath};

/// Lower bound on the per-sample Hessian weight `σ(1 - σ)`.
pub(crate) const MIN_WEIGHT: f64 = 1e-5;
/// Most coordinate sweeps spent on one quadratic model.
pub(crate) const INNER_SWEEPS: usize = 500;
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub converged: bool,
    /// Number of coordinate sweeps performed.
    pub iterations: usize,
    /// Objective after each accepted outer step, when requested.
    pub objective_trace: Vec<f64>,
}

impl LassoFit {
    pub fn support(&self, activation_tol: f64) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&j| self.weights[j].abs() > activation_tol)
            .collect()
    }
}

/// Smallest penalty at which every weight is zero.
pub fn lambda_max(x: &Matrix, y: &[f64]) -> f64 {
    logistic::null_gradient(x, y)
        .into_iter()
        .fold(0.0, |m, g| m.max(g.abs()))
}

pub fn l1_objective(x: &Matrix, y: &[f64], weights: &[f64], intercept: f64, lambda: f64) -> f64 {
    let eta = linear_predictor(x, weights, intercept);
    logistic::mean_loss(&eta, y) + lambda * l1(weights)
}

/// Largest violation of the optimality conditions, intercept included.
pub fn kkt_residual(x: &Matrix, y: &[f64], weights: &[f64], intercept: f64, lambda: f64) -> f64 {
    let eta = linear_predictor(x, weights, intercept);
    let mut d = alloc::vec![0.0; y.len()];
    loss_derivative(&eta, y, &mut d);
    residual_from_derivative(x, &d, weights, lambda)
}

fn residual_from_derivative(x: &Matrix, d: &[f64], weights: &[f64], lambda: f64) -> f64 {
    let mut worst = d.iter().sum::<f64>().abs();
    for (j, &w) in weights.iter().enumerate() {
        worst = worst.max(coordinate_residual(dot(x.col(j), d), w, lambda));
    }
    worst
}

fn linear_predictor(x: &Matrix, weights: &[f64], intercept: f64) -> Vec<f64> {
    let mut eta = x.mul_vec(weights);
    eta.iter_mut().for_each(|e| *e += intercept);
    eta
}

fn l1(w: &[f64]) -> f64 {
    w.iter().map(|a| a.abs()).sum()
}

#[inline]
fn coordinate_residual(grad: f64, w: f64, lambda: f64) -> f64 {
    if w != 0.0 {
        (grad + lambda * w.signum()).abs()
    } else {
        (grad.abs() - lambda).max(0.0)
    }
}

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Loss derivative `d` and Hessian weights `w` (both scaled by `1/n`) at `eta`.
pub(crate) fn newton_weights(eta: &[f64], y: &[f64], d: &mut [f64], w: &mut [f64]) {
    let n = eta.len() as f64;
    for i in 0..eta.len() {
        let q = logistic::sigmoid(-y[i] * eta[i]);
        d[i] = -y[i] * q / n;
        w[i] = (q * (1.0 - q)).max(MIN_WEIGHT) / n;
    }
}

/// `r += step · w ∘ col` and `delta += step · col`.
#[inline]
pub(crate) fn model_axpy(step: f64, col: &[f64], w: &[f64], r: &mut [f64], delta: &mut [f64]) {
    for i in 0..col.len() {
        delta[i] += step * col[i];
        r[i] += step * w[i] * col[i];
    }
}

/// Coordinate descent on the quadratic model around the current fit.
struct Model<'a> {
    x: &'a Matrix,
    lambda: f64,
    w: &'a [f64],
    /// Model gradient with respect to η: `d + w ∘ Δη`.
    r: Vec<f64>,
    delta: Vec<f64>,
    curvature: Vec<f64>,
    weights: Vec<f64>,
    intercept: f64,
}

impl Model<'_> {
    fn update_intercept(&mut self) -> f64 {
        let grad: f64 = self.r.iter().sum();
        let h: f64 = self.w.iter().sum();
        let step = -grad / h;
        if step != 0.0 {
            self.intercept += step;
            for i in 0..self.r.len() {
                self.delta[i] += step;
                self.r[i] += step * self.w[i];
            }
        }
        grad.abs()
    }

    fn update(&mut self, j: usize) -> f64 {
        let col = self.x.col(j);
        let grad = dot(col, &self.r);
        let b = self.weights[j];
        let residual = coordinate_residual(grad, b, self.lambda);
        let h = self.curvature[j];
        if h <= 0.0 {
            return 0.0;
        }
        let next = soft_threshold(b - grad / h, self.lambda / h);
        if next != b {
            model_axpy(next - b, col, self.w, &mut self.r, &mut self.delta);
            self.weights[j] = next;
        }
        residual
    }

    /// Full sweeps alternate with sweeps over the non-zero set until the
    /// model residual is below `tol`. Returns the sweeps used.
    fn solve(&mut self, tol: f64, budget: usize) -> usize {
        let p = self.weights.len();
        let mut sweeps = 0;
        while sweeps < budget {
            let mut worst = self.update_intercept();
            for j in 0..p {
                worst = worst.max(self.update(j));
            }
            sweeps += 1;
            if worst <= tol {
                break;
            }
            let active: Vec<usize> = (0..p).filter(|&j| self.weights[j] != 0.0).collect();
            while sweeps < budget {
                let mut worst = self.update_intercept();
                for &j in &active {
                    worst = worst.max(self.update(j));
                }
                sweeps += 1;
                if worst <= tol {
                    break;
                }
            }
        }
        sweeps
    }
}

/// Fits the L1-penalized logistic model at one penalty value.
///
/// A warm start only affects the amount of work. Running out of sweeps is
/// not an error: the fit comes back with `converged == false`.
pub fn fit_l1_logistic(
    x: &Matrix,
    y: &[f64],
    lambda: f64,
    warm_start: Option<&LassoFit>,
    opts: &SolverOptions,
) -> Result<LassoFit> {
    check_problem(x, y, lambda)?;
    let n = x.nrows();
    let p = x.ncols();
    let (mut weights, mut intercept) = match warm_start {
        Some(w) if w.weights.len() == p => (w.weights.clone(), w.intercept),
        _ => (alloc::vec![0.0; p], logistic::intercept_only(y)),
    };
    let tol = opts.kkt_tol;
    let mut d = alloc::vec![0.0; n];
    let mut hw = alloc::vec![0.0; n];
    let mut sweeps = 0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut eta = linear_predictor(x, &weights, intercept);
    let mut loss = logistic::mean_loss(&eta, y);
    loop {
        newton_weights(&eta, y, &mut d, &mut hw);
        if residual_from_derivative(x, &d, &weights, lambda) <= tol {
            converged = true;
            break;
        }
        if sweeps >= opts.max_sweeps {
            break;
        }
        let curvature = (0..p)
            .map(|j| x.col(j).iter().zip(&hw).map(|(a, w)| w * a * a).sum())
            .collect();
        let mut model = Model {
            x,
            lambda,
            w: &hw,
            r: d.clone(),
            delta: alloc::vec![0.0; n],
            curvature,
            weights: weights.clone(),
            intercept,
        };
        let budget = INNER_SWEEPS.min(opts.max_sweeps - sweeps);
        sweeps += model.solve(0.5 * tol, budget);

        let start = loss + lambda * l1(&weights);
        let decrease = dot(&d, &model.delta) + lambda * (l1(&model.weights) - l1(&weights));
        if decrease >= 0.0 {
            break;
        }
        let mut t = 1.0;
        let mut trial = alloc::vec![0.0; n];
        let accepted = loop {
            let cand: Vec<f64> = weights
                .iter()
                .zip(&model.weights)
                .map(|(a, b)| a + t * (b - a))
                .collect();
            for i in 0..n {
                trial[i] = eta[i] + t * model.delta[i];
            }
            let trial_loss = logistic::mean_loss(&trial, y);
            if trial_loss + lambda * l1(&cand) <= start + ARMIJO * t * decrease {
                weights = cand;
                intercept += t * (model.intercept - intercept);
                break true;
            }
            t *= 0.5;
            if t < MIN_STEP {
                break false;
            }
        };
        if !accepted {
            break;
        }
        eta = linear_predictor(x, &weights, intercept);
        loss = logistic::mean_loss(&eta, y);
        if opts.record_objective {
            trace.push(loss + lambda * l1(&weights));
        }
    }
    Ok(LassoFit {
        weights,
        intercept,
        lambda,
        converged,
        iterations: sweeps,
        objective_trace: trace,
    })
}

/// Regularization path over `grid` with warm starts. Groups are single genes.
pub fn lasso_path(
    x: &Matrix,
    y: &[f64],
    grid: &LambdaGrid,
    opts: &SolverOptions,
) -> Result<SelectionPath> {
    let mut norms = Vec::with_capacity(grid.len());
    let mut converged = Vec::with_capacity(grid.len());
    let mut prev: Option<LassoFit> = None;
    for &lambda in grid.values() {
        let fit = fit_l1_logistic(x, y, lambda, prev.as_ref(), opts)?;
        norms.push(fit.weights.iter().map(|w| w.abs()).collect());
        converged.push(fit.converged);
        prev = Some(fit);
    }
    Ok(SelectionPath::from_norms(
        grid.clone(),
        &norms,
        converged,
        opts.activation_tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toy() -> (Matrix, Vec<f64>) {
        let x = Matrix::from_rows(&[
            vec![1.0, 0.2],
            vec![0.5, -1.0],
            vec![-0.3, 0.4],
            vec![-1.2, 0.1],
            vec![0.8, 0.9],
            vec![-0.7, -0.6],
        ])
        .unwrap();
        (x, vec![1.0, 1.0, -1.0, -1.0, 1.0, -1.0])
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    }

    #[test]
    fn converges_and_is_monotone() {
        let (x, y) = toy();
        let opts = SolverOptions {
            record_objective: true,
            ..Default::default()
        };
        let fit = fit_l1_logistic(&x, &y, 0.05, None, &opts).unwrap();
        assert!(fit.converged);
        assert!(kkt_residual(&x, &y, &fit.weights, fit.intercept, 0.05) <= 1e-6);
        for w in fit.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn warm_start_matches_cold_start() {
        let (x, y) = toy();
        let opts = SolverOptions::default();
        let cold = fit_l1_logistic(&x, &y, 0.02, None, &opts).unwrap();
        let prior = fit_l1_logistic(&x, &y, 0.1, None, &opts).unwrap();
        let warm = fit_l1_logistic(&x, &y, 0.02, Some(&prior), &opts).unwrap();
        let a = l1_objective(&x, &y, &cold.weights, cold.intercept, 0.02);
        let b = l1_objective(&x, &y, &warm.weights, warm.intercept, 0.02);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let (x, y) = toy();
        let opts = SolverOptions::default();
        assert!(fit_l1_logistic(&x, &y, 0.0, None, &opts).is_err());
        assert!(fit_l1_logistic(&x, &y[..3], 0.1, None, &opts).is_err());
        assert!(fit_l1_logistic(&x, &[1.0; 6], 0.1, None, &opts).is_err());
    }

    #[test]
    fn sweep_cap_is_reported() {
        let (x, y) = toy();
        let opts = SolverOptions {
            max_sweeps: 1,
            ..Default::default()
        };
        let fit = fit_l1_logistic(&x, &y, 1e-4, None, &opts).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 1);
    }
}
