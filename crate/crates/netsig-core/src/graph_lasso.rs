//! Overlapping group lasso with latent variables.
//!
//! Every group `g` owns a latent vector `v_g` supported on its columns and the
//! model weights are `β = Σ_g v_g`. Penalizing `Σ_g ‖v_g‖₂` selects unions of
//! groups, which for edge groups means connected gene pairs. The problem is a
//! plain (non-overlapping) group lasso on the expanded design where each
//! column is repeated once per group containing it; the expansion is kept
//! virtual. Each outer iteration minimizes a second-order model of the loss
//! by block coordinate descent with a Euclidean-norm proximal step, then
//! backtracks on the true objective.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::{model_axpy, newton_weights, INNER_SWEEPS};
use crate::logistic::{self, check_problem, loss_derivative, SolverOptions};
use crate::matrix::{dot, Matrix};
use crate::model::{GroupStructure, LambdaGrid, SelectionPath};

/// Ridge added to every block curvature bound.
const BLOCK_RIDGE: f64 = 1e-8;
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;

/// Column layout of the latent (expanded) design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandedDesign {
    /// `(group, original column)` for every latent coordinate, group-major.
    pub column_map: Vec<(usize, usize)>,
    /// Block `g` spans latent coordinates `bounds[g]..bounds[g + 1]`.
    pub bounds: Vec<usize>,
    pub original_cols: usize,
}

impl ExpandedDesign {
    pub fn new(groups: &GroupStructure) -> Self {
        let mut column_map = Vec::new();
        let mut bounds = alloc::vec![0];
        for (g, members) in groups.groups().iter().enumerate() {
            column_map.extend(members.iter().map(|&c| (g, c)));
            bounds.push(column_map.len());
        }
        ExpandedDesign {
            column_map,
            bounds,
            original_cols: groups.ncols(),
        }
    }

    pub fn latent_len(&self) -> usize {
        self.column_map.len()
    }

    pub fn group_count(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn block(&self, g: usize) -> core::ops::Range<usize> {
        self.bounds[g]..self.bounds[g + 1]
    }

    /// Builds the n × Σ|g| matrix explicitly.
    pub fn materialize(&self, x: &Matrix) -> Matrix {
        let cols: Vec<usize> = self.column_map.iter().map(|&(_, c)| c).collect();
        x.select_cols(&cols)
    }

    /// `β = Σ_g v_g`, accumulated in latent-coordinate order.
    pub fn fold_back(&self, latent: &[f64]) -> Vec<f64> {
        let mut beta = alloc::vec![0.0; self.original_cols];
        for (&(_, c), &v) in self.column_map.iter().zip(latent) {
            beta[c] += v;
        }
        beta
    }
}

/// Materializes the latent layout for `groups`.
pub fn expand_design(groups: &GroupStructure) -> ExpandedDesign {
    ExpandedDesign::new(groups)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphLassoFit {
    /// Latent vector of each group, in the order of the group's columns.
    pub latent: Vec<Vec<f64>>,
    /// Fold-back `Σ_g v_g` over original columns.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub selected_groups: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

impl GraphLassoFit {
    pub fn group_norms(&self) -> Vec<f64> {
        self.latent.iter().map(|v| norm2(v)).collect()
    }
}

#[inline]
fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|a| a * a).sum())
}

/// Proximal operator of `t‖·‖₂`: shrinks `v` towards zero by `t` in norm.
pub fn group_soft_threshold(v: &[f64], t: f64) -> Vec<f64> {
    let norm = norm2(v);
    if norm <= t {
        alloc::vec![0.0; v.len()]
    } else {
        let scale = 1.0 - t / norm;
        v.iter().map(|a| a * scale).collect()
    }
}

/// Smallest penalty at which every latent vector is zero:
/// the largest block gradient norm at the intercept-only model.
pub fn group_lambda_max(x: &Matrix, y: &[f64], groups: &GroupStructure) -> f64 {
    let grad = logistic::null_gradient(x, y);
    groups
        .groups()
        .iter()
        .map(|members| libm::sqrt(members.iter().map(|&c| grad[c] * grad[c]).sum()))
        .fold(0.0, f64::max)
}

pub fn latent_objective(
    x: &Matrix,
    y: &[f64],
    groups: &GroupStructure,
    latent: &[Vec<f64>],
    intercept: f64,
    lambda: f64,
) -> f64 {
    let design = ExpandedDesign::new(groups);
    let flat: Vec<f64> = latent.iter().flatten().copied().collect();
    let beta = design.fold_back(&flat);
    let mut eta = x.mul_vec(&beta);
    eta.iter_mut().for_each(|e| *e += intercept);
    logistic::mean_loss(&eta, y) + lambda * latent.iter().map(|v| norm2(v)).sum::<f64>()
}

/// Largest block-KKT violation on the expanded design, intercept included.
pub fn block_kkt_residual(
    x: &Matrix,
    y: &[f64],
    groups: &GroupStructure,
    latent: &[Vec<f64>],
    intercept: f64,
    lambda: f64,
) -> f64 {
    let design = ExpandedDesign::new(groups);
    let flat: Vec<f64> = latent.iter().flatten().copied().collect();
    let beta = design.fold_back(&flat);
    let mut eta = x.mul_vec(&beta);
    eta.iter_mut().for_each(|e| *e += intercept);
    let mut d = alloc::vec![0.0; y.len()];
    loss_derivative(&eta, y, &mut d);
    let col_grad = x.tr_mul_vec(&d);
    let mut worst = d.iter().sum::<f64>().abs();
    let mut grad = Vec::new();
    for (members, v) in groups.groups().iter().zip(latent) {
        grad.clear();
        grad.extend(members.iter().map(|&c| col_grad[c]));
        worst = worst.max(block_residual(&grad, v, lambda));
    }
    worst
}

fn block_residual(grad: &[f64], v: &[f64], lambda: f64) -> f64 {
    let nv = norm2(v);
    if nv > 0.0 {
        libm::sqrt(
            grad.iter()
                .zip(v)
                .map(|(g, a)| {
                    let r = g + lambda * a / nv;
                    r * r
                })
                .sum(),
        )
    } else {
        (norm2(grad) - lambda).max(0.0)
    }
}

#[inline]
fn weighted_dot(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((p, q), r)| p * q * r).sum()
}

/// Upper bound on the largest eigenvalue of `X_gᵀ W X_g`: exact for one or
/// two columns, Gershgorin beyond.
fn gram_bound(x: &Matrix, members: &[usize], w: &[f64]) -> f64 {
    match members {
        [a] => weighted_dot(x.col(*a), x.col(*a), w),
        [a, b] => {
            let (ca, cb) = (x.col(*a), x.col(*b));
            let paa = weighted_dot(ca, ca, w);
            let pbb = weighted_dot(cb, cb, w);
            let pab = weighted_dot(ca, cb, w);
            let half = 0.5 * (paa - pbb);
            0.5 * (paa + pbb) + libm::sqrt(half * half + pab * pab)
        }
        _ => members
            .iter()
            .map(|&a| {
                members
                    .iter()
                    .map(|&b| weighted_dot(x.col(a), x.col(b), w).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max),
    }
}

fn penalty(design: &ExpandedDesign, latent: &[f64]) -> f64 {
    (0..design.group_count())
        .map(|g| norm2(&latent[design.block(g)]))
        .sum()
}

fn exact_residual(
    x: &Matrix,
    design: &ExpandedDesign,
    d: &[f64],
    latent: &[f64],
    lambda: f64,
) -> f64 {
    let col_grad = x.tr_mul_vec(d);
    let mut worst = d.iter().sum::<f64>().abs();
    let mut grad = Vec::new();
    for g in 0..design.group_count() {
        let range = design.block(g);
        grad.clear();
        grad.extend(range.clone().map(|k| col_grad[design.column_map[k].1]));
        worst = worst.max(block_residual(&grad, &latent[range], lambda));
    }
    worst
}

/// Block coordinate descent on the quadratic model around the current fit.
struct Model<'a> {
    x: &'a Matrix,
    design: &'a ExpandedDesign,
    lambda: f64,
    w: &'a [f64],
    r: Vec<f64>,
    delta: Vec<f64>,
    curvature: Vec<f64>,
    latent: Vec<f64>,
    intercept: f64,
    scratch: Vec<f64>,
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

    fn update(&mut self, g: usize) -> f64 {
        let range = self.design.block(g);
        self.scratch.clear();
        for k in range.clone() {
            let c = self.design.column_map[k].1;
            self.scratch.push(dot(self.x.col(c), &self.r));
        }
        let v = &self.latent[range.clone()];
        let residual = block_residual(&self.scratch, v, self.lambda);
        let curv = self.curvature[g];
        // z = v - grad / L, stored in scratch
        for (s, a) in self.scratch.iter_mut().zip(v) {
            *s = a - *s / curv;
        }
        let nz = norm2(&self.scratch);
        let t = self.lambda / curv;
        let scale = if nz <= t { 0.0 } else { 1.0 - t / nz };
        for (i, k) in range.enumerate() {
            let next = self.scratch[i] * scale;
            let step = next - self.latent[k];
            if step != 0.0 {
                let c = self.design.column_map[k].1;
                model_axpy(step, self.x.col(c), self.w, &mut self.r, &mut self.delta);
                self.latent[k] = next;
            }
        }
        residual
    }

    fn block_norm(&self, g: usize) -> f64 {
        norm2(&self.latent[self.design.block(g)])
    }

    fn solve(&mut self, tol: f64, budget: usize) -> usize {
        let ngroups = self.design.group_count();
        let mut sweeps = 0;
        while sweeps < budget {
            let mut worst = self.update_intercept();
            for g in 0..ngroups {
                worst = worst.max(self.update(g));
            }
            sweeps += 1;
            if worst <= tol {
                break;
            }
            let active: Vec<usize> = (0..ngroups).filter(|&g| self.block_norm(g) > 0.0).collect();
            while sweeps < budget {
                let mut worst = self.update_intercept();
                for &g in &active {
                    worst = worst.max(self.update(g));
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

/// Fits the latent overlapping group lasso at one penalty value.
pub fn fit_graph_lasso(
    x: &Matrix,
    y: &[f64],
    groups: &GroupStructure,
    lambda: f64,
    warm_start: Option<&GraphLassoFit>,
    opts: &SolverOptions,
) -> Result<GraphLassoFit> {
    check_problem(x, y, lambda)?;
    if groups.ncols() != x.ncols() {
        return Err(Error::Shape(alloc::format!(
            "groups index {} columns but the matrix has {}",
            groups.ncols(),
            x.ncols()
        )));
    }
    let design = ExpandedDesign::new(groups);
    fit_expanded(x, y, &design, lambda, warm_start, opts)
}

fn fit_expanded(
    x: &Matrix,
    y: &[f64],
    design: &ExpandedDesign,
    lambda: f64,
    warm_start: Option<&GraphLassoFit>,
    opts: &SolverOptions,
) -> Result<GraphLassoFit> {
    let n = x.nrows();
    let ngroups = design.group_count();
    let (mut latent, mut intercept) = match warm_start {
        Some(w) if w.latent.len() == ngroups => (
            w.latent.iter().flatten().copied().collect::<Vec<f64>>(),
            w.intercept,
        ),
        _ => (
            alloc::vec![0.0; design.latent_len()],
            logistic::intercept_only(y),
        ),
    };
    let members: Vec<Vec<usize>> = (0..ngroups)
        .map(|g| design.block(g).map(|k| design.column_map[k].1).collect())
        .collect();
    let predictor = |latent: &[f64], intercept: f64| {
        let mut eta = x.mul_vec(&design.fold_back(latent));
        eta.iter_mut().for_each(|e| *e += intercept);
        eta
    };
    let tol = opts.kkt_tol;
    let mut d = alloc::vec![0.0; n];
    let mut hw = alloc::vec![0.0; n];
    let mut sweeps = 0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut eta = predictor(&latent, intercept);
    let mut loss = logistic::mean_loss(&eta, y);
    loop {
        newton_weights(&eta, y, &mut d, &mut hw);
        if exact_residual(x, design, &d, &latent, lambda) <= tol {
            converged = true;
            break;
        }
        if sweeps >= opts.max_sweeps {
            break;
        }
        let curvature = members
            .iter()
            .map(|m| gram_bound(x, m, &hw) + BLOCK_RIDGE)
            .collect();
        let mut model = Model {
            x,
            design,
            lambda,
            w: &hw,
            r: d.clone(),
            delta: alloc::vec![0.0; n],
            curvature,
            latent: latent.clone(),
            intercept,
            scratch: Vec::new(),
        };
        let budget = INNER_SWEEPS.min(opts.max_sweeps - sweeps);
        sweeps += model.solve(0.5 * tol, budget);

        let pen = penalty(design, &latent);
        let start = loss + lambda * pen;
        let decrease = dot(&d, &model.delta) + lambda * (penalty(design, &model.latent) - pen);
        if decrease >= 0.0 {
            break;
        }
        let mut t = 1.0;
        let mut trial = alloc::vec![0.0; n];
        let accepted = loop {
            let cand: Vec<f64> = latent
                .iter()
                .zip(&model.latent)
                .map(|(a, b)| a + t * (b - a))
                .collect();
            for i in 0..n {
                trial[i] = eta[i] + t * model.delta[i];
            }
            let objective = logistic::mean_loss(&trial, y) + lambda * penalty(design, &cand);
            if objective <= start + ARMIJO * t * decrease {
                latent = cand;
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
        eta = predictor(&latent, intercept);
        loss = logistic::mean_loss(&eta, y);
        if opts.record_objective {
            trace.push(loss + lambda * penalty(design, &latent));
        }
    }
    let latent_groups: Vec<Vec<f64>> = (0..ngroups)
        .map(|g| latent[design.block(g)].to_vec())
        .collect();
    let selected_groups = (0..ngroups)
        .filter(|&g| norm2(&latent_groups[g]) > opts.activation_tol)
        .collect();
    Ok(GraphLassoFit {
        weights: design.fold_back(&latent),
        latent: latent_groups,
        intercept,
        lambda,
        selected_groups,
        converged,
        iterations: sweeps,
        objective_trace: trace,
    })
}

/// Regularization path with warm starts; active sets are group indices.
pub fn graph_lasso_path(
    x: &Matrix,
    y: &[f64],
    groups: &GroupStructure,
    grid: &LambdaGrid,
    opts: &SolverOptions,
) -> Result<SelectionPath> {
    check_problem(x, y, grid.values()[0])?;
    if groups.ncols() != x.ncols() {
        return Err(Error::Shape(alloc::format!(
            "groups index {} columns but the matrix has {}",
            groups.ncols(),
            x.ncols()
        )));
    }
    let design = ExpandedDesign::new(groups);
    let mut norms = Vec::with_capacity(grid.len());
    let mut converged = Vec::with_capacity(grid.len());
    let mut prev: Option<GraphLassoFit> = None;
    for &lambda in grid.values() {
        let fit = fit_expanded(x, y, &design, lambda, prev.as_ref(), opts)?;
        norms.push(fit.group_norms());
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
    use crate::matrix::axpy;
    use alloc::vec;

    #[test]
    fn prox_of_euclidean_norm() {
        assert_eq!(group_soft_threshold(&[3.0, 4.0], 2.5), vec![1.5, 2.0]);
        assert_eq!(group_soft_threshold(&[3.0, 4.0], 5.0), vec![0.0, 0.0]);
    }

    #[test]
    fn expansion_counts() {
        let chain = GroupStructure::new(vec![vec![0, 1], vec![1, 2]], 3).unwrap();
        let d = expand_design(&chain);
        assert_eq!(d.latent_len(), 4);
        assert_eq!(d.column_map, vec![(0, 0), (0, 1), (1, 1), (1, 2)]);

        let part = GroupStructure::new(vec![vec![2], vec![0, 1]], 3).unwrap();
        let d = expand_design(&part);
        let mut cols: Vec<usize> = d.column_map.iter().map(|&(_, c)| c).collect();
        assert_eq!(cols, vec![2, 0, 1]);
        cols.sort_unstable();
        assert_eq!(cols, vec![0, 1, 2]);

        let tri = GroupStructure::new(vec![vec![0, 1], vec![1, 2], vec![0, 2]], 3).unwrap();
        let d = expand_design(&tri);
        assert_eq!(d.latent_len(), 6);
        for c in 0..3 {
            assert_eq!(d.column_map.iter().filter(|&&(_, k)| k == c).count(), 2);
        }
    }

    #[test]
    fn materialized_design_repeats_shared_columns() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let chain = GroupStructure::new(vec![vec![0, 1], vec![1, 2]], 3).unwrap();
        let big = expand_design(&chain).materialize(&x);
        assert_eq!(big.ncols(), 4);
        assert_eq!(big.col(1), big.col(2));
    }

    #[test]
    fn gram_bound_dominates_quadratic_form() {
        let x = Matrix::from_rows(&[
            vec![1.0, 2.0, -1.0],
            vec![0.5, -1.0, 0.3],
            vec![2.0, 0.1, 0.7],
        ])
        .unwrap();
        for members in [vec![0, 1], vec![0, 1, 2]] {
            let bound = gram_bound(&x, &members, &[1.0; 3]);
            for t in 0..32 {
                let a = libm::cos(t as f64 * 0.7);
                let b = libm::sin(t as f64 * 0.7);
                let c = libm::cos(t as f64 * 1.3);
                let w = [a, b, c];
                let mut xv = vec![0.0; 3];
                for (k, &m) in members.iter().enumerate() {
                    axpy(w[k], x.col(m), &mut xv);
                }
                let wn: f64 = members.iter().enumerate().map(|(k, _)| w[k] * w[k]).sum();
                assert!(dot(&xv, &xv) <= bound * wn + 1e-12);
            }
        }
    }
}
