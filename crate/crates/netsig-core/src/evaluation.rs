//! Cross-validated benchmark of signature selectors.
//!
//! Every fold preprocesses its own training rows, ranks units with the chosen
//! method, truncates the ranking to each requested signature size, refits an
//! unpenalized logistic model on the training rows and scores balanced
//! accuracy on the held-out rows. Signatures are also scored for network
//! connectivity and for how often each gene recurs across folds.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::graph_lasso::group_lambda_max;
use crate::lasso::lambda_max;
use crate::logistic::{log1p_exp, sigmoid, SolverOptions};
use crate::matrix::Matrix;
use crate::model::{
    edges_to_groups, ExpressionDataset, GeneNetwork, GroupStructure, Label, LambdaGrid,
    LogisticModel,
};
use crate::preprocess::{fit_preprocess, PreprocessConfig};
use crate::seed::{derive_seed, rng_for, Stream};
use crate::stability::{
    run_stability_selection, score_profile, signature_from_ranking, ScoreRule, Selector,
    StabilityConfig,
};

/// Sample indices of each fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Indices outside fold `f`, sorted.
    pub fn train(&self, f: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, fold)| fold.iter().copied())
            .collect();
        idx.sort_unstable();
        idx
    }
}

/// Shuffles each class and deals it round-robin over the folds, continuing
/// the deal where the previous class stopped so fold sizes stay balanced.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "need at least 2 folds, got {k}"
        )));
    }
    let mut rng = rng_for(seed, Stream::Folds, 0);
    let mut folds = alloc::vec![Vec::new(); k];
    let mut next = 0;
    for class in [-1, 1] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                size: members.len(),
                k,
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(FoldPlan { folds })
}

const REFIT_MAX_ITER: usize = 100;
const REFIT_GRAD_TOL: f64 = 1e-9;

fn refit_loss(x: &Matrix, y: &[f64], theta: &[f64]) -> f64 {
    let eta = x.mul_vec(&theta[1..]);
    eta.iter()
        .zip(y)
        .map(|(e, yi)| log1p_exp(-yi * (e + theta[0])))
        .sum::<f64>()
        / y.len() as f64
}

/// Unpenalized maximum-likelihood logistic regression by damped Newton steps.
///
/// On perfectly separated data the likelihood has no maximizer; the fit stops
/// at the iteration cap (or once the gradient vanishes numerically) and the
/// model is flagged `separable`.
pub fn refit_logistic(x: &Matrix, y: &[f64], gene_ids: Vec<String>) -> Result<LogisticModel> {
    let m = x.ncols();
    if m == 0 {
        return Err(Error::EmptySignature);
    }
    if gene_ids.len() != m || x.nrows() != y.len() {
        return Err(Error::Shape(alloc::format!(
            "refit on {}x{} with {} genes and {} labels",
            x.nrows(),
            m,
            gene_ids.len(),
            y.len()
        )));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::SingleClass);
    }
    let n = x.nrows();
    let nf = n as f64;
    let dim = m + 1;
    let mut theta = alloc::vec![0.0; dim];
    theta[0] = crate::logistic::intercept_only(y);
    let mut converged = false;
    let mut iterations = 0;
    let mut loss = refit_loss(x, y, &theta);
    while iterations < REFIT_MAX_ITER {
        let eta = x.mul_vec(&theta[1..]);
        let mut grad = DVector::<f64>::zeros(dim);
        let mut hess = DMatrix::<f64>::zeros(dim, dim);
        let mut z = alloc::vec![0.0; dim];
        for i in 0..n {
            let f = eta[i] + theta[0];
            let p = sigmoid(f);
            let t = if y[i] > 0.0 { 1.0 } else { 0.0 };
            let w = p * (1.0 - p);
            z[0] = 1.0;
            for j in 0..m {
                z[j + 1] = x.get(i, j);
            }
            for a in 0..dim {
                grad[a] += (p - t) * z[a] / nf;
                let wa = w * z[a] / nf;
                for b in a..dim {
                    hess[(a, b)] += wa * z[b];
                }
            }
        }
        for a in 0..dim {
            for b in 0..a {
                hess[(a, b)] = hess[(b, a)];
            }
        }
        if grad.norm() <= REFIT_GRAD_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let mut ridge = 1e-10;
        let step = loop {
            let mut h = hess.clone();
            for a in 0..dim {
                h[(a, a)] += ridge;
            }
            if let Some(chol) = h.cholesky() {
                break chol.solve(&grad);
            }
            ridge *= 100.0;
            if ridge > 1e6 {
                break grad.clone();
            }
        };
        let slope = grad.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(a, s)| a - t * s)
                .collect();
            let trial_loss = refit_loss(x, y, &trial);
            if trial_loss <= loss - 1e-4 * t * slope {
                theta = trial;
                loss = trial_loss;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let eta = x.mul_vec(&theta[1..]);
    let separable = eta.iter().zip(y).all(|(e, yi)| yi * (e + theta[0]) > 0.0);
    Ok(LogisticModel {
        gene_ids,
        weights: theta[1..].to_vec(),
        intercept: theta[0],
        iterations,
        converged,
        separable,
    })
}

/// `(sensitivity + specificity) / 2`, with `+1` the positive class.
pub fn balanced_accuracy(predictions: &[Label], labels: &[Label]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::Shape(alloc::format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let (mut tp, mut fn_, mut tn, mut fp) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (l > 0, p > 0) {
            (true, true) => tp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
            (false, true) => fp += 1,
        }
    }
    if tp + fn_ == 0 || tn + fp == 0 {
        return Err(Error::SingleClass);
    }
    let sensitivity = tp as f64 / (tp + fn_) as f64;
    let specificity = tn as f64 / (tn + fp) as f64;
    Ok((sensitivity + specificity) / 2.0)
}

/// Size of the largest connected component of the network restricted to
/// `genes`, divided by the number of genes.
pub fn connectivity_score<S: AsRef<str>>(genes: &[S], network: &GeneNetwork) -> Result<f64> {
    let distinct: BTreeSet<&str> = genes.iter().map(AsRef::as_ref).collect();
    if distinct.is_empty() {
        return Err(Error::EmptySignature);
    }
    let genes: Vec<&str> = distinct.into_iter().collect();
    let mut uf = UnionFind::<usize>::new(genes.len());
    for (a, b) in network.induced_edges(&genes) {
        uf.union(a, b);
    }
    let mut sizes = BTreeMap::new();
    for label in uf.into_labeling() {
        *sizes.entry(label).or_insert(0usize) += 1;
    }
    let largest = sizes.values().copied().max().unwrap_or(0);
    Ok(largest as f64 / genes.len() as f64)
}

/// Entry `c - 1` counts the genes present in exactly `c` of the signatures.
pub fn fold_overlap_histogram<S: AsRef<str>>(signatures: &[Vec<S>]) -> Result<Vec<usize>> {
    if signatures.len() < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "need at least 2 signatures, got {}",
            signatures.len()
        )));
    }
    let mut multiplicity: BTreeMap<&str, usize> = BTreeMap::new();
    for sig in signatures {
        let unique: BTreeSet<&str> = sig.iter().map(AsRef::as_ref).collect();
        for g in unique {
            *multiplicity.entry(g).or_insert(0) += 1;
        }
    }
    let mut hist = alloc::vec![0; signatures.len()];
    for c in multiplicity.values() {
        hist[c - 1] += 1;
    }
    Ok(hist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapPoint {
    pub size: usize,
    pub overlap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapCurve {
    pub points: Vec<OverlapPoint>,
    /// Some requested size exceeded a ranking; that point used the shorter
    /// ranking in full.
    pub truncated: bool,
}

/// `|top-m of first ∩ top-m of second|` for every requested `m`.
pub fn cross_dataset_overlap<S: AsRef<str>, T: AsRef<str>>(
    first: &[S],
    second: &[T],
    sizes: &[usize],
) -> OverlapCurve {
    let mut truncated = false;
    let points = sizes
        .iter()
        .map(|&m| {
            if m > first.len() || m > second.len() {
                truncated = true;
            }
            let a: BTreeSet<&str> = first.iter().take(m).map(AsRef::as_ref).collect();
            let overlap = second
                .iter()
                .take(m)
                .map(AsRef::as_ref)
                .collect::<BTreeSet<&str>>()
                .intersection(&a)
                .count();
            OverlapPoint { size: m, overlap }
        })
        .collect();
    OverlapCurve { points, truncated }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "lasso")]
    Lasso,
    #[serde(rename = "lasso+ss")]
    LassoStability,
    #[serde(rename = "glasso")]
    GraphLasso,
    #[serde(rename = "glasso+ss")]
    GraphLassoStability,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Lasso,
        Method::LassoStability,
        Method::GraphLasso,
        Method::GraphLassoStability,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Lasso => "lasso",
            Method::LassoStability => "lasso+ss",
            Method::GraphLasso => "glasso",
            Method::GraphLassoStability => "glasso+ss",
        }
    }

    pub fn uses_graph(&self) -> bool {
        matches!(self, Method::GraphLasso | Method::GraphLassoStability)
    }

    pub fn uses_stability(&self) -> bool {
        matches!(self, Method::LassoStability | Method::GraphLassoStability)
    }
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(alloc::format!(
                    "unknown method `{s}` (expected lasso, lasso+ss, glasso or glasso+ss)"
                ))
            })
    }
}

/// Shape of the penalty grid: `count` log-spaced values from the training
/// `λ_max` down to `min_ratio · λ_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub count: usize,
    pub min_ratio: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            count: 50,
            min_ratio: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub preprocess: PreprocessConfig,
    pub grid: GridSpec,
    pub ndraw: usize,
    pub stratified: bool,
    pub score_rule: ScoreRule,
    pub sizes: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
    pub solver: SolverOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preprocess: PreprocessConfig::default(),
            grid: GridSpec::default(),
            ndraw: crate::stability::DEFAULT_NDRAW,
            stratified: true,
            score_rule: ScoreRule::Sg,
            sizes: (1..=10).map(|k| 10 * k).collect(),
            folds: 5,
            seed: 0,
            solver: SolverOptions::default(),
        }
    }
}

/// Units ranked by a method on one training set.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitRanking {
    pub groups: GroupStructure,
    /// Gene name of every group column.
    pub gene_ids: Vec<String>,
    /// `(group, score)`, best first.
    pub ranked: Vec<(usize, f64)>,
    /// Whether every solver fit reached its tolerance (plain paths only).
    pub converged: bool,
}

impl UnitRanking {
    /// Genes in order of first appearance along the ranking.
    pub fn gene_order(&self) -> Vec<String> {
        let mut seen = alloc::vec![false; self.gene_ids.len()];
        let mut out = Vec::new();
        for &(g, score) in &self.ranked {
            if score <= 0.0 {
                break;
            }
            for &c in self.groups.group(g) {
                if !seen[c] {
                    seen[c] = true;
                    out.push(self.gene_ids[c].clone());
                }
            }
        }
        out
    }
}

/// Design matrix and unit structure a method selects from.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionProblem {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub groups: GroupStructure,
    /// Gene name of every column of `x`.
    pub gene_ids: Vec<String>,
    pub graph: bool,
}

impl SelectionProblem {
    /// Edge groups over the genes touched by the network for graph methods,
    /// one group per gene otherwise.
    pub fn new(
        train: &ExpressionDataset,
        network: Option<&GeneNetwork>,
        method: Method,
    ) -> Result<Self> {
        let y = train.response();
        if method.uses_graph() {
            let net = network.ok_or_else(|| Error::NetworkRequired(method.to_string()))?;
            let eg = edges_to_groups(net, train.gene_ids())?;
            Ok(SelectionProblem {
                x: train.values().select_cols(&eg.kept_columns),
                y,
                groups: eg.groups,
                gene_ids: eg.kept_gene_ids,
                graph: true,
            })
        } else {
            Ok(SelectionProblem {
                x: train.values().clone(),
                y,
                groups: GroupStructure::singletons(train.n_genes()),
                gene_ids: train.gene_ids().to_vec(),
                graph: false,
            })
        }
    }

    pub fn selector(&self) -> Selector<'_> {
        if self.graph {
            Selector::GraphLasso(&self.groups)
        } else {
            Selector::Lasso
        }
    }

    /// Log-spaced grid from this problem's `λ_max`.
    pub fn grid(&self, spec: &GridSpec) -> Result<LambdaGrid> {
        let top = if self.graph {
            group_lambda_max(&self.x, &self.y, &self.groups)
        } else {
            lambda_max(&self.x, &self.y)
        };
        if top.is_nan() || top <= 0.0 {
            return Err(Error::InvalidArgument(
                "training data carry no signal (lambda_max is zero)".into(),
            ));
        }
        LambdaGrid::log_spaced(top, spec.count, spec.min_ratio)
    }
}

/// Ranks units of a preprocessed training set with `method`.
///
/// `stability_seed` seeds the subsample draws of the stability methods.
pub fn rank_units<E: Executor>(
    train: &ExpressionDataset,
    network: Option<&GeneNetwork>,
    method: Method,
    config: &ExperimentConfig,
    stability_seed: u64,
    exec: &E,
) -> Result<UnitRanking> {
    let problem = SelectionProblem::new(train, network, method)?;
    let grid = problem.grid(&config.grid)?;
    let selector = problem.selector();
    let (ranked, converged) = if method.uses_stability() {
        let ss = StabilityConfig {
            ndraw: config.ndraw,
            seed: stability_seed,
            stratified: config.stratified,
        };
        let profile = run_stability_selection(
            &problem.x,
            &problem.y,
            selector,
            &grid,
            &ss,
            &config.solver,
            exec,
        )?;
        (score_profile(&profile, config.score_rule).ranked(), true)
    } else {
        let path = selector.path(&problem.x, &problem.y, &grid, &config.solver)?;
        (path.ranking(), path.all_converged())
    };
    Ok(UnitRanking {
        groups: problem.groups,
        gene_ids: problem.gene_ids,
        ranked,
        converged,
    })
}

/// Outcome of one signature size on one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeOutcome {
    pub size: usize,
    pub genes: Vec<String>,
    pub balanced_accuracy: f64,
    pub connectivity: Option<f64>,
    /// The refit saw perfectly separated training data.
    pub separable: bool,
    /// The ranking held fewer genes than requested.
    pub incomplete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub kept_genes: usize,
    pub paths_converged: bool,
    /// Full gene ranking learned on the training rows.
    pub gene_ranking: Vec<String>,
    pub sizes: Vec<SizeOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub size: usize,
    pub mean_balanced_accuracy: f64,
    pub sd_balanced_accuracy: f64,
    pub mean_connectivity: Option<f64>,
    /// Entry `c - 1`: genes present in exactly `c` folds.
    pub overlap_histogram: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: Method,
    pub config: ExperimentConfig,
    pub folds: Vec<FoldResult>,
    pub summary: Vec<SizeSummary>,
    pub cross_dataset_overlap: Option<OverlapCurve>,
    pub metadata: BTreeMap<String, String>,
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::EmptySignature);
    }
    Ok(())
}

fn run_fold<E: Executor>(
    dataset: &ExpressionDataset,
    network: Option<&GeneNetwork>,
    method: Method,
    config: &ExperimentConfig,
    plan: &FoldPlan,
    fold: usize,
    exec: &E,
) -> Result<FoldResult> {
    let train = dataset.subset_samples(&plan.train(fold))?;
    let test = dataset.subset_samples(&plan.folds[fold])?;
    let (model, processed) = fit_preprocess(&train, network, &config.preprocess)?;
    let test = model.apply(&test)?;
    let ranking = rank_units(
        &processed,
        network,
        method,
        config,
        derive_seed(config.seed, Stream::Stability, fold as u64),
        exec,
    )?;
    let index = processed.gene_index();
    let y_train = processed.response();
    let mut sizes = Vec::with_capacity(config.sizes.len());
    for &size in &config.sizes {
        let sig =
            signature_from_ranking(&ranking.ranked, &ranking.groups, &ranking.gene_ids, size)?;
        let (balanced, separable) = if sig.genes.is_empty() {
            // no gene ever entered: the refit degenerates to a constant rule
            (0.5, false)
        } else {
            let cols: Vec<usize> = sig.genes.iter().map(|g| index[g.as_str()]).collect();
            let refit = refit_logistic(
                &processed.values().select_cols(&cols),
                &y_train,
                sig.genes.clone(),
            )?;
            let pred = refit.predict(&test.values().select_cols(&cols));
            (balanced_accuracy(&pred, test.labels())?, refit.separable)
        };
        let connectivity = match network {
            Some(net) if !sig.genes.is_empty() => Some(connectivity_score(&sig.genes, net)?),
            _ => None,
        };
        sizes.push(SizeOutcome {
            size,
            genes: sig.genes,
            balanced_accuracy: balanced,
            connectivity,
            separable,
            incomplete: sig.incomplete,
        });
    }
    Ok(FoldResult {
        fold,
        n_train: processed.n_samples(),
        n_test: test.n_samples(),
        kept_genes: processed.n_genes(),
        paths_converged: ranking.converged,
        gene_ranking: ranking.gene_order(),
        sizes,
    })
}

fn summarize(folds: &[FoldResult], sizes: &[usize]) -> Result<Vec<SizeSummary>> {
    let k = folds.len() as f64;
    sizes
        .iter()
        .enumerate()
        .map(|(s, &size)| {
            let accs: Vec<f64> = folds.iter().map(|f| f.sizes[s].balanced_accuracy).collect();
            let mean = accs.iter().sum::<f64>() / k;
            let var =
                accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (k - 1.0).max(1.0);
            let conn: Vec<f64> = folds
                .iter()
                .filter_map(|f| f.sizes[s].connectivity)
                .collect();
            let mean_connectivity = (conn.len() == folds.len() && !conn.is_empty())
                .then(|| conn.iter().sum::<f64>() / conn.len() as f64);
            let genes: Vec<Vec<String>> = folds.iter().map(|f| f.sizes[s].genes.clone()).collect();
            Ok(SizeSummary {
                size,
                mean_balanced_accuracy: mean,
                sd_balanced_accuracy: libm::sqrt(var),
                mean_connectivity,
                overlap_histogram: fold_overlap_histogram(&genes)?,
            })
        })
        .collect()
}

/// Stratified cross-validation of one method over every requested size.
///
/// All methods run with the same `config.seed` share one fold plan.
pub fn run_experiment<E: Executor>(
    dataset: &ExpressionDataset,
    network: Option<&GeneNetwork>,
    method: Method,
    config: &ExperimentConfig,
    exec: &E,
) -> Result<EvaluationReport> {
    validate_sizes(&config.sizes)?;
    if method.uses_graph() && network.is_none() {
        return Err(Error::NetworkRequired(method.to_string()));
    }
    let plan = stratified_kfold(dataset.labels(), config.folds, config.seed)?;
    let results = exec.map(plan.k(), |f| {
        run_fold(dataset, network, method, config, &plan, f, exec).map_err(|e| Error::Fold {
            fold: f,
            source: alloc::boxed::Box::new(e),
        })
    });
    let folds = results.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = summarize(&folds, &config.sizes)?;
    let mut metadata = BTreeMap::new();
    metadata.insert(
        "preprocessing".to_string(),
        "fitted on each training fold; test rows scaled with training statistics".to_string(),
    );
    metadata.insert(
        "signature_ranking".to_string(),
        if method.uses_stability() {
            alloc::format!("stability score ({:?})", config.score_rule)
        } else {
            "order of entry along the penalty path".to_string()
        },
    );
    Ok(EvaluationReport {
        method,
        config: config.clone(),
        folds,
        summary,
        cross_dataset_overlap: None,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn exact_stratification() {
        let labels: Vec<Label> = (0..10).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let plan = stratified_kfold(&labels, 5, 11).unwrap();
        for fold in &plan.folds {
            assert_eq!(fold.len(), 2);
            assert_eq!(fold.iter().filter(|&&i| labels[i] == 1).count(), 1);
        }
        assert_eq!(plan, stratified_kfold(&labels, 5, 11).unwrap());
        let small: Vec<Label> = vec![1, 1, 1, -1, -1, -1, -1, -1, -1];
        assert_eq!(
            stratified_kfold(&small, 5, 0).unwrap_err(),
            Error::ClassTooSmall { size: 3, k: 5 }
        );
    }

    #[test]
    fn balanced_accuracy_cases() {
        assert_eq!(balanced_accuracy(&[1, -1], &[1, -1]).unwrap(), 1.0);
        assert_eq!(balanced_accuracy(&[1, 1, 1], &[1, -1, -1]).unwrap(), 0.5);
        assert_eq!(
            balanced_accuracy(&[1, -1, -1, -1], &[1, 1, -1, -1]).unwrap(),
            0.75
        );
        assert!(balanced_accuracy(&[1, 1], &[1, 1]).is_err());
    }

    #[test]
    fn connectivity_cases() {
        let path = GeneNetwork::from_edges([("A", "B"), ("B", "C"), ("C", "D")]).unwrap();
        assert_eq!(
            connectivity_score(&["A", "B", "C", "D"], &path).unwrap(),
            1.0
        );
        let pairs = GeneNetwork::from_edges([("A", "B"), ("C", "D")]).unwrap();
        assert_eq!(
            connectivity_score(&["A", "B", "C", "D"], &pairs).unwrap(),
            0.5
        );
        assert!((connectivity_score(&["X", "Y", "Z"], &pairs).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(connectivity_score::<&str>(&[], &pairs).is_err());
    }

    #[test]
    fn overlap_histograms() {
        let same: Vec<Vec<String>> = (0..5)
            .map(|_| (0..60).map(|g| alloc::format!("g{g}")).collect())
            .collect();
        assert_eq!(fold_overlap_histogram(&same).unwrap(), vec![0, 0, 0, 0, 60]);
        let disjoint: Vec<Vec<String>> = (0..5)
            .map(|f| (0..60).map(|g| alloc::format!("f{f}g{g}")).collect())
            .collect();
        assert_eq!(
            fold_overlap_histogram(&disjoint).unwrap(),
            vec![300, 0, 0, 0, 0]
        );
        assert_eq!(
            fold_overlap_histogram(&[vec!["A", "B"], vec!["B", "C"]]).unwrap(),
            vec![2, 1]
        );
        assert!(fold_overlap_histogram(&[vec!["A"]]).is_err());
    }

    #[test]
    fn cross_overlap_cases() {
        let a = ["A", "B", "C"];
        let curve = cross_dataset_overlap(&a, &a, &[1, 2, 3]);
        assert_eq!(
            curve.points.iter().map(|p| p.overlap).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
        assert!(!curve.truncated);
        let curve = cross_dataset_overlap(&a, &["X", "Y", "Z"], &[1, 3]);
        assert!(curve.points.iter().all(|p| p.overlap == 0));
        let curve = cross_dataset_overlap(&a, &["A", "Y", "Z"], &[1, 5]);
        assert_eq!(curve.points[0].overlap, 1);
        assert!(curve.truncated);
    }

    #[test]
    fn separable_refit_is_flagged() {
        let x = Matrix::from_rows(&[vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]]).unwrap();
        let y = [-1.0, -1.0, 1.0, 1.0];
        let model = refit_logistic(&x, &y, vec!["g".into()]).unwrap();
        assert!(model.separable);
        assert_eq!(model.predict(&x), vec![-1, -1, 1, 1]);
        assert!(matches!(
            refit_logistic(&Matrix::zeros(4, 0), &y, vec![]),
            Err(Error::EmptySignature)
        ));
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("ridge".parse::<Method>().is_err());
    }
}
