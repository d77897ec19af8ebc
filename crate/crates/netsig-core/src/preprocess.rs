//! Gene filtering fitted on training rows only: scale every gene, rank genes
//! by their outlier-robust correlation with the label, keep the top `n_g`,
//! then drop genes with no network neighbor among the kept ones.
//!
//! The fitted [`PreprocessModel`] replays the same restriction and the
//! training statistics on held-out rows.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{ExpressionDataset, GeneNetwork};

pub const DEFAULT_N_G: usize = 1500;
pub const DEFAULT_OUTLIER_THRESHOLD: f64 = 1.96;

/// Scaled values with `|x| > threshold` are excluded from the correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct OutlierRule(f64);

impl OutlierRule {
    pub fn new(threshold: f64) -> Result<Self> {
        if threshold.is_finite() && threshold > 0.0 {
            Ok(OutlierRule(threshold))
        } else {
            Err(Error::InvalidArgument(alloc::format!(
                "outlier threshold must be positive, got {threshold}"
            )))
        }
    }

    pub fn threshold(&self) -> f64 {
        self.0
    }
}

impl Default for OutlierRule {
    fn default() -> Self {
        OutlierRule(DEFAULT_OUTLIER_THRESHOLD)
    }
}

impl TryFrom<f64> for OutlierRule {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        OutlierRule::new(v)
    }
}

impl From<OutlierRule> for f64 {
    fn from(r: OutlierRule) -> f64 {
        r.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub n_g: usize,
    pub outlier: OutlierRule,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            n_g: DEFAULT_N_G,
            outlier: OutlierRule::default(),
        }
    }
}

/// Output of [`scale_genes`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledGenes {
    /// Non-constant genes, each with mean 0 and population variance 1.
    pub dataset: ExpressionDataset,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Constant genes removed before scaling.
    pub dropped_constant: Vec<String>,
}

fn mean_sd(col: &[f64]) -> (f64, f64) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

#[inline]
fn standardize(v: f64, mean: f64, sd: f64) -> f64 {
    (v - mean) / sd
}

/// Centers and scales each gene (divisor `n`). Constant genes are dropped
/// and listed in `dropped_constant`.
pub fn scale_genes(dataset: &ExpressionDataset) -> Result<ScaledGenes> {
    let x = dataset.values();
    let mut columns = Vec::new();
    let mut gene_ids = Vec::new();
    let mut means = Vec::new();
    let mut sds = Vec::new();
    let mut dropped_constant = Vec::new();
    for (j, gene) in dataset.gene_ids().iter().enumerate() {
        let col = x.col(j);
        let (mean, sd) = mean_sd(col);
        if sd.is_nan() || sd <= 1e-12 * mean.abs().max(1.0) {
            dropped_constant.push(gene.clone());
            continue;
        }
        columns.push(
            col.iter()
                .map(|&v| standardize(v, mean, sd))
                .collect::<Vec<f64>>(),
        );
        gene_ids.push(gene.clone());
        means.push(mean);
        sds.push(sd);
    }
    let values = Matrix::from_columns(dataset.n_samples(), &columns)?;
    Ok(ScaledGenes {
        dataset: dataset.with_values(gene_ids, values)?,
        means,
        sds,
        dropped_constant,
    })
}

/// Pearson correlation between a scaled gene and the labels, ignoring
/// samples whose value exceeds the outlier threshold in magnitude.
///
/// Returns 0 when fewer than 3 samples survive or either side is constant
/// among the survivors.
pub fn robust_correlation(column: &[f64], labels: &[f64], rule: OutlierRule) -> f64 {
    let keep: Vec<(f64, f64)> = column
        .iter()
        .zip(labels)
        .filter(|(x, _)| x.abs() <= rule.threshold())
        .map(|(&x, &y)| (x, y))
        .collect();
    if keep.len() < 3 {
        return 0.0;
    }
    let n = keep.len() as f64;
    let mx = keep.iter().map(|p| p.0).sum::<f64>() / n;
    let my = keep.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &keep {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0)
}

/// Column indices ranked by |correlation| (ties: lower index first),
/// truncated to `n_g`.
pub fn select_top_correlated(correlations: &[f64], n_g: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..correlations.len()).collect();
    order.sort_by(|&a, &b| {
        correlations[b]
            .abs()
            .total_cmp(&correlations[a].abs())
            .then(a.cmp(&b))
    });
    order.truncate(n_g);
    order
}

/// Keeps the genes with at least one network neighbor inside `genes`,
/// preserving order.
pub fn drop_isolated<S: AsRef<str>>(genes: &[S], network: &GeneNetwork) -> Result<Vec<String>> {
    let mut linked = BTreeSet::new();
    for (a, b) in network.induced_edges(genes) {
        linked.insert(a);
        linked.insert(b);
    }
    if linked.is_empty() {
        return Err(Error::EmptyAfterConnectivityFilter);
    }
    Ok(genes
        .iter()
        .enumerate()
        .filter(|(i, _)| linked.contains(i))
        .map(|(_, g)| String::from(g.as_ref()))
        .collect())
}

/// Training-set statistics and the retained gene list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessModel {
    /// Retained genes, ranked by |correlation|.
    pub kept_gene_ids: Vec<String>,
    /// Training mean of each kept gene.
    pub means: Vec<f64>,
    /// Training standard deviation of each kept gene; all positive.
    pub sds: Vec<f64>,
    pub n_g: usize,
    pub outlier_threshold: f64,
    pub dropped_constant: Vec<String>,
}

impl PreprocessModel {
    /// Restricts `dataset` to the kept genes and scales them with the
    /// training statistics.
    pub fn apply(&self, dataset: &ExpressionDataset) -> Result<ExpressionDataset> {
        let index = dataset.gene_index();
        let mut columns = Vec::with_capacity(self.kept_gene_ids.len());
        for ((gene, &mean), &sd) in self.kept_gene_ids.iter().zip(&self.means).zip(&self.sds) {
            let &j = index
                .get(gene.as_str())
                .ok_or_else(|| Error::MissingGene(gene.clone()))?;
            columns.push(
                dataset
                    .values()
                    .col(j)
                    .iter()
                    .map(|&v| standardize(v, mean, sd))
                    .collect::<Vec<f64>>(),
            );
        }
        let values = Matrix::from_columns(dataset.n_samples(), &columns)?;
        dataset.with_values(self.kept_gene_ids.clone(), values)
    }
}

/// Runs the full filter on `train`. Without a network the connectivity step
/// is skipped.
///
/// Returns the fitted model and the processed training data, which equals
/// `model.apply(train)`.
pub fn fit_preprocess(
    train: &ExpressionDataset,
    network: Option<&GeneNetwork>,
    config: &PreprocessConfig,
) -> Result<(PreprocessModel, ExpressionDataset)> {
    if config.n_g == 0 {
        return Err(Error::InvalidArgument("n_g must be at least 1".into()));
    }
    let scaled = scale_genes(train)?;
    let y = train.response();
    let x = scaled.dataset.values();
    let corrs: Vec<f64> = (0..x.ncols())
        .map(|j| robust_correlation(x.col(j), &y, config.outlier))
        .collect();
    let top = select_top_correlated(&corrs, config.n_g);
    let top_ids: Vec<&str> = top
        .iter()
        .map(|&j| scaled.dataset.gene_ids()[j].as_str())
        .collect();
    let kept: Vec<usize> = match network {
        Some(net) => {
            let survivors: BTreeSet<String> = drop_isolated(&top_ids, net)?.into_iter().collect();
            top.iter()
                .copied()
                .filter(|&j| survivors.contains(&scaled.dataset.gene_ids()[j]))
                .collect()
        }
        None => top,
    };
    if kept.is_empty() {
        return Err(Error::InvalidArgument(
            "no genes left after preprocessing".into(),
        ));
    }
    let model = PreprocessModel {
        kept_gene_ids: kept
            .iter()
            .map(|&j| scaled.dataset.gene_ids()[j].clone())
            .collect(),
        means: kept.iter().map(|&j| scaled.means[j]).collect(),
        sds: kept.iter().map(|&j| scaled.sds[j]).collect(),
        n_g: config.n_g,
        outlier_threshold: config.outlier.threshold(),
        dropped_constant: scaled.dropped_constant.clone(),
    };
    let processed = scaled.dataset.subset_genes(&kept);
    Ok((model, processed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| alloc::format!("{prefix}{i}")).collect()
    }

    fn dataset(rows: &[Vec<f64>], labels: &[i8]) -> ExpressionDataset {
        let p = rows[0].len();
        ExpressionDataset::new(
            ids("s", rows.len()),
            ids("g", p),
            Matrix::from_rows(rows).unwrap(),
            labels.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn scaling_analytic_column() {
        let d = dataset(
            &[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]],
            &[-1, 1, 1],
        );
        let s = scale_genes(&d).unwrap();
        assert_eq!(s.dropped_constant, vec!["g1".to_string()]);
        assert_eq!(s.dataset.n_genes(), 1);
        let col = s.dataset.values().col(0);
        let expect = [-1.224_744_871, 0.0, 1.224_744_871];
        for (a, b) in col.iter().zip(expect) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn scaling_is_idempotent() {
        let d = dataset(
            &[vec![0.3], vec![-1.7], vec![2.2], vec![0.9], vec![-0.4]],
            &[-1, 1, 1, -1, 1],
        );
        let once = scale_genes(&d).unwrap().dataset;
        let twice = scale_genes(&once).unwrap().dataset;
        for (a, b) in once.values().col(0).iter().zip(twice.values().col(0)) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn outliers_are_excluded() {
        let y = [-1.0, 1.0, 1.0, -1.0, 1.0];
        let with = robust_correlation(&[-1.0, 1.0, 0.5, -0.5, 2.5], &y, OutlierRule::default());
        let without = robust_correlation(&[-1.0, 1.0, 0.5, -0.5], &y[..4], OutlierRule::default());
        assert_eq!(with, without);
    }

    #[test]
    fn degenerate_correlations_are_zero() {
        let rule = OutlierRule::default();
        // survivors share one label
        assert_eq!(
            robust_correlation(&[0.1, 0.2, 0.3, 3.0], &[1.0, 1.0, 1.0, -1.0], rule),
            0.0
        );
        // fewer than three survivors
        assert_eq!(
            robust_correlation(&[0.1, 0.2, 3.0], &[1.0, -1.0, 1.0], rule),
            0.0
        );
        // constant expression among survivors
        assert_eq!(
            robust_correlation(&[0.5, 0.5, 0.5], &[1.0, -1.0, 1.0], rule),
            0.0
        );
    }

    #[test]
    fn ranking_by_magnitude() {
        assert_eq!(select_top_correlated(&[0.9, -0.95, 0.1], 2), vec![1, 0]);
        assert_eq!(select_top_correlated(&[0.9, -0.95, 0.1], 10), vec![1, 0, 2]);
        assert_eq!(select_top_correlated(&[0.5, -0.5, 0.2], 2), vec![0, 1]);
    }

    #[test]
    fn isolated_genes_dropped() {
        let net = GeneNetwork::from_edges([("A", "B")]).unwrap();
        assert_eq!(
            drop_isolated(&["A", "B", "C"], &net).unwrap(),
            vec!["A", "B"]
        );
        let net = GeneNetwork::from_edges([("A", "C")]).unwrap();
        let err = drop_isolated(&["A", "B"], &net).unwrap_err();
        assert!(err.to_string().contains("empty after connectivity filter"));
        let tri = GeneNetwork::from_edges([("A", "B"), ("B", "C"), ("A", "C")]).unwrap();
        assert_eq!(
            drop_isolated(&["A", "B", "C"], &tri).unwrap(),
            vec!["A", "B", "C"]
        );
    }

    #[test]
    fn apply_reproduces_training_output() {
        let d = dataset(
            &[
                vec![1.0, 0.0, 3.0],
                vec![2.0, 1.0, 1.0],
                vec![0.5, 3.0, 2.0],
                vec![4.0, 2.0, 0.0],
            ],
            &[-1, 1, -1, 1],
        );
        let net = GeneNetwork::from_edges([("g0", "g1"), ("g1", "g2")]).unwrap();
        let config = PreprocessConfig {
            n_g: 3,
            ..Default::default()
        };
        let (model, processed) = fit_preprocess(&d, Some(&net), &config).unwrap();
        assert_eq!(model.apply(&d).unwrap(), processed);

        let mean_row: Vec<f64> = (0..3)
            .map(|j| d.values().col(j).iter().sum::<f64>() / 4.0)
            .collect();
        let probe = dataset(&[mean_row.clone(), mean_row], &[-1, 1]);
        let centered = model.apply(&probe).unwrap();
        assert!(centered.values().row(0).iter().all(|v| v.abs() < 1e-12));

        let missing = d.subset_genes(&[0, 1]);
        assert!(matches!(model.apply(&missing), Err(Error::MissingGene(_))));
    }
}
