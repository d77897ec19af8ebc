//! Validated data types shared by the preprocessing, solver, stability and
//! evaluation layers.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Class label, always `-1` or `+1` once validated.
pub type Label = i8;

/// Samples × genes expression matrix with binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDataset", into = "RawDataset")]
pub struct ExpressionDataset {
    sample_ids: Vec<String>,
    gene_ids: Vec<String>,
    values: Matrix,
    labels: Vec<Label>,
}

#[derive(Serialize, Deserialize)]
struct RawDataset {
    sample_ids: Vec<String>,
    gene_ids: Vec<String>,
    values: Matrix,
    labels: Vec<Label>,
}

impl TryFrom<RawDataset> for ExpressionDataset {
    type Error = Error;

    fn try_from(raw: RawDataset) -> Result<Self> {
        ExpressionDataset::new(raw.sample_ids, raw.gene_ids, raw.values, raw.labels)
    }
}

impl From<ExpressionDataset> for RawDataset {
    fn from(d: ExpressionDataset) -> Self {
        RawDataset {
            sample_ids: d.sample_ids,
            gene_ids: d.gene_ids,
            values: d.values,
            labels: d.labels,
        }
    }
}

impl ExpressionDataset {
    pub fn new(
        sample_ids: Vec<String>,
        gene_ids: Vec<String>,
        values: Matrix,
        labels: Vec<Label>,
    ) -> Result<Self> {
        if values.nrows() != sample_ids.len() || values.ncols() != gene_ids.len() {
            return Err(Error::Shape(format!(
                "matrix is {}x{} but there are {} samples and {} genes",
                values.nrows(),
                values.ncols(),
                sample_ids.len(),
                gene_ids.len()
            )));
        }
        if labels.len() != sample_ids.len() {
            return Err(Error::Shape(format!(
                "{} labels for {} samples",
                labels.len(),
                sample_ids.len()
            )));
        }
        if let Some((row, col)) = values.first_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        if let Some(dup) = first_duplicate(&gene_ids) {
            return Err(Error::DuplicateGene(dup));
        }
        if let Some(dup) = first_duplicate(&sample_ids) {
            return Err(Error::DuplicateSample(dup));
        }
        if let Some(bad) = labels.iter().find(|&&l| l != 1 && l != -1) {
            return Err(Error::InvalidLabel(bad.to_string()));
        }
        if !(labels.contains(&1) && labels.contains(&-1)) {
            return Err(Error::SingleClass);
        }
        Ok(ExpressionDataset {
            sample_ids,
            gene_ids,
            values,
            labels,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_genes(&self) -> usize {
        self.gene_ids.len()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn gene_ids(&self) -> &[String] {
        &self.gene_ids
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Labels as reals in {-1, +1}, the form every solver consumes.
    pub fn response(&self) -> Vec<f64> {
        self.labels.iter().map(|&l| f64::from(l)).collect()
    }

    pub fn gene_index(&self) -> BTreeMap<&str, usize> {
        self.gene_ids
            .iter()
            .enumerate()
            .map(|(i, g)| (g.as_str(), i))
            .collect()
    }

    /// Restricts to the given rows. Fails if the subset loses a class.
    pub fn subset_samples(&self, rows: &[usize]) -> Result<Self> {
        ExpressionDataset::new(
            rows.iter().map(|&r| self.sample_ids[r].clone()).collect(),
            self.gene_ids.clone(),
            self.values.select_rows(rows),
            rows.iter().map(|&r| self.labels[r]).collect(),
        )
    }

    pub fn subset_genes(&self, cols: &[usize]) -> Self {
        ExpressionDataset {
            sample_ids: self.sample_ids.clone(),
            gene_ids: cols.iter().map(|&c| self.gene_ids[c].clone()).collect(),
            values: self.values.select_cols(cols),
            labels: self.labels.clone(),
        }
    }

    /// Same samples and labels, new gene columns.
    pub fn with_values(&self, gene_ids: Vec<String>, values: Matrix) -> Result<Self> {
        ExpressionDataset::new(
            self.sample_ids.clone(),
            gene_ids,
            values,
            self.labels.clone(),
        )
    }
}

fn first_duplicate(ids: &[String]) -> Option<String> {
    let mut seen = BTreeSet::new();
    ids.iter().find(|id| !seen.insert(id.as_str())).cloned()
}

/// Maps a two-valued raw label column onto {-1, +1}.
///
/// Numeric encodings `-1`/`1`/`+1` keep their sign. Any other pair of
/// distinct strings is ordered lexicographically and the smaller one becomes
/// `-1`.
pub fn canonicalize_labels<S: AsRef<str>>(raw: &[S]) -> Result<Vec<Label>> {
    let distinct: BTreeSet<&str> = raw.iter().map(|s| s.as_ref().trim()).collect();
    let numeric = |s: &str| match s {
        "-1" | "-1.0" => Some(-1),
        "1" | "+1" | "1.0" | "+1.0" => Some(1),
        _ => None,
    };
    if distinct.iter().all(|s| numeric(s).is_some()) {
        let labels: Vec<Label> = raw
            .iter()
            .map(|s| numeric(s.as_ref().trim()).unwrap())
            .collect();
        if !(labels.contains(&1) && labels.contains(&-1)) {
            return Err(Error::SingleClass);
        }
        return Ok(labels);
    }
    match distinct.len() {
        0 | 1 => Err(Error::SingleClass),
        2 => {
            let low = *distinct.iter().next().unwrap();
            Ok(raw
                .iter()
                .map(|s| if s.as_ref().trim() == low { -1 } else { 1 })
                .collect())
        }
        _ => {
            let extra = distinct.iter().nth(2).unwrap();
            Err(Error::InvalidLabel((*extra).to_string()))
        }
    }
}

/// Builds a dataset from raw rows and raw labels.
pub fn validate_dataset<S: AsRef<str>>(
    sample_ids: Vec<String>,
    gene_ids: Vec<String>,
    rows: &[Vec<f64>],
    raw_labels: &[S],
) -> Result<ExpressionDataset> {
    let values = Matrix::from_rows(rows)?;
    if rows.is_empty() {
        return Err(Error::Shape("no samples".into()));
    }
    let labels = canonicalize_labels(raw_labels)?;
    ExpressionDataset::new(sample_ids, gene_ids, values, labels)
}

/// Undirected gene interaction network.
///
/// Edges are stored with their endpoints in lexicographic order, so `A-B`
/// and `B-A` are the same edge.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork", into = "RawNetwork")]
pub struct GeneNetwork {
    nodes: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    nodes: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
}

impl TryFrom<RawNetwork> for GeneNetwork {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        GeneNetwork::new(raw.nodes, raw.edges)
    }
}

impl From<GeneNetwork> for RawNetwork {
    fn from(n: GeneNetwork) -> Self {
        RawNetwork {
            nodes: n.nodes,
            edges: n.edges,
        }
    }
}

impl GeneNetwork {
    pub fn new(nodes: BTreeSet<String>, edges: BTreeSet<(String, String)>) -> Result<Self> {
        let mut net = GeneNetwork {
            nodes,
            edges: BTreeSet::new(),
        };
        for (a, b) in edges {
            if !net.nodes.contains(&a) {
                return Err(Error::UnknownNode(a));
            }
            if !net.nodes.contains(&b) {
                return Err(Error::UnknownNode(b));
            }
            net.insert_edge(a, b)?;
        }
        Ok(net)
    }

    /// Builds a network whose nodes are exactly the edge endpoints.
    /// Duplicate and reversed edges collapse to one.
    pub fn from_edges<I, S>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut net = GeneNetwork::default();
        for (a, b) in edges {
            net.insert_edge(a.into(), b.into())?;
        }
        Ok(net)
    }

    /// Adds an edge, and its endpoints as nodes. Returns whether it was new.
    pub fn insert_edge(&mut self, a: String, b: String) -> Result<bool> {
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.nodes.insert(a.clone());
        self.nodes.insert(b.clone());
        Ok(self.edges.insert((a, b)))
    }

    pub fn add_node(&mut self, node: String) {
        self.nodes.insert(node);
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    pub fn contains_edge(&self, a: &str, b: &str) -> bool {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.edges.contains(&(a.into(), b.into()))
    }

    /// Edges of the subgraph induced by `genes`, as index pairs into `genes`
    /// with the smaller index first, sorted.
    pub fn induced_edges<S: AsRef<str>>(&self, genes: &[S]) -> Vec<(usize, usize)> {
        let index: BTreeMap<&str, usize> = genes
            .iter()
            .enumerate()
            .map(|(i, g)| (g.as_ref(), i))
            .collect();
        let mut out: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter_map(|(a, b)| {
                let ia = *index.get(a.as_str())?;
                let ib = *index.get(b.as_str())?;
                Some((ia.min(ib), ia.max(ib)))
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Ordered list of column-index groups over a dataset with `ncols` columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGroups", into = "RawGroups")]
pub struct GroupStructure {
    groups: Vec<Vec<usize>>,
    ncols: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGroups {
    groups: Vec<Vec<usize>>,
    ncols: usize,
}

impl TryFrom<RawGroups> for GroupStructure {
    type Error = Error;

    fn try_from(raw: RawGroups) -> Result<Self> {
        GroupStructure::new(raw.groups, raw.ncols)
    }
}

impl From<GroupStructure> for RawGroups {
    fn from(g: GroupStructure) -> Self {
        RawGroups {
            groups: g.groups,
            ncols: g.ncols,
        }
    }
}

impl GroupStructure {
    pub fn new(groups: Vec<Vec<usize>>, ncols: usize) -> Result<Self> {
        let mut covered = alloc::vec![false; ncols];
        for (g, members) in groups.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::InvalidGroups(format!("group {g} is empty")));
            }
            let mut seen = BTreeSet::new();
            for &c in members {
                if c >= ncols {
                    return Err(Error::InvalidGroups(format!(
                        "group {g} references column {c} of {ncols}"
                    )));
                }
                if !seen.insert(c) {
                    return Err(Error::InvalidGroups(format!(
                        "group {g} lists column {c} twice"
                    )));
                }
                covered[c] = true;
            }
        }
        if let Some(c) = covered.iter().position(|&hit| !hit) {
            return Err(Error::InvalidGroups(format!("column {c} is in no group")));
        }
        Ok(GroupStructure { groups, ncols })
    }

    /// One group per column, the partition under which the group penalty is
    /// the L1 norm.
    pub fn singletons(ncols: usize) -> Self {
        GroupStructure {
            groups: (0..ncols).map(|c| alloc::vec![c]).collect(),
            ncols,
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, g: usize) -> &[usize] {
        &self.groups[g]
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Whether every column belongs to exactly one group.
    pub fn is_partition(&self) -> bool {
        self.groups.iter().map(Vec::len).sum::<usize>() == self.ncols
    }

    /// Applies a permutation to the group order: group `g` of the result is
    /// group `order[g]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        GroupStructure::new(
            order.iter().map(|&g| self.groups[g].clone()).collect(),
            self.ncols,
        )
    }
}

/// Edge groups over a gene list, plus the genes that no surviving edge covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeGroups {
    /// Genes that remain, in input order. Group indices refer to this list.
    pub kept_gene_ids: Vec<String>,
    /// Positions of `kept_gene_ids` in the input gene list.
    pub kept_columns: Vec<usize>,
    /// Genes not touched by any edge; callers must drop them.
    pub removed: Vec<String>,
    pub groups: GroupStructure,
}

/// Turns every network edge whose endpoints are both among `gene_ids` into a
/// size-2 group.
pub fn edges_to_groups<S: AsRef<str>>(network: &GeneNetwork, gene_ids: &[S]) -> Result<EdgeGroups> {
    let pairs = network.induced_edges(gene_ids);
    if pairs.is_empty() {
        return Err(Error::NoCoveredGenes);
    }
    let mut touched = alloc::vec![false; gene_ids.len()];
    for &(a, b) in &pairs {
        touched[a] = true;
        touched[b] = true;
    }
    let mut remap = alloc::vec![usize::MAX; gene_ids.len()];
    let mut kept_gene_ids = Vec::new();
    let mut kept_columns = Vec::new();
    let mut removed = Vec::new();
    for (i, g) in gene_ids.iter().enumerate() {
        if touched[i] {
            remap[i] = kept_columns.len();
            kept_columns.push(i);
            kept_gene_ids.push(g.as_ref().to_string());
        } else {
            removed.push(g.as_ref().to_string());
        }
    }
    let groups = pairs
        .iter()
        .map(|&(a, b)| alloc::vec![remap[a], remap[b]])
        .collect();
    Ok(EdgeGroups {
        groups: GroupStructure::new(groups, kept_gene_ids.len())?,
        kept_gene_ids,
        kept_columns,
        removed,
    })
}

/// Strictly decreasing list of positive penalty values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for LambdaGrid {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        LambdaGrid::new(values)
    }
}

impl From<LambdaGrid> for Vec<f64> {
    fn from(g: LambdaGrid) -> Self {
        g.values
    }
}

impl LambdaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "value {v} is not a positive real"
            )));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidGrid(
                "values must be strictly decreasing".into(),
            ));
        }
        Ok(LambdaGrid { values })
    }

    /// `count` log-spaced values from `max` down to `min_ratio · max`.
    pub fn log_spaced(max: f64, count: usize, min_ratio: f64) -> Result<Self> {
        if !(max.is_finite() && max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "lambda_max {max} is not positive"
            )));
        }
        if !(min_ratio > 0.0 && min_ratio < 1.0) && count > 1 {
            return Err(Error::InvalidGrid(format!(
                "min_ratio {min_ratio} not in (0,1)"
            )));
        }
        let values = match count {
            0 => Vec::new(),
            1 => alloc::vec![max],
            _ => {
                let step = libm::log(min_ratio) / (count - 1) as f64;
                (0..count)
                    .map(|k| max * libm::exp(step * k as f64))
                    .collect()
            }
        };
        LambdaGrid::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Active sets along a penalty grid, and the order in which groups entered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPath {
    pub grid: LambdaGrid,
    /// Sorted group indices active at each grid point.
    pub active_sets: Vec<Vec<usize>>,
    /// Groups ranked by first grid point of entry.
    pub entry_order: Vec<usize>,
    /// Grid position at which each `entry_order` group first entered.
    pub entry_step: Vec<usize>,
    /// Whether the fit at each grid point met its tolerance.
    pub converged: Vec<bool>,
}

impl SelectionPath {
    /// Assembles a path from per-step group norms.
    ///
    /// A group is active at a step when its norm exceeds `activation_tol`.
    /// Groups entering at the same step are ordered by larger norm first,
    /// then lower index.
    pub fn from_norms(
        grid: LambdaGrid,
        norms: &[Vec<f64>],
        converged: Vec<bool>,
        activation_tol: f64,
    ) -> Self {
        debug_assert_eq!(norms.len(), grid.len());
        let ngroups = norms.first().map_or(0, Vec::len);
        let mut seen = alloc::vec![false; ngroups];
        let mut active_sets = Vec::with_capacity(norms.len());
        let mut entry_order = Vec::new();
        let mut entry_step = Vec::new();
        for (step, row) in norms.iter().enumerate() {
            let active: Vec<usize> = (0..row.len())
                .filter(|&g| row[g] > activation_tol)
                .collect();
            let mut fresh: Vec<usize> = active.iter().copied().filter(|&g| !seen[g]).collect();
            fresh.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            for g in fresh {
                seen[g] = true;
                entry_order.push(g);
                entry_step.push(step);
            }
            active_sets.push(active);
        }
        SelectionPath {
            grid,
            active_sets,
            entry_order,
            entry_step,
            converged,
        }
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    /// Entry ranking with each group scored by the penalty at which it entered.
    pub fn ranking(&self) -> Vec<(usize, f64)> {
        self.entry_order
            .iter()
            .zip(&self.entry_step)
            .map(|(&g, &s)| (g, self.grid.values()[s]))
            .collect()
    }
}

/// A selected unit: a single gene, an edge, or a larger gene set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Gene(String),
    Edge(String, String),
    Set(Vec<String>),
}

impl Unit {
    pub fn from_genes(mut genes: Vec<String>) -> Self {
        match genes.len() {
            1 => Unit::Gene(genes.pop().unwrap()),
            2 => {
                let b = genes.pop().unwrap();
                let a = genes.pop().unwrap();
                Unit::Edge(a, b)
            }
            _ => Unit::Set(genes),
        }
    }

    pub fn genes(&self) -> Vec<&str> {
        match self {
            Unit::Gene(g) => alloc::vec![g.as_str()],
            Unit::Edge(a, b) => alloc::vec![a.as_str(), b.as_str()],
            Unit::Set(s) => s.iter().map(String::as_str).collect(),
        }
    }
}

/// Ranked units and the gene set they induce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    pub ranked_units: Vec<(Unit, f64)>,
    /// Deduplicated genes, in order of first appearance along the ranking.
    pub genes: Vec<String>,
    /// Requested size.
    pub size: usize,
    /// Set when the ranking ran out before `size` genes were reached.
    pub incomplete: bool,
}

/// Unpenalized logistic model over a gene subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub gene_ids: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    /// Gradient norm reached the stationarity tolerance.
    pub converged: bool,
    /// Training data were perfectly separated; the likelihood has no finite
    /// maximizer and the weights reflect the iteration cap.
    pub separable: bool,
}

impl LogisticModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.intercept
            + row
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| x * w)
                .sum::<f64>()
    }

    /// Predicted labels for the rows of `x`, whose columns follow `gene_ids`.
    pub fn predict(&self, x: &Matrix) -> Vec<Label> {
        let eta = x.mul_vec(&self.weights);
        eta.iter()
            .map(|e| if e + self.intercept >= 0.0 { 1 } else { -1 })
            .collect()
    }
}
