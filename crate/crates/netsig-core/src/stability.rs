//! Stability selection over a fixed penalty grid.
//!
//! Each draw fits a full selection path on a random half of the samples and
//! records which groups are active at every grid point. The selection
//! probability `Π[g][λ]` is the fraction of draws in which group `g` is
//! active at `λ`. Groups are then ranked either by the largest probability
//! along the grid or by `S_g`, the largest share of the total selection mass
//! a group holds at any grid point, which favours groups that are selected
//! early while few others are.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::graph_lasso::graph_lasso_path;
use crate::lasso::lasso_path;
use crate::logistic::SolverOptions;
use crate::matrix::Matrix;
use crate::model::{GroupStructure, LambdaGrid, SelectionPath, Signature, Unit};
use crate::seed::{rng_for, Stream};

pub const DEFAULT_NDRAW: usize = 100;
const MAX_SUBSAMPLE_RETRIES: usize = 100;

/// Which base selector produced a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    Lasso,
    GraphLasso,
}

/// Base selector run on every subsample.
#[derive(Debug, Clone, Copy)]
pub enum Selector<'a> {
    /// Groups are the individual columns.
    Lasso,
    GraphLasso(&'a GroupStructure),
}

impl Selector<'_> {
    pub fn kind(&self) -> SelectorKind {
        match self {
            Selector::Lasso => SelectorKind::Lasso,
            Selector::GraphLasso(_) => SelectorKind::GraphLasso,
        }
    }

    pub fn group_count(&self, ncols: usize) -> usize {
        match self {
            Selector::Lasso => ncols,
            Selector::GraphLasso(g) => g.group_count(),
        }
    }

    pub fn path(
        &self,
        x: &Matrix,
        y: &[f64],
        grid: &LambdaGrid,
        opts: &SolverOptions,
    ) -> Result<SelectionPath> {
        match self {
            Selector::Lasso => lasso_path(x, y, grid, opts),
            Selector::GraphLasso(groups) => graph_lasso_path(x, y, groups, grid, opts),
        }
    }
}

/// `⌊n/2⌋` distinct indices drawn uniformly without replacement, sorted.
pub fn half_subsample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n < 4 {
        return Err(Error::InvalidArgument(alloc::format!(
            "subsampling needs at least 4 samples, got {n}"
        )));
    }
    let mut idx = index::sample(rng, n, n / 2).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// `⌊n/2⌋` indices that keep the class ratio of `labels` (rounded), with at
/// least one sample of each class. Sorted.
pub fn stratified_half_subsample<R: Rng + ?Sized>(
    labels: &[f64],
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = labels.len();
    if n < 4 {
        return Err(Error::InvalidArgument(alloc::format!(
            "subsampling needs at least 4 samples, got {n}"
        )));
    }
    let pos: Vec<usize> = (0..n).filter(|&i| labels[i] > 0.0).collect();
    let neg: Vec<usize> = (0..n).filter(|&i| labels[i] <= 0.0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass);
    }
    let half = n / 2;
    let ideal = (half as f64 * pos.len() as f64 / n as f64 + 0.5) as usize;
    let take_pos = ideal.clamp(1, pos.len().min(half - 1));
    let take_neg = half - take_pos;
    let mut idx: Vec<usize> = index::sample(rng, pos.len(), take_pos)
        .into_iter()
        .map(|k| pos[k])
        .chain(
            index::sample(rng, neg.len(), take_neg)
                .into_iter()
                .map(|k| neg[k]),
        )
        .collect();
    idx.sort_unstable();
    Ok(idx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub ndraw: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            ndraw: DEFAULT_NDRAW,
            seed: 0,
            stratified: true,
        }
    }
}

/// Selection probabilities, one row per group and one column per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityProfile {
    pub grid: LambdaGrid,
    pub pi: Vec<Vec<f64>>,
    pub ndraw: usize,
    pub selector: SelectorKind,
}

impl StabilityProfile {
    /// Validates a hand-built profile: entries in `[0, 1]`, each a multiple of
    /// `1/ndraw`.
    pub fn new(
        grid: LambdaGrid,
        pi: Vec<Vec<f64>>,
        ndraw: usize,
        selector: SelectorKind,
    ) -> Result<Self> {
        if ndraw == 0 {
            return Err(Error::InvalidArgument("ndraw must be positive".into()));
        }
        for (g, row) in pi.iter().enumerate() {
            if row.len() != grid.len() {
                return Err(Error::Shape(alloc::format!(
                    "profile row {g} has {} entries for a grid of {}",
                    row.len(),
                    grid.len()
                )));
            }
            for &v in row {
                let k = v * ndraw as f64;
                if !(0.0..=1.0).contains(&v) || (k - libm::round(k)).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "probability {v} is not a multiple of 1/{ndraw} in [0,1]"
                    )));
                }
            }
        }
        Ok(StabilityProfile {
            grid,
            pi,
            ndraw,
            selector,
        })
    }

    /// Profile from integer selection counts.
    pub fn from_counts(
        grid: LambdaGrid,
        counts: &[Vec<u32>],
        ndraw: usize,
        selector: SelectorKind,
    ) -> Self {
        let pi = counts
            .iter()
            .map(|row| row.iter().map(|&c| f64::from(c) / ndraw as f64).collect())
            .collect();
        StabilityProfile {
            grid,
            pi,
            ndraw,
            selector,
        }
    }

    pub fn group_count(&self) -> usize {
        self.pi.len()
    }
}

/// Runs `ndraw` subsample paths and accumulates selection frequencies.
///
/// Draw `i` uses its own generator derived from `config.seed`, so the
/// result does not depend on how the executor schedules draws.
#[allow(clippy::too_many_arguments)]
pub fn run_stability_selection<E: Executor>(
    x: &Matrix,
    y: &[f64],
    selector: Selector<'_>,
    grid: &LambdaGrid,
    config: &StabilityConfig,
    opts: &SolverOptions,
    exec: &E,
) -> Result<StabilityProfile> {
    if config.ndraw < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "ndraw must be at least 2, got {}",
            config.ndraw
        )));
    }
    if x.nrows() != y.len() {
        return Err(Error::Shape(alloc::format!(
            "{} rows but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    let ngroups = selector.group_count(x.ncols());
    let draws: Vec<Result<Vec<Vec<usize>>>> = exec.map(config.ndraw, |i| {
        let mut rng = rng_for(config.seed, Stream::Draw, i as u64);
        for _ in 0..MAX_SUBSAMPLE_RETRIES {
            let rows = if config.stratified {
                stratified_half_subsample(y, &mut rng)?
            } else {
                half_subsample(y.len(), &mut rng)?
            };
            let ys: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
            if !(ys.contains(&1.0) && ys.contains(&-1.0)) {
                continue;
            }
            let path = selector.path(&x.select_rows(&rows), &ys, grid, opts)?;
            return Ok(path.active_sets);
        }
        Err(Error::SubsampleRetries(MAX_SUBSAMPLE_RETRIES))
    });
    let mut counts = alloc::vec![alloc::vec![0u32; grid.len()]; ngroups];
    for draw in draws {
        for (k, active) in draw?.iter().enumerate() {
            for &g in active {
                counts[g][k] += 1;
            }
        }
    }
    Ok(StabilityProfile::from_counts(
        grid.clone(),
        &counts,
        config.ndraw,
        selector.kind(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreRule {
    #[default]
    Sg,
    MaxProb,
}

impl core::str::FromStr for ScoreRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sg" => Ok(ScoreRule::Sg),
            "max_prob" => Ok(ScoreRule::MaxProb),
            other => Err(Error::InvalidArgument(alloc::format!(
                "unknown score rule `{other}` (expected sg or max_prob)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityScores {
    pub sg: Vec<f64>,
    pub max_prob: Vec<f64>,
    pub rule: ScoreRule,
    /// Groups with a positive score under `rule`, best first; ties by index.
    pub ranking: Vec<usize>,
}

impl StabilityScores {
    pub fn score(&self, g: usize) -> f64 {
        match self.rule {
            ScoreRule::Sg => self.sg[g],
            ScoreRule::MaxProb => self.max_prob[g],
        }
    }

    /// `(group, score)` pairs along the ranking.
    pub fn ranked(&self) -> Vec<(usize, f64)> {
        self.ranking.iter().map(|&g| (g, self.score(g))).collect()
    }
}

fn raw_sg(profile: &StabilityProfile) -> Vec<f64> {
    // work on integer counts so the column totals are exact and independent
    // of group order
    let nd = profile.ndraw as f64;
    let counts: Vec<Vec<u64>> = profile
        .pi
        .iter()
        .map(|row| row.iter().map(|&v| libm::round(v * nd) as u64).collect())
        .collect();
    let mut sg = alloc::vec![0.0f64; counts.len()];
    for k in 0..profile.grid.len() {
        let total: u64 = counts.iter().map(|row| row[k]).sum();
        if total == 0 {
            continue;
        }
        for (s, row) in sg.iter_mut().zip(&counts) {
            *s = s.max(row[k] as f64 / total as f64);
        }
    }
    sg
}

fn raw_max_prob(profile: &StabilityProfile) -> Vec<f64> {
    profile
        .pi
        .iter()
        .map(|row| row.iter().copied().fold(0.0, f64::max))
        .collect()
}

/// Scores every group and ranks by the chosen rule.
pub fn score_profile(profile: &StabilityProfile, rule: ScoreRule) -> StabilityScores {
    let sg = raw_sg(profile);
    let max_prob = raw_max_prob(profile);
    let key = match rule {
        ScoreRule::Sg => &sg,
        ScoreRule::MaxProb => &max_prob,
    };
    let mut ranking: Vec<usize> = (0..key.len()).filter(|&g| key[g] > 0.0).collect();
    ranking.sort_by(|&a, &b| key[b].total_cmp(&key[a]).then(a.cmp(&b)));
    StabilityScores {
        sg,
        max_prob,
        rule,
        ranking,
    }
}

/// `S_g = max_λ Π[g][λ] / Σ_h Π[h][λ]`, skipping grid points where nothing is
/// selected; 0 if every point is skipped.
pub fn sg_scores(profile: &StabilityProfile) -> StabilityScores {
    score_profile(profile, ScoreRule::Sg)
}

/// Largest selection probability of each group along the grid.
pub fn max_prob_scores(profile: &StabilityProfile) -> StabilityScores {
    score_profile(profile, ScoreRule::MaxProb)
}

/// Takes ranked groups until their genes first number at least `size`.
///
/// `ranked` holds `(group, score)` pairs with non-increasing scores. Groups
/// with a zero score are never taken. If the ranking runs out first the
/// signature is returned with `incomplete` set.
pub fn signature_from_ranking<S: AsRef<str>>(
    ranked: &[(usize, f64)],
    groups: &GroupStructure,
    gene_ids: &[S],
    size: usize,
) -> Result<Signature> {
    if size == 0 {
        return Err(Error::EmptySignature);
    }
    if groups.ncols() != gene_ids.len() {
        return Err(Error::Shape(alloc::format!(
            "groups index {} columns but {} gene ids were given",
            groups.ncols(),
            gene_ids.len()
        )));
    }
    let mut seen = alloc::vec![false; gene_ids.len()];
    let mut genes: Vec<String> = Vec::new();
    let mut ranked_units = Vec::new();
    for &(g, score) in ranked {
        if genes.len() >= size {
            break;
        }
        if score <= 0.0 {
            break;
        }
        let members = groups.group(g);
        let names: Vec<String> = members
            .iter()
            .map(|&c| String::from(gene_ids[c].as_ref()))
            .collect();
        for &c in members {
            if !seen[c] {
                seen[c] = true;
                genes.push(String::from(gene_ids[c].as_ref()));
            }
        }
        ranked_units.push((Unit::from_genes(names), score));
    }
    Ok(Signature {
        incomplete: genes.len() < size,
        ranked_units,
        genes,
        size,
    })
}

/// Signature from stability scores.
pub fn signature_from_scores<S: AsRef<str>>(
    scores: &StabilityScores,
    groups: &GroupStructure,
    gene_ids: &[S],
    size: usize,
) -> Result<Signature> {
    signature_from_ranking(&scores.ranked(), groups, gene_ids, size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid2() -> LambdaGrid {
        LambdaGrid::new(vec![2.0, 1.0]).unwrap()
    }

    #[test]
    fn half_subsample_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = half_subsample(10, &mut rng).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.windows(2).all(|w| w[0] < w[1]) && s[4] < 10);
        assert_eq!(half_subsample(7, &mut rng).unwrap().len(), 3);
        assert!(half_subsample(3, &mut rng).is_err());
        let a = half_subsample(50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = half_subsample(50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stratified_keeps_ratio() {
        let labels: Vec<f64> = (0..30).map(|i| if i < 10 { 1.0 } else { -1.0 }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let s = stratified_half_subsample(&labels, &mut rng).unwrap();
            assert_eq!(s.len(), 15);
            assert_eq!(s.iter().filter(|&&i| labels[i] > 0.0).count(), 5);
        }
    }

    #[test]
    fn counting_probabilities() {
        let p = StabilityProfile::from_counts(
            grid2(),
            &[vec![3, 4], vec![0, 0]],
            4,
            SelectorKind::Lasso,
        );
        assert_eq!(p.pi[0], vec![0.75, 1.0]);
        assert_eq!(p.pi[1], vec![0.0, 0.0]);
        assert!(
            StabilityProfile::new(grid2(), vec![vec![0.3, 0.0]], 4, SelectorKind::Lasso).is_err()
        );
    }

    #[test]
    fn sg_hand_example() {
        let p = StabilityProfile::new(
            grid2(),
            vec![vec![1.0, 1.0], vec![0.0, 1.0]],
            2,
            SelectorKind::GraphLasso,
        )
        .unwrap();
        let s = sg_scores(&p);
        assert_eq!(s.sg, vec![1.0, 0.5]);
        assert_eq!(s.ranking, vec![0, 1]);
    }

    #[test]
    fn sg_degenerate_cases() {
        let p = StabilityProfile::new(
            grid2(),
            vec![vec![0.0, 0.5], vec![0.0, 0.0]],
            2,
            SelectorKind::Lasso,
        )
        .unwrap();
        assert_eq!(sg_scores(&p).sg, vec![1.0, 0.0]);
        let zero =
            StabilityProfile::new(grid2(), vec![vec![0.0; 2]; 3], 2, SelectorKind::Lasso).unwrap();
        let s = sg_scores(&zero);
        assert_eq!(s.sg, vec![0.0; 3]);
        assert!(s.ranking.is_empty());
    }

    #[test]
    fn max_prob_rows() {
        let grid = LambdaGrid::new(vec![3.0, 2.0, 1.0]).unwrap();
        let p = StabilityProfile::new(
            grid,
            vec![vec![0.2, 0.8, 0.5], vec![0.0; 3], vec![0.4; 3]],
            10,
            SelectorKind::Lasso,
        )
        .unwrap();
        let s = max_prob_scores(&p);
        assert_eq!(s.max_prob, vec![0.8, 0.0, 0.4]);
        assert_eq!(s.ranking, vec![0, 2]);
    }

    #[test]
    fn signature_growth() {
        let groups = GroupStructure::new(vec![vec![0, 1], vec![1, 2]], 3).unwrap();
        let genes = ["A", "B", "C"];
        let ranked = [(0, 0.9), (1, 0.8)];
        let sig = signature_from_ranking(&ranked, &groups, &genes, 3).unwrap();
        assert_eq!(sig.genes, vec!["A", "B", "C"]);
        assert_eq!(sig.ranked_units.len(), 2);
        assert!(!sig.incomplete);
        let sig = signature_from_ranking(&ranked, &groups, &genes, 2).unwrap();
        assert_eq!(sig.genes, vec!["A", "B"]);
        assert_eq!(
            sig.ranked_units,
            vec![(Unit::Edge("A".into(), "B".into()), 0.9)]
        );
        let sig = signature_from_ranking(&[(0, 0.0), (1, 0.0)], &groups, &genes, 1).unwrap();
        assert!(sig.genes.is_empty() && sig.incomplete);
        assert!(signature_from_ranking(&ranked, &groups, &genes, 0).is_err());
    }
}
