//! Synthetic networks and labeled expression data with planted connected
//! supports, used as ground truth for recovery and benchmark tests.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{ExpressionDataset, GeneNetwork, Label};
use crate::seed::{rng_for, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkModel {
    /// Every gene has exactly `degree` neighbors.
    RandomRegular,
    /// Barabási–Albert growth with `max(1, degree / 2)` links per new gene.
    PreferentialAttachment,
}

impl core::str::FromStr for NetworkModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_regular" | "regular" => Ok(NetworkModel::RandomRegular),
            "preferential_attachment" | "ba" => Ok(NetworkModel::PreferentialAttachment),
            other => Err(Error::InvalidArgument(alloc::format!(
                "unknown network model `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub genes: usize,
    pub samples: usize,
    pub model: NetworkModel,
    pub degree: usize,
    pub components: usize,
    pub component_size: usize,
    /// Magnitude of every non-zero coefficient.
    pub effect: f64,
    /// Fraction of labels flipped after thresholding.
    pub label_noise: f64,
    /// Correlation between two genes of the same planted component.
    pub within_corr: f64,
    /// Standard deviation of the Gaussian noise added to the linear score.
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            genes: 200,
            samples: 100,
            model: NetworkModel::RandomRegular,
            degree: 4,
            components: 3,
            component_size: 6,
            effect: 0.5,
            label_noise: 0.05,
            within_corr: 0.4,
            noise_sd: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.components == 0 || self.component_size == 0 {
            return bad("need at least one planted component of size >= 1".into());
        }
        if self.components * self.component_size > self.genes {
            return bad(alloc::format!(
                "{} components of size {} do not fit in {} genes",
                self.components,
                self.component_size,
                self.genes
            ));
        }
        if self.degree == 0 || self.degree >= self.genes {
            return bad(alloc::format!(
                "degree {} must be in [1, {})",
                self.degree,
                self.genes
            ));
        }
        if self.model == NetworkModel::RandomRegular && (self.genes * self.degree) % 2 == 1 {
            return bad("genes * degree must be even for a regular graph".into());
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return bad(alloc::format!(
                "label noise {} not in [0, 0.5)",
                self.label_noise
            ));
        }
        if !(self.effect.is_finite() && self.effect > 0.0) {
            return bad(alloc::format!("effect {} must be positive", self.effect));
        }
        if !(0.0..1.0).contains(&self.within_corr) {
            return bad(alloc::format!(
                "within_corr {} not in [0, 1)",
                self.within_corr
            ));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return bad(alloc::format!("noise_sd {} must be >= 0", self.noise_sd));
        }
        if self.samples < 2 {
            return bad("need at least 2 samples".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Genes with non-zero coefficient.
    pub support: Vec<String>,
    /// Coefficient of every gene, in dataset column order.
    pub coefficients: Vec<f64>,
    /// Gene ids of each planted component.
    pub components: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub dataset: ExpressionDataset,
    pub network: GeneNetwork,
    pub truth: GroundTruth,
}

pub fn gene_name(i: usize, total: usize) -> String {
    let width = alloc::format!("{}", total.saturating_sub(1)).len().max(4);
    alloc::format!("G{i:0width$}")
}

fn random_regular(p: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    'restart: for _ in 0..200 {
        let mut stubs: Vec<usize> = (0..p).flat_map(|v| core::iter::repeat_n(v, d)).collect();
        let mut adj: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); p];
        let mut edges = Vec::with_capacity(p * d / 2);
        while !stubs.is_empty() {
            let mut pick = None;
            for _ in 0..64 {
                let i = rng.random_range(0..stubs.len());
                let j = rng.random_range(0..stubs.len());
                let (u, v) = (stubs[i], stubs[j]);
                if i != j && u != v && !adj[u].contains(&v) {
                    pick = Some((i, j));
                    break;
                }
            }
            if pick.is_none() {
                // exhaustive search before giving up on this pairing
                'scan: for i in 0..stubs.len() {
                    for j in i + 1..stubs.len() {
                        let (u, v) = (stubs[i], stubs[j]);
                        if u != v && !adj[u].contains(&v) {
                            pick = Some((i, j));
                            break 'scan;
                        }
                    }
                }
            }
            let Some((i, j)) = pick else {
                continue 'restart;
            };
            let (u, v) = (stubs[i], stubs[j]);
            adj[u].insert(v);
            adj[v].insert(u);
            edges.push((u.min(v), u.max(v)));
            let (hi, lo) = (i.max(j), i.min(j));
            stubs.swap_remove(hi);
            stubs.swap_remove(lo);
        }
        return Ok(edges);
    }
    Err(Error::InvalidArgument(alloc::format!(
        "failed to pair a {d}-regular graph on {p} nodes"
    )))
}

fn preferential_attachment(p: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let m = (d / 2).max(1);
    let seed_nodes = (m + 1).min(p);
    let mut edges = Vec::new();
    // endpoint multiset: a node appears once per incident edge
    let mut targets = Vec::new();
    for a in 0..seed_nodes {
        for b in a + 1..seed_nodes {
            edges.push((a, b));
            targets.push(a);
            targets.push(b);
        }
    }
    for v in seed_nodes..p {
        let mut chosen = BTreeSet::new();
        while chosen.len() < m.min(v) {
            chosen.insert(targets[rng.random_range(0..targets.len())]);
        }
        for u in chosen {
            edges.push((u, v));
            targets.push(u);
            targets.push(v);
        }
    }
    edges
}

fn plant_components(
    adj: &[Vec<usize>],
    count: usize,
    size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<usize>>> {
    let p = adj.len();
    let mut used = alloc::vec![false; p];
    let mut components = Vec::with_capacity(count);
    for k in 0..count {
        let mut roots: Vec<usize> = (0..p).filter(|&v| !used[v]).collect();
        roots.shuffle(rng);
        let mut grown = None;
        for &root in roots.iter().take(200) {
            let mut seen = BTreeSet::new();
            let mut order = Vec::new();
            let mut queue = VecDeque::from([root]);
            seen.insert(root);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                if order.len() == size {
                    break;
                }
                let mut next: Vec<usize> = adj[v]
                    .iter()
                    .copied()
                    .filter(|&u| !used[u] && !seen.contains(&u))
                    .collect();
                next.shuffle(rng);
                for u in next {
                    seen.insert(u);
                    queue.push_back(u);
                }
            }
            if order.len() == size {
                grown = Some(order);
                break;
            }
        }
        let Some(members) = grown else {
            return Err(Error::Planting(alloc::format!(
                "component {k}: no free connected region of {size} genes ({} genes left unassigned)",
                used.iter().filter(|u| !**u).count()
            )));
        };
        for &v in &members {
            used[v] = true;
        }
        components.push(members);
    }
    Ok(components)
}

/// Generates a network, expression matrix, labels and the planted truth.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, Stream::Synthetic, 0);
    let p = spec.genes;
    let n = spec.samples;
    let names: Vec<String> = (0..p).map(|i| gene_name(i, p)).collect();

    let edges = match spec.model {
        NetworkModel::RandomRegular => random_regular(p, spec.degree, &mut rng)?,
        NetworkModel::PreferentialAttachment => preferential_attachment(p, spec.degree, &mut rng),
    };
    let mut adj = alloc::vec![Vec::new(); p];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut network = GeneNetwork::from_edges(
        edges
            .iter()
            .map(|&(a, b)| (names[a].clone(), names[b].clone())),
    )?;
    for name in &names {
        network.add_node(name.clone());
    }

    let components = plant_components(&adj, spec.components, spec.component_size, &mut rng)?;
    let mut coefficients = alloc::vec![0.0; p];
    let mut membership = alloc::vec![None; p];
    for (k, members) in components.iter().enumerate() {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        for &v in members {
            coefficients[v] = sign * spec.effect;
            membership[v] = Some(k);
        }
    }

    let shared_w = libm::sqrt(spec.within_corr);
    let own_w = libm::sqrt(1.0 - spec.within_corr);
    let mut x = Matrix::zeros(n, p);
    for i in 0..n {
        let latent: Vec<f64> = (0..components.len())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        for (j, member) in membership.iter().enumerate() {
            let e: f64 = rng.sample(StandardNormal);
            let v = match *member {
                Some(k) => shared_w * latent[k] + own_w * e,
                None => e,
            };
            x.set(i, j, v);
        }
    }
    let score = x.mul_vec(&coefficients);
    let mut labels: Vec<Label> = score
        .iter()
        .map(|&s| {
            let noise: f64 = rng.sample(StandardNormal);
            if s + spec.noise_sd * noise >= 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    let flips = libm::round(spec.label_noise * n as f64) as usize;
    for i in rand::seq::index::sample(&mut rng, n, flips) {
        labels[i] = -labels[i];
    }

    let width = alloc::format!("{}", n.saturating_sub(1)).len().max(3);
    let sample_ids = (0..n).map(|i| alloc::format!("S{i:0width$}")).collect();
    let dataset = ExpressionDataset::new(sample_ids, names.clone(), x, labels)?;
    let support = (0..p)
        .filter(|&j| coefficients[j] != 0.0)
        .map(|j| names[j].clone())
        .collect();
    let truth = GroundTruth {
        support,
        coefficients,
        components: components
            .iter()
            .map(|c| c.iter().map(|&v| names[v].clone()).collect())
            .collect(),
    };
    Ok(SyntheticData {
        dataset,
        network,
        truth,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub precision: f64,
    pub recall: f64,
    /// The signature was empty; precision is reported as 0.
    pub empty_signature: bool,
}

pub fn recovery_metrics<S: AsRef<str>>(signature: &[S], truth: &GroundTruth) -> Recovery {
    let sig: BTreeSet<&str> = signature.iter().map(AsRef::as_ref).collect();
    let support: BTreeSet<&str> = truth.support.iter().map(String::as_str).collect();
    let hits = sig.intersection(&support).count() as f64;
    Recovery {
        precision: if sig.is_empty() {
            0.0
        } else {
            hits / sig.len() as f64
        },
        recall: if support.is_empty() {
            0.0
        } else {
            hits / support.len() as f64
        },
        empty_signature: sig.is_empty(),
    }
}
