mod common;

use common::{gaussian, loss_gradient, rng};
use netsig_core::evaluation::{
    balanced_accuracy, connectivity_score, fold_overlap_histogram, refit_logistic, run_experiment,
    stratified_kfold, ExperimentConfig, GridSpec, Method,
};
use netsig_core::model::{GeneNetwork, Label};
use netsig_core::synthetic::{generate, SyntheticSpec};
use netsig_core::{Error, Matrix, Sequential};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use std::collections::BTreeSet;

#[test]
fn refit_on_shuffled_labels_is_at_chance() {
    let mut r = rng(11);
    let n = 80;
    let p = 3;
    let rows: Vec<Vec<f64>> = (0..2 * n)
        .map(|_| (0..p).map(|_| gaussian(&mut r)).collect())
        .collect();
    let mut labels: Vec<Label> = (0..2 * n)
        .map(|i| if i % 2 == 0 { 1 } else { -1 })
        .collect();
    let train = Matrix::from_rows(&rows[..n]).unwrap();
    let test = Matrix::from_rows(&rows[n..]).unwrap();
    let names: Vec<String> = (0..p).map(|j| format!("g{j}")).collect();
    let mut total = 0.0;
    for _ in 0..50 {
        labels.shuffle(&mut r);
        let y: Vec<f64> = labels[..n].iter().map(|&l| f64::from(l)).collect();
        let model = refit_logistic(&train, &y, names.clone()).unwrap();
        total += balanced_accuracy(&model.predict(&test), &labels[n..]).unwrap();
    }
    let mean = total / 50.0;
    assert!((mean - 0.5).abs() <= 0.1, "mean balanced accuracy {mean}");
}

#[test]
fn refit_reaches_stationarity_without_separation() {
    let mut r = rng(12);
    let n = 60;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..3).map(|_| gaussian(&mut r)).collect())
        .collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|row| {
            if row[0] + 2.0 * gaussian(&mut r) > 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let x = Matrix::from_rows(&rows).unwrap();
    let m = refit_logistic(&x, &y, vec!["a".into(), "b".into(), "c".into()]).unwrap();
    assert!(m.converged && !m.separable);
    let (g, gb) = loss_gradient(&x, &y, &m.weights, m.intercept);
    assert!(gb.abs() <= 1e-6);
    assert!(g.iter().all(|v| v.abs() <= 1e-6));
}

#[test]
fn histogram_counts_every_selected_gene_once() {
    let folds = vec![vec!["a", "b", "c"], vec!["b", "c", "d"], vec!["c", "e"]];
    let h = fold_overlap_histogram(&folds).unwrap();
    assert_eq!(h, vec![3, 1, 1]);
    let union: BTreeSet<&str> = folds.iter().flatten().copied().collect();
    assert_eq!(h.iter().sum::<usize>(), union.len());
}

#[test]
fn report_is_deterministic_and_rejects_bad_requests() {
    let data = generate(&SyntheticSpec {
        genes: 60,
        samples: 50,
        seed: 3,
        ..Default::default()
    })
    .unwrap();
    let config = ExperimentConfig {
        grid: GridSpec {
            count: 10,
            min_ratio: 0.05,
        },
        ndraw: 4,
        sizes: vec![6, 12],
        ..Default::default()
    };
    let a = run_experiment(
        &data.dataset,
        Some(&data.network),
        Method::GraphLassoStability,
        &config,
        &Sequential,
    )
    .unwrap();
    let b = run_experiment(
        &data.dataset,
        Some(&data.network),
        Method::GraphLassoStability,
        &config,
        &Sequential,
    )
    .unwrap();
    assert_eq!(a, b);
    assert_eq!(a.folds.len(), 5);
    for s in &a.summary {
        assert!((0.0..=1.0).contains(&s.mean_balanced_accuracy));
        let c = s.mean_connectivity.unwrap();
        assert!(c > 0.0 && c <= 1.0);
        let union: BTreeSet<&String> = a.folds.iter().flat_map(|f| &f.sizes[0].genes).collect();
        if s.size == 6 {
            assert_eq!(s.overlap_histogram.iter().sum::<usize>(), union.len());
        }
    }
    let zero = ExperimentConfig {
        sizes: vec![0],
        ..config.clone()
    };
    assert_eq!(
        run_experiment(
            &data.dataset,
            Some(&data.network),
            Method::Lasso,
            &zero,
            &Sequential
        )
        .unwrap_err(),
        Error::EmptySignature
    );
    assert!(matches!(
        run_experiment(
            &data.dataset,
            None,
            Method::GraphLasso,
            &config,
            &Sequential
        ),
        Err(Error::NetworkRequired(_))
    ));
}

#[test]
fn folds_partition_the_samples() {
    let labels: Vec<Label> = (0..47).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect();
    let plan = stratified_kfold(&labels, 5, 9).unwrap();
    let mut all: Vec<usize> = plan.folds.iter().flatten().copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..47).collect::<Vec<_>>());
    let sizes: Vec<usize> = plan.folds.iter().map(Vec::len).collect();
    assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
}

proptest! {
    #[test]
    fn connectivity_ignores_gene_names(edges in proptest::collection::vec((0usize..8, 0usize..8), 0..14), offset in 1usize..50) {
        let edges: Vec<(usize, usize)> = edges.into_iter().filter(|(a, b)| a != b).collect();
        let name = |i: usize, k: usize| format!("n{}", (i * 7 + k) % 1000);
        let net_a = GeneNetwork::from_edges(edges.iter().map(|&(a, b)| (name(a, 0), name(b, 0)))).unwrap();
        let net_b = GeneNetwork::from_edges(edges.iter().map(|&(a, b)| (name(a, offset), name(b, offset)))).unwrap();
        let genes_a: Vec<String> = (0..8).map(|i| name(i, 0)).collect();
        let genes_b: Vec<String> = (0..8).map(|i| name(i, offset)).collect();
        let a = connectivity_score(&genes_a, &net_a).unwrap();
        let b = connectivity_score(&genes_b, &net_b).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a > 0.0 && a <= 1.0);
    }

    #[test]
    fn balanced_accuracy_is_symmetric_in_classes(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 2..60)) {
        let truth: Vec<Label> = pairs.iter().map(|p| if p.0 { 1 } else { -1 }).collect();
        let pred: Vec<Label> = pairs.iter().map(|p| if p.1 { 1 } else { -1 }).collect();
        prop_assume!(truth.contains(&1) && truth.contains(&-1));
        let a = balanced_accuracy(&pred, &truth).unwrap();
        let flip = |v: &[Label]| v.iter().map(|l| -l).collect::<Vec<Label>>();
        let b = balanced_accuracy(&flip(&pred), &flip(&truth)).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn histogram_mass_is_conserved(folds in proptest::collection::vec(proptest::collection::btree_set(0u8..30, 0..12), 2..6)) {
        let sigs: Vec<Vec<String>> = folds.iter().map(|s| s.iter().map(|g| format!("g{g}")).collect()).collect();
        let h = fold_overlap_histogram(&sigs).unwrap();
        let union: BTreeSet<&String> = sigs.iter().flatten().collect();
        prop_assert_eq!(h.len(), sigs.len());
        prop_assert_eq!(h.iter().sum::<usize>(), union.len());
    }
}
