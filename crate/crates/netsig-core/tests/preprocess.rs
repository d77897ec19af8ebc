use netsig_core::evaluation::{
    run_experiment, stratified_kfold, ExperimentConfig, GridSpec, Method,
};
use netsig_core::model::{ExpressionDataset, GeneNetwork};
use netsig_core::preprocess::{fit_preprocess, OutlierRule, PreprocessConfig};
use netsig_core::synthetic::{generate, SyntheticSpec};
use netsig_core::Sequential;

fn data(seed: u64) -> (ExpressionDataset, GeneNetwork) {
    let d = generate(&SyntheticSpec {
        genes: 80,
        samples: 60,
        seed,
        ..Default::default()
    })
    .unwrap();
    (d.dataset, d.network)
}

fn config(n_g: usize) -> PreprocessConfig {
    PreprocessConfig {
        n_g,
        outlier: OutlierRule::new(1.96).unwrap(),
    }
}

#[test]
fn output_is_bounded_and_connected() {
    let (d, net) = data(1);
    for n_g in [5, 20, 80, 500] {
        let (model, processed) = fit_preprocess(&d, Some(&net), &config(n_g)).unwrap();
        assert!(processed.n_genes() <= n_g);
        assert_eq!(processed.gene_ids(), model.kept_gene_ids.as_slice());
        for g in processed.gene_ids() {
            assert!(processed
                .gene_ids()
                .iter()
                .any(|h| h != g && net.contains_edge(g, h)));
        }
        assert_eq!(model.apply(&d).unwrap(), processed);
    }
}

#[test]
fn identical_inputs_give_identical_models() {
    let (d, net) = data(2);
    let (a, pa) = fit_preprocess(&d, Some(&net), &config(30)).unwrap();
    let (b, pb) = fit_preprocess(&d, Some(&net), &config(30)).unwrap();
    assert_eq!(a, b);
    assert_eq!(pa, pb);
}

#[test]
fn test_rows_do_not_influence_the_fold_model() {
    let (d, net) = data(3);
    let plan = stratified_kfold(d.labels(), 5, 0).unwrap();
    let train = d.subset_samples(&plan.train(0)).unwrap();
    let (model, _) = fit_preprocess(&train, Some(&net), &config(30)).unwrap();

    let mut values = d.values().clone();
    for &i in &plan.folds[0] {
        for j in 0..values.ncols() {
            values.set(i, j, 1e3 * (i as f64 + 1.0) - j as f64);
        }
    }
    let mutated = d.with_values(d.gene_ids().to_vec(), values).unwrap();
    let train2 = mutated.subset_samples(&plan.train(0)).unwrap();
    let (model2, _) = fit_preprocess(&train2, Some(&net), &config(30)).unwrap();
    assert_eq!(model, model2);

    let exp = ExperimentConfig {
        preprocess: config(30),
        grid: GridSpec {
            count: 15,
            min_ratio: 0.05,
        },
        sizes: vec![5, 10],
        ..Default::default()
    };
    let a = run_experiment(&d, Some(&net), Method::Lasso, &exp, &Sequential).unwrap();
    let b = run_experiment(&mutated, Some(&net), Method::Lasso, &exp, &Sequential).unwrap();
    assert_eq!(a.folds[0].gene_ranking, b.folds[0].gene_ranking);
    assert_eq!(a.folds[0].sizes[0].genes, b.folds[0].sizes[0].genes);
}

#[test]
fn without_network_only_correlation_filters() {
    let (d, _) = data(4);
    let (model, processed) = fit_preprocess(&d, None, &config(25)).unwrap();
    assert_eq!(processed.n_genes(), 25);
    assert_eq!(model.kept_gene_ids.len(), 25);
    for j in 0..processed.n_genes() {
        let col = processed.values().col(j);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / col.len() as f64;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-9);
    }
}
