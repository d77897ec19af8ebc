use netsig_core::evaluation::{ExperimentConfig, GridSpec, Method};
use netsig_core::model::{GroupStructure, LambdaGrid};
use netsig_core::stability::{ScoreRule, SelectorKind, StabilityProfile};
use proptest::prelude::*;

proptest! {
    #[test]
    fn profiles_survive_json(ndraw in 1usize..50, rows in proptest::collection::vec(proptest::collection::vec(0u32..50, 3), 1..6)) {
        let counts: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|&c| c % (ndraw as u32 + 1)).collect()).collect();
        let grid = LambdaGrid::new(vec![0.9, 0.3, 0.1]).unwrap();
        let p = StabilityProfile::from_counts(grid, &counts, ndraw, SelectorKind::GraphLasso);
        let text = serde_json::to_string(&p).unwrap();
        let back: StabilityProfile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn configs_survive_json(seed in any::<u64>(), ndraw in 2usize..500, count in 1usize..100, sizes in proptest::collection::vec(1usize..200, 1..8), max_prob in any::<bool>()) {
        let c = ExperimentConfig {
            seed,
            ndraw,
            grid: GridSpec { count, min_ratio: 0.01 },
            sizes,
            score_rule: if max_prob { ScoreRule::MaxProb } else { ScoreRule::Sg },
            ..Default::default()
        };
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(back, c);
    }
}

#[test]
fn invalid_structures_are_rejected_on_load() {
    assert!(serde_json::from_str::<GroupStructure>(r#"{"groups":[[0,5]],"ncols":2}"#).is_err());
    assert!(serde_json::from_str::<LambdaGrid>("[0.1, 0.5]").is_err());
    assert!(serde_json::from_str::<Method>(r#""glasso+ss""#).is_ok());
}
