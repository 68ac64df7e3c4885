mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use supplykg::derive::{bipartite_projection, cooccurrence_weights, threshold_edges};
use supplykg::model::{load_checkpoint, save_checkpoint, AdamConfig, ModelParams, OptimizerState};
use supplykg::ontology::{Direction, RelationType};
use supplykg::sampling::{corrupt, seeded_rng, split_triplets, BatchConfig, BatchIterator, CorruptionMode, SplitSpec};
use supplykg::{KnowledgeGraph, Triplet};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn type_violations_are_rejected(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed, 0);
        let mut g = common::random_graph(&mut rng, 10, 0.1);
        let before = g.clone();
        for _ in 0..50 {
            let t = common::violating_triplet(&mut rng, &g);
            prop_assert!(g.add_triplet(t).is_err());
        }
        prop_assert_eq!(g, before);
    }

    #[test]
    fn forward_and_reverse_adjacency_agree(seed in any::<u64>()) {
        let g = common::random_graph(&mut seeded_rng(seed, 0), 15, 0.15);
        let mut total = 0;
        for r in RelationType::ALL {
            for u in 0..g.entity_count() as u32 {
                let fwd = g.neighbors(u, r, Direction::Forward).unwrap();
                prop_assert!(fwd.windows(2).all(|w| w[0] < w[1]));
                for &v in fwd {
                    prop_assert!(g.neighbors(v, r, Direction::Reverse).unwrap().contains(&u));
                    prop_assert!(g.contains(&Triplet::new(u, r, v)));
                }
                total += fwd.len();
            }
        }
        prop_assert_eq!(total, g.triplet_count());
    }

    #[test]
    fn graph_file_round_trip(seed in any::<u64>()) {
        let g = common::random_graph(&mut seeded_rng(seed, 0), 12, 0.1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.tsv");
        g.save(&path).unwrap();
        let back = KnowledgeGraph::load(&path).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_text(), g.to_text());
    }

    #[test]
    fn checkpoint_round_trip(seed in any::<u64>(), n in 1usize..40, dim in 1usize..12, depth in 1usize..4) {
        let params = ModelParams::init(n, dim, depth, seed).unwrap();
        let mut state = OptimizerState::new(&params, AdamConfig::default());
        state.step = seed % 1000;
        state.first_moment.embeddings.fill(0.25);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        save_checkpoint(&params, &state, Some("fp"), &path).unwrap();
        let ck = load_checkpoint(&path).unwrap();
        prop_assert_eq!(&ck.params, &params);
        prop_assert_eq!(&ck.state, &state);
        prop_assert_eq!(ck.fingerprint.as_deref(), Some("fp"));
    }

    #[test]
    fn raising_thresholds_never_adds_edges(seed in any::<u64>(), t in 1u32..6) {
        let g = common::random_production_graph(&mut seeded_rng(seed, 0));
        for (pairs, rel) in [
            (cooccurrence_weights(&g), RelationType::CapabilityProduces),
            (bipartite_projection(&g), RelationType::ComplimentaryProductTo),
        ] {
            let low: HashSet<_> = threshold_edges(&pairs, t, rel).unwrap().into_iter().collect();
            let high: HashSet<_> = threshold_edges(&pairs, t + 1, rel).unwrap().into_iter().collect();
            prop_assert!(high.is_subset(&low));
        }
    }

    #[test]
    fn split_is_a_stratified_partition(seed in any::<u64>(), split_seed in any::<u64>()) {
        let g = common::random_graph(&mut seeded_rng(seed, 0), 20, 0.1);
        let all: Vec<Triplet> = g.triplets().collect();
        let spec = SplitSpec { seed: split_seed, ..SplitSpec::default() };
        let s = split_triplets(&all, &spec).unwrap();
        let mut union: Vec<Triplet> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
        union.sort();
        let mut sorted = all.clone();
        sorted.sort();
        prop_assert_eq!(union, sorted);
        prop_assert_eq!(s.clone(), split_triplets(&all, &spec).unwrap());
    }

    #[test]
    fn negatives_are_never_facts(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed, 0);
        let g = common::random_graph(&mut rng, 10, 0.2);
        for t in g.triplets().take(100) {
            for mode in [CorruptionMode::Uniform, CorruptionMode::EndpointSwap, CorruptionMode::RelationResample] {
                if let Ok(n) = corrupt(&t, &g, &mut rng, mode) {
                    prop_assert!(!g.contains(&n.triplet));
                }
            }
        }
    }

    #[test]
    fn batches_satisfy_block_invariants(seed in any::<u64>(), batch in 1usize..40, fanout in 1usize..6, depth in 1usize..3) {
        let g = common::random_graph(&mut seeded_rng(seed, 0), 10, 0.15);
        let pos: Vec<Triplet> = g.triplets().collect();
        let cfg = BatchConfig { batch_size: batch, fanout, depth, ..BatchConfig::default() };
        for block in BatchIterator::new(&pos, &g, &g, cfg, seeded_rng(seed, 1)).unwrap() {
            block.validate().unwrap();
            prop_assert_eq!(block.depth(), depth);
        }
    }
}
