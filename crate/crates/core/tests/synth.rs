use supplykg::config::RunConfig;
use supplykg::ontology::{Direction, EntityType, Ontology, RelationType};
use supplykg::pipeline::run_experiment;
use supplykg::sampling::{seeded_rng, SplitKind};
use supplykg::synth::{generate, holdout, SynthConfig};

#[test]
fn generated_graphs_conform_and_cover_truth() {
    for seed in 0..5 {
        let s = generate(&SynthConfig { seed, companies: 80, ..SynthConfig::default() }).unwrap();
        for t in s.graph.triplets() {
            Ontology.check(s.graph.entity_type(t.source), t.relation, s.graph.entity_type(t.destination)).unwrap();
        }
        let covered: std::collections::HashSet<_> = s.truth.iter().map(|p| p.1).collect();
        assert_eq!(covered.len(), s.graph.entities_of(EntityType::Product).len());
    }
}

#[test]
fn same_seed_gives_identical_files() {
    let cfg = SynthConfig { seed: 11, ..SynthConfig::default() };
    let (a, b) = (generate(&cfg).unwrap(), generate(&cfg).unwrap());
    assert_eq!(a.graph.to_text(), b.graph.to_text());
    assert_eq!(a.truth_csv(), b.truth_csv());
    let other = generate(&SynthConfig { seed: 12, ..cfg }).unwrap();
    assert_ne!(a.graph.to_text(), other.graph.to_text());
}

#[test]
fn attachment_degrees_are_heavy_tailed() {
    let s = generate(&SynthConfig { companies: 2000, attachment_edges: 2, lambda: 0.0, seed: 42, ..SynthConfig::default() }).unwrap();
    let mut degrees: Vec<usize> = s
        .graph
        .entities_of(EntityType::Company)
        .iter()
        .map(|&c| s.graph.neighbors(c, RelationType::BuysFrom, Direction::Reverse).unwrap().len())
        .collect();
    degrees.sort_unstable();
    let median = degrees[degrees.len() / 2].max(1);
    let max = *degrees.last().unwrap();
    assert!(max >= 10 * median, "max {max}, median {median}");
}

#[test]
fn tree_when_one_supplier_per_company() {
    let s = generate(&SynthConfig { companies: 100, attachment_edges: 1, ..SynthConfig::default() }).unwrap();
    assert_eq!(s.graph.relation_count(RelationType::BuysFrom), 99);
}

#[test]
fn holdout_partitions_buys_from() {
    let s = generate(&SynthConfig::default()).unwrap();
    let total = s.graph.relation_count(RelationType::BuysFrom);
    let (visible, held) = holdout(&s, 0.1, &mut seeded_rng(1, 0)).unwrap();
    assert_eq!(held.len(), (total as f64 * 0.1).round() as usize);
    assert_eq!(visible.relation_count(RelationType::BuysFrom) + held.len(), total);
    assert!(held.iter().all(|t| !visible.contains(t)));
    let (_, again) = holdout(&s, 0.1, &mut seeded_rng(1, 0)).unwrap();
    assert_eq!(held, again);
}

#[test]
fn planted_signal_separates_lambda_settings() {
    let mean = |lambda: f64| {
        let aucs: Vec<f64> = [42u64, 7, 99]
            .iter()
            .map(|&seed| {
                let mut cfg = RunConfig::default().with_seed(seed);
                cfg.synth.lambda = lambda;
                let (_, _, report) = run_experiment(&cfg).unwrap();
                report.auc(RelationType::BuysFrom, SplitKind::Test).unwrap()
            })
            .collect();
        aucs.iter().sum::<f64>() / aucs.len() as f64
    };
    let (hi, lo) = (mean(0.9), mean(0.0));
    assert!(hi - lo >= 0.2, "planted {hi:.3} vs null {lo:.3}");
}
