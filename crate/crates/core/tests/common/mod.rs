//! Shared fixtures and brute-force oracles for integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use supplykg::derive::WeightedPair;
use supplykg::eval::Heuristic;
use supplykg::model::{forward, loss_and_gradients, ModelParams};
use supplykg::ontology::{EntityType, Ontology, RelationType};
use supplykg::sampling::{sample_block, seeded_rng, MiniBatchBlock};
use supplykg::{EntityId, KnowledgeGraph, Triplet};

/// Random ontology-conformant graph with every entity type present.
pub fn random_graph<R: Rng>(rng: &mut R, companies: usize, density: f64) -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    let sizes = [
        (EntityType::Company, companies.max(1)),
        (EntityType::Product, rng.random_range(1..=30)),
        (EntityType::Capability, rng.random_range(1..=8)),
        (EntityType::Certification, rng.random_range(1..=4)),
        (EntityType::Country, rng.random_range(1..=5)),
    ];
    for (t, n) in sizes {
        for i in 0..n {
            g.add_entity(t, &format!("{}-{i}", t.as_str())).unwrap();
        }
    }
    for r in RelationType::ALL {
        let (d, e) = r.signature();
        let src = g.entities_of(d).to_vec();
        let dst = g.entities_of(e).to_vec();
        let attempts = ((src.len() * dst.len()) as f64 * density).ceil() as usize;
        for _ in 0..attempts {
            let t = Triplet::new(src[rng.random_range(0..src.len())], r, dst[rng.random_range(0..dst.len())]);
            g.add_triplet(t).unwrap();
        }
    }
    g
}

/// Company/capability/product graph with only base relations.
pub fn random_production_graph<R: Rng>(rng: &mut R) -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    let nc = rng.random_range(1..=100);
    let np = rng.random_range(1..=25);
    let nk = rng.random_range(1..=6);
    let cs: Vec<_> = (0..nc).map(|i| g.add_entity(EntityType::Company, &format!("c{i}")).unwrap()).collect();
    let ps: Vec<_> = (0..np).map(|i| g.add_entity(EntityType::Product, &format!("p{i}")).unwrap()).collect();
    let ks: Vec<_> = (0..nk).map(|i| g.add_entity(EntityType::Capability, &format!("k{i}")).unwrap()).collect();
    let pp = rng.random_range(0.0..0.4);
    let pk = rng.random_range(0.0..0.6);
    for &c in &cs {
        for &p in &ps {
            if rng.random_bool(pp) {
                g.add_triplet(Triplet::new(c, RelationType::MakesProduct, p)).unwrap();
            }
        }
        for &k in &ks {
            if rng.random_bool(pk) {
                g.add_triplet(Triplet::new(c, RelationType::HasCapability, k)).unwrap();
            }
        }
    }
    g
}

/// Nested-loop co-occurrence oracle.
pub fn oracle_cooccurrence(g: &KnowledgeGraph) -> Vec<WeightedPair> {
    let mut out = Vec::new();
    for &k in g.entities_of(EntityType::Capability) {
        for &p in g.entities_of(EntityType::Product) {
            let w = g
                .entities_of(EntityType::Company)
                .iter()
                .filter(|&&c| {
                    g.contains(&Triplet::new(c, RelationType::HasCapability, k))
                        && g.contains(&Triplet::new(c, RelationType::MakesProduct, p))
                })
                .count() as u32;
            if w > 0 {
                out.push(WeightedPair { left: k, right: p, weight: w });
            }
        }
    }
    out
}

/// Nested-loop product projection oracle over unordered pairs.
pub fn oracle_projection(g: &KnowledgeGraph) -> Vec<WeightedPair> {
    let ps = g.entities_of(EntityType::Product);
    let mut out = Vec::new();
    for (i, &p) in ps.iter().enumerate() {
        for &q in &ps[i + 1..] {
            let w = g
                .entities_of(EntityType::Company)
                .iter()
                .filter(|&&c| {
                    g.contains(&Triplet::new(c, RelationType::MakesProduct, p))
                        && g.contains(&Triplet::new(c, RelationType::MakesProduct, q))
                })
                .count() as u32;
            if w > 0 {
                out.push(WeightedPair { left: p.min(q), right: p.max(q), weight: w });
            }
        }
    }
    out.sort_by_key(|w| (w.left, w.right));
    out
}

/// Pairwise AUC: wins plus half ties over all positive/negative pairs.
pub fn oracle_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            den += 1.0;
            if si > sj {
                num += 1.0;
            } else if si == sj {
                num += 0.5;
            }
        }
    }
    num / den
}

/// Random scored examples with both classes and frequent ties.
pub fn random_scores<R: Rng>(rng: &mut R, max_len: usize) -> (Vec<f64>, Vec<bool>) {
    let n = rng.random_range(2..=max_len);
    let levels = rng.random_range(1..=50);
    let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    labels[0] = true;
    labels[1] = false;
    let scores = (0..n).map(|_| rng.random_range(0..levels) as f64 / 7.0 - 3.0).collect();
    (scores, labels)
}

/// Set-arithmetic heuristic oracle on an undirected neighbour map.
pub fn oracle_heuristic(adj: &BTreeMap<EntityId, BTreeSet<EntityId>>, u: EntityId, v: EntityId, h: Heuristic) -> f64 {
    let empty = BTreeSet::new();
    let a = adj.get(&u).unwrap_or(&empty);
    let b = adj.get(&v).unwrap_or(&empty);
    let common: Vec<_> = a.intersection(b).collect();
    let deg = |w: &EntityId| adj.get(w).map_or(0, |s| s.len()) as f64;
    match h {
        Heuristic::CommonNeighbors => common.len() as f64,
        Heuristic::Jaccard => {
            let union = a.union(b).count();
            if union == 0 {
                0.0
            } else {
                common.len() as f64 / union as f64
            }
        }
        Heuristic::AdamicAdar => common.iter().filter(|w| deg(w) > 1.0).map(|w| 1.0 / deg(w).ln()).sum(),
        Heuristic::PreferentialAttachment => a.len() as f64 * b.len() as f64,
        Heuristic::ResourceAllocation => common.iter().map(|w| 1.0 / deg(w)).sum(),
    }
}

pub fn undirected(g: &KnowledgeGraph, r: RelationType) -> BTreeMap<EntityId, BTreeSet<EntityId>> {
    let mut adj: BTreeMap<EntityId, BTreeSet<EntityId>> = BTreeMap::new();
    for t in g.triplets_of(r) {
        if t.source != t.destination {
            adj.entry(t.source).or_default().insert(t.destination);
            adj.entry(t.destination).or_default().insert(t.source);
        }
    }
    adj
}

/// Random type-violating triplet over the graph's entities.
pub fn violating_triplet<R: Rng>(rng: &mut R, g: &KnowledgeGraph) -> Triplet {
    loop {
        let n = g.entity_count() as u32;
        let t = Triplet::new(
            rng.random_range(0..n),
            RelationType::ALL[rng.random_range(0..RelationType::COUNT)],
            rng.random_range(0..n),
        );
        if !Ontology.allows(g.entity_type(t.source), t.relation, g.entity_type(t.destination)) {
            return t;
        }
    }
}

/// Block with labelled triplets over a seeded random company graph.
pub fn gradient_fixture(seed: u64) -> (ModelParams, MiniBatchBlock) {
    let mut rng = seeded_rng(seed, 1);
    let mut g = KnowledgeGraph::new();
    let types = [
        (EntityType::Company, 12),
        (EntityType::Product, 8),
        (EntityType::Capability, 4),
        (EntityType::Certification, 3),
        (EntityType::Country, 3),
    ];
    for (t, n) in types {
        for i in 0..n {
            g.add_entity(t, &format!("{i}")).unwrap();
        }
    }
    assert_eq!(g.entity_count(), 30);
    for r in RelationType::ALL {
        let (d, e) = r.signature();
        let (src, dst) = (g.entities_of(d).to_vec(), g.entities_of(e).to_vec());
        for _ in 0..12 {
            let t = Triplet::new(src[rng.random_range(0..src.len())], r, dst[rng.random_range(0..dst.len())]);
            g.add_triplet(t).unwrap();
        }
    }
    let mut triplets: Vec<Triplet> = g.triplets().step_by(5).take(8).collect();
    let mut labels = vec![1.0; triplets.len()];
    for i in 0..6u32 {
        triplets.push(Triplet::new(i, RelationType::BuysFrom, 11 - i));
        labels.push(0.0);
    }
    let mut seeds: Vec<EntityId> = triplets.iter().flat_map(|t| [t.source, t.destination]).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let mut block = sample_block(&g, &seeds, 5, 2, &mut rng).unwrap();
    block.triplets = triplets;
    block.labels = labels;
    let mut params = ModelParams::init(g.entity_count(), 8, 2, seed).unwrap();
    // Perturb the relation diagonals away from all-ones so their gradients are generic.
    for v in params.relations.iter_mut() {
        *v += rng.random_range(-0.5..0.5);
    }
    (params, block)
}

/// Largest relative error between analytic and central-difference gradients
/// over every parameter coordinate, with relative error measured against
/// `max(|analytic|, |numeric|, floor)`.
pub fn max_gradient_error(params: &ModelParams, block: &MiniBatchBlock, step: f64, floor: f64) -> (f64, String) {
    let (_, grads) = loss_and_gradients(params, block).unwrap();
    let names = params.tensor_names();
    let analytic = grads.tensors();
    let mut worst = (0.0, String::new());
    let mut probe = params.clone();
    for (t, name) in names.iter().enumerate() {
        let len = analytic[t].len();
        for i in 0..len {
            let orig = probe.tensors()[t].as_slice().unwrap()[i];
            probe.tensors_mut()[t].as_slice_mut().unwrap()[i] = orig + step;
            let up = forward(block, &probe).unwrap().loss(&block.labels);
            probe.tensors_mut()[t].as_slice_mut().unwrap()[i] = orig - step;
            let down = forward(block, &probe).unwrap().loss(&block.labels);
            probe.tensors_mut()[t].as_slice_mut().unwrap()[i] = orig;
            let numeric = (up - down) / (2.0 * step);
            let a = analytic[t].as_slice().unwrap()[i];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
            if err > worst.0 {
                worst = (err, format!("{name}[{i}]: analytic {a:e}, numeric {numeric:e}"));
            }
        }
    }
    worst
}
