//! Deduced relations. `capability_produces` comes from counting companies
//! that hold a capability and make a product; `complimentary_product_to`
//! comes from projecting the company-product bipartite graph onto products.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, Triplet};
use crate::ontology::{Direction, EntityType, RelationType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeightedPair {
    pub left: EntityId,
    pub right: EntityId,
    pub weight: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeriveConfig {
    pub capability_cooccurrence_threshold: u32,
    pub projection_weight_threshold: u32,
}

impl Default for DeriveConfig {
    fn default() -> Self {
        DeriveConfig {
            capability_cooccurrence_threshold: 2,
            projection_weight_threshold: 2,
        }
    }
}

impl DeriveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.capability_cooccurrence_threshold < 1 || self.projection_weight_threshold < 1 {
            return Err(Error::Config("derivation thresholds must be >= 1".into()));
        }
        Ok(())
    }
}

fn sorted_pairs(counts: HashMap<(EntityId, EntityId), u32>) -> Vec<WeightedPair> {
    let mut pairs: Vec<WeightedPair> = counts
        .into_iter()
        .map(|((left, right), weight)| WeightedPair {
            left,
            right,
            weight,
        })
        .collect();
    pairs.sort_unstable();
    pairs
}

/// `(capability, product)` pairs weighted by the number of companies holding
/// the capability and making the product.
pub fn cooccurrence_weights(graph: &KnowledgeGraph) -> Vec<WeightedPair> {
    let mut counts = HashMap::new();
    for &company in graph.entities_of(EntityType::Company) {
        let caps = graph.adjacent(company, RelationType::HasCapability, Direction::Forward);
        let prods = graph.adjacent(company, RelationType::MakesProduct, Direction::Forward);
        for &c in caps {
            for &p in prods {
                *counts.entry((c, p)).or_insert(0) += 1;
            }
        }
    }
    sorted_pairs(counts)
}

/// Product pairs `(min id, max id)` weighted by the number of companies
/// making both.
pub fn bipartite_projection(graph: &KnowledgeGraph) -> Vec<WeightedPair> {
    let mut counts = HashMap::new();
    for &company in graph.entities_of(EntityType::Company) {
        // Adjacency lists are sorted, so (prods[i], prods[j]) with i < j is canonical.
        let prods = graph.adjacent(company, RelationType::MakesProduct, Direction::Forward);
        for (i, &p) in prods.iter().enumerate() {
            for &q in &prods[i + 1..] {
                *counts.entry((p, q)).or_insert(0) += 1;
            }
        }
    }
    sorted_pairs(counts)
}

/// Triplets for every pair whose weight reaches `threshold` (inclusive).
pub fn threshold_edges(
    pairs: &[WeightedPair],
    threshold: u32,
    relation: RelationType,
) -> Result<Vec<Triplet>> {
    if !relation.is_derived() {
        return Err(Error::NotDerivable(relation));
    }
    if threshold < 1 {
        return Err(Error::Config("threshold must be >= 1".into()));
    }
    Ok(pairs
        .iter()
        .filter(|p| p.weight >= threshold)
        .map(|p| Triplet::new(p.left, relation, p.right))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistogramBin {
    pub lo: u32,
    /// Inclusive upper edge.
    pub hi: u32,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for b in &self.bins {
            out.push_str(&format!("{},{},{}\n", b.lo, b.hi, b.count));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Contiguous histogram of pair weights from the lowest to the highest
/// occupied bin. Bin `k` covers `[k*width, (k+1)*width - 1]`.
pub fn weight_histogram(pairs: &[WeightedPair], bin_width: u32) -> Result<Histogram> {
    if bin_width < 1 {
        return Err(Error::Config("histogram bin width must be >= 1".into()));
    }
    let Some(min) = pairs.iter().map(|p| p.weight / bin_width).min() else {
        return Ok(Histogram::default());
    };
    let max = pairs.iter().map(|p| p.weight / bin_width).max().unwrap_or(min);
    let mut counts = vec![0usize; (max - min + 1) as usize];
    for p in pairs {
        counts[(p.weight / bin_width - min) as usize] += 1;
    }
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let k = min + i as u32;
            HistogramBin {
                lo: k * bin_width,
                hi: (k + 1) * bin_width - 1,
                count,
            }
        })
        .collect();
    Ok(Histogram { bins })
}

#[derive(Debug, Clone)]
pub struct DerivationSummary {
    pub capability_pairs: Vec<WeightedPair>,
    pub product_pairs: Vec<WeightedPair>,
    pub capability_produces_added: usize,
    pub complimentary_added: usize,
}

/// Replaces both derived relations in `graph` according to `config`.
pub fn derive_relations(graph: &mut KnowledgeGraph, config: &DeriveConfig) -> Result<DerivationSummary> {
    config.validate()?;
    graph.clear_relation(RelationType::CapabilityProduces);
    graph.clear_relation(RelationType::ComplimentaryProductTo);
    let capability_pairs = cooccurrence_weights(graph);
    let product_pairs = bipartite_projection(graph);
    let mut summary = DerivationSummary {
        capability_pairs,
        product_pairs,
        capability_produces_added: 0,
        complimentary_added: 0,
    };
    for t in threshold_edges(
        &summary.capability_pairs,
        config.capability_cooccurrence_threshold,
        RelationType::CapabilityProduces,
    )? {
        summary.capability_produces_added += usize::from(graph.add_triplet(t)?);
    }
    for t in threshold_edges(
        &summary.product_pairs,
        config.projection_weight_threshold,
        RelationType::ComplimentaryProductTo,
    )? {
        summary.complimentary_added += usize::from(graph.add_triplet(t)?);
    }
    Ok(summary)
}
