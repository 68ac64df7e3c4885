use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, Triplet};
use crate::ontology::RelationType;

pub const MAX_CORRUPTION_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorruptionKind {
    SourceSwap,
    DestinationSwap,
    RelationResample,
}

/// How a corruption kind is chosen for each attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionMode {
    SourceSwap,
    DestinationSwap,
    RelationResample,
    /// Uniform over the three kinds.
    Uniform,
    /// Source or destination swap with equal probability.
    EndpointSwap,
}

impl CorruptionMode {
    fn pick<R: Rng + ?Sized>(self, rng: &mut R) -> CorruptionKind {
        use CorruptionKind::*;
        match self {
            CorruptionMode::SourceSwap => SourceSwap,
            CorruptionMode::DestinationSwap => DestinationSwap,
            CorruptionMode::RelationResample => RelationResample,
            CorruptionMode::Uniform => [SourceSwap, DestinationSwap, RelationResample][rng.random_range(0..3)],
            CorruptionMode::EndpointSwap => {
                if rng.random_bool(0.5) {
                    SourceSwap
                } else {
                    DestinationSwap
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegativeSample {
    pub triplet: Triplet,
    pub kind: CorruptionKind,
}

impl NegativeSample {
    pub fn label(&self) -> f64 {
        0.0
    }
}

/// Corrupts a positive triplet into one that is absent from `graph`.
///
/// Endpoint swaps draw the replacement uniformly among entities of the same
/// type as the replaced endpoint. Relation resampling draws uniformly from the
/// other six relation types and may produce an ontology-violating triplet.
pub fn corrupt<R: Rng + ?Sized>(
    triplet: &Triplet,
    graph: &KnowledgeGraph,
    rng: &mut R,
    mode: CorruptionMode,
) -> Result<NegativeSample> {
    for _ in 0..MAX_CORRUPTION_ATTEMPTS {
        let kind = mode.pick(rng);
        let mut candidate = *triplet;
        match kind {
            CorruptionKind::SourceSwap => {
                let pool = graph.entities_of(graph.entity_type(triplet.source));
                candidate.source = pool[rng.random_range(0..pool.len())];
            }
            CorruptionKind::DestinationSwap => {
                let pool = graph.entities_of(graph.entity_type(triplet.destination));
                candidate.destination = pool[rng.random_range(0..pool.len())];
            }
            CorruptionKind::RelationResample => {
                let mut i = rng.random_range(0..RelationType::COUNT - 1);
                if i >= triplet.relation.index() {
                    i += 1;
                }
                candidate.relation = RelationType::ALL[i];
            }
        }
        if !graph.contains(&candidate) {
            return Ok(NegativeSample {
                triplet: candidate,
                kind,
            });
        }
    }
    Err(Error::NegativesExhausted(
        triplet.source,
        triplet.relation,
        triplet.destination,
        MAX_CORRUPTION_ATTEMPTS,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::EntityType;
    use crate::sampling::seeded_rng;

    #[test]
    fn exhaustion_when_no_negative_exists() {
        let mut g = KnowledgeGraph::new();
        let ids: Vec<_> = (0..3)
            .map(|i| g.add_entity(EntityType::Company, &format!("C{i}")).unwrap())
            .collect();
        for &d in &ids {
            g.add_triplet(Triplet::new(ids[0], RelationType::BuysFrom, d)).unwrap();
        }
        let t = Triplet::new(ids[0], RelationType::BuysFrom, ids[1]);
        let mut rng = seeded_rng(1, 0);
        assert!(matches!(
            corrupt(&t, &g, &mut rng, CorruptionMode::DestinationSwap),
            Err(Error::NegativesExhausted(..))
        ));
        // The source side still has room.
        let n = corrupt(&t, &g, &mut rng, CorruptionMode::SourceSwap).unwrap();
        assert_eq!(n.kind, CorruptionKind::SourceSwap);
        assert_ne!(n.triplet.source, ids[0]);
    }

    #[test]
    fn relation_resample_excludes_original() {
        let mut g = KnowledgeGraph::new();
        let a = g.add_entity(EntityType::Company, "C1").unwrap();
        let b = g.add_entity(EntityType::Company, "C2").unwrap();
        let t = Triplet::new(a, RelationType::BuysFrom, b);
        g.add_triplet(t).unwrap();
        let mut rng = seeded_rng(3, 0);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..500 {
            let n = corrupt(&t, &g, &mut rng, CorruptionMode::RelationResample).unwrap();
            assert_ne!(n.triplet.relation, RelationType::BuysFrom);
            assert_eq!((n.triplet.source, n.triplet.destination), (a, b));
            seen.insert(n.triplet.relation);
        }
        assert_eq!(seen.len(), 6);
    }
}
