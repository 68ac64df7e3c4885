//! Neighbourhood similarity indices on the undirected `buys_from` graph.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph};
use crate::ontology::{Direction, RelationType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    CommonNeighbors,
    Jaccard,
    AdamicAdar,
    PreferentialAttachment,
    ResourceAllocation,
}

impl Heuristic {
    pub const ALL: [Heuristic; 5] = [
        Heuristic::CommonNeighbors,
        Heuristic::Jaccard,
        Heuristic::AdamicAdar,
        Heuristic::PreferentialAttachment,
        Heuristic::ResourceAllocation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Heuristic::CommonNeighbors => "common_neighbors",
            Heuristic::Jaccard => "jaccard",
            Heuristic::AdamicAdar => "adamic_adar",
            Heuristic::PreferentialAttachment => "preferential_attachment",
            Heuristic::ResourceAllocation => "resource_allocation",
        }
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Heuristic::ALL
            .into_iter()
            .find(|h| h.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown heuristic {s:?}")))
    }
}

/// Sorted undirected neighbour sets of one relation, without self-loops.
#[derive(Debug, Clone)]
pub struct UndirectedView {
    neighbors: Vec<Vec<EntityId>>,
}

impl UndirectedView {
    pub fn new(graph: &KnowledgeGraph, relation: RelationType) -> Self {
        let neighbors = (0..graph.entity_count() as EntityId)
            .map(|u| {
                let mut set: Vec<EntityId> = graph
                    .adjacent(u, relation, Direction::Forward)
                    .iter()
                    .chain(graph.adjacent(u, relation, Direction::Reverse))
                    .copied()
                    .filter(|&v| v != u)
                    .collect();
                set.sort_unstable();
                set.dedup();
                set
            })
            .collect();
        UndirectedView { neighbors }
    }

    pub fn neighbors(&self, u: EntityId) -> &[EntityId] {
        &self.neighbors[u as usize]
    }

    pub fn degree(&self, u: EntityId) -> usize {
        self.neighbors[u as usize].len()
    }

    fn common(&self, u: EntityId, v: EntityId) -> impl Iterator<Item = EntityId> + '_ {
        let (a, b) = (self.neighbors(u), self.neighbors(v));
        let (mut i, mut j) = (0, 0);
        std::iter::from_fn(move || {
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        let w = a[i];
                        i += 1;
                        j += 1;
                        return Some(w);
                    }
                }
            }
            None
        })
    }

    pub fn score(&self, u: EntityId, v: EntityId, heuristic: Heuristic) -> f64 {
        match heuristic {
            Heuristic::CommonNeighbors => self.common(u, v).count() as f64,
            Heuristic::Jaccard => {
                let inter = self.common(u, v).count();
                let union = self.degree(u) + self.degree(v) - inter;
                if union == 0 {
                    0.0
                } else {
                    inter as f64 / union as f64
                }
            }
            Heuristic::AdamicAdar => self
                .common(u, v)
                .map(|w| self.degree(w))
                .filter(|&d| d > 1)
                .map(|d| 1.0 / (d as f64).ln())
                .sum(),
            Heuristic::PreferentialAttachment => (self.degree(u) * self.degree(v)) as f64,
            Heuristic::ResourceAllocation => self.common(u, v).map(|w| 1.0 / self.degree(w) as f64).sum(),
        }
    }
}

/// Scores candidate pairs on the undirected `buys_from` view of `graph`.
pub fn heuristic_scores(graph: &KnowledgeGraph, pairs: &[(EntityId, EntityId)], heuristic: Heuristic) -> Result<Vec<f64>> {
    let view = UndirectedView::new(graph, RelationType::BuysFrom);
    pairs
        .iter()
        .map(|&(u, v)| {
            graph.entity(u)?;
            graph.entity(v)?;
            Ok(view.score(u, v, heuristic))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Triplet;
    use crate::ontology::EntityType;

    fn star(leaves: u32) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        let c = g.add_entity(EntityType::Company, "center").unwrap();
        for i in 0..leaves {
            let l = g.add_entity(EntityType::Company, &format!("leaf{i}")).unwrap();
            g.add_triplet(Triplet::new(l, RelationType::BuysFrom, c)).unwrap();
        }
        g
    }

    #[test]
    fn star_graph() {
        let g = star(5);
        let pa = heuristic_scores(&g, &[(0, 1)], Heuristic::PreferentialAttachment).unwrap();
        assert_eq!(pa, vec![5.0]);
        // Two leaves share only the centre (degree 5).
        assert_eq!(heuristic_scores(&g, &[(1, 2)], Heuristic::CommonNeighbors).unwrap(), vec![1.0]);
        assert_eq!(heuristic_scores(&g, &[(1, 2)], Heuristic::Jaccard).unwrap(), vec![1.0]);
        assert_eq!(heuristic_scores(&g, &[(1, 2)], Heuristic::ResourceAllocation).unwrap(), vec![0.2]);
        let aa = heuristic_scores(&g, &[(1, 2)], Heuristic::AdamicAdar).unwrap()[0];
        assert!((aa - 1.0 / 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn no_shared_neighbors() {
        let g = star(2);
        let mut g = g;
        let x = g.add_entity(EntityType::Company, "x").unwrap();
        for h in [Heuristic::CommonNeighbors, Heuristic::Jaccard, Heuristic::AdamicAdar, Heuristic::ResourceAllocation] {
            assert_eq!(heuristic_scores(&g, &[(1, x)], h).unwrap(), vec![0.0]);
        }
    }

    #[test]
    fn adamic_adar_skips_degree_one() {
        // a - w - b where w has degree 2; c - z where z has degree 1 (self-loop free)
        let mut g = KnowledgeGraph::new();
        let a = g.add_entity(EntityType::Company, "a").unwrap();
        let z = g.add_entity(EntityType::Company, "z").unwrap();
        g.add_triplet(Triplet::new(a, RelationType::BuysFrom, z)).unwrap();
        // Common neighbour of (a, a) is z with degree 1, which is skipped.
        assert_eq!(heuristic_scores(&g, &[(a, a)], Heuristic::AdamicAdar).unwrap(), vec![0.0]);
    }

    #[test]
    fn tags() {
        for h in Heuristic::ALL {
            assert_eq!(h.as_str().parse::<Heuristic>().unwrap(), h);
        }
        assert!("katz".parse::<Heuristic>().is_err());
    }
}
