use std::collections::{HashMap, HashSet};

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, Triplet};
use crate::ontology::{Direction, RelationSlot};

/// Neighbours sampled for every node of one frontier, per relation slot.
/// Indices are local indices into the next (wider) frontier.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HopSamples {
    neighbors: Vec<Vec<u32>>,
}

impl HopSamples {
    pub fn node_count(&self) -> usize {
        self.neighbors.len() / RelationSlot::COUNT
    }

    pub fn get(&self, node: usize, slot: usize) -> &[u32] {
        &self.neighbors[node * RelationSlot::COUNT + slot]
    }
}

/// Sampled computation graph for a set of seed nodes, plus the scored
/// triplets of a minibatch.
///
/// Local node indices are stable across hops: `frontier(j)` is the prefix
/// `nodes[..frontier_sizes[j]]`, with `frontier(0)` the seeds and each
/// frontier containing the previous one. `hops[j]` holds the neighbours of
/// `frontier(j)` drawn from `frontier(j + 1)`. Layer `k` of the encoder
/// computes embeddings for `frontier(K - k)` from `hops[K - k]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MiniBatchBlock {
    pub nodes: Vec<EntityId>,
    pub frontier_sizes: Vec<usize>,
    pub hops: Vec<HopSamples>,
    pub fanout: usize,
    pub triplets: Vec<Triplet>,
    pub labels: Vec<f64>,
    local: HashMap<EntityId, u32>,
}

impl MiniBatchBlock {
    pub fn depth(&self) -> usize {
        self.hops.len()
    }

    pub fn seeds(&self) -> &[EntityId] {
        &self.nodes[..self.frontier_sizes[0]]
    }

    pub fn frontier(&self, hop: usize) -> &[EntityId] {
        &self.nodes[..self.frontier_sizes[hop]]
    }

    pub fn local_index(&self, node: EntityId) -> Option<usize> {
        self.local.get(&node).map(|&i| i as usize)
    }

    /// Checks the frontier-closure and fan-out invariants.
    pub fn validate(&self) -> Result<()> {
        let depth = self.depth();
        let bad = |msg: String| Err(Error::Config(format!("malformed block: {msg}")));
        if self.frontier_sizes.len() != depth + 1 {
            return bad("frontier count does not match depth".into());
        }
        if self.frontier_sizes.windows(2).any(|w| w[0] > w[1]) || self.frontier_sizes[depth] != self.nodes.len() {
            return bad("frontiers are not nested".into());
        }
        for (j, hop) in self.hops.iter().enumerate() {
            if hop.node_count() != self.frontier_sizes[j] {
                return bad(format!("hop {j} covers the wrong node count"));
            }
            for list in &hop.neighbors {
                if list.len() > self.fanout {
                    return bad(format!("hop {j} exceeds fan-out"));
                }
                if list.iter().any(|&n| n as usize >= self.frontier_sizes[j + 1]) {
                    return bad(format!("hop {j} references a node outside the next frontier"));
                }
            }
        }
        for t in &self.triplets {
            if !self.local.get(&t.source).is_some_and(|&i| (i as usize) < self.frontier_sizes[0])
                || !self.local.get(&t.destination).is_some_and(|&i| (i as usize) < self.frontier_sizes[0])
            {
                return bad("triplet endpoint is not a seed".into());
            }
        }
        if self.labels.len() != self.triplets.len() {
            return bad("label count differs from triplet count".into());
        }
        Ok(())
    }
}

/// Uniform fan-out neighbour sampler over a message graph.
#[derive(Debug, Clone)]
pub struct NeighborSampler<'g> {
    graph: &'g KnowledgeGraph,
    fanout: usize,
    depth: usize,
    hidden: Option<&'g HashSet<Triplet>>,
}

impl<'g> NeighborSampler<'g> {
    pub fn new(graph: &'g KnowledgeGraph, fanout: usize, depth: usize) -> Result<Self> {
        if fanout < 1 || depth < 1 {
            return Err(Error::Config("fan-out and depth must be >= 1".into()));
        }
        Ok(NeighborSampler {
            graph,
            fanout,
            depth,
            hidden: None,
        })
    }

    /// Edges that must not be used as messages (e.g. the supervised targets).
    pub fn hiding(mut self, hidden: &'g HashSet<Triplet>) -> Self {
        self.hidden = Some(hidden).filter(|h| !h.is_empty());
        self
    }

    pub fn sample<R: Rng + ?Sized>(&self, seeds: &[EntityId], rng: &mut R) -> Result<MiniBatchBlock> {
        let mut block = MiniBatchBlock {
            fanout: self.fanout,
            ..Default::default()
        };
        for &s in seeds {
            self.graph.entity(s)?;
            if let std::collections::hash_map::Entry::Vacant(e) = block.local.entry(s) {
                e.insert(block.nodes.len() as u32);
                block.nodes.push(s);
            }
        }
        block.frontier_sizes.push(block.nodes.len());

        let mut scratch = Vec::new();
        for _ in 0..self.depth {
            let current = block.nodes.len();
            let mut neighbors = Vec::with_capacity(current * RelationSlot::COUNT);
            for i in 0..current {
                let node = block.nodes[i];
                for slot in RelationSlot::all() {
                    let candidates = self.candidates(node, slot, &mut scratch);
                    let picked: Vec<u32> = if candidates.len() <= self.fanout {
                        candidates.iter().map(|&v| block.intern(v)).collect()
                    } else {
                        let mut idx = index::sample(rng, candidates.len(), self.fanout).into_vec();
                        idx.sort_unstable();
                        idx.into_iter().map(|k| block.intern(candidates[k])).collect()
                    };
                    neighbors.push(picked);
                }
            }
            block.hops.push(HopSamples { neighbors });
            block.frontier_sizes.push(block.nodes.len());
        }
        Ok(block)
    }

    fn candidates<'a>(&'a self, node: EntityId, slot: RelationSlot, scratch: &'a mut Vec<EntityId>) -> &'a [EntityId] {
        let all = self.graph.adjacent(node, slot.relation, slot.direction);
        let Some(hidden) = self.hidden else {
            return all;
        };
        scratch.clear();
        scratch.extend(all.iter().copied().filter(|&v| {
            let t = match slot.direction {
                Direction::Forward => Triplet::new(node, slot.relation, v),
                Direction::Reverse => Triplet::new(v, slot.relation, node),
            };
            !hidden.contains(&t)
        }));
        scratch
    }
}

impl MiniBatchBlock {
    fn intern(&mut self, node: EntityId) -> u32 {
        let next = self.nodes.len() as u32;
        let id = *self.local.entry(node).or_insert(next);
        if id == next {
            self.nodes.push(node);
        }
        id
    }
}

/// Samples a depth-`depth` block around `seeds` with per-slot fan-out `fanout`.
pub fn sample_block<R: Rng + ?Sized>(
    graph: &KnowledgeGraph,
    seeds: &[EntityId],
    fanout: usize,
    depth: usize,
    rng: &mut R,
) -> Result<MiniBatchBlock> {
    NeighborSampler::new(graph, fanout, depth)?.sample(seeds, rng)
}
