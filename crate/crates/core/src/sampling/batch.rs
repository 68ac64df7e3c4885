use std::collections::HashSet;

use log::debug;
use rand::seq::SliceRandom;

use super::block::{MiniBatchBlock, NeighborSampler};
use super::negative::{corrupt, CorruptionMode};
use super::SeededRng;
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, Triplet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchConfig {
    pub batch_size: usize,
    pub negatives_per_positive: usize,
    pub mode: CorruptionMode,
    pub fanout: usize,
    pub depth: usize,
    /// Remove the batch's positive triplets from the message graph while
    /// sampling its block.
    pub hide_targets: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            batch_size: 256,
            negatives_per_positive: 1,
            mode: CorruptionMode::Uniform,
            fanout: 10,
            depth: 2,
            hide_targets: true,
        }
    }
}

/// One epoch of minibatches over the training positives.
///
/// Positives are shuffled once at construction; each is followed by its
/// negatives, which are filtered against `full` (every known fact).
pub struct BatchIterator<'a> {
    order: Vec<Triplet>,
    cursor: usize,
    full: &'a KnowledgeGraph,
    messages: &'a KnowledgeGraph,
    config: BatchConfig,
    rng: SeededRng,
}

impl<'a> BatchIterator<'a> {
    pub fn new(
        positives: &[Triplet],
        full: &'a KnowledgeGraph,
        messages: &'a KnowledgeGraph,
        config: BatchConfig,
        mut rng: SeededRng,
    ) -> Result<Self> {
        if config.batch_size < 1 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        NeighborSampler::new(messages, config.fanout, config.depth)?;
        let mut order = positives.to_vec();
        order.shuffle(&mut rng);
        Ok(BatchIterator {
            order,
            cursor: 0,
            full,
            messages,
            config,
            rng,
        })
    }

    pub fn batch_count(&self) -> usize {
        self.order.len().div_ceil(self.config.batch_size)
    }
}

impl Iterator for BatchIterator<'_> {
    type Item = MiniBatchBlock;

    fn next(&mut self) -> Option<MiniBatchBlock> {
        if self.cursor >= self.order.len() {
            return None;
        }
        let end = (self.cursor + self.config.batch_size).min(self.order.len());
        let positives = &self.order[self.cursor..end];
        self.cursor = end;

        let per = self.config.negatives_per_positive;
        let mut triplets = Vec::with_capacity(positives.len() * (1 + per));
        let mut labels = Vec::with_capacity(triplets.capacity());
        for p in positives {
            triplets.push(*p);
            labels.push(1.0);
            for _ in 0..per {
                match corrupt(p, self.full, &mut self.rng, self.config.mode) {
                    Ok(n) => {
                        triplets.push(n.triplet);
                        labels.push(n.label());
                    }
                    Err(e) => debug!("skipping negative: {e}"),
                }
            }
        }

        let seeds: Vec<_> = triplets.iter().flat_map(|t| [t.source, t.destination]).collect();
        let hidden: HashSet<Triplet> = if self.config.hide_targets {
            positives.iter().copied().collect()
        } else {
            HashSet::new()
        };
        let sampler = NeighborSampler::new(self.messages, self.config.fanout, self.config.depth)
            .expect("validated in constructor")
            .hiding(&hidden);
        let mut block = sampler
            .sample(&seeds, &mut self.rng)
            .expect("batch endpoints come from the graph");
        block.triplets = triplets;
        block.labels = labels;
        Some(block)
    }
}
