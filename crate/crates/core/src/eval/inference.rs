use std::collections::HashMap;

use ndarray::Array2;
use rand::Rng;

use crate::error::Result;
use crate::graph::{EntityId, KnowledgeGraph, Triplet};
use crate::model::{encode, predict_prob, ModelParams};
use crate::sampling::NeighborSampler;

/// Seeds per sampled block during inference.
pub const INFERENCE_CHUNK: usize = 512;

/// Final-layer embeddings for `nodes` (duplicates allowed), computed over
/// the `messages` graph in chunks of [`INFERENCE_CHUNK`] distinct seeds.
pub fn embed_nodes<R: Rng + ?Sized>(
    params: &ModelParams,
    messages: &KnowledgeGraph,
    nodes: &[EntityId],
    fanout: usize,
    rng: &mut R,
) -> Result<(Vec<EntityId>, Array2<f64>)> {
    let mut unique: Vec<EntityId> = Vec::new();
    let mut seen = HashMap::new();
    for &n in nodes {
        seen.entry(n).or_insert_with(|| {
            unique.push(n);
        });
    }
    let sampler = NeighborSampler::new(messages, fanout, params.depth)?;
    let mut out = Array2::zeros((unique.len(), params.dim));
    for (c, chunk) in unique.chunks(INFERENCE_CHUNK).enumerate() {
        let block = sampler.sample(chunk, rng)?;
        let trace = encode(&block, params)?;
        let h = trace.output();
        for (i, _) in chunk.iter().enumerate() {
            out.row_mut(c * INFERENCE_CHUNK + i).assign(&h.row(i));
        }
    }
    Ok((unique, out))
}

/// DistMult scores of `triplets` with embeddings computed over `messages`.
pub fn score_triplets<R: Rng + ?Sized>(
    params: &ModelParams,
    messages: &KnowledgeGraph,
    triplets: &[Triplet],
    fanout: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let endpoints: Vec<EntityId> = triplets.iter().flat_map(|t| [t.source, t.destination]).collect();
    let (ids, h) = embed_nodes(params, messages, &endpoints, fanout, rng)?;
    let row: HashMap<EntityId, usize> = ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    Ok(triplets
        .iter()
        .map(|t| {
            let (u, v) = (h.row(row[&t.source]), h.row(row[&t.destination]));
            let r = params.relation(t.relation);
            u.iter().zip(r).zip(v).map(|((a, b), c)| a * b * c).sum()
        })
        .collect())
}

pub fn probabilities(scores: &[f64]) -> Vec<f64> {
    scores.iter().map(|&s| predict_prob(s)).collect()
}
