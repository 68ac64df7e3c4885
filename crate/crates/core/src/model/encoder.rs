//! Layer rule, for `k = 1..=K`:
//!
//! ```text
//! z_k(u) = W_self,k h_{k-1}(u) + sum_slots W_slot,k mean{ h_{k-1}(v) : v in N_slot(u) }
//! h_k(u) = relu(z_k(u))   for k < K
//! h_K(u) = z_K(u)
//! ```
//!
//! Empty neighbour sets contribute nothing. `h_0(u)` is row `u` of the
//! embedding table.

use ndarray::{s, Array2, ArrayView1, Axis};

use super::decoder::{bce_loss_from_scores, loss_gradient, predict_prob};
use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::ontology::RelationSlot;
use crate::sampling::MiniBatchBlock;

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `hidden[k]` is `h_k` for the nodes of frontier `K - k`.
    pub hidden: Vec<Array2<f64>>,
    /// `pre_activation[k - 1]` is `z_k`.
    pub pre_activation: Vec<Array2<f64>>,
    /// Neighbour means per layer and slot; `None` when no node has neighbours
    /// in that slot.
    pub means: Vec<Vec<Option<Array2<f64>>>>,
    /// Local seed indices `(source, destination)` of every scored triplet.
    pub endpoints: Vec<(usize, usize)>,
    pub scores: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl ForwardTrace {
    /// Final embeddings of the seed nodes, in seed order.
    pub fn output(&self) -> &Array2<f64> {
        self.hidden.last().expect("trace has at least h_0")
    }

    pub fn loss(&self, labels: &[f64]) -> f64 {
        bce_loss_from_scores(&self.scores, labels)
    }
}

fn check_shapes(block: &MiniBatchBlock, params: &ModelParams) -> Result<()> {
    if block.depth() != params.depth {
        return Err(Error::Dimension {
            expected: params.depth,
            actual: block.depth(),
        });
    }
    if let Some(&max) = block.nodes.iter().max() {
        if max as usize >= params.entity_count() {
            return Err(Error::UnknownEntity(max));
        }
    }
    Ok(())
}

/// Runs the encoder over a sampled block, without scoring.
pub fn encode(block: &MiniBatchBlock, params: &ModelParams) -> Result<ForwardTrace> {
    check_shapes(block, params)?;
    let depth = params.depth;
    let dim = params.dim;

    let n0 = block.frontier_sizes[depth];
    let mut h0 = Array2::zeros((n0, dim));
    for (i, &node) in block.nodes[..n0].iter().enumerate() {
        h0.row_mut(i).assign(&params.embeddings.row(node as usize));
    }

    let mut hidden = vec![h0];
    let mut pre_activation = Vec::with_capacity(depth);
    let mut means = Vec::with_capacity(depth);
    for k in 1..=depth {
        let hop = &block.hops[depth - k];
        let n_out = block.frontier_sizes[depth - k];
        let layer = &params.layers[k - 1];
        let prev = &hidden[k - 1];

        let mut z = prev.slice(s![..n_out, ..]).dot(&layer.self_weight.t());
        let mut layer_means = Vec::with_capacity(RelationSlot::COUNT);
        for slot in 0..RelationSlot::COUNT {
            let mut mean = None;
            for i in 0..n_out {
                let nbrs = hop.get(i, slot);
                if nbrs.is_empty() {
                    continue;
                }
                let m = mean.get_or_insert_with(|| Array2::<f64>::zeros((n_out, dim)));
                let mut row = m.row_mut(i);
                let w = 1.0 / nbrs.len() as f64;
                for &j in nbrs {
                    row.scaled_add(w, &prev.row(j as usize));
                }
            }
            if let Some(m) = &mean {
                z += &m.dot(&layer.neighbor_weights[slot].t());
            }
            layer_means.push(mean);
        }
        let h = if k < depth { z.mapv(|x| x.max(0.0)) } else { z.clone() };
        pre_activation.push(z);
        means.push(layer_means);
        hidden.push(h);
    }

    Ok(ForwardTrace {
        hidden,
        pre_activation,
        means,
        endpoints: Vec::new(),
        scores: Vec::new(),
        probabilities: Vec::new(),
    })
}

fn distmult(h_u: ArrayView1<f64>, r: ArrayView1<f64>, h_v: ArrayView1<f64>) -> f64 {
    h_u.iter().zip(r).zip(h_v).map(|((a, b), c)| a * b * c).sum()
}

/// Encodes the block and scores its triplets.
pub fn forward(block: &MiniBatchBlock, params: &ModelParams) -> Result<ForwardTrace> {
    let mut trace = encode(block, params)?;
    let out = trace.output();
    let mut endpoints = Vec::with_capacity(block.triplets.len());
    let mut scores = Vec::with_capacity(block.triplets.len());
    for t in &block.triplets {
        let u = block.local_index(t.source).ok_or(Error::UnknownEntity(t.source))?;
        let v = block.local_index(t.destination).ok_or(Error::UnknownEntity(t.destination))?;
        if u >= out.nrows() || v >= out.nrows() {
            return Err(Error::Config("scored triplet endpoint is not a block seed".into()));
        }
        scores.push(distmult(out.row(u), params.relation(t.relation), out.row(v)));
        endpoints.push((u, v));
    }
    trace.probabilities = scores.iter().map(|&s| predict_prob(s)).collect();
    trace.scores = scores;
    trace.endpoints = endpoints;
    Ok(trace)
}

/// Exact gradient of the mean BCE loss of `block.labels` with respect to
/// every parameter. Embedding rows not touched by the block get zero.
pub fn backward(trace: &ForwardTrace, params: &ModelParams, block: &MiniBatchBlock) -> Result<ModelParams> {
    let depth = params.depth;
    if trace.hidden.len() != depth + 1 || trace.scores.len() != block.labels.len() {
        return Err(Error::Config("trace does not match parameters or block".into()));
    }
    if trace.output().ncols() != params.dim {
        return Err(Error::Dimension {
            expected: params.dim,
            actual: trace.output().ncols(),
        });
    }
    let mut grads = params.zeros_like();
    let dscore = loss_gradient(&trace.probabilities, &block.labels);

    let out = trace.output();
    let mut dh = Array2::<f64>::zeros(out.dim());
    for ((t, &(u, v)), &g) in block.triplets.iter().zip(&trace.endpoints).zip(&dscore) {
        if g == 0.0 {
            continue;
        }
        let r = params.relation(t.relation);
        let (hu, hv) = (out.row(u), out.row(v));
        let mut gr = grads.relations.row_mut(t.relation.index());
        for i in 0..params.dim {
            gr[i] += g * hu[i] * hv[i];
        }
        let du = &hv * &r * g;
        let dv = &hu * &r * g;
        dh.row_mut(u).scaled_add(1.0, &du);
        dh.row_mut(v).scaled_add(1.0, &dv);
    }

    for k in (1..=depth).rev() {
        let hop = &block.hops[depth - k];
        let n_out = block.frontier_sizes[depth - k];
        let layer = &params.layers[k - 1];
        let glayer = &mut grads.layers[k - 1];
        let prev = &trace.hidden[k - 1];

        let mut dz = dh;
        if k < depth {
            dz.zip_mut_with(&trace.pre_activation[k - 1], |d, &z| {
                if z <= 0.0 {
                    *d = 0.0;
                }
            });
        }

        let mut dprev = Array2::<f64>::zeros(prev.dim());
        glayer.self_weight += &dz.t().dot(&prev.slice(s![..n_out, ..]));
        dprev.slice_mut(s![..n_out, ..]).assign(&dz.dot(&layer.self_weight));

        for slot in 0..RelationSlot::COUNT {
            let Some(mean) = &trace.means[k - 1][slot] else {
                continue;
            };
            glayer.neighbor_weights[slot] += &dz.t().dot(mean);
            let dmean = dz.dot(&layer.neighbor_weights[slot]);
            for (i, drow) in dmean.axis_iter(Axis(0)).enumerate() {
                let nbrs = hop.get(i, slot);
                if nbrs.is_empty() {
                    continue;
                }
                let w = 1.0 / nbrs.len() as f64;
                for &j in nbrs {
                    dprev.row_mut(j as usize).scaled_add(w, &drow);
                }
            }
        }
        dh = dprev;
    }

    for (i, row) in dh.axis_iter(Axis(0)).enumerate() {
        grads
            .embeddings
            .row_mut(block.nodes[i] as usize)
            .scaled_add(1.0, &row);
    }
    Ok(grads)
}

/// Forward and backward in one call, returning the batch loss.
pub fn loss_and_gradients(params: &ModelParams, block: &MiniBatchBlock) -> Result<(f64, ModelParams)> {
    let trace = forward(block, params)?;
    let loss = trace.loss(&block.labels);
    let grads = backward(&trace, params, block)?;
    Ok((loss, grads))
}
