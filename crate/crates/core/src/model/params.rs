use ndarray::{Array2, ArrayView1};
use rand::Rng;

use crate::error::{Error, Result};
use crate::ontology::{RelationSlot, RelationType};
use crate::sampling::seeded_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// `d × d`, applied to the node's own previous embedding.
    pub self_weight: Array2<f64>,
    /// One `d × d` matrix per relation slot, applied to the neighbour mean.
    pub neighbor_weights: Vec<Array2<f64>>,
}

/// All learnable tensors. The same shape doubles as a gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub dim: usize,
    pub depth: usize,
    /// `|V| × d` node feature table.
    pub embeddings: Array2<f64>,
    pub layers: Vec<LayerParams>,
    /// `7 × d`; row `r` is the diagonal of the relation's DistMult matrix.
    pub relations: Array2<f64>,
}

impl ModelParams {
    pub fn zeros(entity_count: usize, dim: usize, depth: usize) -> Self {
        let layer = LayerParams {
            self_weight: Array2::zeros((dim, dim)),
            neighbor_weights: vec![Array2::zeros((dim, dim)); RelationSlot::COUNT],
        };
        ModelParams {
            dim,
            depth,
            embeddings: Array2::zeros((entity_count, dim)),
            layers: vec![layer; depth],
            relations: Array2::zeros((RelationType::COUNT, dim)),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.entity_count(), self.dim, self.depth)
    }

    /// Uniform embeddings in `±sqrt(6/d)`, Glorot-uniform weights and
    /// all-ones relation diagonals.
    pub fn init(entity_count: usize, dim: usize, depth: usize, seed: u64) -> Result<Self> {
        if dim < 1 || depth < 1 {
            return Err(Error::Config("embedding width and depth must be >= 1".into()));
        }
        let mut p = Self::zeros(entity_count, dim, depth);
        let mut rng = seeded_rng(seed, 0x1e17);
        let mut fill = |a: &mut Array2<f64>, bound: f64| {
            a.iter_mut().for_each(|x| *x = rng.random_range(-bound..=bound));
        };
        fill(&mut p.embeddings, (6.0 / dim as f64).sqrt());
        let glorot = (6.0 / (2 * dim) as f64).sqrt();
        for layer in &mut p.layers {
            fill(&mut layer.self_weight, glorot);
            for w in &mut layer.neighbor_weights {
                fill(w, glorot);
            }
        }
        p.relations.fill(1.0);
        Ok(p)
    }

    pub fn entity_count(&self) -> usize {
        self.embeddings.nrows()
    }

    pub fn relation(&self, r: RelationType) -> ArrayView1<'_, f64> {
        self.relations.row(r.index())
    }

    /// Stable tensor names in serialization order.
    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = vec!["embeddings".to_string()];
        for k in 0..self.depth {
            names.push(format!("layer{}.self", k + 1));
            for slot in RelationSlot::all() {
                names.push(format!("layer{}.{}.{}", k + 1, slot.relation, slot.direction.as_str()));
            }
        }
        names.push("relations".to_string());
        names
    }

    /// Tensors in the order of [`tensor_names`](Self::tensor_names).
    pub fn tensors(&self) -> Vec<&Array2<f64>> {
        let mut out = vec![&self.embeddings];
        for layer in &self.layers {
            out.push(&layer.self_weight);
            out.extend(layer.neighbor_weights.iter());
        }
        out.push(&self.relations);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Array2<f64>> {
        let mut out = vec![&mut self.embeddings];
        for layer in &mut self.layers {
            out.push(&mut layer.self_weight);
            out.extend(layer.neighbor_weights.iter_mut());
        }
        out.push(&mut self.relations);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    pub fn same_shape(&self, other: &ModelParams) -> bool {
        self.dim == other.dim
            && self.depth == other.depth
            && self.tensors().iter().zip(other.tensors()).all(|(a, b)| a.dim() == b.dim())
    }

    /// Rescales every embedding row to unit Euclidean norm.
    pub fn normalize_embeddings(&mut self) {
        for mut row in self.embeddings.rows_mut() {
            let norm = row.dot(&row).sqrt();
            if norm > 0.0 {
                row /= norm;
            }
        }
    }
}
