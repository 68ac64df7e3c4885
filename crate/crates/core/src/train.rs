use std::fmt::Write as _;
use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{EvalConfig, EvalSet};
use crate::graph::KnowledgeGraph;
use crate::model::{loss_and_gradients, optimizer_step, AdamConfig, ModelParams, OptimizerState};
use crate::sampling::{seeded_rng, BatchConfig, BatchIterator, CorruptionMode, TripletSplit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Embedding width `d`.
    pub dim: usize,
    /// Encoder depth `K`.
    pub depth: usize,
    /// Neighbours sampled per node, relation and direction at every layer.
    pub fanout: usize,
    /// Project embedding rows to unit norm after every update.
    pub normalize_embeddings: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 32,
            depth: 2,
            fanout: 10,
            normalize_embeddings: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub negatives_per_positive: usize,
    pub corruption: CorruptionMode,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Hide a batch's positives from its own message graph.
    pub hide_targets: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainConfig {
            epochs: 30,
            batch_size: 128,
            negatives_per_positive: 1,
            corruption: CorruptionMode::Uniform,
            learning_rate: 0.02,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            hide_targets: true,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRecord {
    pub step: u64,
    pub epoch: usize,
    pub loss: f64,
    /// Pooled validation AUC, recorded on the last step of each epoch.
    pub val_auc: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub state: OptimizerState,
    pub best_params: ModelParams,
    pub best_state: OptimizerState,
    pub best_epoch: usize,
    pub best_val_auc: Option<f64>,
    pub log: Vec<LossRecord>,
}

impl TrainOutcome {
    pub fn loss_csv(&self) -> String {
        let mut out = String::from("step,epoch,loss,val_auc\n");
        for r in &self.log {
            let val = r.val_auc.map_or(String::new(), |a| format!("{a:.6}"));
            let _ = writeln!(out, "{},{},{:.12},{}", r.step, r.epoch, r.loss, val);
        }
        out
    }

    pub fn save_loss_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.loss_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Minibatch training on the split's training triplets. Validation AUC is
/// pooled over all relations and computed after every epoch; the best epoch
/// is kept alongside the final parameters.
pub fn train(
    full: &KnowledgeGraph,
    split: &TripletSplit,
    model: &ModelConfig,
    config: &TrainConfig,
    eval: &EvalConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    if config.learning_rate.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Config("learning rate must be positive".into()));
    }
    let mut params = ModelParams::init(full.entity_count(), model.dim, model.depth, seed)?;
    if model.normalize_embeddings {
        params.normalize_embeddings();
    }
    let mut state = OptimizerState::new(&params, config.adam());
    let messages = split.training_graph(full)?;
    let validation = EvalSet::build(full, &split.validation, &mut seeded_rng(seed, 0xa11d));
    let batch = BatchConfig {
        batch_size: config.batch_size,
        negatives_per_positive: config.negatives_per_positive,
        mode: config.corruption,
        fanout: model.fanout,
        depth: model.depth,
        hide_targets: config.hide_targets,
    };

    let mut log = Vec::new();
    let mut best = (0usize, None::<f64>, params.clone(), state.clone());
    let mut step = 0u64;
    for epoch in 1..=config.epochs {
        let batches = BatchIterator::new(&split.train, full, &messages, batch, seeded_rng(seed, 0x1000 + epoch as u64))?;
        for block in batches {
            let (loss, grads) = loss_and_gradients(&params, &block)?;
            if !loss.is_finite() {
                return Err(Error::Numerical(format!("loss is {loss} at epoch {epoch}, step {}", step + 1)));
            }
            optimizer_step(&mut params, &grads, &mut state)?;
            if model.normalize_embeddings {
                params.normalize_embeddings();
            }
            step += 1;
            log.push(LossRecord {
                step,
                epoch,
                loss,
                val_auc: None,
            });
        }
        let val_auc = validation.model_auc(&params, &messages, eval.fanout, &mut seeded_rng(seed, 0xa11e))?;
        if let Some(last) = log.last_mut().filter(|r| r.epoch == epoch) {
            last.val_auc = val_auc;
        }
        info!("epoch {epoch}: val_auc {val_auc:?}");
        if val_auc.is_some() && (best.1.is_none() || val_auc > best.1) {
            best = (epoch, val_auc, params.clone(), state.clone());
        }
    }
    Ok(TrainOutcome {
        params,
        state,
        best_epoch: best.0,
        best_val_auc: best.1,
        best_params: best.2,
        best_state: best.3,
        log,
    })
}
