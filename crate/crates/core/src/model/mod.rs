//! Relational GraphSAGE encoder over learnable node embeddings, DistMult
//! decoder, binary cross-entropy loss and hand-derived gradients.

mod checkpoint;
mod decoder;
mod encoder;
mod optim;
mod params;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use decoder::{bce_loss, bce_loss_from_scores, loss_gradient, predict_prob, score, LOSS_EPSILON};
pub use encoder::{backward, encode, forward, loss_and_gradients, ForwardTrace};
pub use optim::{optimizer_step, AdamConfig, OptimizerState};
pub use params::{LayerParams, ModelParams};
