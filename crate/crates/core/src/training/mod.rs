//! Joint optimization of the generation loss and the weakly supervised
//! sentence-selector loss, with checkpointing and exact resume.

mod checkpoint;
mod config;
mod loss;
mod optim;
mod trainer;

pub use checkpoint::{Checkpoint, TrainState};
pub use config::TrainConfig;
pub use loss::{
    accumulate_gradients, batch_mean, bce_loss, example_loss, loss_and_gradients, mle_loss,
    total_loss, LossParts, BCE_EPS,
};
pub use optim::{clip_global_norm, global_norm, Adam, AdamConfig};
pub use trainer::{
    make_batches, train, validate, TrainExample, TrainOptions, TrainOutcome, ValidationScores,
    BEST_CHECKPOINT, DIVERGENCE_DUMP, LAST_CHECKPOINT, LOG_FILE,
};
