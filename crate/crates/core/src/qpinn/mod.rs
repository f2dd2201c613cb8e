//! The hybrid physics-informed model: collocation, field evaluation,
//! residuals, loss, gradients and training.

mod artifacts;
mod collocation;
mod loss;
pub mod model;
mod physics;
mod train;

pub use collocation::{grid_coord, make_collocation, CollocationSet};
pub use loss::{loss_gradient, total_loss, LossBreakdown, LossConfig, DEFAULT_LAMBDA_B};
pub use model::{build_model, eval_fields, FieldModel, GradientMethod, QpinnModel, Request, ANGLE_INIT};
pub use physics::{momentum_residuals, velocities, FieldSample, Velocities};
pub use train::{
    predict_grid, train, train_from, train_with, EpochRecord, GridSize, OptimizerConfig, TrainConfig, TrainOutcome,
    TrainStatus,
};
pub use artifacts::{write_history_csv, Checkpoint, HISTORY_HEADER};
