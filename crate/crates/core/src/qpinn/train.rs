use std::cell::Cell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{ModelConfig, ModelParams};
use crate::error::{Error, Result};
use crate::optim::{adam_step, lbfgs_minimize_from, AdamConfig, AdamState, LbfgsConfig, LbfgsStatus};
use crate::reference::{metrics, FieldGrid};

use super::collocation::{grid_coord, make_collocation};
use super::loss::{loss_gradient, LossBreakdown, LossConfig, DEFAULT_LAMBDA_B};
use super::model::{build_model, FieldModel, GradientMethod, Request};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerConfig {
    Lbfgs(LbfgsConfig),
    Adam(AdamConfig),
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::Lbfgs(LbfgsConfig::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSize {
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSize {
    fn default() -> Self {
        Self { nx: 50, ny: 50 }
    }
}

fn default_lambda_b() -> f64 {
    DEFAULT_LAMBDA_B
}

/// Everything a training run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub reynolds: f64,
    #[serde(default = "default_lambda_b")]
    pub lambda_b: f64,
    pub epochs: usize,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSize,
    #[serde(default)]
    pub gradient: GradientMethod,
}

impl TrainConfig {
    pub fn new(model: ModelConfig, reynolds: f64, epochs: usize) -> Self {
        Self {
            model,
            reynolds,
            lambda_b: DEFAULT_LAMBDA_B,
            epochs,
            optimizer: OptimizerConfig::default(),
            seed: 0,
            grid: GridSize::default(),
            gradient: GradientMethod::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reynolds > 0.0 && self.reynolds.is_finite()) {
            return Err(Error::Config(format!("reynolds must be positive, got {}", self.reynolds)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.lambda_b >= 0.0 && self.lambda_b.is_finite()) {
            return Err(Error::Config(format!("lambda_b must be non-negative, got {}", self.lambda_b)));
        }
        self.model.validate()?;
        make_collocation(self.grid.nx, self.grid.ny)?;
        Ok(())
    }

    pub fn loss(&self) -> LossConfig {
        LossConfig {
            reynolds: self.reynolds,
            lambda_b: self.lambda_b,
        }
    }
}

/// One row of the loss history.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: LossBreakdown,
    /// Speed rel-L2 against the reference, if one was given.
    pub rel_l2_u: Option<f64>,
    pub rel_l2_p: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainStatus {
    Completed,
    Converged,
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Epoch 0 is the initial state.
    pub history: Vec<EpochRecord>,
    pub status: TrainStatus,
}

impl TrainOutcome {
    pub fn initial_loss(&self) -> f64 {
        self.history[0].loss.total
    }

    pub fn final_loss(&self) -> f64 {
        self.history.last().expect("non-empty history").loss.total
    }
}

/// Model fields at the nodes of an `nx × ny` grid.
pub fn predict_grid(model: &dyn FieldModel, theta: &[f64], nx: usize, ny: usize) -> Result<FieldGrid> {
    let nodes: Vec<(f64, f64)> = (0..nx * ny)
        .map(|k| (grid_coord(k % nx, nx), grid_coord(k / nx, ny)))
        .collect();
    let values = nodes
        .par_iter()
        .map(|&(x, y)| {
            let f = model.fields(x, y, theta, Request::VALUES)?;
            let (psi, p) = (f.psi.expect("ψ"), f.p.expect("p"));
            Ok((psi.coeffs()[2], -psi.coeffs()[1], p.value()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut g = FieldGrid::zeros(nx, ny);
    for (k, (u, v, p)) in values.into_iter().enumerate() {
        g.u[k] = u;
        g.v[k] = v;
        g.p[k] = p;
    }
    Ok(g)
}

fn non_finite(what: &'static str, epoch: usize, theta: &[f64]) -> Error {
    Error::NonFinite {
        what,
        epoch,
        params: theta.to_vec(),
    }
}

/// Train from a seeded initialization.
pub fn train(config: &TrainConfig, reference: Option<&FieldGrid>) -> Result<TrainOutcome> {
    train_with(config, reference, &mut |_| {})
}

/// [`train`] with a callback after every recorded epoch.
pub fn train_with(
    config: &TrainConfig,
    reference: Option<&FieldGrid>,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    config.validate()?;
    let model = build_model(&config.model, config.gradient)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let theta0 = model.init_params(&mut rng);
    train_from(model.as_ref(), config, theta0, reference, observer)
}

/// Train a built model from a given starting point.
pub fn train_from(
    model: &dyn FieldModel,
    config: &TrainConfig,
    theta0: Vec<f64>,
    reference: Option<&FieldGrid>,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    config.validate()?;
    let colloc = make_collocation(config.grid.nx, config.grid.ny)?;
    let loss_cfg = config.loss();
    let mut history = Vec::with_capacity(config.epochs + 1);
    let mut record = |epoch: usize, loss: LossBreakdown, theta: &[f64]| -> Result<()> {
        let (rel_l2_u, rel_l2_p) = match reference {
            Some(r) => {
                let m = metrics(&predict_grid(model, theta, r.nx, r.ny)?, r)?;
                (Some(m.speed.rel_l2), Some(m.pressure.rel_l2))
            }
            None => (None, None),
        };
        let rec = EpochRecord {
            epoch,
            loss,
            rel_l2_u,
            rel_l2_p,
        };
        observer(&rec);
        history.push(rec);
        Ok(())
    };
    let evaluate = |theta: &[f64], epoch: usize| -> Result<(LossBreakdown, Vec<f64>)> {
        let (loss, grad) = loss_gradient(model, theta, &colloc, &loss_cfg)?;
        if !loss.is_finite() {
            return Err(non_finite("loss", epoch, theta));
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(non_finite("gradient", epoch, theta));
        }
        Ok((loss, grad))
    };

    let (theta, status) = match config.optimizer {
        OptimizerConfig::Adam(adam) => {
            let mut theta = theta0;
            let mut state = AdamState::new(adam, theta.len());
            for epoch in 0..config.epochs {
                let (loss, grad) = evaluate(&theta, epoch)?;
                record(epoch, loss, &theta)?;
                adam_step(&mut state, &mut theta, &grad)?;
            }
            let (loss, _) = evaluate(&theta, config.epochs)?;
            record(config.epochs, loss, &theta)?;
            (theta, TrainStatus::Completed)
        }
        OptimizerConfig::Lbfgs(lbfgs) => {
            let (loss0, grad0) = evaluate(&theta0, 0)?;
            record(0, loss0, &theta0)?;
            let last = Cell::new(loss0);
            let epoch = Cell::new(1usize);
            let result = lbfgs_minimize_from(
                |theta: &[f64]| {
                    let (loss, grad) = evaluate(theta, epoch.get())?;
                    last.set(loss);
                    Ok((loss.total, grad))
                },
                &theta0,
                (loss0.total, grad0),
                config.epochs,
                &lbfgs,
                |k, theta, _, _| {
                    record(k, last.get(), theta)?;
                    epoch.set(k + 1);
                    Ok(())
                },
            )?;
            let status = match result.status {
                LbfgsStatus::MaxIterations => TrainStatus::Completed,
                LbfgsStatus::GradientTolerance => TrainStatus::Converged,
                LbfgsStatus::LineSearchFailed => TrainStatus::LineSearchFailed,
            };
            (result.theta, status)
        }
    };
    let params = ModelParams::new(theta, model.layout().clone())?;
    Ok(TrainOutcome {
        params,
        history,
        status,
    })
}
