//! Mini-batch Adam with dev-F1 early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Stance;
use crate::error::{Error, Result};
use crate::evaluation::compute_metrics;
use crate::network::{cross_entropy, Model, ModelInput, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub patience: usize,
    pub seed: u64,
    /// Weight of the question/perspective consistency penalty; 0 disables it.
    pub consistency_weight: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 8,
            lr: 2e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            patience: 5,
            seed: 0,
            consistency_weight: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.patience > self.epochs {
            return bad("patience exceeds the number of epochs");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("adam betas must lie in [0, 1)");
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return bad("adam eps must be positive");
        }
        if !(self.consistency_weight >= 0.0 && self.consistency_weight.is_finite()) {
            return bad("consistency weight must be non-negative");
        }
        Ok(())
    }
}

/// One labelled sequence ready for the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub input: ModelInput,
    /// Question-only input, used by the consistency penalty.
    pub question: Option<ModelInput>,
    pub gold: Stance,
}

/// Mean cross-entropy over a batch.
pub fn cross_entropy_loss(probs: &[Vec<f64>], golds: &[Stance]) -> f64 {
    if probs.is_empty() {
        return 0.0;
    }
    probs
        .iter()
        .zip(golds)
        .map(|(p, &g)| cross_entropy(p, g))
        .sum::<f64>()
        / probs.len() as f64
}

/// First and second moment estimates, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: ModelParams,
    pub v: ModelParams,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam step. Fails without touching the parameters when
/// any gradient is non-finite.
pub fn adam_update(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<()> {
    if let Some((name, _)) = grads.tensors().into_iter().find(|(_, t)| !t.is_finite()) {
        return Err(Error::NonFinite(format!("gradient of {name}")));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    let tensors = params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.m.tensors_mut().into_iter().zip(state.v.tensors_mut()));
    for (((_, p), (_, g)), ((_, m), (_, v))) in tensors {
        let p = p.as_mut_slice();
        let m = m.as_mut_slice();
        let v = v.as_mut_slice();
        for (i, &gi) in g.as_slice().iter().enumerate() {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
            let mhat = m[i] / c1;
            let vhat = v[i] / c2;
            p[i] -= cfg.lr * mhat / (vhat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}

/// Tracks the best dev score and the run of epochs without improvement.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    pub patience: usize,
    pub best_epoch: Option<usize>,
    pub best_score: f64,
    stale: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopDecision {
    pub improved: bool,
    pub stop: bool,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best_epoch: None,
            best_score: f64::NEG_INFINITY,
            stale: 0,
        }
    }

    /// Records the score of `epoch`. Only a strict improvement replaces the
    /// best epoch.
    pub fn observe(&mut self, epoch: usize, score: f64) -> StopDecision {
        let improved = self.best_epoch.is_none() || score > self.best_score;
        if improved {
            self.best_epoch = Some(epoch);
            self.best_score = score;
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        StopDecision {
            improved,
            stop: self.stale >= self.patience,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_precision: f64,
    pub dev_recall: f64,
    pub dev_f1: f64,
    pub improved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean training loss of the initial parameters.
    pub initial_train_loss: f64,
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_dev_f1: f64,
    pub stopped_early: bool,
}

impl TrainHistory {
    pub fn best(&self) -> &EpochRecord {
        &self.epochs[self.best_epoch - 1]
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best dev epoch.
    pub model: Model,
    pub history: TrainHistory,
}

/// Class probabilities for every input, in input order.
pub fn predict_probs(model: &Model, inputs: &[&ModelInput]) -> Result<Vec<Vec<f64>>> {
    inputs
        .par_iter()
        .map(|inp| model.forward(inp).map(|c| c.probs))
        .collect()
}

/// Predicted stance per input; ties go to pro.
pub fn predict(model: &Model, inputs: &[&ModelInput]) -> Result<Vec<Stance>> {
    Ok(predict_probs(model, inputs)?
        .into_iter()
        .map(|p| if p[1] > p[0] { Stance::Con } else { Stance::Pro })
        .collect())
}

fn dev_scores(model: &Model, dev: &[Example]) -> Result<(f64, f64, f64)> {
    let inputs: Vec<&ModelInput> = dev.iter().map(|e| &e.input).collect();
    let preds = predict(model, &inputs)?;
    let golds: Vec<Stance> = dev.iter().map(|e| e.gold).collect();
    let m = compute_metrics(&preds, &golds, Stance::Pro)?;
    Ok((m.precision, m.recall, m.f1))
}

fn mean_loss(model: &Model, examples: &[Example]) -> Result<f64> {
    let losses: Vec<f64> = examples
        .par_iter()
        .map(|e| model.forward(&e.input).map(|c| cross_entropy(&c.probs, e.gold)))
        .collect::<Result<_>>()?;
    Ok(losses.iter().sum::<f64>() / losses.len().max(1) as f64)
}

/// Seed for the dropout stream of one instance at one optimizer step, so
/// results do not depend on thread scheduling.
fn instance_seed(seed: u64, step: u64, position: usize) -> u64 {
    let mut x = seed ^ step.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (position as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    x ^= x >> 31;
    x.wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

/// Trains `model` on `train`, selecting the epoch with the best dev F1 (pro
/// as the positive class). `on_epoch` sees each epoch's record and, when the
/// epoch improved on the best so far, the improved model.
pub fn train<F>(
    mut model: Model,
    train: &[Example],
    dev: &[Example],
    cfg: &TrainConfig,
    mut on_epoch: F,
) -> Result<TrainOutcome>
where
    F: FnMut(&EpochRecord, Option<&Model>) -> Result<()>,
{
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Config("training split is empty".into()));
    }
    if dev.is_empty() {
        return Err(Error::Config("development split is empty".into()));
    }
    let initial_train_loss = mean_loss(&model, train)?;
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(&model.params);
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best = model.clone();
    let mut epochs = Vec::new();
    let mut stopped_early = false;
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let step = adam.step + 1;
            let results: Vec<(f64, ModelParams)> = batch
                .par_iter()
                .enumerate()
                .map(|(pos, &i)| {
                    let ex = &train[i];
                    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(cfg.seed, step, pos));
                    model.loss_and_grad(
                        &ex.input,
                        ex.question.as_ref(),
                        ex.gold,
                        cfg.consistency_weight,
                        &mut rng,
                    )
                })
                .collect::<Result<_>>()?;
            let mut grads = model.params.zeros_like();
            for (loss, g) in &results {
                if !loss.is_finite() {
                    return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
                }
                loss_sum += loss;
                grads.add_assign(g);
            }
            grads.scale(1.0 / batch.len() as f64);
            adam_update(&mut model.params, &grads, &mut adam, cfg)?;
        }

        let (p, r, f1) = dev_scores(&model, dev)?;
        let decision = stopper.observe(epoch, f1);
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            dev_precision: p,
            dev_recall: r,
            dev_f1: f1,
            improved: decision.improved,
        };
        log::info!(
            "epoch {epoch}: train loss {:.4}, dev P {p:.4} R {r:.4} F1 {f1:.4}{}",
            record.train_loss,
            if decision.improved { " *" } else { "" }
        );
        if decision.improved {
            best = model.clone();
        }
        on_epoch(&record, decision.improved.then_some(&best))?;
        epochs.push(record);
        if decision.stop {
            stopped_early = epoch < cfg.epochs;
            break;
        }
    }

    let best_epoch = stopper.best_epoch.expect("at least one epoch ran");
    Ok(TrainOutcome {
        model: best,
        history: TrainHistory {
            initial_train_loss,
            best_dev_f1: stopper.best_score,
            best_epoch,
            epochs,
            stopped_early,
        },
    })
}
