use super::{adam_step, backward, cross_entropy, forward, AdamState, ModelConfig, ModelParams, Mode, TrainConfig};
use crate::dataset::Dataset;
use crate::rng;
use crate::{Error, Result};
use rand::seq::SliceRandom;

/// Trials per forward pass during inference.
const EVAL_CHUNK: usize = 128;

/// One periodic evaluation during training, in eval mode.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    /// Optimizer steps completed before this evaluation.
    pub iteration: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    /// Mini-batch loss (train mode) of every optimizer step.
    pub batch_loss: Vec<f64>,
    pub evaluations: Vec<EvalPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Snapshot with the highest validation accuracy (earliest on ties).
    pub best: ModelParams,
    pub best_iteration: usize,
    /// Parameters after the last optimizer step.
    pub last: ModelParams,
    pub history: TrainHistory,
}

/// Flattens trials into a `[N, c, t]` buffer.
pub fn stack_trials(data: &Dataset) -> Vec<f64> {
    let mut out = Vec::with_capacity(data.len() * data.channel_count * data.samples_per_trial);
    for trial in &data.trials {
        out.extend(trial.data.iter());
    }
    out
}

fn check_compatible(data: &Dataset, cfg: &ModelConfig) -> Result<()> {
    if data.channel_count != cfg.in_channels || data.samples_per_trial != cfg.in_samples {
        return Err(Error::Input(format!(
            "dataset trials are {}×{}, model expects {}×{}",
            data.channel_count, data.samples_per_trial, cfg.in_channels, cfg.in_samples
        )));
    }
    if data.num_classes > cfg.num_classes {
        return Err(Error::Input(format!(
            "dataset has {} classes, model outputs {}",
            data.num_classes, cfg.num_classes
        )));
    }
    Ok(())
}

/// Argmax per row; ties go to the smaller class index.
pub fn argmax_rows(probs: &[f64], classes: usize) -> Vec<usize> {
    probs
        .chunks_exact(classes)
        .map(|row| {
            let mut best = 0;
            for (k, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Eval-mode probabilities and predicted labels for every trial.
pub fn predict(params: &ModelParams, cfg: &ModelConfig, data: &Dataset) -> Result<(Vec<usize>, Vec<f64>)> {
    check_compatible(data, cfg)?;
    let inputs = stack_trials(data);
    let probs = predict_flat(params, cfg, &inputs, data.len())?;
    Ok((argmax_rows(&probs, cfg.num_classes), probs))
}

fn predict_flat(params: &ModelParams, cfg: &ModelConfig, inputs: &[f64], n: usize) -> Result<Vec<f64>> {
    let per = cfg.input_len();
    let mut probs = Vec::with_capacity(n * cfg.num_classes);
    for start in (0..n).step_by(EVAL_CHUNK) {
        let end = (start + EVAL_CHUNK).min(n);
        let out = forward(params, cfg, &inputs[start * per..end * per], end - start, Mode::Eval)?;
        probs.extend(out.probs);
    }
    Ok(probs)
}

/// Eval-mode mean loss and accuracy on `data`.
pub fn evaluate(params: &ModelParams, cfg: &ModelConfig, data: &Dataset) -> Result<(f64, f64)> {
    let (pred, probs) = predict(params, cfg, data)?;
    let labels = data.labels();
    let loss = cross_entropy(&probs, &labels, cfg.num_classes)?;
    let correct = pred.iter().zip(&labels).filter(|(p, y)| p == y).count();
    Ok((loss, correct as f64 / labels.len() as f64))
}

fn update_running_stats(params: &mut ModelParams, mean: &[f64], var: &[f64], count: usize, momentum: f64) {
    let unbias = if count > 1 { count as f64 / (count - 1) as f64 } else { 1.0 };
    for g in 0..mean.len() {
        params.bn_running_mean[g] = (1.0 - momentum) * params.bn_running_mean[g] + momentum * mean[g];
        params.bn_running_var[g] = (1.0 - momentum) * params.bn_running_var[g] + momentum * var[g] * unbias;
    }
}

/// Mini-batch training with Adam for exactly `train_cfg.iterations` steps.
///
/// Each epoch visits a fresh permutation of the training set; the last batch
/// of an epoch may be short. Evaluations run before the first step, every
/// `eval_every` steps and after the last step. With an empty validation set
/// the final parameters are reported as best.
pub fn train(train_set: &Dataset, val_set: &Dataset, model_cfg: &ModelConfig, train_cfg: &TrainConfig) -> Result<TrainOutcome> {
    model_cfg.validate()?;
    train_cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::Input("training set is empty".into()));
    }
    check_compatible(train_set, model_cfg)?;
    if !val_set.is_empty() {
        check_compatible(val_set, model_cfg)?;
    }

    let mut rng = rng::stream(train_cfg.seed);
    let mut params = ModelParams::init(model_cfg, &mut rng)?;
    let mut adam = AdamState::new(&params);

    let per = model_cfg.input_len();
    let inputs = stack_trials(train_set);
    let labels = train_set.labels();
    let n = train_set.len();

    let mut history = TrainHistory::default();
    let mut best: Option<(f64, usize, ModelParams)> = None;
    let mut record = |params: &ModelParams, iteration: usize, history: &mut TrainHistory| -> Result<()> {
        let (train_loss, train_accuracy) = evaluate(params, model_cfg, train_set)?;
        let val = if val_set.is_empty() { None } else { Some(evaluate(params, model_cfg, val_set)?) };
        history.evaluations.push(EvalPoint {
            iteration,
            train_loss,
            train_accuracy,
            val_loss: val.map(|v| v.0),
            val_accuracy: val.map(|v| v.1),
        });
        if let Some((_, acc)) = val {
            if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
                best = Some((acc, iteration, params.clone()));
            }
        }
        Ok(())
    };
    record(&params, 0, &mut history)?;

    let mut order: Vec<usize> = Vec::new();
    let mut cursor = 0;
    let mut batch_inputs = Vec::with_capacity(train_cfg.batch_size * per);
    let mut batch_labels = Vec::with_capacity(train_cfg.batch_size);
    for step in 1..=train_cfg.iterations {
        if cursor >= order.len() {
            order = (0..n).collect();
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let end = (cursor + train_cfg.batch_size).min(n);
        batch_inputs.clear();
        batch_labels.clear();
        for &i in &order[cursor..end] {
            batch_inputs.extend_from_slice(&inputs[i * per..(i + 1) * per]);
            batch_labels.push(labels[i]);
        }
        cursor = end;

        let out = forward(&params, model_cfg, &batch_inputs, batch_labels.len(), Mode::Train(&mut rng))?;
        history.batch_loss.push(cross_entropy(&out.probs, &batch_labels, model_cfg.num_classes)?);
        let grads = backward(&params, &out.cache, &batch_labels)?;
        adam_step(&mut params, &grads, &mut adam, train_cfg, step as u64)?;
        let (mean, var) = out.cache.batch_statistics();
        update_running_stats(&mut params, mean, var, batch_labels.len() * model_cfg.conv_len(), model_cfg.bn_momentum);

        if step % train_cfg.eval_every == 0 || step == train_cfg.iterations {
            record(&params, step, &mut history)?;
        }
    }

    let (best_iteration, best_params) = match best {
        Some((_, it, p)) => (it, p),
        None => (train_cfg.iterations, params.clone()),
    };
    Ok(TrainOutcome { best: best_params, best_iteration, last: params, history })
}
