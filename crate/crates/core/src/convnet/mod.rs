//! Shallow convolutional classifier with hand-written backpropagation.
//!
//! Layer stack, for an input of `c` channels × `t` samples:
//!
//! 1. temporal convolution, `temporal_filters` kernels of shape `(1, temporal_kernel)`,
//!    no activation, dropout;
//! 2. spatial convolution over all temporal maps, kernels `(c, 1)`;
//! 3. batch normalization per feature map, ELU, dropout;
//! 4. mean pooling `(1, pool_size)` with stride `(1, pool_stride)`;
//! 5. dropout, then a classification convolution whose kernel spans the whole
//!    pooled map, followed by softmax.
//!
//! All convolutions are unpadded. Dropout is inverted (scaled by `1/(1-p)`
//! at training time), so evaluation needs no rescaling.

mod adam;
mod backward;
mod checkpoint;
mod forward;
mod params;
mod train;

pub use adam::{adam_step, AdamState};
pub use backward::{backward, logit_gradient};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint, ECN1_MAGIC, ECN1_VERSION};
pub use forward::{cross_entropy, forward, softmax_rows, ForwardCache, ForwardOutput, Mode};
pub use params::{ModelGradients, ModelParams, PARAM_GROUPS};
pub use train::{argmax_rows, evaluate, predict, stack_trials, train, EvalPoint, TrainHistory, TrainOutcome};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub in_channels: usize,
    pub in_samples: usize,
    pub num_classes: usize,
    pub temporal_filters: usize,
    pub temporal_kernel: usize,
    pub spatial_filters: usize,
    pub pool_size: usize,
    pub pool_stride: usize,
    pub dropout_p: f64,
    pub bn_epsilon: f64,
    pub bn_momentum: f64,
}

/// Activation shapes, excluding the batch dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerShapes {
    /// `(temporal_filters, channels, conv_len)`
    pub temporal: (usize, usize, usize),
    /// `(spatial_filters, 1, conv_len)`
    pub spatial: (usize, usize, usize),
    /// `(spatial_filters, 1, pool_len)`
    pub pooled: (usize, usize, usize),
    pub logits: usize,
}

impl ModelConfig {
    /// Default architecture for `channels × samples` inputs and `classes` outputs.
    pub fn new(in_channels: usize, in_samples: usize, num_classes: usize) -> Self {
        Self {
            in_channels,
            in_samples,
            num_classes,
            temporal_filters: 25,
            temporal_kernel: 11,
            spatial_filters: 25,
            pool_size: 3,
            pool_stride: 3,
            dropout_p: 0.5,
            bn_epsilon: 1e-5,
            bn_momentum: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("in_channels", self.in_channels),
            ("in_samples", self.in_samples),
            ("num_classes", self.num_classes),
            ("temporal_filters", self.temporal_filters),
            ("temporal_kernel", self.temporal_kernel),
            ("spatial_filters", self.spatial_filters),
            ("pool_size", self.pool_size),
            ("pool_stride", self.pool_stride),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.in_samples < self.temporal_kernel || self.in_samples - self.temporal_kernel + 1 < self.pool_size {
            return Err(Error::Config(format!(
                "{} samples leave no room for a temporal kernel of {} and pooling of {}",
                self.in_samples, self.temporal_kernel, self.pool_size
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(Error::Config(format!("dropout probability {} must lie in [0, 1)", self.dropout_p)));
        }
        if !(self.bn_epsilon >= 0.0) || !(0.0..=1.0).contains(&self.bn_momentum) {
            return Err(Error::Config("batch-norm epsilon must be ≥ 0 and momentum in [0, 1]".into()));
        }
        Ok(())
    }

    /// `t - temporal_kernel + 1`
    pub fn conv_len(&self) -> usize {
        self.in_samples - self.temporal_kernel + 1
    }

    /// `floor((conv_len - pool_size) / pool_stride) + 1`
    pub fn pool_len(&self) -> usize {
        (self.conv_len() - self.pool_size) / self.pool_stride + 1
    }

    pub fn layer_shapes(&self) -> LayerShapes {
        LayerShapes {
            temporal: (self.temporal_filters, self.in_channels, self.conv_len()),
            spatial: (self.spatial_filters, 1, self.conv_len()),
            pooled: (self.spatial_filters, 1, self.pool_len()),
            logits: self.num_classes,
        }
    }

    /// Values per trial, `channels × samples`.
    pub fn input_len(&self) -> usize {
        self.in_channels * self.in_samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    /// Number of mini-batch optimizer steps.
    pub iterations: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Validation is evaluated every this many iterations.
    pub eval_every: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            iterations: 2000,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            eval_every: 50,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.iterations == 0 || self.eval_every == 0 {
            return Err(Error::Config("batch size, iterations and eval interval must be ≥ 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon >= 0.0) {
            return Err(Error::Config("Adam betas must lie in [0, 1) and epsilon ≥ 0".into()));
        }
        Ok(())
    }
}
