use super::ModelConfig;
use crate::{Error, Result};
use rand::Rng;

/// Learnable tensors in declaration (and checkpoint) order, with their layouts.
pub const PARAM_GROUPS: [&str; 8] = [
    "temporal_weight",   // [temporal_filters, 1, 1, temporal_kernel]
    "temporal_bias",     // [temporal_filters]
    "spatial_weight",    // [spatial_filters, temporal_filters, channels, 1]
    "spatial_bias",      // [spatial_filters]
    "bn_gamma",          // [spatial_filters]
    "bn_beta",           // [spatial_filters]
    "classifier_weight", // [classes, spatial_filters, 1, pool_len]
    "classifier_bias",   // [classes]
];

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub temporal_weight: Vec<f64>,
    pub temporal_bias: Vec<f64>,
    pub spatial_weight: Vec<f64>,
    pub spatial_bias: Vec<f64>,
    pub bn_gamma: Vec<f64>,
    pub bn_beta: Vec<f64>,
    pub bn_running_mean: Vec<f64>,
    pub bn_running_var: Vec<f64>,
    pub classifier_weight: Vec<f64>,
    pub classifier_bias: Vec<f64>,
}

/// Gradients of the mean loss, one vector per entry of [`PARAM_GROUPS`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGradients {
    pub temporal_weight: Vec<f64>,
    pub temporal_bias: Vec<f64>,
    pub spatial_weight: Vec<f64>,
    pub spatial_bias: Vec<f64>,
    pub bn_gamma: Vec<f64>,
    pub bn_beta: Vec<f64>,
    pub classifier_weight: Vec<f64>,
    pub classifier_bias: Vec<f64>,
}

impl ModelGradients {
    pub fn groups(&self) -> [&[f64]; 8] {
        [
            &self.temporal_weight,
            &self.temporal_bias,
            &self.spatial_weight,
            &self.spatial_bias,
            &self.bn_gamma,
            &self.bn_beta,
            &self.classifier_weight,
            &self.classifier_bias,
        ]
    }
}

fn xavier<R: Rng + ?Sized>(rng: &mut R, len: usize, fan_in: usize, fan_out: usize) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..len).map(|_| rng.random_range(-limit..limit)).collect()
}

impl ModelParams {
    /// All-zero parameters with unit running variance.
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let f1 = cfg.temporal_filters;
        let f2 = cfg.spatial_filters;
        Self {
            temporal_weight: vec![0.0; f1 * cfg.temporal_kernel],
            temporal_bias: vec![0.0; f1],
            spatial_weight: vec![0.0; f2 * f1 * cfg.in_channels],
            spatial_bias: vec![0.0; f2],
            bn_gamma: vec![0.0; f2],
            bn_beta: vec![0.0; f2],
            bn_running_mean: vec![0.0; f2],
            bn_running_var: vec![1.0; f2],
            classifier_weight: vec![0.0; cfg.num_classes * f2 * cfg.pool_len()],
            classifier_bias: vec![0.0; cfg.num_classes],
        }
    }

    /// Glorot-uniform weights, zero biases, `γ = 1`, `β = 0`, running
    /// mean 0 and running variance 1.
    pub fn init<R: Rng + ?Sized>(cfg: &ModelConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let (f1, f2, k, c, tp) = (cfg.temporal_filters, cfg.spatial_filters, cfg.temporal_kernel, cfg.in_channels, cfg.pool_len());
        let mut p = Self::zeros(cfg);
        p.temporal_weight = xavier(rng, f1 * k, k, f1 * k);
        p.spatial_weight = xavier(rng, f2 * f1 * c, f1 * c, f2 * c);
        p.classifier_weight = xavier(rng, cfg.num_classes * f2 * tp, f2 * tp, cfg.num_classes * tp);
        p.bn_gamma = vec![1.0; f2];
        Ok(p)
    }

    /// Learnable groups in [`PARAM_GROUPS`] order.
    pub fn groups(&self) -> [&[f64]; 8] {
        [
            &self.temporal_weight,
            &self.temporal_bias,
            &self.spatial_weight,
            &self.spatial_bias,
            &self.bn_gamma,
            &self.bn_beta,
            &self.classifier_weight,
            &self.classifier_bias,
        ]
    }

    pub fn groups_mut(&mut self) -> [&mut Vec<f64>; 8] {
        [
            &mut self.temporal_weight,
            &mut self.temporal_bias,
            &mut self.spatial_weight,
            &mut self.spatial_bias,
            &mut self.bn_gamma,
            &mut self.bn_beta,
            &mut self.classifier_weight,
            &mut self.classifier_bias,
        ]
    }

    /// Every tensor, including running statistics, with its checkpoint dims.
    pub fn tensors(&self, cfg: &ModelConfig) -> Vec<(&'static str, Vec<usize>, &[f64])> {
        let (f1, f2) = (cfg.temporal_filters, cfg.spatial_filters);
        vec![
            ("temporal_weight", vec![f1, 1, 1, cfg.temporal_kernel], &self.temporal_weight[..]),
            ("temporal_bias", vec![f1], &self.temporal_bias),
            ("spatial_weight", vec![f2, f1, cfg.in_channels, 1], &self.spatial_weight),
            ("spatial_bias", vec![f2], &self.spatial_bias),
            ("bn_gamma", vec![f2], &self.bn_gamma),
            ("bn_beta", vec![f2], &self.bn_beta),
            ("bn_running_mean", vec![f2], &self.bn_running_mean),
            ("bn_running_var", vec![f2], &self.bn_running_var),
            ("classifier_weight", vec![cfg.num_classes, f2, 1, cfg.pool_len()], &self.classifier_weight),
            ("classifier_bias", vec![cfg.num_classes], &self.classifier_bias),
        ]
    }

    pub(crate) fn tensors_mut(&mut self) -> [&mut Vec<f64>; 10] {
        [
            &mut self.temporal_weight,
            &mut self.temporal_bias,
            &mut self.spatial_weight,
            &mut self.spatial_bias,
            &mut self.bn_gamma,
            &mut self.bn_beta,
            &mut self.bn_running_mean,
            &mut self.bn_running_var,
            &mut self.classifier_weight,
            &mut self.classifier_bias,
        ]
    }

    /// Checks tensor sizes against `cfg`, finiteness, and nonnegative running variance.
    pub fn validate(&self, cfg: &ModelConfig) -> Result<()> {
        for (name, dims, data) in self.tensors(cfg) {
            let expected: usize = dims.iter().product();
            if data.len() != expected {
                return Err(Error::Input(format!("{name} has {} values, config expects {expected}", data.len())));
            }
            if data.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input(format!("{name} contains non-finite values")));
            }
        }
        if self.bn_running_var.iter().any(|&v| v < 0.0) {
            return Err(Error::Input("negative running variance".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn init_respects_layout_and_bounds() {
        let cfg = ModelConfig::new(4, 64, 3);
        let p = ModelParams::init(&cfg, &mut rng::stream(0)).unwrap();
        p.validate(&cfg).unwrap();
        assert_eq!(p.spatial_weight.len(), 25 * 25 * 4);
        assert_eq!(p.classifier_weight.len(), 3 * 25 * cfg.pool_len());
        let limit = (6.0f64 / (11.0 + 275.0)).sqrt();
        assert!(p.temporal_weight.iter().all(|w| w.abs() <= limit));
        assert!(p.temporal_bias.iter().all(|&b| b == 0.0));
        assert!(p.bn_gamma.iter().all(|&g| g == 1.0));
        assert!(p.bn_running_var.iter().all(|&v| v == 1.0));
    }
}
