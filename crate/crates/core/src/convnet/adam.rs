use super::{ModelGradients, ModelParams, TrainConfig};
use crate::{Error, Result};

/// First and second moment estimates for each learnable group.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    last_step: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        Self::for_shapes(params.groups().iter().map(|g| g.len()))
    }

    pub fn for_shapes(lengths: impl IntoIterator<Item = usize>) -> Self {
        let m: Vec<Vec<f64>> = lengths.into_iter().map(|n| vec![0.0; n]).collect();
        Self { v: m.clone(), m, last_step: 0 }
    }

    pub fn last_step(&self) -> u64 {
        self.last_step
    }

    /// One bias-corrected Adam update of `groups` in place. `step` counts
    /// from 1 and must increase on every call. Nothing is modified if any
    /// gradient is non-finite.
    pub fn update(&mut self, groups: &mut [&mut [f64]], grads: &[&[f64]], cfg: &TrainConfig, step: u64) -> Result<()> {
        if step <= self.last_step {
            return Err(Error::Input(format!("Adam step {step} does not follow step {}", self.last_step)));
        }
        if groups.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Input("parameter group count differs from optimizer state".into()));
        }
        for ((p, g), m) in groups.iter().zip(grads).zip(&self.m) {
            if p.len() != m.len() || g.len() != m.len() {
                return Err(Error::Input("gradient shape differs from parameter shape".into()));
            }
        }
        if grads.iter().any(|g| g.iter().any(|v| !v.is_finite())) {
            return Err(Error::Numeric("adam_step"));
        }

        let (b1, b2) = (cfg.beta1, cfg.beta2);
        let bias1 = 1.0 - b1.powi(step as i32);
        let bias2 = 1.0 - b2.powi(step as i32);
        for (((theta, grad), m), v) in groups.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..theta.len() {
                let g = grad[i];
                m[i] = b1 * m[i] + (1.0 - b1) * g;
                v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                theta[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            }
        }
        self.last_step = step;
        Ok(())
    }
}

/// Applies one Adam update to every learnable group of `params`.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &ModelGradients,
    state: &mut AdamState,
    cfg: &TrainConfig,
    step: u64,
) -> Result<()> {
    let mut groups: Vec<&mut [f64]> = params.groups_mut().into_iter().map(|g| g.as_mut_slice()).collect();
    state.update(&mut groups, &grads.groups(), cfg, step)
}
