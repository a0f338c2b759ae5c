use super::forward::{axpy, dot, gemm, mat, mat_mut, windows, DropoutMask, ForwardCache};
use super::{ModelConfig, ModelGradients, ModelParams};
use crate::{Error, Result};

/// Gradient of mean softmax cross-entropy with respect to the logits:
/// `(probs - onehot(labels)) / B`.
pub fn logit_gradient(probs: &[f64], labels: &[usize], classes: usize) -> Result<Vec<f64>> {
    if probs.len() != labels.len() * classes || labels.is_empty() {
        return Err(Error::Input("probability and label counts disagree".into()));
    }
    let scale = 1.0 / labels.len() as f64;
    let mut grad = probs.to_vec();
    for (i, &y) in labels.iter().enumerate() {
        if y >= classes {
            return Err(Error::Input(format!("label {y} is not below class count {classes}")));
        }
        grad[i * classes + y] -= 1.0;
    }
    grad.iter_mut().for_each(|g| *g *= scale);
    Ok(grad)
}

/// Exact gradients of the mean cross-entropy for the batch recorded in
/// `cache`, reusing its dropout masks and batch statistics.
pub fn backward(params: &ModelParams, cache: &ForwardCache, labels: &[usize]) -> Result<ModelGradients> {
    let cfg: &ModelConfig = &cache.config;
    if !cache.train {
        return Err(Error::Input("backward needs a cache from a train-mode forward pass".into()));
    }
    if labels.len() != cache.batch {
        return Err(Error::Input(format!("{} labels for a cached batch of {}", labels.len(), cache.batch)));
    }
    params.validate(cfg).map_err(|e| Error::Input(format!("parameters do not match the cached model: {e}")))?;

    let batch = cache.batch;
    let (c, t, f1, kw, f2, nc) =
        (cfg.in_channels, cfg.in_samples, cfg.temporal_filters, cfg.temporal_kernel, cfg.spatial_filters, cfg.num_classes);
    let (tc, tp) = (cfg.conv_len(), cfg.pool_len());
    let feat = f2 * tp;

    // Classifier.
    let d_logits = logit_gradient(&cache.probs, labels, nc)?;
    let pooled_in = &cache.pooled_dropped;
    let mut g_cls_w = vec![0.0; nc * feat];
    let mut g_cls_b = vec![0.0; nc];
    let mut d_pooled = vec![0.0; batch * feat];
    for b in 0..batch {
        let x = &pooled_in[b * feat..(b + 1) * feat];
        let dx = &mut d_pooled[b * feat..(b + 1) * feat];
        for k in 0..nc {
            let dz = d_logits[b * nc + k];
            g_cls_b[k] += dz;
            axpy(&mut g_cls_w[k * feat..(k + 1) * feat], dz, x);
            axpy(dx, dz, &params.classifier_weight[k * feat..(k + 1) * feat]);
        }
    }
    DropoutMask::apply_in_place(cache.mask_pooled.as_ref(), &mut d_pooled);

    // Mean pooling spreads each gradient evenly over its window.
    let mut d_act = vec![0.0; batch * f2 * tc];
    let inv_pool = 1.0 / cfg.pool_size as f64;
    for row in 0..batch * f2 {
        for j in 0..tp {
            let g = d_pooled[row * tp + j] * inv_pool;
            let start = row * tc + j * cfg.pool_stride;
            d_act[start..start + cfg.pool_size].iter_mut().for_each(|v| *v += g);
        }
    }
    DropoutMask::apply_in_place(cache.mask_activated.as_ref(), &mut d_act);

    // ELU: derivative is 1 for y > 0 and exp(y) = elu(y) + 1 otherwise.
    let d_bn: Vec<f64> = d_act
        .iter()
        .zip(&cache.bn_out)
        .zip(&cache.activated)
        .map(|((&d, &y), &a)| if y > 0.0 { d } else { d * (a + 1.0) })
        .collect();

    // Batch normalization with batch statistics.
    let count = (batch * tc) as f64;
    let mut g_gamma = vec![0.0; f2];
    let mut g_beta = vec![0.0; f2];
    let mut d_spatial = vec![0.0; batch * f2 * tc];
    for g in 0..f2 {
        let rows = || (0..batch).map(move |b| (b * f2 + g) * tc..(b * f2 + g + 1) * tc);
        let mut sum_dy = 0.0;
        let mut sum_dy_xhat = 0.0;
        for r in rows() {
            sum_dy += d_bn[r.clone()].iter().sum::<f64>();
            sum_dy_xhat += dot(&d_bn[r.clone()], &cache.normalized[r]);
        }
        g_beta[g] = sum_dy;
        g_gamma[g] = sum_dy_xhat;
        let gamma = params.bn_gamma[g];
        let scale = gamma * cache.inv_std[g] / count;
        for r in rows() {
            for i in r {
                d_spatial[i] = scale * (count * d_bn[i] - sum_dy - cache.normalized[i] * sum_dy_xhat);
            }
        }
    }

    // Spatial convolution: per trial, dW += dY · Xᵀ and dX = Wᵀ · dY.
    let temporal_in = &cache.temporal_dropped;
    let (rows, plane) = (f1 * c, f1 * c * tc);
    let mut g_sp_w = vec![0.0; f2 * rows];
    let mut g_sp_b = vec![0.0; f2];
    let mut d_temporal = vec![0.0; batch * plane];
    let w_s = mat(&params.spatial_weight, f2, rows, rows);
    for b in 0..batch {
        let dy_block = &d_spatial[b * f2 * tc..(b + 1) * f2 * tc];
        for (g, dy) in dy_block.chunks_exact(tc).enumerate() {
            g_sp_b[g] += dy.iter().sum::<f64>();
        }
        let dy = mat(dy_block, f2, tc, tc);
        let x = mat(&temporal_in[b * plane..(b + 1) * plane], rows, tc, tc);
        gemm(&dy, &x.t(), 1.0, &mut mat_mut(&mut g_sp_w, f2, rows, rows));
        gemm(&w_s.t(), &dy, 0.0, &mut mat_mut(&mut d_temporal[b * plane..(b + 1) * plane], rows, tc, tc));
    }
    DropoutMask::apply_in_place(cache.mask_temporal.as_ref(), &mut d_temporal);

    // Temporal convolution: per trial and channel, dW += dY · windows(x)ᵀ.
    let mut g_tm_w = vec![0.0; f1 * kw];
    let mut g_tm_b = vec![0.0; f1];
    for b in 0..batch {
        let block = &d_temporal[b * plane..(b + 1) * plane];
        for (f, maps) in block.chunks_exact(c * tc).enumerate() {
            g_tm_b[f] += maps.iter().sum::<f64>();
        }
        for ch in 0..c {
            let dy = mat(&block[ch * tc..], f1, tc, c * tc);
            let x = windows(&cache.input[(b * c + ch) * t..(b * c + ch + 1) * t], kw, tc);
            gemm(&dy, &x.t(), 1.0, &mut mat_mut(&mut g_tm_w, f1, kw, kw));
        }
    }

    Ok(ModelGradients {
        temporal_weight: g_tm_w,
        temporal_bias: g_tm_b,
        spatial_weight: g_sp_w,
        spatial_bias: g_sp_b,
        bn_gamma: g_gamma,
        bn_beta: g_beta,
        classifier_weight: g_cls_w,
        classifier_bias: g_cls_b,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{forward, Mode};
    use super::*;
    use crate::rng;

    #[test]
    fn logit_gradient_closed_form() {
        let probs = [0.7, 0.2, 0.1, 0.25, 0.25, 0.5];
        let g = logit_gradient(&probs, &[0, 2], 3).unwrap();
        let expect = [-0.15, 0.1, 0.05, 0.125, 0.125, -0.25];
        for (a, b) in g.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn eval_cache_is_rejected() {
        let cfg = ModelConfig::new(2, 20, 2);
        let p = ModelParams::zeros(&cfg);
        let out = forward(&p, &cfg, &[0.0; 40], 1, Mode::Eval).unwrap();
        assert!(matches!(backward(&p, &out.cache, &[0]), Err(Error::Input(_))));
    }

    #[test]
    fn label_count_must_match_cache() {
        let cfg = ModelConfig::new(2, 20, 2);
        let p = ModelParams::init(&cfg, &mut rng::stream(1)).unwrap();
        let mut r = rng::stream(2);
        let out = forward(&p, &cfg, &[0.5; 80], 2, Mode::Train(&mut r)).unwrap();
        assert!(backward(&p, &out.cache, &[0]).is_err());
        let other = ModelConfig::new(3, 20, 2);
        assert!(backward(&ModelParams::zeros(&other), &out.cache, &[0, 1]).is_err());
    }

    #[test]
    fn confident_correct_prediction_has_stationary_classifier_bias() {
        let cfg = ModelConfig { dropout_p: 0.0, ..ModelConfig::new(2, 20, 2) };
        let mut p = ModelParams::init(&cfg, &mut rng::stream(1)).unwrap();
        p.classifier_weight.iter_mut().for_each(|w| *w = 0.0);
        p.classifier_bias = vec![60.0, -60.0];
        let x: Vec<f64> = (0..80).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut r = rng::stream(2);
        let out = forward(&p, &cfg, &x, 2, Mode::Train(&mut r)).unwrap();
        let g = backward(&p, &out.cache, &[0, 0]).unwrap();
        assert!(g.classifier_bias.iter().all(|v| v.abs() < 1e-9));
    }
}
