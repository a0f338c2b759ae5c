use super::{ModelConfig, ModelParams};
use crate::{Error, Result};
use ndarray::linalg::general_mat_mul;
use ndarray::{ArrayView2, ArrayViewMut2, ShapeBuilder};
use rand::{Rng, RngCore};

pub enum Mode<'a> {
    /// Batch statistics and dropout masks drawn from the given stream.
    Train(&'a mut dyn RngCore),
    /// Running statistics, no dropout.
    Eval,
}

/// Activations kept for the backward pass. Buffers are flat, batch-major:
///
/// - `input`: `[B, c, t]`
/// - `temporal`, `temporal_dropped`: `[B, F1, c, T_conv]`
/// - `spatial`, `normalized`, `bn_out`, `activated`: `[B, F2, T_conv]`
/// - `pooled`, `pooled_dropped`: `[B, F2, T_pool]`
/// - `logits`, `probs`: `[B, K]`
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub(crate) config: ModelConfig,
    pub(crate) batch: usize,
    pub(crate) train: bool,
    pub(crate) input: Vec<f64>,
    pub(crate) temporal: Vec<f64>,
    pub(crate) mask_temporal: Option<DropoutMask>,
    pub(crate) temporal_dropped: Vec<f64>,
    pub(crate) spatial: Vec<f64>,
    pub(crate) batch_mean: Vec<f64>,
    pub(crate) batch_var: Vec<f64>,
    pub(crate) inv_std: Vec<f64>,
    pub(crate) normalized: Vec<f64>,
    pub(crate) bn_out: Vec<f64>,
    pub(crate) activated: Vec<f64>,
    pub(crate) mask_activated: Option<DropoutMask>,
    pub(crate) pooled: Vec<f64>,
    pub(crate) mask_pooled: Option<DropoutMask>,
    pub(crate) pooled_dropped: Vec<f64>,
    pub(crate) logits: Vec<f64>,
    pub(crate) probs: Vec<f64>,
}

impl ForwardCache {
    pub fn batch(&self) -> usize {
        self.batch
    }
    pub fn is_train(&self) -> bool {
        self.train
    }
    pub fn temporal_output(&self) -> &[f64] {
        &self.temporal
    }
    pub fn spatial_output(&self) -> &[f64] {
        &self.spatial
    }
    /// Batch-normalized spatial output before `γ`/`β`.
    pub fn normalized(&self) -> &[f64] {
        &self.normalized
    }
    pub fn activated(&self) -> &[f64] {
        &self.activated
    }
    pub fn pooled(&self) -> &[f64] {
        &self.pooled
    }
    pub fn logits(&self) -> &[f64] {
        &self.logits
    }
    /// Per-map batch mean and biased variance (train mode only).
    pub fn batch_statistics(&self) -> (&[f64], &[f64]) {
        (&self.batch_mean, &self.batch_var)
    }
}

pub struct ForwardOutput {
    /// Class probabilities, `[B, K]` row-major.
    pub probs: Vec<f64>,
    pub cache: ForwardCache,
}

/// Inverted-dropout mask: kept positions are scaled by `1 / (1 - p)`.
#[derive(Debug, Clone)]
pub(crate) struct DropoutMask {
    keep: Vec<bool>,
    scale: f64,
}

impl DropoutMask {
    fn draw(rng: &mut dyn RngCore, len: usize, p: f64) -> Option<Self> {
        if p == 0.0 {
            return None;
        }
        // Words are drawn in blocks rather than through one virtual call per
        // element; each 32-bit word maps to a uniform in [0, 1).
        let unit = 1.0 / (1u64 << 32) as f64;
        let mut keep = Vec::with_capacity(len);
        let mut block = [0u32; 512];
        while keep.len() < len {
            let n = (len - keep.len()).min(block.len());
            rng.fill(&mut block[..n]);
            keep.extend(block[..n].iter().map(|&w| w as f64 * unit >= p));
        }
        Some(Self { keep, scale: 1.0 / (1.0 - p) })
    }

    pub(crate) fn apply(mask: Option<&Self>, values: &[f64]) -> Vec<f64> {
        let mut out = values.to_vec();
        Self::apply_in_place(mask, &mut out);
        out
    }

    pub(crate) fn apply_in_place(mask: Option<&Self>, values: &mut [f64]) {
        if let Some(m) = mask {
            for (v, &k) in values.iter_mut().zip(&m.keep) {
                *v = if k { *v * m.scale } else { 0.0 };
            }
        }
    }
}

fn check_finite(values: &[f64], layer: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric(layer))
    }
}

pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Dot product with four interleaved partial sums, so it vectorizes.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a4, b4) = (a[..n].chunks_exact(4), b[..n].chunks_exact(4));
    let tail: f64 = a4.remainder().iter().zip(b4.remainder()).map(|(x, y)| x * y).sum();
    let mut acc = [0.0; 4];
    for (x, y) in a4.zip(b4) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `[rows, cols]` view of `data` with row stride `stride`.
pub(crate) fn mat(data: &[f64], rows: usize, cols: usize, stride: usize) -> ArrayView2<'_, f64> {
    ArrayView2::from_shape((rows, cols).strides((stride, 1)), data).expect("matrix view fits its buffer")
}

pub(crate) fn mat_mut(data: &mut [f64], rows: usize, cols: usize, stride: usize) -> ArrayViewMut2<'_, f64> {
    ArrayViewMut2::from_shape((rows, cols).strides((stride, 1)), data).expect("matrix view fits its buffer")
}

/// Sliding windows of `x` as a `[width, len]` matrix: row `k` is `x[k..k + len]`.
pub(crate) fn windows(x: &[f64], width: usize, len: usize) -> ArrayView2<'_, f64> {
    mat(x, width, len, 1)
}

/// `c = a · b + beta · c`
pub(crate) fn gemm(a: &ArrayView2<f64>, b: &ArrayView2<f64>, beta: f64, c: &mut ArrayViewMut2<f64>) {
    general_mat_mul(1.0, a, b, beta, c);
}

/// Numerically stable row-wise softmax of a `[rows, cols]` buffer.
pub fn softmax_rows(logits: &[f64], cols: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(logits.len());
    for row in logits.chunks_exact(cols) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|z| (z - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        out.extend(exps.iter().map(|e| e / total));
    }
    out
}

/// Runs the network on `inputs` (`[batch, c, t]`, row-major).
pub fn forward(params: &ModelParams, cfg: &ModelConfig, inputs: &[f64], batch: usize, mode: Mode<'_>) -> Result<ForwardOutput> {
    cfg.validate()?;
    if batch == 0 || inputs.len() != batch * cfg.input_len() {
        return Err(Error::Input(format!(
            "input holds {} values, expected batch {batch} × {} channels × {} samples",
            inputs.len(),
            cfg.in_channels,
            cfg.in_samples
        )));
    }
    params.validate(cfg)?;

    let (c, t, f1, kw, f2, nc) =
        (cfg.in_channels, cfg.in_samples, cfg.temporal_filters, cfg.temporal_kernel, cfg.spatial_filters, cfg.num_classes);
    let (tc, tp) = (cfg.conv_len(), cfg.pool_len());
    let (train, mut rng) = match mode {
        Mode::Train(r) => (true, Some(r)),
        Mode::Eval => (false, None),
    };

    // Temporal convolution: each filter slides along time within every
    // channel, computed per trial and channel as `[F1, kw] · windows(x)`.
    let mut temporal = vec![0.0; batch * f1 * c * tc];
    let w_t = mat(&params.temporal_weight, f1, kw, kw);
    for b in 0..batch {
        let block = &mut temporal[b * f1 * c * tc..(b + 1) * f1 * c * tc];
        for (f, maps) in block.chunks_exact_mut(c * tc).enumerate() {
            maps.fill(params.temporal_bias[f]);
        }
        for ch in 0..c {
            let x = windows(&inputs[(b * c + ch) * t..(b * c + ch + 1) * t], kw, tc);
            gemm(&w_t, &x, 1.0, &mut mat_mut(&mut block[ch * tc..], f1, tc, c * tc));
        }
    }
    check_finite(&temporal, "temporal_conv")?;
    let mask_temporal = rng.as_deref_mut().and_then(|r| DropoutMask::draw(r, temporal.len(), cfg.dropout_p));
    let temporal_dropped = DropoutMask::apply(mask_temporal.as_ref(), &temporal);

    // Spatial convolution over every (temporal map, channel) pair:
    // `[F2, F1·c] · [F1·c, T_conv]` per trial.
    let mut spatial = vec![0.0; batch * f2 * tc];
    let w_s = mat(&params.spatial_weight, f2, f1 * c, f1 * c);
    for b in 0..batch {
        let out = &mut spatial[b * f2 * tc..(b + 1) * f2 * tc];
        for (g, row) in out.chunks_exact_mut(tc).enumerate() {
            row.fill(params.spatial_bias[g]);
        }
        let x = mat(&temporal_dropped[b * f1 * c * tc..(b + 1) * f1 * c * tc], f1 * c, tc, tc);
        gemm(&w_s, &x, 1.0, &mut mat_mut(out, f2, tc, tc));
    }
    check_finite(&spatial, "spatial_conv")?;

    // Batch normalization per feature map.
    let count = (batch * tc) as f64;
    let mut batch_mean = vec![0.0; f2];
    let mut batch_var = vec![0.0; f2];
    let (mean, var): (Vec<f64>, Vec<f64>) = if train {
        for g in 0..f2 {
            let rows = (0..batch).map(|b| &spatial[(b * f2 + g) * tc..(b * f2 + g + 1) * tc]);
            let m = rows.clone().map(|r| r.iter().sum::<f64>()).sum::<f64>() / count;
            let v = rows.map(|r| r.iter().map(|x| (x - m) * (x - m)).sum::<f64>()).sum::<f64>() / count;
            batch_mean[g] = m;
            batch_var[g] = v;
        }
        (batch_mean.clone(), batch_var.clone())
    } else {
        (params.bn_running_mean.clone(), params.bn_running_var.clone())
    };
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + cfg.bn_epsilon).sqrt()).collect();
    let mut normalized = vec![0.0; spatial.len()];
    let mut bn_out = vec![0.0; spatial.len()];
    let mut activated = vec![0.0; spatial.len()];
    for b in 0..batch {
        for g in 0..f2 {
            for i in (b * f2 + g) * tc..(b * f2 + g + 1) * tc {
                let xh = (spatial[i] - mean[g]) * inv_std[g];
                let y = params.bn_gamma[g] * xh + params.bn_beta[g];
                normalized[i] = xh;
                bn_out[i] = y;
                activated[i] = if y > 0.0 { y } else { y.exp_m1() };
            }
        }
    }
    check_finite(&bn_out, "batch_norm")?;
    let mask_activated = rng.as_deref_mut().and_then(|r| DropoutMask::draw(r, activated.len(), cfg.dropout_p));
    let dropped = DropoutMask::apply(mask_activated.as_ref(), &activated);

    // Mean pooling.
    let mut pooled = vec![0.0; batch * f2 * tp];
    let inv_pool = 1.0 / cfg.pool_size as f64;
    for row in 0..batch * f2 {
        for j in 0..tp {
            let start = row * tc + j * cfg.pool_stride;
            pooled[row * tp + j] = dropped[start..start + cfg.pool_size].iter().sum::<f64>() * inv_pool;
        }
    }
    let mask_pooled = rng.and_then(|r| DropoutMask::draw(r, pooled.len(), cfg.dropout_p));
    let pooled_dropped = DropoutMask::apply(mask_pooled.as_ref(), &pooled);

    // Classification convolution spanning the whole pooled map.
    let feat = f2 * tp;
    let mut logits = vec![0.0; batch * nc];
    for b in 0..batch {
        let x = &pooled_dropped[b * feat..(b + 1) * feat];
        for k in 0..nc {
            logits[b * nc + k] = params.classifier_bias[k] + dot(&params.classifier_weight[k * feat..(k + 1) * feat], x);
        }
    }
    check_finite(&logits, "classifier")?;
    let probs = softmax_rows(&logits, nc);

    let cache = ForwardCache {
        config: *cfg,
        batch,
        train,
        input: inputs.to_vec(),
        temporal,
        mask_temporal,
        temporal_dropped,
        spatial,
        batch_mean,
        batch_var,
        inv_std,
        normalized,
        bn_out,
        activated,
        mask_activated,
        pooled,
        mask_pooled,
        pooled_dropped,
        logits,
        probs: probs.clone(),
    };
    Ok(ForwardOutput { probs, cache })
}

/// Probability floor inside the logarithm.
const PROB_FLOOR: f64 = 1e-12;

/// Mean negative log-likelihood of `labels` under `probs` (`[B, K]`).
pub fn cross_entropy(probs: &[f64], labels: &[usize], classes: usize) -> Result<f64> {
    if classes == 0 || probs.len() != labels.len() * classes || labels.is_empty() {
        return Err(Error::Input(format!(
            "{} probabilities do not match {} labels × {classes} classes",
            probs.len(),
            labels.len()
        )));
    }
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        if y >= classes {
            return Err(Error::Input(format!("label {y} is not below class count {classes}")));
        }
        total -= probs[i * classes + y].max(PROB_FLOOR).ln();
    }
    Ok(total / labels.len() as f64)
}
