//! `ECN1` model checkpoints.
//!
//! ```text
//! "ECN1" | version u8 (1)
//! 8 × u32 LE: in_channels, in_samples, num_classes, temporal_filters,
//!             temporal_kernel, spatial_filters, pool_size, pool_stride
//! 3 × f64 LE: dropout_p, bn_epsilon, bn_momentum
//! u32 LE tensor count (12), then per tensor:
//!     u32 rank, rank × u32 dims, product(dims) × f64 LE values
//! ```
//!
//! Tensors appear in declaration order: temporal_weight, temporal_bias,
//! spatial_weight, spatial_bias, bn_gamma, bn_beta, bn_running_mean,
//! bn_running_var, classifier_weight, classifier_bias, then the
//! standardization mean and std (`[channels]` each, or `[0]` when the model
//! was trained without standardization).

use super::{ModelConfig, ModelParams};
use crate::dataset::StandardizationStats;
use crate::{Error, FormatError, Result};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

pub const ECN1_MAGIC: [u8; 4] = *b"ECN1";
pub const ECN1_VERSION: u8 = 1;
const TENSOR_COUNT: u32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub params: ModelParams,
    pub standardization: Option<StandardizationStats>,
}

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Input(format!("{v} does not fit in u32")))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn put_tensor(out: &mut Vec<u8>, dims: &[usize], values: &[f64]) -> Result<()> {
    put_u32(out, dims.len())?;
    for &d in dims {
        put_u32(out, d)?;
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(())
}

pub fn write_checkpoint<W: Write>(ckpt: &Checkpoint, mut out: W) -> Result<()> {
    let cfg = &ckpt.config;
    cfg.validate()?;
    ckpt.params.validate(cfg)?;
    let mut buf = Vec::new();
    buf.extend_from_slice(&ECN1_MAGIC);
    buf.push(ECN1_VERSION);
    for v in [
        cfg.in_channels,
        cfg.in_samples,
        cfg.num_classes,
        cfg.temporal_filters,
        cfg.temporal_kernel,
        cfg.spatial_filters,
        cfg.pool_size,
        cfg.pool_stride,
    ] {
        put_u32(&mut buf, v)?;
    }
    for v in [cfg.dropout_p, cfg.bn_epsilon, cfg.bn_momentum] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&TENSOR_COUNT.to_le_bytes());
    for (_, dims, values) in ckpt.params.tensors(cfg) {
        put_tensor(&mut buf, &dims, values)?;
    }
    match &ckpt.standardization {
        Some(stats) => {
            if stats.mean.len() != cfg.in_channels || stats.std.len() != cfg.in_channels {
                return Err(Error::Input("standardization statistics do not match the channel count".into()));
            }
            put_tensor(&mut buf, &[stats.mean.len()], &stats.mean)?;
            put_tensor(&mut buf, &[stats.std.len()], &stats.std)?;
        }
        None => {
            put_tensor(&mut buf, &[0], &[])?;
            put_tensor(&mut buf, &[0], &[])?;
        }
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    write_checkpoint(ckpt, BufWriter::new(File::create(path)?))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| FormatError::Truncated(format!("checkpoint ends before offset {}", self.pos + n)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn tensor(&mut self, name: &str, expected: &[usize]) -> Result<Vec<f64>> {
        let rank = self.u32()?;
        let dims = (0..rank).map(|_| self.u32()).collect::<Result<Vec<_>>>()?;
        if dims != expected {
            return Err(FormatError::InvalidHeader(format!("{name} has dims {dims:?}, expected {expected:?}")).into());
        }
        let n: usize = dims.iter().product();
        let raw = self.take(n.checked_mul(8).ok_or_else(|| FormatError::InvalidHeader("tensor too large".into()))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4)?.try_into().unwrap();
    if magic != ECN1_MAGIC {
        return Err(FormatError::BadMagic { expected: ECN1_MAGIC, found: magic }.into());
    }
    let version = r.take(1)?[0];
    if version != ECN1_VERSION {
        return Err(FormatError::UnsupportedVersion(version).into());
    }
    let ints = (0..8).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    let config = ModelConfig {
        in_channels: ints[0],
        in_samples: ints[1],
        num_classes: ints[2],
        temporal_filters: ints[3],
        temporal_kernel: ints[4],
        spatial_filters: ints[5],
        pool_size: ints[6],
        pool_stride: ints[7],
        dropout_p: r.f64()?,
        bn_epsilon: r.f64()?,
        bn_momentum: r.f64()?,
    };
    config.validate().map_err(|e| FormatError::InvalidHeader(e.to_string()))?;
    let count = r.u32()?;
    if count != TENSOR_COUNT as usize {
        return Err(FormatError::InvalidHeader(format!("expected {TENSOR_COUNT} tensors, found {count}")).into());
    }
    let mut params = ModelParams::zeros(&config);
    let layout: Vec<(&str, Vec<usize>)> =
        params.tensors(&config).into_iter().map(|(name, dims, _)| (name, dims)).collect();
    for ((name, dims), slot) in layout.iter().zip(params.tensors_mut()) {
        *slot = r.tensor(name, dims)?;
    }
    let rank = r.u32()?;
    let dim = if rank == 1 { r.u32()? } else { usize::MAX };
    let stat_len = match dim {
        0 => 0,
        d if d == config.in_channels => d,
        _ => return Err(FormatError::InvalidHeader("standardization mean has unexpected dims".into()).into()),
    };
    let raw = r.take(stat_len * 8)?;
    let mean: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let std = r.tensor("standardization_std", &[stat_len])?;
    if r.pos != bytes.len() {
        return Err(FormatError::TrailingBytes(bytes.len() - r.pos).into());
    }
    params.validate(&config).map_err(|e| FormatError::InvalidHeader(e.to_string()))?;
    let standardization = (stat_len > 0).then_some(StandardizationStats { mean, std });
    Ok(Checkpoint { config, params, standardization })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    read_checkpoint(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn sample(with_stats: bool) -> Checkpoint {
        let config = ModelConfig::new(3, 40, 2);
        let mut params = ModelParams::init(&config, &mut rng::stream(9)).unwrap();
        params.bn_running_mean[3] = 0.25;
        params.bn_running_var[4] = 1.5;
        let standardization =
            with_stats.then(|| StandardizationStats { mean: vec![0.1, -0.2, 0.3], std: vec![1.0, 2.0, 0.5] });
        Checkpoint { config, params, standardization }
    }

    #[test]
    fn round_trip() {
        for stats in [true, false] {
            let ckpt = sample(stats);
            let mut buf = Vec::new();
            write_checkpoint(&ckpt, &mut buf).unwrap();
            assert_eq!(&buf[..4], b"ECN1");
            assert_eq!(buf[4], 1);
            assert_eq!(u32::from_le_bytes(buf[5..9].try_into().unwrap()), 3);
            assert_eq!(read_checkpoint(buf.as_slice()).unwrap(), ckpt);
        }
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let mut buf = Vec::new();
        write_checkpoint(&sample(true), &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[1] = b'X';
        assert!(matches!(read_checkpoint(bad.as_slice()), Err(Error::Format(FormatError::BadMagic { .. }))));
        let short = &buf[..buf.len() - 3];
        assert!(matches!(read_checkpoint(short), Err(Error::Format(FormatError::Truncated(_)))));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(read_checkpoint(long.as_slice()), Err(Error::Format(FormatError::TrailingBytes(1)))));
    }
}
