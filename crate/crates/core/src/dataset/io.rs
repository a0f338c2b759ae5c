//! `ETD1` binary dataset files.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "ETD1"
//! 4       1     version (1)
//! 5       4     trial count          u32 LE
//! 9       4     channel count        u32 LE
//! 13      4     samples per trial    u32 LE
//! 17      4     class count          u32 LE
//! 21      8     sample rate (Hz)     f64 LE
//! 29      ...   per trial: label u32 LE, then channels × samples f32 LE,
//!               channel-major
//! ```
//!
//! Samples are held as `f64` in memory and rounded to `f32` on write, so a
//! save/load round trip is bit-exact for any dataset whose samples are
//! `f32`-representable (everything produced by [`load_dataset`] or
//! [`super::generate_synthetic`]).

use super::{Dataset, TimeSeriesTrial};
use crate::{Error, FormatError, Result};
use ndarray::Array2;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

pub const ETD1_MAGIC: [u8; 4] = *b"ETD1";
pub const ETD1_VERSION: u8 = 1;
const HEADER_LEN: usize = 29;

fn to_u32(value: usize, what: &str) -> Result<u32> {
    u32::try_from(value).map_err(|_| Error::Input(format!("{what} {value} does not fit in u32")))
}

pub fn write_dataset<W: Write>(data: &Dataset, mut out: W) -> Result<()> {
    data.validate()?;
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(&ETD1_MAGIC);
    header.push(ETD1_VERSION);
    header.extend_from_slice(&to_u32(data.len(), "trial count")?.to_le_bytes());
    header.extend_from_slice(&to_u32(data.channel_count, "channel count")?.to_le_bytes());
    header.extend_from_slice(&to_u32(data.samples_per_trial, "samples per trial")?.to_le_bytes());
    header.extend_from_slice(&to_u32(data.num_classes, "class count")?.to_le_bytes());
    header.extend_from_slice(&data.sample_rate.to_le_bytes());
    out.write_all(&header)?;

    let mut buf = Vec::with_capacity(4 + 4 * data.channel_count * data.samples_per_trial);
    for trial in &data.trials {
        buf.clear();
        buf.extend_from_slice(&(trial.label as u32).to_le_bytes());
        // Iteration order of a standard-layout Array2 is row-major (channel-major).
        for &v in trial.data.iter() {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_dataset(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_dataset(data, BufWriter::new(file))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            FormatError::Truncated(format!(
                "{what}: need {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            ))
        })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn read_dataset<R: Read>(mut input: R) -> Result<Dataset> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    parse(&bytes)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let bytes = std::fs::read(path)?;
    parse(&bytes)
}

fn parse(bytes: &[u8]) -> Result<Dataset> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic: [u8; 4] = cur.take(4, "magic")?.try_into().unwrap();
    if magic != ETD1_MAGIC {
        return Err(FormatError::BadMagic { expected: ETD1_MAGIC, found: magic }.into());
    }
    let version = cur.take(1, "version")?[0];
    if version != ETD1_VERSION {
        return Err(FormatError::UnsupportedVersion(version).into());
    }
    let trials = cur.u32("trial count")? as usize;
    let channels = cur.u32("channel count")? as usize;
    let samples = cur.u32("samples per trial")? as usize;
    let classes = cur.u32("class count")?;
    let sample_rate = f64::from_le_bytes(cur.take(8, "sample rate")?.try_into().unwrap());
    if classes == 0 {
        return Err(FormatError::InvalidHeader("class count is zero".into()).into());
    }
    if !(sample_rate > 0.0) || !sample_rate.is_finite() {
        return Err(FormatError::InvalidHeader(format!("sample rate {sample_rate} is not positive")).into());
    }

    let values_per_trial = channels
        .checked_mul(samples)
        .ok_or_else(|| FormatError::InvalidHeader("channels × samples overflows".into()))?;
    let payload = values_per_trial
        .checked_mul(4)
        .and_then(|v| v.checked_add(4))
        .and_then(|v| v.checked_mul(trials))
        .ok_or_else(|| FormatError::InvalidHeader("payload size overflows".into()))?;
    let available = bytes.len() - HEADER_LEN;
    if available < payload {
        return Err(FormatError::Truncated(format!(
            "header declares {trials} trials ({payload} payload bytes), file holds {available}"
        ))
        .into());
    }
    if available > payload {
        return Err(FormatError::TrailingBytes(available - payload).into());
    }

    let mut out = Vec::with_capacity(trials);
    for i in 0..trials {
        let label = cur.u32("label")?;
        if label >= classes {
            return Err(FormatError::LabelOutOfRange { trial: i, label, classes }.into());
        }
        let raw = cur.take(4 * values_per_trial, "samples")?;
        let mut values = Vec::with_capacity(values_per_trial);
        for (j, chunk) in raw.chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                return Err(FormatError::NonFinite { trial: i, channel: j / samples.max(1), sample: j % samples.max(1) }
                    .into());
            }
            values.push(v as f64);
        }
        let data = Array2::from_shape_vec((channels, samples), values)
            .map_err(|e| Error::Internal(e.to_string()))?;
        out.push(TimeSeriesTrial::new(data, label as usize));
    }
    Ok(Dataset { trials: out, num_classes: classes as usize, sample_rate, channel_count: channels, samples_per_trial: samples })
}
