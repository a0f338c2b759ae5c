use super::Dataset;
use crate::rng;
use crate::{Error, Result};
use rand::seq::SliceRandom;

fn check_fraction(train_fraction: f64) -> Result<()> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Input(format!("train fraction {train_fraction} must lie in (0, 1)")));
    }
    Ok(())
}

fn gather(data: &Dataset, mut idx: Vec<usize>) -> Dataset {
    idx.sort_unstable();
    data.with_trials(idx.into_iter().map(|i| data.trials[i].clone()).collect())
}

/// Uniform random partition without replacement into
/// `(round(n · train_fraction), rest)`. Each side keeps the input order.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    check_fraction(train_fraction)?;
    let n = data.len();
    let n_train = (n as f64 * train_fraction).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Input(format!(
            "splitting {n} trials at fraction {train_fraction} leaves one side empty"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(seed));
    let rest = idx.split_off(n_train);
    Ok((gather(data, idx), gather(data, rest)))
}

/// Per-class variant of [`split`]: each class is partitioned separately at
/// the same fraction, so class proportions carry over to both sides.
pub fn split_stratified(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    check_fraction(train_fraction)?;
    let mut train = Vec::new();
    let mut rest = Vec::new();
    for class in 0..data.num_classes {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data.trials[i].label == class).collect();
        idx.shuffle(&mut rng::substream(seed, &[class as u64]));
        let n_train = (idx.len() as f64 * train_fraction).round() as usize;
        rest.extend(idx.split_off(n_train));
        train.extend(idx);
    }
    if train.is_empty() || rest.is_empty() {
        return Err(Error::Input(format!(
            "splitting {} trials at fraction {train_fraction} leaves one side empty",
            data.len()
        )));
    }
    Ok((gather(data, train), gather(data, rest)))
}
