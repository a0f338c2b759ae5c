//! Run settings: defaults, then a flat `key = value` file, then flags.
//!
//! The file format is one `key = value` pair per line. Blank lines and
//! lines starting with `#` are ignored, and lists are comma separated.
//! Unknown or repeated keys are errors. A key given on the command line
//! replaces the file's value.

use ampaug::signal::WindowSpec;
use ampaug::{Error, Result};
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Noise levels swept when no `sigma` is configured.
pub const DEFAULT_SIGMA_GRID: [f64; 6] = [0.0001, 0.0005, 0.001, 0.002, 0.005, 0.01];

/// Seeds used by `sweep` when none are configured.
pub const DEFAULT_SWEEP_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// Every key accepted in a config file.
pub const KEYS: &[&str] = &[
    "out",
    "seed",
    "seeds",
    "sigma",
    "mu",
    "copies",
    "window",
    "hop",
    "iterations",
    "batch",
    "lr",
    "eval_every",
    "dropout",
    "train_fraction",
    "train",
    "test",
    "input",
    "output",
    "checkpoint",
    "label",
    "classes",
    "trials_per_class",
    "test_trials_per_class",
    "channels",
    "samples",
    "sample_rate",
    "snr",
    "data_seed",
];

/// Parameters of generated data, used by `synth` and by `train`/`sweep`
/// when no dataset files are given.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSettings {
    pub classes: usize,
    pub trials_per_class: usize,
    pub test_trials_per_class: usize,
    pub channels: usize,
    pub samples: usize,
    pub sample_rate: f64,
    pub snr: f64,
    pub seed: u64,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            classes: 2,
            trials_per_class: 40,
            test_trials_per_class: 100,
            channels: 4,
            samples: 128,
            sample_rate: 128.0,
            snr: ampaug::dataset::SyntheticSpec::BENCHMARK_SNR,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub out: PathBuf,
    /// Seeds in the order given; `None` lets each command pick its default.
    pub seeds: Option<Vec<u64>>,
    /// Noise levels; `None` means no augmentation for `train` and the
    /// default grid for `sweep`.
    pub sigmas: Option<Vec<f64>>,
    pub mu: f64,
    pub copies: usize,
    pub window: usize,
    pub hop: usize,
    /// `None` scales the step count to the training-set size.
    pub iterations: Option<usize>,
    pub batch: usize,
    pub lr: f64,
    pub eval_every: usize,
    pub dropout: f64,
    pub train_fraction: f64,
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub checkpoints: Vec<PathBuf>,
    pub labels: Vec<String>,
    pub synth: SynthSettings,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            out: PathBuf::from("out"),
            seeds: None,
            sigmas: None,
            mu: 0.0,
            copies: 1,
            window: 64,
            hop: 32,
            iterations: None,
            batch: 64,
            lr: 0.001,
            eval_every: 50,
            dropout: 0.5,
            train_fraction: 0.8,
            train: None,
            test: None,
            input: None,
            output: None,
            checkpoints: Vec::new(),
            labels: Vec::new(),
            synth: SynthSettings::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {key} = {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("{key} needs at least one value")));
    }
    Ok(items)
}

/// Splits a config file into `(key, value)` pairs in file order.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", n + 1)))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("config line {}: unknown key {key:?}", n + 1)));
        }
        if pairs.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config(format!("config line {}: {key} given twice", n + 1)));
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

impl Settings {
    /// Defaults, overlaid with the config file (if any), then `flags`.
    pub fn resolve(config: Option<&Path>, flags: &[(&str, String)]) -> Result<Self> {
        let mut s = Self::default();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
            for (key, value) in parse_config_text(&text)? {
                s.set(&key, &value)?;
            }
        }
        for (key, value) in flags {
            s.set(key, value)?;
        }
        s.validate()?;
        Ok(s)
    }

    /// Applies one setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "out" => self.out = PathBuf::from(v),
            "seed" => self.seeds = Some(vec![parse(key, v)?]),
            "seeds" => self.seeds = Some(parse_list(key, v)?),
            "sigma" => self.sigmas = Some(parse_list(key, v)?),
            "mu" => self.mu = parse(key, v)?,
            "copies" => self.copies = parse(key, v)?,
            "window" => self.window = parse(key, v)?,
            "hop" => self.hop = parse(key, v)?,
            "iterations" => self.iterations = Some(parse(key, v)?),
            "batch" => self.batch = parse(key, v)?,
            "lr" => self.lr = parse(key, v)?,
            "eval_every" => self.eval_every = parse(key, v)?,
            "dropout" => self.dropout = parse(key, v)?,
            "train_fraction" => self.train_fraction = parse(key, v)?,
            "train" => self.train = Some(PathBuf::from(v)),
            "test" => self.test = Some(PathBuf::from(v)),
            "input" => self.input = Some(PathBuf::from(v)),
            "output" => self.output = Some(PathBuf::from(v)),
            "checkpoint" => self.checkpoints = parse_list::<String>(key, v)?.into_iter().map(PathBuf::from).collect(),
            "label" => self.labels = parse_list(key, v)?,
            "classes" => self.synth.classes = parse(key, v)?,
            "trials_per_class" => self.synth.trials_per_class = parse(key, v)?,
            "test_trials_per_class" => self.synth.test_trials_per_class = parse(key, v)?,
            "channels" => self.synth.channels = parse(key, v)?,
            "samples" => self.synth.samples = parse(key, v)?,
            "sample_rate" => self.synth.sample_rate = parse(key, v)?,
            "snr" => self.synth.snr = parse(key, v)?,
            "data_seed" => self.synth.seed = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    /// Checks every value that can be checked before touching data.
    pub fn validate(&self) -> Result<()> {
        if let Some(sigmas) = &self.sigmas {
            if let Some(bad) = sigmas.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
                return Err(Error::Config(format!("sigma {bad} must be a finite value ≥ 0")));
            }
        }
        if !self.mu.is_finite() {
            return Err(Error::Config(format!("mu {} must be finite", self.mu)));
        }
        self.window_spec()?;
        if self.batch == 0 || self.eval_every == 0 || self.iterations == Some(0) {
            return Err(Error::Config("batch, eval_every and iterations must be ≥ 1".into()));
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::Config(format!("learning rate {} must be positive", self.lr)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} must lie in [0, 1)", self.dropout)));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!("train_fraction {} must lie in (0, 1)", self.train_fraction)));
        }
        Ok(())
    }

    pub fn window_spec(&self) -> Result<WindowSpec> {
        WindowSpec::new(self.window, self.hop).map_err(|e| Error::Config(e.to_string()))
    }

    /// The configured seeds, or `default` when none were given.
    pub fn seeds_or(&self, default: &[u64]) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| default.to_vec())
    }
}
