//! Command-line definitions. Every flag maps onto a settings key and is
//! applied after the config file.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "ampaug", version, about = "Amplitude-perturbation augmentation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic train/test datasets.
    Synth(SynthArgs),
    /// Write an augmented copy of a dataset.
    Augment(AugmentArgs),
    /// Train one model and evaluate it on the test set.
    Train(DataArgs),
    /// Baseline plus one augmented run per noise level, for every seed.
    Sweep(DataArgs),
    /// Evaluate one or two checkpoints on a dataset.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat `key = value` settings file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated seeds (sweep).
    #[arg(long)]
    pub seeds: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated noise standard deviations.
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Augmented copies per trial.
    #[arg(long)]
    pub copies: Option<usize>,
    /// STFT window length.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub hop: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub trials_per_class: Option<usize>,
    #[arg(long)]
    pub test_trials_per_class: Option<usize>,
    #[arg(long)]
    pub channels: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// Burst amplitude relative to unit noise; `inf` for noiseless data.
    #[arg(long)]
    pub snr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Dataset to augment.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file (default `<out>/augmented.etd1`).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Training dataset; with neither file, synthetic data is generated.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Checkpoint to evaluate; give twice to compare two models.
    #[arg(long)]
    pub checkpoint: Vec<PathBuf>,
    /// Display name per checkpoint, in the same order.
    #[arg(long)]
    pub label: Vec<String>,
    /// Dataset to evaluate on.
    #[arg(long)]
    pub test: Option<PathBuf>,
}

type Flags = Vec<(&'static str, String)>;

fn push<T: ToString>(flags: &mut Flags, key: &'static str, value: &Option<T>) {
    if let Some(v) = value {
        flags.push((key, v.to_string()));
    }
}

fn path_text(p: &PathBuf) -> String {
    p.display().to_string()
}

fn join_paths(paths: &[PathBuf]) -> Option<String> {
    (!paths.is_empty()).then(|| paths.iter().map(path_text).collect::<Vec<_>>().join(","))
}

impl CommonArgs {
    fn flags(&self) -> Flags {
        let mut f = Flags::new();
        push(&mut f, "seed", &self.seed);
        push(&mut f, "seeds", &self.seeds);
        push(&mut f, "out", &self.out.as_ref().map(path_text));
        push(&mut f, "sigma", &self.sigma);
        push(&mut f, "mu", &self.mu);
        push(&mut f, "copies", &self.copies);
        push(&mut f, "window", &self.window);
        push(&mut f, "hop", &self.hop);
        push(&mut f, "iterations", &self.iterations);
        push(&mut f, "batch", &self.batch);
        push(&mut f, "lr", &self.lr);
        f
    }
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Synth(a) => &a.common,
            Command::Augment(a) => &a.common,
            Command::Train(a) | Command::Sweep(a) => &a.common,
            Command::Eval(a) => &a.common,
        }
    }

    /// Flag values as settings overrides, common flags first.
    pub fn flags(&self) -> Flags {
        let mut f = self.common().flags();
        match self {
            Command::Synth(a) => {
                push(&mut f, "classes", &a.classes);
                push(&mut f, "trials_per_class", &a.trials_per_class);
                push(&mut f, "test_trials_per_class", &a.test_trials_per_class);
                push(&mut f, "channels", &a.channels);
                push(&mut f, "samples", &a.samples);
                push(&mut f, "sample_rate", &a.sample_rate);
                push(&mut f, "snr", &a.snr);
            }
            Command::Augment(a) => {
                push(&mut f, "input", &a.input.as_ref().map(path_text));
                push(&mut f, "output", &a.output.as_ref().map(path_text));
            }
            Command::Train(a) | Command::Sweep(a) => {
                push(&mut f, "train", &a.train.as_ref().map(path_text));
                push(&mut f, "test", &a.test.as_ref().map(path_text));
            }
            Command::Eval(a) => {
                push(&mut f, "checkpoint", &join_paths(&a.checkpoint));
                push(&mut f, "label", &(!a.label.is_empty()).then(|| a.label.join(",")));
                push(&mut f, "test", &a.test.as_ref().map(path_text));
            }
        }
        f
    }
}
