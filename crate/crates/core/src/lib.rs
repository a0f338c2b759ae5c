//! Amplitude-perturbation data augmentation for multichannel time series.
//!
//! The crate is organised around the pipeline used to train a shallow
//! convolutional EEG classifier on augmented data:
//!
//! - [`signal`]: Hann-windowed STFT and exact overlap-add inverse.
//! - [`augment`]: Gaussian noise on spectrogram amplitudes, phase kept.
//! - [`dataset`]: trial containers, the `ETD1` file format, standardization,
//!   splitting and a synthetic generator.
//! - [`convnet`]: the shallow network with hand-written backpropagation,
//!   Adam and the training loop.
//! - [`metrics`]: confusion matrices, precision/recall/F1, ROC and AUC.

pub mod augment;
pub mod convnet;
pub mod dataset;
mod error;
pub mod metrics;
pub mod rng;
pub mod signal;

pub use error::{Error, FormatError, Result};
