//! Entropy-based variable frame rate (VFR) speech analysis.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. It covers:
//!
//! - [`audio`]: sample buffers and band-limited resampling
//! - [`frontend`]: framing, mel filterbank, MFCC and sliding-window CMN
//! - [`vfr`]: inter-frame entropy, frame-picking thresholds and the frame plan
//! - [`augment`]: development-set manifests for the adaptation configurations
//! - [`eval`]: embeddings, cosine trial scoring, EER and McNemar's test
//! - [`toybench`]: a synthetic speaker/style corpus and an end-to-end experiment
//!
//! File formats, WAV decoding and the command line live in the `vfr-kit` crate.
//!
//! ```
//! use vfr_core::{audio::AudioBuffer, frontend::FrontendConfig, vfr};
//!
//! let samples: Vec<f64> = (0..8000).map(|n| 0.3 * libm::sin(n as f64 * 0.37)).collect();
//! let buf = AudioBuffer::new(samples, 8000, "tone").unwrap();
//! let feats = vfr::vfr_extract(&buf, &FrontendConfig::new(8000)).unwrap();
//! assert_eq!(feats.dim(), 23);
//! assert!(feats.meta.vfr_applied);
//! ```
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod audio;
pub mod augment;
pub mod error;
pub mod eval;
pub mod fft;
pub mod frontend;
mod stats;
pub mod toybench;
pub mod vfr;

pub use audio::AudioBuffer;
pub use error::{Error, Result};
pub use frontend::{FeatureMatrix, FrontendConfig, MelSpectrogram};
