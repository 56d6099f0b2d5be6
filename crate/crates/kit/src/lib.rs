//! File formats, corpus tooling and the `vfrkit` command line around
//! [`vfr_core`].
//!
//! ```no_run
//! use std::path::Path;
//! use vfr_core::frontend::FrontendConfig;
//! use vfr_core::vfr::vfr_extract;
//!
//! let audio = vfr_kit::runner::load_audio(Path::new("utt.wav"), 8000)?;
//! let feats = vfr_extract(&audio, &FrontendConfig::new(8000))?;
//! vfr_kit::vfrf::write_features(Path::new("utt.vfrf"), &feats)?;
//! # Ok::<(), vfr_kit::KitError>(())
//! ```

pub mod bench;
pub mod cli;
pub mod corpus;
mod error;
pub mod runner;
pub mod scoring;
pub mod vfrf;
pub mod wav;

pub use error::{KitError, Result};
