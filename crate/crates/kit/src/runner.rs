//! Materializes an augmentation plan as feature files plus an index.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vfr_core::audio::resample;
use vfr_core::augment::{AugmentationPlan, PlannedOutput, Variant};
use vfr_core::frontend::{extract_fixed, FeatureMatrix, FrontendConfig};
use vfr_core::vfr::vfr_extract;
use vfr_core::AudioBuffer;

use crate::corpus::{write_index, IndexRow};
use crate::error::{KitError, Result};
use crate::vfrf::write_features;
use crate::wav::read_wav;

pub const INDEX_FILE: &str = "index.csv";

/// Reads a WAV file and resamples it to the working rate.
pub fn load_audio(path: &Path, sample_rate: u32) -> Result<AudioBuffer> {
    let audio = read_wav(path)?;
    Ok(if audio.sample_rate() == sample_rate { audio } else { resample(&audio, sample_rate)? })
}

/// The features of one planned output: fixed 10 ms with CMN, or VFR.
pub fn extract_variant(audio: &AudioBuffer, variant: Variant, cfg: &FrontendConfig) -> Result<FeatureMatrix> {
    Ok(match variant {
        Variant::Orig => extract_fixed(audio, &cfg.clone().with_shift(vfr_core::frontend::FIXED_SHIFT_MS), true)?,
        Variant::Vfr => vfr_extract(audio, cfg)?,
    })
}

#[derive(Debug)]
pub struct PlanFailure {
    pub utterance_id: String,
    pub error: KitError,
}

#[derive(Debug)]
pub struct PlanOutcome {
    pub index_path: PathBuf,
    /// Successful outputs, in plan order.
    pub written: Vec<IndexRow>,
    pub failures: Vec<PlanFailure>,
}

fn run_one(out: &PlannedOutput, cfg: &FrontendConfig, out_dir: &Path) -> Result<IndexRow> {
    let audio = load_audio(Path::new(&out.audio_path), cfg.sample_rate)?;
    let mut feats = extract_variant(&audio, out.variant, cfg)?;
    feats.meta.source_id.clone_from(&out.utterance_id);
    write_features(&out_dir.join(&out.feature_path), &feats)?;
    Ok(IndexRow {
        feature_path: out.feature_path.clone(),
        utterance_id: out.utterance_id.clone(),
        speaker_id: out.speaker_id.clone(),
        style: out.style.to_string(),
        variant: out.variant.as_str().into(),
    })
}

/// Extracts every planned output on the current rayon pool. A failing entry
/// is recorded and skipped; the index, written once at the end, lists the
/// successful entries in plan order.
pub fn run_plan(plan: &AugmentationPlan, cfg: &FrontendConfig, out_dir: &Path) -> Result<PlanOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| KitError::io(out_dir, e))?;
    let results: Vec<Result<IndexRow>> = plan.outputs.par_iter().map(|o| run_one(o, cfg, out_dir)).collect();
    let mut written = Vec::new();
    let mut failures = Vec::new();
    for (o, r) in plan.outputs.iter().zip(results) {
        match r {
            Ok(row) => written.push(row),
            Err(error) => failures.push(PlanFailure { utterance_id: o.utterance_id.clone(), error }),
        }
    }
    let index_path = out_dir.join(INDEX_FILE);
    write_index(&index_path, &written)?;
    Ok(PlanOutcome { index_path, written, failures })
}
