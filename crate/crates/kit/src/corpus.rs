//! Manifest and feature-index CSV files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vfr_core::augment::{CorpusManifest, ManifestEntry, SetLabel, StyleLabel, Variant};

use crate::error::{KitError, Result};

#[derive(Debug, Serialize, Deserialize)]
struct ManifestRow {
    utterance_id: String,
    speaker_id: String,
    style: String,
    audio_path: String,
}

/// Reads `utterance_id,speaker_id,style,audio_path`. Relative audio paths
/// are resolved against the manifest's directory.
pub fn read_manifest(path: &Path, set_label: SetLabel) -> Result<CorpusManifest> {
    let base = path.parent().unwrap_or(Path::new(""));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| KitError::csv(path, e))?;
    let mut entries = Vec::new();
    for (i, row) in reader.deserialize::<ManifestRow>().enumerate() {
        let row = row.map_err(|e| KitError::csv(path, e))?;
        let style: StyleLabel = row.style.parse().map_err(|e: vfr_core::Error| KitError::Parse {
            origin: path.display().to_string(),
            line: i + 2,
            detail: e.to_string(),
        })?;
        let audio = base.join(&row.audio_path);
        entries.push(ManifestEntry {
            utterance_id: row.utterance_id,
            speaker_id: row.speaker_id,
            style,
            audio_path: audio.to_string_lossy().into_owned(),
        });
    }
    Ok(CorpusManifest::new(entries, set_label)?)
}

/// Writes a manifest with audio paths as given.
pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| KitError::csv(path, e))?;
    for e in entries {
        w.serialize(ManifestRow {
            utterance_id: e.utterance_id.clone(),
            speaker_id: e.speaker_id.clone(),
            style: e.style.to_string(),
            audio_path: e.audio_path.clone(),
        })
        .map_err(|e| KitError::csv(path, e))?;
    }
    w.flush().map_err(|e| KitError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRow {
    /// Relative to the index file's directory.
    pub feature_path: String,
    pub utterance_id: String,
    pub speaker_id: String,
    pub style: String,
    pub variant: String,
}

impl IndexRow {
    pub fn variant(&self) -> Option<Variant> {
        match self.variant.as_str() {
            "orig" => Some(Variant::Orig),
            "vfr" => Some(Variant::Vfr),
            _ => None,
        }
    }
}

pub fn write_index(path: &Path, rows: &[IndexRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| KitError::csv(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| KitError::csv(path, e))?;
    }
    w.flush().map_err(|e| KitError::io(path, e))
}

pub fn read_index(path: &Path) -> Result<Vec<IndexRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| KitError::csv(path, e))?;
    reader.deserialize().map(|r| r.map_err(|e| KitError::csv(path, e))).collect()
}

/// Absolute location of an index row's feature file.
pub fn resolve(index_path: &Path, row: &IndexRow) -> PathBuf {
    index_path.parent().unwrap_or(Path::new("")).join(&row.feature_path)
}
