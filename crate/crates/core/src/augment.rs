//! Development-set manifests for the PLDA adaptation configurations.
//!
//! | config         | development set                                  | size |
//! |----------------|--------------------------------------------------|------|
//! | `Baseline`     | enrollment-style utterances, original features   | X    |
//! | `VfrNorm`      | the same utterances, VFR features only           | X    |
//! | `VfrNormAug`   | both the original and the VFR variant            | 2X   |
//! | `MultiStyle`   | every style, original features                   | 4X   |
//!
//! Extrinsic (noise/reverb) augmentation is recognized but rejected, since it
//! needs external corpora.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Suffix appended to utterance ids of VFR variants.
pub const VFR_SUFFIX: &str = "-vfr";
pub const FEATURE_EXTENSION: &str = "vfrf";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StyleLabel {
    Read,
    Narrative,
    Conversation,
    PetDirected,
    /// `synthetic-<name>`, stored without the prefix.
    Synthetic(String),
}

impl fmt::Display for StyleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Read => f.write_str("read"),
            Self::Narrative => f.write_str("narrative"),
            Self::Conversation => f.write_str("conversation"),
            Self::PetDirected => f.write_str("pet-directed"),
            Self::Synthetic(s) => write!(f, "synthetic-{s}"),
        }
    }
}

impl FromStr for StyleLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "read" => Self::Read,
            "narrative" => Self::Narrative,
            "conversation" => Self::Conversation,
            "pet-directed" => Self::PetDirected,
            _ => match s.strip_prefix("synthetic-") {
                Some(rest) if !rest.is_empty() => Self::Synthetic(rest.into()),
                _ => return Err(Error::InvalidPlan(format!("unknown style `{s}`"))),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetLabel {
    Development,
    Enrollment,
    Test,
}

impl FromStr for SetLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "development" => Ok(Self::Development),
            "enrollment" => Ok(Self::Enrollment),
            "test" => Ok(Self::Test),
            _ => Err(Error::InvalidPlan(format!("unknown set `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub utterance_id: String,
    pub speaker_id: String,
    pub style: StyleLabel,
    pub audio_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusManifest {
    entries: Vec<ManifestEntry>,
    pub set_label: SetLabel,
}

impl CorpusManifest {
    pub fn new(entries: Vec<ManifestEntry>, set_label: SetLabel) -> Result<Self> {
        let mut ids = BTreeSet::new();
        let mut paths = BTreeSet::new();
        for e in &entries {
            if !ids.insert(e.utterance_id.as_str()) {
                return Err(Error::InvalidPlan(format!("duplicate utterance id `{}`", e.utterance_id)));
            }
            if !paths.insert(e.audio_path.as_str()) {
                return Err(Error::InvalidPlan(format!("duplicate audio path `{}`", e.audio_path)));
            }
        }
        Ok(Self { entries, set_label })
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AugmentConfig {
    Baseline,
    /// Noise, music, babble and reverberation; needs external corpora.
    Extrinsic,
    VfrNorm,
    VfrNormAug,
    MultiStyle,
}

impl AugmentConfig {
    pub const SUPPORTED: [Self; 4] = [Self::Baseline, Self::VfrNorm, Self::VfrNormAug, Self::MultiStyle];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::Extrinsic => "extrinsic",
            Self::VfrNorm => "vfr-norm",
            Self::VfrNormAug => "vfr-norm-aug",
            Self::MultiStyle => "multi-style",
        }
    }

    pub fn uses_vfr(self) -> bool {
        matches!(self, Self::VfrNorm | Self::VfrNormAug)
    }
}

impl fmt::Display for AugmentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AugmentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Self::Baseline),
            "extrinsic" => Ok(Self::Extrinsic),
            "vfr-norm" => Ok(Self::VfrNorm),
            "vfr-norm-aug" => Ok(Self::VfrNormAug),
            "multi-style" => Ok(Self::MultiStyle),
            _ => Err(Error::InvalidPlan(format!("unknown configuration `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Orig,
    Vfr,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Orig => "orig",
            Self::Vfr => "vfr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedOutput {
    /// Relative to the output directory.
    pub feature_path: String,
    pub utterance_id: String,
    pub source_utterance_id: String,
    pub speaker_id: String,
    pub style: StyleLabel,
    pub audio_path: String,
    pub variant: Variant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentationPlan {
    pub config: AugmentConfig,
    pub style_filter: Option<StyleLabel>,
    pub outputs: Vec<PlannedOutput>,
}

fn planned(entry: &ManifestEntry, variant: Variant) -> PlannedOutput {
    let utterance_id = match variant {
        Variant::Orig => entry.utterance_id.clone(),
        Variant::Vfr => format!("{}{VFR_SUFFIX}", entry.utterance_id),
    };
    PlannedOutput {
        feature_path: format!("{utterance_id}.{FEATURE_EXTENSION}"),
        utterance_id,
        source_utterance_id: entry.utterance_id.clone(),
        speaker_id: entry.speaker_id.clone(),
        style: entry.style.clone(),
        audio_path: entry.audio_path.clone(),
        variant,
    }
}

/// Lists the feature files a configuration needs, in manifest order.
///
/// Single-style configurations require `style_filter`; `MultiStyle` forbids it.
pub fn build_plan(
    manifest: &CorpusManifest,
    config: AugmentConfig,
    style_filter: Option<&StyleLabel>,
) -> Result<AugmentationPlan> {
    match (config, style_filter) {
        (AugmentConfig::Extrinsic, _) => {
            return Err(Error::InvalidPlan(
                "extrinsic augmentation needs external noise and impulse-response corpora and is not supported"
                    .to_string(),
            ))
        }
        (AugmentConfig::MultiStyle, Some(s)) => {
            return Err(Error::InvalidPlan(format!("multi-style uses every style; drop the `{s}` filter")))
        }
        (AugmentConfig::Baseline | AugmentConfig::VfrNorm | AugmentConfig::VfrNormAug, None) => {
            return Err(Error::InvalidPlan(format!("{config} needs a style filter matching the enrollment style")))
        }
        _ => {}
    }
    let selected: Vec<&ManifestEntry> =
        manifest.entries.iter().filter(|e| style_filter.is_none_or(|s| &e.style == s)).collect();
    if selected.is_empty() {
        return Err(Error::EmptyManifest);
    }
    let variants: &[Variant] = match config {
        AugmentConfig::Baseline | AugmentConfig::MultiStyle => &[Variant::Orig],
        AugmentConfig::VfrNorm => &[Variant::Vfr],
        AugmentConfig::VfrNormAug => &[Variant::Orig, Variant::Vfr],
        AugmentConfig::Extrinsic => unreachable!(),
    };
    let outputs = selected.iter().flat_map(|e| variants.iter().map(|&v| planned(e, v))).collect();
    Ok(AugmentationPlan { config, style_filter: style_filter.cloned(), outputs })
}
