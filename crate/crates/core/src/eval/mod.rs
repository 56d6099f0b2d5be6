//! Trial scoring and verification statistics.

mod eer;
mod mcnemar;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

pub use eer::{compute_eer, compute_eer_from, EerReport, OperatingPoint};
pub use mcnemar::{
    decisions_at_threshold, mcnemar_exact_p, mcnemar_from_counts, mcnemar_test, McNemarMethod, McNemarReport,
    EXACT_LIMIT, SIGNIFICANCE_LEVELS,
};

use crate::error::{Error, Result};
use crate::frontend::FeatureMatrix;

/// Utterance embedding: per-dimension mean followed by per-dimension
/// population standard deviation, scaled to unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub utterance_id: String,
}

impl EmbeddingVector {
    pub fn dot(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }
}

pub fn embed_utterance(feats: &FeatureMatrix) -> Result<EmbeddingVector> {
    let n = feats.num_rows();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    let dim = feats.dim();
    let mut mean = alloc::vec![0.0; dim];
    for row in feats.rows() {
        mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = alloc::vec![0.0; dim];
    for row in feats.rows() {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let mut values = mean;
    values.extend(var.into_iter().map(|s| libm::sqrt(s / n as f64)));
    let norm = libm::sqrt(values.iter().map(|v| v * v).sum());
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm(feats.meta.source_id.clone()));
    }
    values.iter_mut().for_each(|v| *v /= norm);
    Ok(EmbeddingVector { values, utterance_id: feats.meta.source_id.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrialLabel {
    Target,
    Nontarget,
}

impl TrialLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Target => "target",
            Self::Nontarget => "nontarget",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "target" => Some(Self::Target),
            "nontarget" => Some(Self::Nontarget),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub enroll_id: String,
    pub test_id: String,
    pub label: TrialLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub enroll_id: String,
    pub test_id: String,
    pub score: f64,
    pub label: TrialLabel,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreSet {
    pub records: Vec<ScoreRecord>,
}

impl ScoreSet {
    pub fn from_labeled(scores: impl IntoIterator<Item = (f64, TrialLabel)>) -> Self {
        let records = scores
            .into_iter()
            .enumerate()
            .map(|(i, (score, label))| ScoreRecord {
                enroll_id: alloc::format!("e{i}"),
                test_id: alloc::format!("t{i}"),
                score,
                label,
            })
            .collect();
        Self { records }
    }

    pub fn scores_with(&self, label: TrialLabel) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().filter(move |r| r.label == label).map(|r| r.score)
    }
}

/// Cosine scores (dot products of unit embeddings), in trial order.
pub fn score_trials(trials: &[Trial], embeddings: &BTreeMap<String, EmbeddingVector>) -> Result<ScoreSet> {
    let lookup = |id: &str| embeddings.get(id).ok_or_else(|| Error::UnknownId(id.into()));
    let records = trials
        .iter()
        .map(|t| {
            let score = lookup(&t.enroll_id)?.dot(lookup(&t.test_id)?).clamp(-1.0, 1.0);
            Ok(ScoreRecord { enroll_id: t.enroll_id.clone(), test_id: t.test_id.clone(), score, label: t.label })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreSet { records })
}
