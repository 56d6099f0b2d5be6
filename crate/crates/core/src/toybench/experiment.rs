use alloc::string::String;
use alloc::vec::Vec;

use super::{mix, synth_utterance_at, StyleSpec, SyntheticSpeaker, DEFAULT_SAMPLE_RATE};
use crate::augment::{AugmentConfig, StyleLabel};
use crate::error::{Error, Result};
use crate::eval::{compute_eer_from, embed_utterance, EmbeddingVector};
use crate::frontend::{Frontend, FrontendConfig};
use crate::vfr::{vfr_extract, EntropyDomain};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_speakers: usize,
    pub enroll_style: StyleSpec,
    pub test_style: StyleSpec,
    pub config: AugmentConfig,
    pub seed: u64,
    /// Neutral content length of every utterance.
    pub duration_s: f64,
    pub tests_per_speaker: usize,
    pub sample_rate: u32,
    pub entropy_domain: EntropyDomain,
}

impl ExperimentConfig {
    pub fn new(n_speakers: usize, enroll_style: StyleSpec, test_style: StyleSpec, config: AugmentConfig, seed: u64) -> Self {
        Self {
            n_speakers,
            enroll_style,
            test_style,
            config,
            seed,
            duration_s: 3.0,
            tests_per_speaker: 2,
            sample_rate: DEFAULT_SAMPLE_RATE,
            entropy_domain: EntropyDomain::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: AugmentConfig,
    pub enroll_style: String,
    pub test_style: String,
    pub n_speakers: usize,
    pub seed: u64,
    pub eer_percent: f64,
    pub n_target: usize,
    pub n_nontarget: usize,
}

/// Orig and VFR embeddings of one utterance.
struct Embedded {
    orig: EmbeddingVector,
    vfr: EmbeddingVector,
}

struct Extractor {
    fixed: Frontend,
    cfg: FrontendConfig,
}

impl Extractor {
    fn embed(&self, speaker: &SyntheticSpeaker, style: &StyleSpec, duration_s: f64, seed: u64, with_vfr: bool) -> Result<Embedded> {
        let audio = synth_utterance_at(speaker, style, duration_s, seed, self.cfg.sample_rate)?;
        let orig = embed_utterance(&self.fixed.extract(&audio, true)?)?;
        let vfr = if with_vfr { embed_utterance(&vfr_extract(&audio, &self.cfg)?)? } else { orig.clone() };
        Ok(Embedded { orig, vfr })
    }
}

/// Enrolls one utterance per speaker and scores it against every test
/// utterance of every speaker.
///
/// Without a PLDA backend the configurations are emulated at the scoring level:
/// `Baseline` compares original features, `VfrNorm` compares VFR features,
/// `VfrNormAug` takes the larger of the two, and `MultiStyle` enrolls each
/// speaker in every named style and keeps the best match.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.n_speakers < 10 {
        return Err(Error::InvalidSynthesis(alloc::format!("need at least 10 speakers, got {}", cfg.n_speakers)));
    }
    if cfg.tests_per_speaker == 0 {
        return Err(Error::InvalidSynthesis("need at least one test utterance per speaker".into()));
    }
    if cfg.config == AugmentConfig::Extrinsic {
        return Err(Error::InvalidPlan("extrinsic augmentation is not supported".into()));
    }
    let mut frontend_cfg = FrontendConfig::new(cfg.sample_rate);
    frontend_cfg.entropy_domain = cfg.entropy_domain;
    let ex = Extractor { fixed: Frontend::new(&frontend_cfg)?, cfg: frontend_cfg };
    let with_vfr = cfg.config.uses_vfr();

    let enroll_styles: Vec<StyleSpec> = if cfg.config == AugmentConfig::MultiStyle {
        let mut styles = alloc::vec![cfg.enroll_style.clone()];
        for label in [StyleLabel::Read, StyleLabel::Narrative, StyleLabel::Conversation, StyleLabel::PetDirected] {
            let s = StyleSpec::preset(&label)?;
            if s.name != cfg.enroll_style.name {
                styles.push(s);
            }
        }
        styles
    } else {
        alloc::vec![cfg.enroll_style.clone()]
    };

    let speakers: Vec<SyntheticSpeaker> =
        (0..cfg.n_speakers).map(|i| SyntheticSpeaker::random(mix(cfg.seed, 0x1000 + i as u64))).collect();
    let mut enrolled = Vec::with_capacity(speakers.len());
    let mut tests = Vec::with_capacity(speakers.len() * cfg.tests_per_speaker);
    for (i, spk) in speakers.iter().enumerate() {
        let content = mix(cfg.seed, 0x2000 + i as u64);
        let per_style = enroll_styles
            .iter()
            .map(|s| ex.embed(spk, s, cfg.duration_s, mix(content, 0), with_vfr))
            .collect::<Result<Vec<_>>>()?;
        enrolled.push(per_style);
        for j in 0..cfg.tests_per_speaker {
            tests.push((i, ex.embed(spk, &cfg.test_style, cfg.duration_s, mix(content, 1 + j as u64), with_vfr)?));
        }
    }

    let score = |e: &Embedded, t: &Embedded| match cfg.config {
        AugmentConfig::VfrNorm => e.vfr.dot(&t.vfr),
        AugmentConfig::VfrNormAug => e.orig.dot(&t.orig).max(e.vfr.dot(&t.vfr)),
        _ => e.orig.dot(&t.orig),
    };
    let mut targets = Vec::new();
    let mut nontargets = Vec::new();
    for (i, styles) in enrolled.iter().enumerate() {
        for (owner, t) in &tests {
            let s = styles.iter().map(|e| score(e, t)).fold(f64::NEG_INFINITY, f64::max);
            if *owner == i {
                targets.push(s);
            } else {
                nontargets.push(s);
            }
        }
    }
    let eer = compute_eer_from(&targets, &nontargets)?;
    Ok(ExperimentReport {
        config: cfg.config,
        enroll_style: cfg.enroll_style.name.clone(),
        test_style: cfg.test_style.name.clone(),
        n_speakers: cfg.n_speakers,
        seed: cfg.seed,
        eer_percent: eer.eer_percent,
        n_target: targets.len(),
        n_nontarget: nontargets.len(),
    })
}
