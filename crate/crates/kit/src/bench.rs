//! Synthetic benchmark reports and corpus generation.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use vfr_core::augment::{AugmentConfig, ManifestEntry, StyleLabel};
use vfr_core::toybench::{mix, run_experiment, synth_utterance_at, ExperimentConfig, StyleSpec, SyntheticSpeaker};
use vfr_core::vfr::EntropyDomain;

use crate::corpus::write_manifest;
use crate::error::{KitError, Result};
use crate::wav::write_wav;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRun {
    pub seed: u64,
    pub eer_percent: f64,
    pub n_target: usize,
    pub n_nontarget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub config: String,
    pub enroll_style: String,
    pub test_style: String,
    pub n_speakers: usize,
    pub entropy_domain: String,
    pub runs: Vec<SeedRun>,
    pub median_eer_percent: f64,
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub n_speakers: usize,
    pub enroll_style: StyleSpec,
    pub test_style: StyleSpec,
    pub config: AugmentConfig,
    pub seeds: Vec<u64>,
    pub duration_s: f64,
    pub tests_per_speaker: usize,
    pub sample_rate: u32,
    pub entropy_domain: EntropyDomain,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn domain_name(d: EntropyDomain) -> &'static str {
    match d {
        EntropyDomain::Linear => "linear",
        EntropyDomain::Log => "log",
    }
}

/// One experiment per seed, run in parallel, reported in seed order.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchReport> {
    if spec.seeds.is_empty() {
        return Err(KitError::Usage("at least one seed is required".into()));
    }
    let runs = spec
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut cfg = ExperimentConfig::new(
                spec.n_speakers,
                spec.enroll_style.clone(),
                spec.test_style.clone(),
                spec.config,
                seed,
            );
            cfg.duration_s = spec.duration_s;
            cfg.tests_per_speaker = spec.tests_per_speaker;
            cfg.sample_rate = spec.sample_rate;
            cfg.entropy_domain = spec.entropy_domain;
            let r = run_experiment(&cfg)?;
            Ok(SeedRun { seed, eer_percent: r.eer_percent, n_target: r.n_target, n_nontarget: r.n_nontarget })
        })
        .collect::<Result<Vec<_>>>()?;
    let eers: Vec<f64> = runs.iter().map(|r| r.eer_percent).collect();
    Ok(BenchReport {
        config: spec.config.to_string(),
        enroll_style: spec.enroll_style.name.clone(),
        test_style: spec.test_style.name.clone(),
        n_speakers: spec.n_speakers,
        entropy_domain: domain_name(spec.entropy_domain).into(),
        median_eer_percent: median(&eers),
        runs,
    })
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub n_speakers: usize,
    pub styles: Vec<StyleLabel>,
    pub per_style: usize,
    pub duration_s: f64,
    pub seed: u64,
    pub sample_rate: u32,
}

/// Writes `audio/<speaker>-<style>-<n>.wav` under `out_dir` and a
/// `manifest.csv` next to it. Returns the manifest path.
pub fn synth_corpus(spec: &SynthSpec, out_dir: &Path) -> Result<PathBuf> {
    let mut jobs = Vec::new();
    for s in 0..spec.n_speakers {
        let speaker = SyntheticSpeaker::random(mix(spec.seed, 0x1000 + s as u64));
        for label in &spec.styles {
            let style = StyleSpec::preset(label)?;
            for n in 0..spec.per_style {
                let id = format!("spk{s:03}-{label}-{n}");
                let content = mix(mix(spec.seed, 0x2000 + s as u64), n as u64);
                jobs.push((id, format!("spk{s:03}"), label.clone(), speaker.clone(), style.clone(), content));
            }
        }
    }
    let entries = jobs
        .par_iter()
        .map(|(id, spk, label, speaker, style, content)| {
            let audio = synth_utterance_at(speaker, style, spec.duration_s, *content, spec.sample_rate)?;
            let rel = format!("audio/{id}.wav");
            write_wav(&out_dir.join(&rel), &audio)?;
            Ok(ManifestEntry { utterance_id: id.clone(), speaker_id: spk.clone(), style: label.clone(), audio_path: rel })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = out_dir.join("manifest.csv");
    write_manifest(&manifest, &entries)?;
    Ok(manifest)
}
