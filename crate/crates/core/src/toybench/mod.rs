//! Synthetic speakers and speaking styles.
//!
//! A speaker is a cascade of three formant resonators with its own bandwidths,
//! glottal tilt and pitch. An utterance is a sequence of 200-400 ms syllable
//! units (consonant onset gliding into a vowel); a style time-stretches each
//! unit and inserts pauses between units. Slowing down lengthens the vowel
//! nucleus only: onset glides, bursts and releases keep their durations. Content, jitter, pauses and noise
//! come from separate random streams, so the same seed rendered at two tempos
//! yields the same syllables stretched differently.

mod experiment;

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport};

use crate::audio::AudioBuffer;
use crate::augment::StyleLabel;
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 8000;

/// Formant multipliers (F1, F2, F3) shared by every speaker.
const VOWELS: [[f64; 3]; 6] = [
    [1.0, 1.0, 1.0],
    [0.6, 1.35, 1.05],
    [1.35, 0.85, 0.97],
    [0.75, 0.7, 0.95],
    [1.2, 1.15, 1.02],
    [0.9, 0.9, 1.0],
];

/// Onset loci and whether the onset carries a noise burst.
const ONSETS: [([f64; 3], bool); 4] = [
    ([0.5, 1.2, 1.05], true),
    ([0.5, 0.8, 0.95], true),
    ([0.6, 1.5, 1.08], false),
    ([0.7, 1.0, 1.0], false),
];

const UNIT_MIN_S: f64 = 0.2;
const UNIT_MAX_S: f64 = 0.4;
/// Fraction of a unit spent gliding from the onset locus to the vowel.
const GLIDE: f64 = 0.3;
const BURST: f64 = 0.08;
const ATTACK: f64 = 0.1;
const RELEASE: f64 = 0.15;
const NOISE_FLOOR: f64 = 1e-3;
const PEAK: f64 = 0.5;

/// splitmix64 finalizer, used to derive independent stream seeds from a
/// base seed and a stream number.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, stream))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpeaker {
    pub resonator_freqs: [f64; 3],
    pub bandwidths: [f64; 3],
    pub pitch_hz: f64,
    /// One-pole lowpass coefficient applied to the pulse train.
    pub glottal_tilt: f64,
    pub seed: u64,
}

impl SyntheticSpeaker {
    pub fn random(seed: u64) -> Self {
        let mut r = rng(seed, 0x5EA4);
        Self {
            resonator_freqs: [r.gen_range(350.0..850.0), r.gen_range(1000.0..2100.0), r.gen_range(2400.0..3300.0)],
            bandwidths: [r.gen_range(50.0..120.0), r.gen_range(70.0..160.0), r.gen_range(110.0..250.0)],
            pitch_hz: r.gen_range(80.0..250.0),
            glottal_tilt: r.gen_range(0.5..0.95),
            seed,
        }
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let nyquist = sample_rate as f64 / 2.0;
        if self.resonator_freqs.iter().any(|&f| !(f > 0.0 && f < nyquist)) {
            return Err(Error::InvalidSynthesis("resonator frequencies must lie below Nyquist".into()));
        }
        for (k, &f) in self.resonator_freqs.iter().enumerate() {
            let max_factor = VOWELS.iter().chain(ONSETS.iter().map(|(f, _)| f)).fold(0.0, |a: f64, v| a.max(v[k]));
            if f * max_factor >= nyquist {
                return Err(Error::InvalidSynthesis("vowel shifts would push a formant past Nyquist".into()));
            }
        }
        if self.bandwidths.iter().any(|&b| !(b > 0.0)) {
            return Err(Error::InvalidSynthesis("bandwidths must be positive".into()));
        }
        if !(60.0..=300.0).contains(&self.pitch_hz) {
            return Err(Error::InvalidSynthesis(alloc::format!("pitch {} Hz outside 60-300 Hz", self.pitch_hz)));
        }
        if !(0.0..1.0).contains(&self.glottal_tilt) {
            return Err(Error::InvalidSynthesis("glottal tilt must be in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StyleSpec {
    pub name: String,
    /// Duration multiplier per syllable unit (1.0 is neutral, larger is slower).
    pub tempo_factor: f64,
    /// Expected pauses per second of neutral speech.
    pub pause_rate: f64,
    pub pause_len_ms: (f64, f64),
    /// Relative per-unit tempo spread.
    pub jitter: f64,
}

impl StyleSpec {
    pub fn neutral() -> Self {
        Self::synthetic(1.0)
    }

    /// `synthetic-<tempo>`: a pure tempo change with light jitter and no pauses.
    pub fn synthetic(tempo: f64) -> Self {
        Self {
            name: alloc::format!("synthetic-{tempo}"),
            tempo_factor: tempo,
            pause_rate: 0.0,
            pause_len_ms: (0.0, 0.0),
            jitter: 0.05,
        }
    }

    /// Tempo and pause settings standing in for the named speaking styles.
    pub fn preset(label: &StyleLabel) -> Result<Self> {
        let (tempo, rate, lo, hi, jitter) = match label {
            StyleLabel::Read => (1.0, 0.1, 80.0, 200.0, 0.05),
            StyleLabel::Narrative => (1.1, 0.3, 100.0, 300.0, 0.1),
            StyleLabel::Conversation => (0.9, 0.5, 50.0, 400.0, 0.2),
            StyleLabel::PetDirected => (1.5, 0.4, 150.0, 500.0, 0.25),
            StyleLabel::Synthetic(t) => {
                let tempo: f64 = t
                    .parse()
                    .map_err(|_| Error::InvalidSynthesis(alloc::format!("`synthetic-{t}` needs a numeric tempo")))?;
                let s = Self::synthetic(tempo);
                s.validate()?;
                return Ok(s);
            }
        };
        Ok(Self {
            name: alloc::string::ToString::to_string(label),
            tempo_factor: tempo,
            pause_rate: rate,
            pause_len_ms: (lo, hi),
            jitter,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.5..=2.0).contains(&self.tempo_factor) {
            return Err(Error::InvalidSynthesis(alloc::format!("tempo {} outside [0.5, 2]", self.tempo_factor)));
        }
        let (lo, hi) = self.pause_len_ms;
        if !(self.pause_rate >= 0.0 && lo >= 0.0 && hi >= lo) {
            return Err(Error::InvalidSynthesis("pause parameters must be non-negative with lo <= hi".into()));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(Error::InvalidSynthesis("jitter must be in [0, 1)".into()));
        }
        Ok(())
    }
}

struct Unit {
    neutral_s: f64,
    vowel: [f64; 3],
    onset: [f64; 3],
    burst: bool,
    pitch: (f64, f64),
    gain: f64,
}

/// Two-pole digital resonator with unity gain at DC.
#[derive(Default, Clone, Copy)]
struct Resonator {
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn step(&mut self, x: f64, freq: f64, bw: f64, sample_rate: f64) -> f64 {
        let t = 1.0 / sample_rate;
        let c = -libm::exp(-2.0 * PI * bw * t);
        let b = 2.0 * libm::exp(-PI * bw * t) * libm::cos(2.0 * PI * freq * t);
        let a = 1.0 - b - c;
        let y = a * x + b * self.y1 + c * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

fn raised_cosine(x: f64) -> f64 {
    0.5 - 0.5 * libm::cos(PI * x.clamp(0.0, 1.0))
}

/// Synthesizes an utterance at [`DEFAULT_SAMPLE_RATE`].
pub fn synth_utterance(speaker: &SyntheticSpeaker, style: &StyleSpec, duration_s: f64, seed: u64) -> Result<AudioBuffer> {
    synth_utterance_at(speaker, style, duration_s, seed, DEFAULT_SAMPLE_RATE)
}

/// `duration_s` is the neutral (unstretched, pause-free) content length.
pub fn synth_utterance_at(
    speaker: &SyntheticSpeaker,
    style: &StyleSpec,
    duration_s: f64,
    seed: u64,
    sample_rate: u32,
) -> Result<AudioBuffer> {
    if !(duration_s >= 1.0) {
        return Err(Error::InvalidSynthesis(alloc::format!("duration {duration_s} s is below 1 s")));
    }
    speaker.validate(sample_rate)?;
    style.validate()?;
    let base = mix(seed, speaker.seed);
    let mut content = rng(base, 1);
    let mut jitter = rng(base, 2);
    let mut pauses = rng(base, 3);
    let mut noise = rng(base, 4);

    let mut units = Vec::new();
    let mut total = 0.0;
    while total < duration_s - 1e-9 {
        let mut d: f64 = content.gen_range(UNIT_MIN_S..UNIT_MAX_S);
        if total + d > duration_s {
            d = duration_s - total;
        }
        total += d;
        let (onset, burst) = ONSETS[content.gen_range(0..ONSETS.len())];
        units.push(Unit {
            neutral_s: d,
            vowel: VOWELS[content.gen_range(0..VOWELS.len())],
            onset,
            burst,
            pitch: (content.gen_range(0.9..1.12), content.gen_range(0.85..1.05)),
            gain: content.gen_range(0.6..1.0),
        });
    }

    let sr = sample_rate as f64;
    let mut out = Vec::with_capacity((duration_s * style.tempo_factor * sr * 1.3) as usize);
    let mut res = [Resonator::default(); 3];
    let mut tilt_state = 0.0;
    let mut phase = 0.0;
    let last = units.len() - 1;
    for (ui, unit) in units.iter().enumerate() {
        let u: f64 = jitter.gen_range(-1.0..1.0);
        let stretch = style.tempo_factor * (1.0 + style.jitter * u);
        let len = libm::round(unit.neutral_s * stretch * sr).max(1.0) as usize;
        // Onset, burst and release keep their neutral durations when slowed
        // down; the steady vowel nucleus absorbs the stretch.
        let fixed = unit.neutral_s * sr * stretch.min(1.0);
        let (glide_len, burst_len) = (GLIDE * fixed, BURST * fixed);
        let (attack_len, release_len) = (ATTACK * fixed, RELEASE * fixed);
        for n in 0..len {
            let t = n as f64;
            let tau = t / len as f64;
            let glide = raised_cosine(t / glide_len);
            let f0 = speaker.pitch_hz * (unit.pitch.0 + (unit.pitch.1 - unit.pitch.0) * tau);
            phase += f0 / sr;
            let mut exc = if phase >= 1.0 {
                phase -= 1.0;
                1.0
            } else {
                0.0
            };
            tilt_state = (1.0 - speaker.glottal_tilt) * exc + speaker.glottal_tilt * tilt_state;
            exc = tilt_state + 0.02 * noise.gen_range(-1.0..1.0);
            if unit.burst && t < burst_len {
                exc += 0.3 * noise.gen_range(-1.0..1.0);
            }
            let env = raised_cosine(t / attack_len) * raised_cosine((len as f64 - t) / release_len);
            let mut y = exc * env * unit.gain;
            for (k, r) in res.iter_mut().enumerate() {
                let factor = unit.onset[k] + (unit.vowel[k] - unit.onset[k]) * glide;
                let f = (speaker.resonator_freqs[k] * factor).min(0.45 * sr);
                y = r.step(y, f, speaker.bandwidths[k], sr);
            }
            out.push(y);
        }
        if ui != last && style.pause_rate > 0.0 && pauses.gen_bool((style.pause_rate * unit.neutral_s).min(1.0)) {
            let (lo, hi) = style.pause_len_ms;
            let ms = if hi > lo { pauses.gen_range(lo..hi) } else { lo };
            for _ in 0..libm::round(ms * sr / 1000.0) as usize {
                let mut y = 0.0;
                for (k, r) in res.iter_mut().enumerate() {
                    y = r.step(y, speaker.resonator_freqs[k], speaker.bandwidths[k], sr);
                }
                out.push(y);
            }
        }
    }
    let peak = out.iter().fold(0.0, |a: f64, &b| a.max(b.abs()));
    let scale = if peak > 0.0 { PEAK / peak } else { 0.0 };
    for s in &mut out {
        *s = *s * scale + NOISE_FLOOR * noise.gen_range(-1.0..1.0);
    }
    AudioBuffer::new(out, sample_rate, alloc::format!("synth-{seed:016x}"))
}
