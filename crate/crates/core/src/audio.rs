//! Mono sample buffers and band-limited sample-rate conversion.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::stats::gcd;

/// Mono floating-point audio at a known sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
    source_id: String,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_id: impl Into<String>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidAudio("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidAudio(alloc::format!("sample {i} is not finite")));
        }
        Ok(Self { samples, sample_rate, source_id: source_id.into() })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Kaiser shape parameter of the interpolation kernel.
pub const KAISER_BETA: f64 = 10.0;
/// Sinc zero crossings kept on each side of the kernel center.
pub const ZERO_CROSSINGS: usize = 32;
/// Cutoff as a fraction of the lower of the two Nyquist frequencies.
pub const CUTOFF: f64 = 0.95;

/// Above this many phases the kernel is evaluated per output sample instead of tabulated.
const MAX_TABLE_PHASES: u64 = 4096;

/// Converts `buf` to `target_rate` with a polyphase Kaiser-windowed sinc filter.
///
/// The output has `round(len * target / source)` samples. Samples outside the
/// input are taken as zero, so the first and last few milliseconds roll off.
/// When the rates already match the samples are copied unchanged.
pub fn resample(buf: &AudioBuffer, target_rate: u32) -> Result<AudioBuffer> {
    if target_rate == 0 {
        return Err(Error::ZeroSampleRate);
    }
    let source_rate = buf.sample_rate;
    if source_rate == target_rate {
        return Ok(buf.clone());
    }
    let resampler = Resampler::new(source_rate, target_rate);
    let samples = resampler.process(&buf.samples);
    AudioBuffer::new(samples, target_rate, buf.source_id.clone())
}

/// Precomputed polyphase filter for one rate pair.
#[derive(Debug, Clone)]
pub struct Resampler {
    source_rate: u64,
    target_rate: u64,
    up: u64,
    down: u64,
    /// Normalized cutoff in cycles per input sample.
    cutoff: f64,
    half_width: f64,
    /// Taps run over input offsets `-reach ..= reach + 1` around the integer position.
    reach: i64,
    table: Option<Vec<Vec<f64>>>,
}

impl Resampler {
    pub fn new(source_rate: u32, target_rate: u32) -> Self {
        let (src, tgt) = (u64::from(source_rate), u64::from(target_rate));
        let g = gcd(src, tgt);
        let (up, down) = (tgt / g, src / g);
        let cutoff = CUTOFF * src.min(tgt) as f64 / (2.0 * src as f64);
        let half_width = ZERO_CROSSINGS as f64 / (2.0 * cutoff);
        let reach = libm::ceil(half_width) as i64;
        let mut r = Self {
            source_rate: src,
            target_rate: tgt,
            up,
            down,
            cutoff,
            half_width,
            reach,
            table: None,
        };
        if up <= MAX_TABLE_PHASES {
            r.table = Some((0..up).map(|p| r.phase_taps(p)).collect());
        }
        r
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        let n = input_len as u64;
        ((n * self.target_rate + self.source_rate / 2) / self.source_rate) as usize
    }

    fn kernel(&self, offset: f64) -> f64 {
        let r = offset / self.half_width;
        if !(-1.0..=1.0).contains(&r) {
            return 0.0;
        }
        let x = 2.0 * self.cutoff * offset;
        let sinc = if x == 0.0 {
            1.0
        } else {
            let px = core::f64::consts::PI * x;
            libm::sin(px) / px
        };
        let window = bessel_i0(KAISER_BETA * libm::sqrt(1.0 - r * r)) / bessel_i0(KAISER_BETA);
        2.0 * self.cutoff * sinc * window
    }

    /// Taps for fractional position `phase / up`, normalized to unit DC gain.
    fn phase_taps(&self, phase: u64) -> Vec<f64> {
        let frac = phase as f64 / self.up as f64;
        let mut taps: Vec<f64> =
            (-self.reach..=self.reach + 1).map(|j| self.kernel(frac - j as f64)).collect();
        let sum: f64 = taps.iter().sum();
        if sum != 0.0 {
            taps.iter_mut().for_each(|t| *t /= sum);
        }
        taps
    }

    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        let out_len = self.output_len(input.len());
        let mut out = vec![0.0; out_len];
        let n = input.len() as i64;
        for (m, y) in out.iter_mut().enumerate() {
            let pos = m as u64 * self.down;
            let base = (pos / self.up) as i64;
            let phase = pos % self.up;
            let owned;
            let taps: &[f64] = match &self.table {
                Some(t) => &t[phase as usize],
                None => {
                    owned = self.phase_taps(phase);
                    &owned
                }
            };
            let mut acc = 0.0;
            for (k, &h) in taps.iter().enumerate() {
                let idx = base + k as i64 - self.reach;
                if (0..n).contains(&idx) {
                    acc += h * input[idx as usize];
                }
            }
            *y = acc;
        }
        out
    }
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}
