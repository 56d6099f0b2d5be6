//! Fixed-grid short-time analysis: framing, mel energies, MFCC and sliding CMN.

mod cepstrum;
mod cmn;
mod filterbank;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

pub use cepstrum::Dct;
pub use cmn::sliding_cmn;
pub use filterbank::{hz_to_mel, mel_to_hz, MelFilterbank};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::vfr::EntropyDomain;

pub const FIXED_SHIFT_MS: f64 = 10.0;
pub const OVERSAMPLED_SHIFT_MS: f64 = 2.5;
/// Floor applied to mel energies before the logarithm.
pub const ENERGY_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FrontendConfig {
    pub sample_rate: u32,
    pub frame_len_ms: f64,
    pub base_shift_ms: f64,
    pub fft_size: usize,
    pub num_mel_filters: usize,
    pub num_ceps: usize,
    pub low_freq_hz: f64,
    /// `None` resolves to Nyquist minus 20 Hz.
    pub high_freq_hz: Option<f64>,
    pub preemph: f64,
    pub cmn_window_frames: usize,
    /// Representation the VFR entropy is computed on.
    pub entropy_domain: EntropyDomain,
}

impl FrontendConfig {
    /// 25 ms frames at a 10 ms shift, 23 filters and 23 cepstra.
    pub fn new(sample_rate: u32) -> Self {
        let frame_len = libm::round(25.0 * sample_rate as f64 / 1000.0) as usize;
        Self {
            sample_rate,
            frame_len_ms: 25.0,
            base_shift_ms: FIXED_SHIFT_MS,
            fft_size: frame_len.max(1).next_power_of_two(),
            num_mel_filters: 23,
            num_ceps: 23,
            low_freq_hz: 20.0,
            high_freq_hz: None,
            preemph: 0.97,
            cmn_window_frames: 300,
            entropy_domain: EntropyDomain::Linear,
        }
    }

    pub fn with_shift(mut self, shift_ms: f64) -> Self {
        self.base_shift_ms = shift_ms;
        self
    }

    pub fn oversampled(&self) -> Self {
        self.clone().with_shift(OVERSAMPLED_SHIFT_MS)
    }

    pub fn frame_len_samples(&self) -> usize {
        ms_to_samples(self.frame_len_ms, self.sample_rate)
    }

    pub fn shift_samples(&self) -> usize {
        ms_to_samples(self.base_shift_ms, self.sample_rate)
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate as f64 / 2.0
    }

    pub fn resolved_high_freq(&self) -> f64 {
        self.high_freq_hz.unwrap_or(self.nyquist() - 20.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.sample_rate == 0 {
            return bad("sample rate must be positive".into());
        }
        if !(self.frame_len_ms > self.base_shift_ms && self.base_shift_ms > 0.0) {
            return bad(format!(
                "need frame_len_ms > base_shift_ms > 0 (got {} and {})",
                self.frame_len_ms, self.base_shift_ms
            ));
        }
        if self.shift_samples() == 0 {
            return bad("frame shift is shorter than one sample".into());
        }
        if self.num_ceps == 0 || self.num_ceps > self.num_mel_filters {
            return bad(format!(
                "need 1 <= num_ceps <= num_mel_filters (got {} and {})",
                self.num_ceps, self.num_mel_filters
            ));
        }
        let high = self.resolved_high_freq();
        if !(self.low_freq_hz >= 0.0 && self.low_freq_hz < high && high <= self.nyquist()) {
            return bad(format!("need 0 <= low < high <= Nyquist (got {} and {high})", self.low_freq_hz));
        }
        if !self.fft_size.is_power_of_two() || self.fft_size < self.frame_len_samples() {
            return bad(format!(
                "fft_size {} must be a power of two >= frame length {}",
                self.fft_size,
                self.frame_len_samples()
            ));
        }
        if !(0.0..=1.0).contains(&self.preemph) {
            return bad(format!("pre-emphasis {} outside [0, 1]", self.preemph));
        }
        if self.cmn_window_frames == 0 {
            return bad("CMN window must cover at least one frame".into());
        }
        Ok(())
    }
}

fn ms_to_samples(ms: f64, sample_rate: u32) -> usize {
    libm::round(ms * sample_rate as f64 / 1000.0) as usize
}

/// `0.54 - 0.46 cos(2 pi n / (N - 1))`.
pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return alloc::vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len).map(|n| 0.54 - 0.46 * libm::cos(2.0 * PI * n as f64 / denom)).collect()
}

/// Pre-emphasized, Hamming-windowed frames stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Frames {
    data: Vec<f64>,
    frame_len: usize,
    pub shift_ms: f64,
    pub frame_len_ms: f64,
    pub sample_rate: u32,
}

impl Frames {
    pub fn len(&self) -> usize {
        self.data.len() / self.frame_len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.frame_len..(i + 1) * self.frame_len]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.frame_len)
    }
}

/// Number of whole frames of `frame_len` samples at hop `shift` (partial tail frames dropped).
pub fn frame_count(num_samples: usize, frame_len: usize, shift: usize) -> usize {
    if num_samples < frame_len {
        0
    } else {
        (num_samples - frame_len) / shift + 1
    }
}

/// Time-indexed mel filter energies (linear, non-negative).
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    data: Vec<f64>,
    dim: usize,
    pub shift_ms: f64,
    pub frame_len_ms: f64,
    pub sample_rate: u32,
}

impl MelSpectrogram {
    pub fn from_rows(rows: &[Vec<f64>], shift_ms: f64, frame_len_ms: f64, sample_rate: u32) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidConfig("mel rows must share a nonzero dimension".into()));
        }
        if rows.iter().flatten().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::InvalidConfig("mel energies must be finite and non-negative".into()));
        }
        Ok(Self { data: rows.concat(), dim, shift_ms, frame_len_ms, sample_rate })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Row-major energies.
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Elementwise `ln(max(e, ENERGY_FLOOR))`.
    pub fn log_energies(&self) -> Vec<f64> {
        self.data.iter().map(|&e| libm::log(e.max(ENERGY_FLOOR))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMeta {
    pub source_id: String,
    pub cmn_applied: bool,
    pub vfr_applied: bool,
    pub base_shift_ms: f64,
}

/// Cepstral feature rows with their frame-center times in milliseconds.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    dim: usize,
    timestamps_ms: Vec<f64>,
    pub meta: FeatureMeta,
}

impl FeatureMatrix {
    pub fn new(values: Vec<f64>, dim: usize, timestamps_ms: Vec<f64>, meta: FeatureMeta) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("feature dimension must be nonzero".into()));
        }
        if values.len() != dim * timestamps_ms.len() {
            return Err(Error::InvalidConfig(format!(
                "{} values do not form {} rows of dimension {dim}",
                values.len(),
                timestamps_ms.len()
            )));
        }
        if timestamps_ms.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig("timestamps must be strictly increasing".into()));
        }
        if values.iter().chain(&timestamps_ms).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("features must be finite".into()));
        }
        Ok(Self { values, dim, timestamps_ms, meta })
    }

    pub fn num_rows(&self) -> usize {
        self.timestamps_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps_ms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps_ms(&self) -> &[f64] {
        &self.timestamps_ms
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    /// Keeps the rows at `indices` (assumed in range), in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            values,
            dim: self.dim,
            timestamps_ms: indices.iter().map(|&i| self.timestamps_ms[i]).collect(),
            meta: self.meta.clone(),
        }
    }

    pub(crate) fn map_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { values, dim: self.dim, timestamps_ms: self.timestamps_ms.clone(), meta: self.meta.clone() }
    }
}

/// A configured analysis chain. Construction builds the FFT plan, filterbank
/// and DCT once; the instance is immutable afterwards.
#[derive(Debug, Clone)]
pub struct Frontend {
    cfg: FrontendConfig,
    window: Vec<f64>,
    fft: Fft,
    filterbank: MelFilterbank,
    dct: Dct,
}

impl Frontend {
    pub fn new(cfg: &FrontendConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            window: hamming(cfg.frame_len_samples()),
            fft: Fft::new(cfg.fft_size),
            filterbank: MelFilterbank::new(cfg),
            dct: Dct::new(cfg.num_mel_filters),
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &FrontendConfig {
        &self.cfg
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.filterbank
    }

    pub fn frame_signal(&self, buf: &AudioBuffer) -> Result<Frames> {
        if buf.sample_rate() != self.cfg.sample_rate {
            return Err(Error::InvalidConfig(format!(
                "audio is at {} Hz but the frontend expects {} Hz",
                buf.sample_rate(),
                self.cfg.sample_rate
            )));
        }
        let frame_len = self.cfg.frame_len_samples();
        let shift = self.cfg.shift_samples();
        let x = buf.samples();
        let count = frame_count(x.len(), frame_len, shift);
        if count == 0 {
            return Err(Error::SignalTooShort { samples: x.len(), frame_len });
        }
        let a = self.cfg.preemph;
        let mut data = Vec::with_capacity(count * frame_len);
        for i in 0..count {
            let frame = &x[i * shift..i * shift + frame_len];
            for (n, w) in self.window.iter().enumerate() {
                let prev = if n == 0 { frame[0] } else { frame[n - 1] };
                data.push((frame[n] - a * prev) * w);
            }
        }
        Ok(Frames {
            data,
            frame_len,
            shift_ms: self.cfg.base_shift_ms,
            frame_len_ms: self.cfg.frame_len_ms,
            sample_rate: self.cfg.sample_rate,
        })
    }

    pub fn mel_energies(&self, frames: &Frames) -> MelSpectrogram {
        let k = self.filterbank.num_filters();
        let mut data = Vec::with_capacity(frames.len() * k);
        let mut power = Vec::with_capacity(self.cfg.fft_size / 2 + 1);
        for frame in frames.iter() {
            self.fft.power_spectrum(frame, &mut power);
            data.extend(self.filterbank.apply(&power));
        }
        MelSpectrogram {
            data,
            dim: k,
            shift_ms: frames.shift_ms,
            frame_len_ms: frames.frame_len_ms,
            sample_rate: frames.sample_rate,
        }
    }

    pub fn mfcc(&self, mel: &MelSpectrogram, source_id: &str) -> Result<FeatureMatrix> {
        if mel.dim() != self.cfg.num_mel_filters {
            return Err(Error::InvalidConfig(format!(
                "mel dimension {} does not match {} filters",
                mel.dim(),
                self.cfg.num_mel_filters
            )));
        }
        let nc = self.cfg.num_ceps;
        let log = mel.log_energies();
        let mut values = Vec::with_capacity(mel.len() * nc);
        for row in log.chunks_exact(mel.dim()) {
            values.extend_from_slice(&self.dct.forward(row)[..nc]);
        }
        let timestamps = (0..mel.len()).map(|i| i as f64 * mel.shift_ms + mel.frame_len_ms / 2.0).collect();
        FeatureMatrix::new(
            values,
            nc,
            timestamps,
            FeatureMeta {
                source_id: source_id.into(),
                cmn_applied: false,
                vfr_applied: false,
                base_shift_ms: mel.shift_ms,
            },
        )
    }

    /// Frame, mel, MFCC, and optionally sliding CMN at the configured shift.
    pub fn extract(&self, buf: &AudioBuffer, apply_cmn: bool) -> Result<FeatureMatrix> {
        let mel = self.mel_energies(&self.frame_signal(buf)?);
        let feats = self.mfcc(&mel, buf.source_id())?;
        if apply_cmn {
            sliding_cmn(&feats, self.cfg.cmn_window_frames)
        } else {
            Ok(feats)
        }
    }
}

pub fn frame_signal(buf: &AudioBuffer, cfg: &FrontendConfig) -> Result<Frames> {
    Frontend::new(cfg)?.frame_signal(buf)
}

pub fn mel_energies(frames: &Frames, cfg: &FrontendConfig) -> Result<MelSpectrogram> {
    Ok(Frontend::new(cfg)?.mel_energies(frames))
}

pub fn mfcc(mel: &MelSpectrogram, cfg: &FrontendConfig) -> Result<FeatureMatrix> {
    Frontend::new(cfg)?.mfcc(mel, "")
}

/// Fixed-rate extraction at `cfg.base_shift_ms`.
pub fn extract_fixed(buf: &AudioBuffer, cfg: &FrontendConfig, apply_cmn: bool) -> Result<FeatureMatrix> {
    Frontend::new(cfg)?.extract(buf, apply_cmn)
}
