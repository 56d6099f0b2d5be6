use alloc::vec::Vec;

use super::FrontendConfig;

/// `1127 ln(1 + f / 700)`.
pub fn hz_to_mel(hz: f64) -> f64 {
    1127.0 * libm::log(1.0 + hz / 700.0)
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (libm::exp(mel / 1127.0) - 1.0)
}

/// Triangular filters with centers equally spaced on the mel scale.
///
/// Triangles are linear in mel, so between two adjacent centers the rising
/// edge of one filter and the falling edge of its neighbour sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    /// Per filter: first FFT bin with nonzero weight, then the weights.
    filters: Vec<(usize, Vec<f64>)>,
    centers_hz: Vec<f64>,
    num_bins: usize,
}

impl MelFilterbank {
    pub fn new(cfg: &FrontendConfig) -> Self {
        let k = cfg.num_mel_filters;
        let num_bins = cfg.fft_size / 2 + 1;
        let bin_hz = cfg.sample_rate as f64 / cfg.fft_size as f64;
        let mel_lo = hz_to_mel(cfg.low_freq_hz);
        let mel_hi = hz_to_mel(cfg.resolved_high_freq());
        let delta = (mel_hi - mel_lo) / (k + 1) as f64;

        let mut filters = Vec::with_capacity(k);
        let mut centers_hz = Vec::with_capacity(k);
        for m in 0..k {
            let left = mel_lo + m as f64 * delta;
            let center = left + delta;
            let right = center + delta;
            centers_hz.push(mel_to_hz(center));
            let mut first = None;
            let mut weights = Vec::new();
            for bin in 0..num_bins {
                let mel = hz_to_mel(bin as f64 * bin_hz);
                let w = if mel > left && mel <= center {
                    (mel - left) / (center - left)
                } else if mel > center && mel < right {
                    (right - mel) / (right - center)
                } else {
                    0.0
                };
                if w > 0.0 {
                    first.get_or_insert(bin);
                    weights.push(w);
                } else if first.is_some() {
                    break;
                }
            }
            filters.push((first.unwrap_or(0), weights));
        }
        Self { filters, centers_hz, num_bins }
    }

    pub fn num_filters(&self) -> usize {
        self.filters.len()
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    /// Dense weight of filter `m` at FFT bin `bin`.
    pub fn weight(&self, m: usize, bin: usize) -> f64 {
        let (first, w) = &self.filters[m];
        if bin < *first {
            0.0
        } else {
            w.get(bin - first).copied().unwrap_or(0.0)
        }
    }

    pub fn apply<'a>(&'a self, power: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        debug_assert_eq!(power.len(), self.num_bins);
        self.filters
            .iter()
            .map(move |(first, w)| w.iter().zip(&power[*first..]).map(|(a, b)| a * b).sum())
    }
}
