//! Entropy-based variable frame rate analysis.
//!
//! Frames are analyzed on a dense 2.5 ms grid. Every 15 ms a 30 ms buffer of
//! mel-filter vectors is treated as Gaussian samples and its entropy is
//! approximated from the trace of the covariance:
//!
//! ```text
//! H = K ln sqrt(2 pi) + ln Tr(Sigma)
//! ```
//!
//! Per-utterance thresholds derived from the maximum, median and minimum of
//! that curve map each 15 ms segment to a frame shift of 5, 7.5, 10 or 12.5 ms,
//! and the MFCC rows at the resulting grid positions are kept.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::frontend::{sliding_cmn, FeatureMatrix, Frontend, FrontendConfig, MelSpectrogram, OVERSAMPLED_SHIFT_MS};
use crate::stats::lower_median;

/// Entropy buffer length.
pub const BUFFER_MS: f64 = 30.0;
/// Spacing between entropy evaluations.
pub const HOP_MS: f64 = 15.0;
/// Floor applied to `Tr(Sigma)` before the logarithm.
pub const TRACE_FLOOR: f64 = 1e-10;
/// Weights (w1, w2, w3) of the threshold rule.
pub const OMEGAS: (f64, f64, f64) = (0.7, 0.8, 0.5);
/// Curves whose range is below this fall back to a uniform 10 ms plan.
pub const DEGENERATE_RANGE: f64 = 1e-6;
/// Stride (in 2.5 ms grid steps) used when the curve is degenerate.
pub const UNIFORM_STRIDE: usize = 4;

/// What the entropy buffers are filled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyDomain {
    /// Linear mel-filter energies.
    #[default]
    Linear,
    /// Floored natural-log mel energies.
    Log,
}

/// Sufficient statistics of one entropy buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyWindowStats {
    pub mu: Vec<f64>,
    /// Sum over dimensions of the population variance.
    pub trace_sigma: f64,
    pub dim: usize,
}

impl EntropyWindowStats {
    pub fn from_rows<'a, I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
        I::IntoIter: Clone,
    {
        let rows = rows.into_iter();
        let n = rows.clone().count();
        if n < 2 {
            return Err(Error::TooFewRows { needed: 2, got: n });
        }
        let dim = rows.clone().next().map_or(0, <[f64]>::len);
        let mut mu = alloc::vec![0.0; dim];
        for r in rows.clone() {
            mu.iter_mut().zip(r).for_each(|(m, v)| *m += v);
        }
        mu.iter_mut().for_each(|m| *m /= n as f64);
        let mut trace_sigma = 0.0;
        for r in rows {
            trace_sigma += r.iter().zip(&mu).map(|(v, m)| (v - m) * (v - m)).sum::<f64>();
        }
        trace_sigma /= n as f64;
        Ok(Self { mu, trace_sigma, dim })
    }

    pub fn entropy(&self) -> f64 {
        self.dim as f64 * 0.5 * libm::log(2.0 * PI) + libm::log(self.trace_sigma.max(TRACE_FLOOR))
    }
}

/// Approximate Gaussian entropy (nats) of a buffer of K-dimensional rows.
pub fn window_entropy(rows: &[&[f64]]) -> Result<f64> {
    Ok(EntropyWindowStats::from_rows(rows.iter().copied())?.entropy())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    pub values: Vec<f64>,
    pub hop_ms: f64,
    pub buffer_ms: f64,
    /// Oversampled-grid row where each segment's buffer begins.
    pub segment_start_indices: Vec<usize>,
}

impl EntropyCurve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid rows per hop.
    pub fn hop_rows(&self) -> usize {
        libm::round(self.hop_ms / OVERSAMPLED_SHIFT_MS) as usize
    }
}

fn grid_rows(ms: f64) -> usize {
    libm::round(ms / OVERSAMPLED_SHIFT_MS) as usize
}

/// Entropy every 15 ms over 30 ms buffers of an oversampled mel spectrogram.
///
/// Segment `i` covers rows `[6i, 6i + 12)`. If the last full buffer stops short
/// of the end, one more segment starting at the next hop runs to the final
/// row (kept only if it has at least two rows).
pub fn entropy_curve(mel: &MelSpectrogram) -> Result<EntropyCurve> {
    entropy_curve_in(mel, EntropyDomain::Linear)
}

pub fn entropy_curve_in(mel: &MelSpectrogram, domain: EntropyDomain) -> Result<EntropyCurve> {
    if (mel.shift_ms - OVERSAMPLED_SHIFT_MS).abs() > 1e-9 {
        return Err(Error::NotOversampled(mel.shift_ms));
    }
    let buffer = grid_rows(BUFFER_MS);
    let hop = grid_rows(HOP_MS);
    let n = mel.len();
    if n < buffer {
        return Err(Error::TooFewRows { needed: buffer, got: n });
    }
    let dim = mel.dim();
    let log;
    let data: &[f64] = match domain {
        EntropyDomain::Linear => mel.as_flat(),
        EntropyDomain::Log => {
            log = mel.log_energies();
            &log
        }
    };
    let row = |i: usize| &data[i * dim..(i + 1) * dim];

    let full = (n - buffer) / hop + 1;
    let mut starts: Vec<usize> = (0..full).map(|i| i * hop).collect();
    let covered = (full - 1) * hop + buffer;
    let tail_start = full * hop;
    if covered < n && n - tail_start >= 2 {
        starts.push(tail_start);
    }
    let values = starts
        .iter()
        .map(|&s| {
            let end = (s + buffer).min(n);
            EntropyWindowStats::from_rows((s..end).map(&row)).map(|st| st.entropy())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyCurve { values, hop_ms: HOP_MS, buffer_ms: BUFFER_MS, segment_start_indices: starts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub m_max: f64,
    pub m_med: f64,
    pub m_min: f64,
    pub omegas: (f64, f64, f64),
    pub degenerate: bool,
}

impl ThresholdSet {
    /// `T1 = w1 Mmax + (1 - w1) Mmed`, `T2 = (1 - w2) Mmax + w2 Mmed`,
    /// `T3 = (1 - w3) Mmed + w3 Mmin`.
    pub fn from_stats(m_max: f64, m_med: f64, m_min: f64) -> Self {
        let (w1, w2, w3) = OMEGAS;
        // Written as offsets from the lower anchor so that rounding cannot
        // reorder T1 >= T2 >= T3.
        let upper = m_max - m_med;
        Self {
            t1: m_med + w1 * upper,
            t2: m_med + (1.0 - w2) * upper,
            t3: m_min + (1.0 - w3) * (m_med - m_min),
            m_max,
            m_med,
            m_min,
            omegas: OMEGAS,
            degenerate: m_max - m_min < DEGENERATE_RANGE,
        }
    }

    /// Frame stride on the 2.5 ms grid for entropy `h`.
    pub fn stride_for(&self, h: f64) -> usize {
        if h >= self.t1 {
            2
        } else if h >= self.t2 {
            3
        } else if h >= self.t3 {
            4
        } else {
            5
        }
    }
}

pub fn compute_thresholds(curve: &EntropyCurve) -> Result<ThresholdSet> {
    compute_thresholds_from(&curve.values)
}

pub fn compute_thresholds_from(values: &[f64]) -> Result<ThresholdSet> {
    let med = lower_median(values).ok_or(Error::EmptyCurve)?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ThresholdSet::from_stats(max, med, min))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramePlan {
    /// Strictly increasing indices into the 2.5 ms grid.
    pub picked_indices: Vec<usize>,
    /// Stride of each entropy segment, in grid steps (2, 3, 4 or 5).
    pub per_segment_stride: Vec<usize>,
}

/// Walks a cursor over `n_oversampled` grid frames. At cursor `c` the governing
/// segment is `min(c / hop_rows, N - 1)`; the cursor advances by that
/// segment's stride and carries over segment boundaries.
pub fn build_frame_plan(curve: &EntropyCurve, th: &ThresholdSet, n_oversampled: usize) -> FramePlan {
    let strides: Vec<usize> = if th.degenerate {
        alloc::vec![UNIFORM_STRIDE; curve.len()]
    } else {
        curve.values.iter().map(|&h| th.stride_for(h)).collect()
    };
    let hop = curve.hop_rows().max(1);
    let mut picked = Vec::with_capacity(n_oversampled / 2 + 1);
    let mut c = 0;
    while c < n_oversampled {
        picked.push(c);
        let seg = (c / hop).min(strides.len().saturating_sub(1));
        c += strides.get(seg).copied().unwrap_or(UNIFORM_STRIDE);
    }
    FramePlan { picked_indices: picked, per_segment_stride: strides }
}

/// Everything computed on the way to VFR features.
#[derive(Debug, Clone, PartialEq)]
pub struct VfrAnalysis {
    pub curve: EntropyCurve,
    pub thresholds: ThresholdSet,
    pub plan: FramePlan,
    pub features: FeatureMatrix,
}

/// Full VFR pipeline, keeping the intermediate curve, thresholds and plan.
pub fn vfr_analyze(buf: &AudioBuffer, cfg: &FrontendConfig) -> Result<VfrAnalysis> {
    let frontend = Frontend::new(&cfg.oversampled())?;
    let frames = frontend.frame_signal(buf)?;
    let mel = frontend.mel_energies(&frames);
    let curve = entropy_curve_in(&mel, cfg.entropy_domain)?;
    let thresholds = compute_thresholds(&curve)?;
    let plan = build_frame_plan(&curve, &thresholds, mel.len());
    let dense = frontend.mfcc(&mel, buf.source_id())?;
    let mut features = sliding_cmn(&dense.select_rows(&plan.picked_indices), cfg.cmn_window_frames)?;
    features.meta.vfr_applied = true;
    Ok(VfrAnalysis { curve, thresholds, plan, features })
}

/// Variable frame rate MFCCs with sliding CMN applied.
pub fn vfr_extract(buf: &AudioBuffer, cfg: &FrontendConfig) -> Result<FeatureMatrix> {
    vfr_analyze(buf, cfg).map(|a| a.features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn curve(values: Vec<f64>) -> EntropyCurve {
        let starts = (0..values.len()).map(|i| i * 6).collect();
        EntropyCurve { values, hop_ms: HOP_MS, buffer_ms: BUFFER_MS, segment_start_indices: starts }
    }

    fn mel(n: usize, f: impl Fn(usize, usize) -> f64) -> MelSpectrogram {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..23).map(|k| f(i, k)).collect()).collect();
        MelSpectrogram::from_rows(&rows, 2.5, 25.0, 8000).unwrap()
    }

    #[test]
    fn entropy_reference_values() {
        let k_term = 23.0 * libm::log(libm::sqrt(2.0 * PI));
        assert!((k_term - 21.135_586).abs() < 1e-6);
        let same = [1.0; 23];
        let h = window_entropy(&[&same, &same]).unwrap();
        // 21.1355863 + ln(1e-10) = -1.8902647
        assert!((h - (k_term + libm::log(1e-10))).abs() < 1e-12);
        assert!((h - (-1.890_264_7)).abs() < 1e-7, "{h}");
    }

    #[test]
    fn entropy_needs_two_rows() {
        let r = [0.0; 3];
        assert_eq!(window_entropy(&[&r]), Err(Error::TooFewRows { needed: 2, got: 1 }));
    }

    #[test]
    fn entropy_is_shift_invariant() {
        let a = [1.0, 5.0, 2.0];
        let b = [3.0, 1.0, 0.5];
        let a2 = [101.0, 105.0, 102.0];
        let b2 = [103.0, 101.0, 100.5];
        let h1 = window_entropy(&[&a, &b]).unwrap();
        let h2 = window_entropy(&[&a2, &b2]).unwrap();
        assert!((h1 - h2).abs() < 1e-9);
    }

    #[test]
    fn curve_segment_arithmetic() {
        let c = entropy_curve(&mel(391, |i, k| (i * 7 + k) as f64 % 5.0)).unwrap();
        assert_eq!(c.len(), 65);
        assert_eq!(c.segment_start_indices[64], 384);
        assert!(c.values.iter().all(|v| v.is_finite()));

        let c = entropy_curve(&mel(12, |i, _| i as f64)).unwrap();
        assert_eq!(c.len(), 1);
        // 18 rows: buffers [0,12) and [6,18) cover everything
        assert_eq!(entropy_curve(&mel(18, |i, _| i as f64)).unwrap().len(), 2);
        // 13 rows: one full buffer plus a 7-row tail from row 6
        let c = entropy_curve(&mel(13, |i, _| i as f64)).unwrap();
        assert_eq!(c.segment_start_indices, vec![0, 6]);
    }

    #[test]
    fn curve_rejects_short_or_coarse_input() {
        assert_eq!(entropy_curve(&mel(11, |_, _| 1.0)), Err(Error::TooFewRows { needed: 12, got: 11 }));
        let rows = vec![vec![1.0; 23]; 20];
        let coarse = MelSpectrogram::from_rows(&rows, 10.0, 25.0, 8000).unwrap();
        assert_eq!(entropy_curve(&coarse), Err(Error::NotOversampled(10.0)));
    }

    #[test]
    fn log_domain_uses_floored_log_energies() {
        let m = mel(12, |i, k| libm::exp((i + k) as f64 * 0.1));
        let c = entropy_curve_in(&m, EntropyDomain::Log).unwrap();
        // log rows are (i + k) / 10: per-dimension variance of i/10 over 12 rows
        let var = (0..12).map(|i| (i as f64 * 0.1 - 0.55).powi(2)).sum::<f64>() / 12.0;
        let expect = 23.0 * 0.5 * libm::log(2.0 * PI) + libm::log(23.0 * var);
        assert!((c.values[0] - expect).abs() < 1e-9);
    }

    #[test]
    fn thresholds_hand_case() {
        let th = ThresholdSet::from_stats(10.0, 4.0, 2.0);
        assert!((th.t1 - 8.2).abs() < 1e-12);
        assert!((th.t2 - 5.2).abs() < 1e-12);
        assert!((th.t3 - 3.0).abs() < 1e-12);
        assert!(!th.degenerate);
    }

    #[test]
    fn thresholds_collapse_on_flat_curve() {
        let th = compute_thresholds(&curve(vec![3.3; 5])).unwrap();
        assert_eq!((th.t1, th.t2, th.t3), (3.3, 3.3, 3.3));
        assert!(th.degenerate);
        assert_eq!(compute_thresholds(&curve(vec![])), Err(Error::EmptyCurve));
    }

    #[test]
    fn median_is_lower_middle() {
        let th = compute_thresholds(&curve(vec![1.0, 9.0, 3.0, 5.0])).unwrap();
        assert_eq!(th.m_med, 3.0);
        assert_eq!((th.m_max, th.m_min), (9.0, 1.0));
    }

    #[test]
    fn stride_branches() {
        let th = ThresholdSet::from_stats(10.0, 4.0, 2.0);
        assert_eq!(th.stride_for(8.2), 2);
        assert_eq!(th.stride_for(8.1), 3);
        assert_eq!(th.stride_for(5.2), 3);
        assert_eq!(th.stride_for(5.1), 4);
        assert_eq!(th.stride_for(3.0), 4);
        assert_eq!(th.stride_for(2.9), 5);
    }

    #[test]
    fn degenerate_plan_is_uniform_10ms() {
        let c = curve(vec![1.0; 7]);
        let th = compute_thresholds(&c).unwrap();
        let plan = build_frame_plan(&c, &th, 41);
        assert_eq!(plan.picked_indices, (0..=40).step_by(4).collect::<Vec<_>>());
    }

    #[test]
    fn stride_two_walk() {
        let c = curve(vec![9.0]);
        let th = ThresholdSet::from_stats(10.0, 4.0, 2.0);
        let plan = build_frame_plan(&c, &th, 12);
        assert_eq!(plan.picked_indices, vec![0, 2, 4, 6, 8, 10]);
    }

    #[test]
    fn two_segment_carry_over() {
        let c = curve(vec![9.0, 2.5]);
        let th = ThresholdSet::from_stats(10.0, 4.0, 2.0);
        let plan = build_frame_plan(&c, &th, 17);
        assert_eq!(plan.per_segment_stride, vec![2, 5]);
        assert_eq!(plan.picked_indices, vec![0, 2, 4, 6, 11, 16]);
    }

    #[test]
    fn constant_input_matches_fixed_rate() {
        let buf = AudioBuffer::new(vec![0.0; 8000], 8000, "z").unwrap();
        let cfg = FrontendConfig::new(8000);
        let a = vfr_analyze(&buf, &cfg).unwrap();
        assert!(a.thresholds.degenerate);
        let fixed = crate::frontend::extract_fixed(&buf, &cfg, true).unwrap();
        assert_eq!(a.features.num_rows(), fixed.num_rows());
        assert_eq!(a.features.timestamps_ms(), fixed.timestamps_ms());
        assert!(a.features.meta.vfr_applied && a.features.meta.cmn_applied);
    }
}
