use alloc::vec::Vec;

use super::FeatureMatrix;
use crate::error::{Error, Result};

/// Subtracts from each row the per-dimension mean of a centered window of up
/// to `window_frames` rows. The window `[i - w/2, i - w/2 + w)` is clipped at
/// the utterance edges rather than shifted, and is counted in rows so VFR
/// output uses the same rule as fixed-rate output.
pub fn sliding_cmn(feats: &FeatureMatrix, window_frames: usize) -> Result<FeatureMatrix> {
    if window_frames == 0 {
        return Err(Error::InvalidConfig("CMN window must cover at least one frame".into()));
    }
    let n = feats.num_rows();
    if n == 0 {
        return Err(Error::EmptyFeatures);
    }
    let dim = feats.dim();
    let mut prefix = alloc::vec![0.0; (n + 1) * dim];
    for (i, row) in feats.rows().enumerate() {
        for d in 0..dim {
            prefix[(i + 1) * dim + d] = prefix[i * dim + d] + row[d];
        }
    }
    let before = window_frames / 2;
    let after = window_frames - before;
    let mut out = Vec::with_capacity(n * dim);
    for (i, row) in feats.rows().enumerate() {
        let lo = i.saturating_sub(before);
        let hi = (i + after).min(n);
        let count = (hi - lo) as f64;
        for d in 0..dim {
            let mean = (prefix[hi * dim + d] - prefix[lo * dim + d]) / count;
            out.push(row[d] - mean);
        }
    }
    let mut normalized = feats.map_values(out);
    normalized.meta.cmn_applied = true;
    Ok(normalized)
}
