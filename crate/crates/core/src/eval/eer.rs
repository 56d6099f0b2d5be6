use alloc::vec::Vec;

use super::{ScoreSet, TrialLabel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Trials scoring at or above this are accepted.
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EerReport {
    pub eer_percent: f64,
    pub threshold: f64,
    /// From "accept everything" to "reject everything".
    pub far_frr_curve: Vec<OperatingPoint>,
}

pub fn compute_eer(scores: &ScoreSet) -> Result<EerReport> {
    let targets: Vec<f64> = scores.scores_with(TrialLabel::Target).collect();
    let nontargets: Vec<f64> = scores.scores_with(TrialLabel::Nontarget).collect();
    compute_eer_from(&targets, &nontargets)
}

/// Equal error rate with `FAR(t) = P(nontarget >= t)` and `FRR(t) = P(target < t)`.
///
/// Operating points are taken below the lowest score, at every midpoint
/// between adjacent distinct scores, and above the highest score. The EER is
/// read off where FRR - FAR changes sign, interpolating linearly between the
/// two neighbouring points.
pub fn compute_eer_from(targets: &[f64], nontargets: &[f64]) -> Result<EerReport> {
    if targets.is_empty() {
        return Err(Error::MissingClass("target"));
    }
    if nontargets.is_empty() {
        return Err(Error::MissingClass("nontarget"));
    }
    let mut all: Vec<(f64, bool)> =
        targets.iter().map(|&s| (s, true)).chain(nontargets.iter().map(|&s| (s, false))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nt, nn) = (targets.len() as f64, nontargets.len() as f64);

    let mut curve = Vec::new();
    let (mut targets_below, mut nontargets_below) = (0usize, 0usize);
    let mut i = 0;
    while i < all.len() {
        let s = all[i].0;
        let threshold = if i == 0 { s } else { 0.5 * (all[i - 1].0 + s) };
        curve.push(OperatingPoint {
            threshold,
            far: 1.0 - nontargets_below as f64 / nn,
            frr: targets_below as f64 / nt,
        });
        while i < all.len() && all[i].0 == s {
            if all[i].1 {
                targets_below += 1;
            } else {
                nontargets_below += 1;
            }
            i += 1;
        }
    }
    curve.push(OperatingPoint { threshold: f64::INFINITY, far: 0.0, frr: 1.0 });

    let j = curve.iter().position(|p| p.frr >= p.far).expect("last point has FRR 1 > FAR 0");
    let (a, b) = (curve[j - 1], curve[j]);
    let (da, db) = (a.frr - a.far, b.frr - b.far);
    let alpha = da / (da - db);
    let eer = a.far + alpha * (b.far - a.far);
    let threshold = if b.threshold.is_finite() { a.threshold + alpha * (b.threshold - a.threshold) } else { a.threshold };
    Ok(EerReport { eer_percent: (100.0 * eer).clamp(0.0, 100.0), threshold, far_frr_curve: curve })
}
