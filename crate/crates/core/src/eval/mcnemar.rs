use alloc::vec::Vec;

use super::{ScoreSet, TrialLabel};
use crate::error::{Error, Result};

/// Discordant-pair totals up to this use the exact binomial test.
pub const EXACT_LIMIT: u64 = 100;
pub const SIGNIFICANCE_LEVELS: [f64; 3] = [0.05, 0.01, 0.005];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McNemarMethod {
    Exact,
    /// Chi-squared with continuity correction, one degree of freedom.
    ChiSquared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McNemarReport {
    /// Trials system A got wrong and system B got right.
    pub b: u64,
    /// Trials system A got right and system B got wrong.
    pub c: u64,
    pub p_value: f64,
    pub method: McNemarMethod,
    /// `(level, p < level)` for each of [`SIGNIFICANCE_LEVELS`].
    pub significant_at: Vec<(f64, bool)>,
}

/// Paired test on per-trial correctness of two systems over the same trials.
pub fn mcnemar_test(correct_a: &[bool], correct_b: &[bool]) -> Result<McNemarReport> {
    if correct_a.len() != correct_b.len() {
        return Err(Error::LengthMismatch { a: correct_a.len(), b: correct_b.len() });
    }
    let (mut b, mut c) = (0, 0);
    for (&a_ok, &b_ok) in correct_a.iter().zip(correct_b) {
        match (a_ok, b_ok) {
            (false, true) => b += 1,
            (true, false) => c += 1,
            _ => {}
        }
    }
    Ok(mcnemar_from_counts(b, c))
}

pub fn mcnemar_from_counts(b: u64, c: u64) -> McNemarReport {
    let n = b + c;
    let (p_value, method) = if n <= EXACT_LIMIT {
        (mcnemar_exact_p(b, c), McNemarMethod::Exact)
    } else {
        let diff = (b.abs_diff(c) as f64 - 1.0).max(0.0);
        let stat = diff * diff / n as f64;
        (libm::erfc(libm::sqrt(stat / 2.0)).clamp(0.0, 1.0), McNemarMethod::ChiSquared)
    };
    let significant_at = SIGNIFICANCE_LEVELS.iter().map(|&l| (l, p_value < l)).collect();
    McNemarReport { b, c, p_value, method, significant_at }
}

/// `min(1, 2 sum_{k >= max(b,c)} C(n, k) / 2^n)` with `n = b + c <= 100`,
/// summed exactly in integers.
pub fn mcnemar_exact_p(b: u64, c: u64) -> f64 {
    let n = b + c;
    assert!(n <= EXACT_LIMIT, "exact McNemar limited to {EXACT_LIMIT} discordant pairs");
    if n == 0 {
        return 1.0;
    }
    let k0 = b.max(c);
    let mut binom: u128 = 1; // C(n, 0)
    let mut tail: u128 = 0;
    for k in 0..=n {
        if k >= k0 {
            tail += binom;
        }
        binom = binom * u128::from(n - k) / u128::from(k + 1);
    }
    libm::ldexp(tail as f64, 1 - n as i32).min(1.0)
}

/// Per-trial correctness when accepting scores at or above `threshold`.
pub fn decisions_at_threshold(scores: &ScoreSet, threshold: f64) -> Vec<bool> {
    scores.records.iter().map(|r| (r.score >= threshold) == (r.label == TrialLabel::Target)).collect()
}
