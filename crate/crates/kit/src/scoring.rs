//! Text formats of the evaluation path.
//!
//! * trials: `enroll_id<TAB>test_id<TAB>target|nontarget`
//! * scores: the trial columns plus `<TAB>score` with six decimals
//! * embeddings: one line per utterance, `utterance_id v1 v2 ...`
//!
//! Blank lines and lines starting with `#` are ignored on input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use vfr_core::eval::{EerReport, EmbeddingVector, McNemarReport, ScoreRecord, ScoreSet, Trial, TrialLabel};

use crate::error::{read_file, stem, KitError, Result};
use crate::vfrf;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r'))).filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    })
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_file(path)?).map_err(|_| KitError::Parse {
        origin: path.display().to_string(),
        line: 0,
        detail: "not UTF-8 text".into(),
    })
}

fn parse_label(s: &str, origin: &str, line: usize) -> Result<TrialLabel> {
    TrialLabel::parse(s).ok_or_else(|| KitError::Parse {
        origin: origin.into(),
        line,
        detail: format!("label `{s}` is neither target nor nontarget"),
    })
}

pub fn parse_trials(text: &str, origin: &str) -> Result<Vec<Trial>> {
    content_lines(text)
        .map(|(line, l)| {
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 3 {
                return Err(KitError::Parse { origin: origin.into(), line, detail: format!("expected 3 tab-separated fields, found {}", f.len()) });
            }
            Ok(Trial { enroll_id: f[0].into(), test_id: f[1].into(), label: parse_label(f[2], origin, line)? })
        })
        .collect()
}

pub fn read_trials(path: &Path) -> Result<Vec<Trial>> {
    parse_trials(&read_text(path)?, &path.display().to_string())
}

pub fn parse_scores(text: &str, origin: &str) -> Result<ScoreSet> {
    let records = content_lines(text)
        .map(|(line, l)| {
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 4 {
                return Err(KitError::Parse { origin: origin.into(), line, detail: format!("expected 4 tab-separated fields, found {}", f.len()) });
            }
            let score: f64 = f[3].trim().parse().ok().filter(|s: &f64| s.is_finite()).ok_or_else(|| KitError::Parse {
                origin: origin.into(),
                line,
                detail: format!("score `{}` is not a finite number", f[3]),
            })?;
            Ok(ScoreRecord { enroll_id: f[0].into(), test_id: f[1].into(), score, label: parse_label(f[2], origin, line)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreSet { records })
}

pub fn read_scores(path: &Path) -> Result<ScoreSet> {
    parse_scores(&read_text(path)?, &path.display().to_string())
}

pub fn format_scores(scores: &ScoreSet) -> String {
    let mut out = String::new();
    for r in &scores.records {
        let _ = writeln!(out, "{}\t{}\t{}\t{:.6}", r.enroll_id, r.test_id, r.label.as_str(), r.score);
    }
    out
}

pub fn format_embedding(e: &EmbeddingVector) -> String {
    let mut out = e.utterance_id.clone();
    for v in &e.values {
        let _ = write!(out, " {}", vfrf::format_sig9(*v));
    }
    out.push('\n');
    out
}

pub fn parse_embeddings(text: &str, origin: &str) -> Result<Vec<EmbeddingVector>> {
    content_lines(text)
        .map(|(line, l)| {
            let mut it = l.split_whitespace();
            let id = it.next().unwrap_or_default().to_string();
            let values = it
                .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<Vec<_>>>()
                .filter(|v| !v.is_empty())
                .ok_or_else(|| KitError::Parse { origin: origin.into(), line, detail: "expected an id followed by numbers".into() })?;
            Ok(EmbeddingVector { values, utterance_id: id })
        })
        .collect()
}

/// Collects embeddings from a directory: every `*.emb` text file, plus every
/// `*.vfrf` feature file (embedded on the fly, keyed by file stem).
pub fn load_embeddings(dir: &Path) -> Result<BTreeMap<String, EmbeddingVector>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| KitError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("emb" | "vfrf")))
        .collect();
    paths.sort();
    let mut out = BTreeMap::new();
    for p in paths {
        let found = if p.extension().is_some_and(|e| e == "emb") {
            parse_embeddings(&read_text(&p)?, &p.display().to_string())?
        } else {
            let mut e = vfr_core::eval::embed_utterance(&vfrf::read_features(&p)?)?;
            e.utterance_id = stem(&p);
            vec![e]
        };
        for e in found {
            let id = e.utterance_id.clone();
            if out.insert(id.clone(), e).is_some() {
                return Err(KitError::Usage(format!("{}: embedding `{id}` defined twice", dir.display())));
            }
        }
    }
    Ok(out)
}

pub fn format_eer(r: &EerReport) -> String {
    format!("EER={:.2} THRESH={:.6}", r.eer_percent, r.threshold)
}

/// DET dump: one operating point per line, error rates as fractions.
pub fn format_det(r: &EerReport) -> String {
    let mut out = String::from("threshold,far,frr\n");
    for p in &r.far_frr_curve {
        let t = if p.threshold.is_finite() { format!("{:.6}", p.threshold) } else { "inf".into() };
        let _ = writeln!(out, "{t},{:.6},{:.6}", p.far, p.frr);
    }
    out
}

pub fn format_mcnemar(r: &McNemarReport, thresholds: (f64, f64)) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# decisions: per-trial correctness at each system's own EER threshold (A {:.6}, B {:.6})",
        thresholds.0, thresholds.1
    );
    let _ = writeln!(out, "# b = A wrong and B right, c = A right and B wrong");
    let method = match r.method {
        vfr_core::eval::McNemarMethod::Exact => "exact",
        vfr_core::eval::McNemarMethod::ChiSquared => "chi2",
    };
    let _ = writeln!(out, "b={} c={} p={:.6} method={method}", r.b, r.c, r.p_value);
    for (level, sig) in &r.significant_at {
        let _ = writeln!(out, "significant@{level}={sig}");
    }
    out
}
