//! The VFRF feature file and its CSV export.
//!
//! Little-endian layout:
//!
//! ```text
//! "VFRF"  u32 version  u32 rows  u32 dim  u8 flags  f32 base_shift_ms
//! f64 timestamp_ms * rows
//! f32 value * rows * dim        (row-major)
//! ```
//!
//! Flag bit 0 marks CMN, bit 1 marks VFR frame selection. Values are stored
//! as f32, so a file read back and written again is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use vfr_core::frontend::{FeatureMatrix, FeatureMeta};

use crate::error::{read_file, stem, write_file, KitError, Result};

pub const MAGIC: [u8; 4] = *b"VFRF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 21;

const FLAG_CMN: u8 = 1;
const FLAG_VFR: u8 = 2;

pub fn encode(feats: &FeatureMatrix) -> Vec<u8> {
    let rows = feats.num_rows();
    let mut out = Vec::with_capacity(HEADER_LEN + rows * 8 + feats.values().len() * 4);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(feats.dim() as u32).to_le_bytes());
    let meta = &feats.meta;
    out.push(if meta.cmn_applied { FLAG_CMN } else { 0 } | if meta.vfr_applied { FLAG_VFR } else { 0 });
    out.extend_from_slice(&(meta.base_shift_ms as f32).to_le_bytes());
    for t in feats.timestamps_ms() {
        out.extend_from_slice(&t.to_le_bytes());
    }
    for v in feats.values() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], source_id: &str) -> Result<FeatureMatrix> {
    let bad = |detail: String| KitError::MalformedFeatures { origin: source_id.into(), detail };
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[..4] != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let (rows, dim) = (word(8) as usize, word(12) as usize);
    let flags = bytes[16];
    if flags & !(FLAG_CMN | FLAG_VFR) != 0 {
        return Err(bad(format!("unknown flag bits {flags:#04x}")));
    }
    let base_shift_ms = f64::from(f32::from_le_bytes(bytes[17..21].try_into().unwrap()));
    let expected = rows
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(rows * 8 + HEADER_LEN))
        .ok_or_else(|| bad("row and dimension counts overflow".into()))?;
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes for {rows}x{dim}, found {}", bytes.len())));
    }
    let ts_end = HEADER_LEN + rows * 8;
    let timestamps = bytes[HEADER_LEN..ts_end].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let values = bytes[ts_end..].chunks_exact(4).map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap()))).collect();
    let meta = FeatureMeta {
        source_id: source_id.into(),
        cmn_applied: flags & FLAG_CMN != 0,
        vfr_applied: flags & FLAG_VFR != 0,
        base_shift_ms,
    };
    FeatureMatrix::new(values, dim, timestamps, meta).map_err(|e| bad(e.to_string()))
}

/// Reads a VFRF file; the source id is the file stem.
pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let bytes = read_file(path)?;
    decode(&bytes, &stem(path)).map_err(|e| match e {
        KitError::MalformedFeatures { detail, .. } => {
            KitError::MalformedFeatures { origin: path.display().to_string(), detail }
        }
        other => other,
    })
}

pub fn write_features(path: &Path, feats: &FeatureMatrix) -> Result<()> {
    write_file(path, &encode(feats))
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` with nine significant digits and trailing zeros removed; fixed
/// notation for magnitudes in [1e-5, 1e9), scientific otherwise.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        trim_fraction(&format!("{:.*}", (8 - exp) as usize, x)).to_string()
    } else {
        let s = format!("{x:.8e}");
        let (mantissa, e) = s.split_at(s.find('e').unwrap());
        format!("{}{e}", trim_fraction(mantissa))
    }
}

/// One line per frame: the timestamp in milliseconds, then the coefficients.
pub fn to_csv(feats: &FeatureMatrix) -> String {
    let mut out = String::from("timestamp_ms");
    for d in 0..feats.dim() {
        let _ = write!(out, ",c{d}");
    }
    out.push('\n');
    for (t, row) in feats.timestamps_ms().iter().zip(feats.rows()) {
        out.push_str(&format_sig9(*t));
        for v in row {
            out.push(',');
            out.push_str(&format_sig9(*v));
        }
        out.push('\n');
    }
    out
}
