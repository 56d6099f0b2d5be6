//! RIFF/WAVE input and output.
//!
//! Reads 16-bit integer PCM (scaled by 1/32768) and 32-bit IEEE float, plain
//! or WAVE_FORMAT_EXTENSIBLE, with any number of channels averaged to mono.
//! Writes 16-bit PCM.

use std::path::Path;

use vfr_core::AudioBuffer;

use crate::error::{read_file, stem, write_file, KitError, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

impl WavEncoding {
    fn format_tag(self) -> u16 {
        match self {
            Self::Pcm16 => FORMAT_PCM,
            Self::Float32 => FORMAT_FLOAT,
        }
    }

    fn bytes_per_sample(self) -> usize {
        match self {
            Self::Pcm16 => 2,
            Self::Float32 => 4,
        }
    }
}

struct Format {
    encoding: WavEncoding,
    channels: usize,
    sample_rate: u32,
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

fn parse_fmt(chunk: &[u8], origin: &str) -> Result<Format> {
    let malformed = |detail: &str| KitError::MalformedWav { origin: origin.into(), detail: detail.into() };
    if chunk.len() < 16 {
        return Err(malformed("fmt chunk shorter than 16 bytes"));
    }
    let mut tag = u16_at(chunk, 0);
    let channels = u16_at(chunk, 2) as usize;
    let sample_rate = u32_at(chunk, 4);
    let bits = u16_at(chunk, 14);
    if tag == FORMAT_EXTENSIBLE {
        // cbSize, valid bits, channel mask, then the subformat GUID whose
        // first two bytes are the real format tag.
        if chunk.len() < 26 {
            return Err(malformed("extensible fmt chunk without a subformat"));
        }
        tag = u16_at(chunk, 24);
    }
    let encoding = match (tag, bits) {
        (FORMAT_PCM, 16) => WavEncoding::Pcm16,
        (FORMAT_FLOAT, 32) => WavEncoding::Float32,
        (FORMAT_PCM | FORMAT_FLOAT, _) => {
            return Err(KitError::UnsupportedEncoding {
                origin: origin.into(),
                detail: format!("{bits}-bit {}", if tag == FORMAT_PCM { "integer PCM" } else { "float" }),
            })
        }
        _ => {
            return Err(KitError::UnsupportedEncoding {
                origin: origin.into(),
                detail: format!("format tag {tag:#06x} (only PCM and IEEE float are read)"),
            })
        }
    };
    if channels == 0 {
        return Err(malformed("zero channels"));
    }
    if sample_rate == 0 {
        return Err(malformed("zero sample rate"));
    }
    Ok(Format { encoding, channels, sample_rate })
}

/// Parses an in-memory WAV file. `source_id` names the buffer and prefixes
/// error messages.
pub fn decode_wav(bytes: &[u8], source_id: &str) -> Result<AudioBuffer> {
    let malformed = |detail: &str| KitError::MalformedWav { origin: source_id.into(), detail: detail.into() };
    if bytes.len() < 12 {
        return Err(KitError::Truncated { origin: source_id.into(), what: "RIFF header".into() });
    }
    if &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(malformed("missing RIFF/WAVE signature"));
    }
    let mut format = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                let end = body.checked_add(size).filter(|&e| e <= bytes.len()).ok_or_else(|| KitError::Truncated {
                    origin: source_id.into(),
                    what: "fmt chunk".into(),
                })?;
                format = Some(parse_fmt(&bytes[body..end], source_id)?);
            }
            b"data" => {
                let fmt = format.ok_or_else(|| malformed("data chunk before fmt chunk"))?;
                let available = bytes.len() - body;
                let frame_bytes = fmt.channels * fmt.encoding.bytes_per_sample();
                if size > available || !size.is_multiple_of(frame_bytes) {
                    return Err(KitError::Truncated {
                        origin: source_id.into(),
                        what: format!("data chunk ({size} bytes declared, {available} present)"),
                    });
                }
                let samples = decode_frames(&bytes[body..body + size], &fmt);
                return Ok(AudioBuffer::new(samples, fmt.sample_rate, source_id)?);
            }
            _ => {}
        }
        // Chunks are word aligned.
        pos = body.saturating_add(size).saturating_add(size & 1);
    }
    Err(malformed(if format.is_some() { "no data chunk" } else { "no fmt chunk" }))
}

fn decode_frames(data: &[u8], fmt: &Format) -> Vec<f64> {
    let width = fmt.encoding.bytes_per_sample();
    let sample = |b: &[u8]| match fmt.encoding {
        WavEncoding::Pcm16 => f64::from(i16::from_le_bytes([b[0], b[1]])) / 32768.0,
        WavEncoding::Float32 => f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
    };
    data.chunks_exact(width * fmt.channels)
        .map(|frame| frame.chunks_exact(width).map(sample).sum::<f64>() / fmt.channels as f64)
        .collect()
}

/// Reads a WAV file; the buffer's source id is the file stem.
pub fn read_wav(path: &Path) -> Result<AudioBuffer> {
    let bytes = read_file(path)?;
    decode_wav(&bytes, &stem(path)).map_err(|e| match e {
        // Keep the full path in messages about the file itself.
        KitError::UnsupportedEncoding { detail, .. } => {
            KitError::UnsupportedEncoding { origin: path.display().to_string(), detail }
        }
        KitError::Truncated { what, .. } => KitError::Truncated { origin: path.display().to_string(), what },
        KitError::MalformedWav { detail, .. } => KitError::MalformedWav { origin: path.display().to_string(), detail },
        other => other,
    })
}

/// Encodes interleaved samples.
pub fn encode_wav(interleaved: &[f64], channels: u16, sample_rate: u32, encoding: WavEncoding) -> Vec<u8> {
    let width = encoding.bytes_per_sample();
    let data_len = interleaved.len() * width;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&encoding.format_tag().to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    let block_align = channels as usize * width;
    out.extend_from_slice(&((sample_rate as usize * block_align) as u32).to_le_bytes());
    out.extend_from_slice(&(block_align as u16).to_le_bytes());
    out.extend_from_slice(&((width * 8) as u16).to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in interleaved {
        match encoding {
            WavEncoding::Pcm16 => {
                let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                out.extend_from_slice(&q.to_le_bytes());
            }
            WavEncoding::Float32 => out.extend_from_slice(&(s as f32).to_le_bytes()),
        }
    }
    out
}

/// Writes a mono 16-bit PCM file.
pub fn write_wav(path: &Path, audio: &AudioBuffer) -> Result<()> {
    write_file(path, &encode_wav(audio.samples(), 1, audio.sample_rate(), WavEncoding::Pcm16))
}
