//! Minimal RIFF/WAVE reader: PCM 16-bit, mono or stereo. Stereo is downmixed
//! by channel average; integer samples are scaled by 1/32768.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::{AudioClip, DspError};

fn take<'a>(bytes: &'a [u8], at: usize, n: usize) -> Result<&'a [u8], DspError> {
    bytes
        .get(at..at + n)
        .ok_or_else(|| DspError::CorruptHeader("truncated file".to_string()))
}

fn u16le(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn u32le(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

/// Decode a WAV file already read into memory.
pub fn decode_wav_bytes(bytes: &[u8]) -> Result<AudioClip, DspError> {
    if take(bytes, 0, 4)? != b"RIFF" || take(bytes, 8, 4)? != b"WAVE" {
        return Err(DspError::CorruptHeader("missing RIFF/WAVE magic".to_string()));
    }

    let mut fmt: Option<(u16, u32, u16)> = None; // channels, sample_rate, bits
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = take(bytes, pos, 4)?;
        let size = u32le(take(bytes, pos + 4, 4)?) as usize;
        let body = take(bytes, pos + 8, size)?;
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(DspError::CorruptHeader("fmt chunk too small".to_string()));
                }
                let audio_format = u16le(&body[0..2]);
                if audio_format != 1 {
                    return Err(DspError::UnsupportedEncoding(format!(
                        "audio format {audio_format}, only PCM (1) supported"
                    )));
                }
                let channels = u16le(&body[2..4]);
                let sample_rate = u32le(&body[4..8]);
                let bits = u16le(&body[14..16]);
                if bits != 16 {
                    return Err(DspError::UnsupportedEncoding(format!("{bits}-bit samples")));
                }
                if !(1..=2).contains(&channels) {
                    return Err(DspError::UnsupportedEncoding(format!("{channels} channels")));
                }
                if sample_rate == 0 {
                    return Err(DspError::CorruptHeader("zero sample rate".to_string()));
                }
                fmt = Some((channels, sample_rate, bits));
            }
            b"data" => data = Some(body),
            _ => {} // skip ancillary chunks (LIST, fact, ...)
        }
        pos += 8 + size + (size & 1); // chunks are word aligned
    }

    let (channels, sample_rate, _) =
        fmt.ok_or_else(|| DspError::CorruptHeader("no fmt chunk".to_string()))?;
    let data = data.ok_or_else(|| DspError::CorruptHeader("no data chunk".to_string()))?;

    let ch = channels as usize;
    let frame_bytes = 2 * ch;
    let n = data.len() / frame_bytes;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = 0.0f64;
        for c in 0..ch {
            let off = i * frame_bytes + c * 2;
            let v = i16::from_le_bytes([data[off], data[off + 1]]);
            acc += v as f64 / 32768.0;
        }
        samples.push(acc / ch as f64);
    }
    Ok(AudioClip { samples, sample_rate })
}
