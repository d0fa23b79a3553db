//! Audio decoding and the five numeric prosodic features: average volume,
//! volume variation, average pitch, pitch variation, and speaking rate.
//!
//! All operations are pure functions of their inputs and embarrassingly
//! parallel across utterances.

mod pitch;
mod wav;

pub use pitch::estimate_pitch;
pub use wav::decode_wav_bytes;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// RMS floor; 20*log10(1e-5) = -100 dB, so silence never produces -inf.
pub const RMS_FLOOR: f64 = 1e-5;
pub const DB_FLOOR: f64 = -100.0;

/// Mono audio in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioClip {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DspError {
    CorruptHeader(String),
    UnsupportedEncoding(String),
    ClipTooShort,
    InvalidBand(String),
    NonPositiveDuration,
}

impl fmt::Display for DspError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DspError::CorruptHeader(d) => write!(f, "corrupt WAV header: {d}"),
            DspError::UnsupportedEncoding(d) => write!(f, "unsupported WAV encoding: {d}"),
            DspError::ClipTooShort => write!(f, "clip shorter than one analysis frame"),
            DspError::InvalidBand(d) => write!(f, "invalid pitch search band: {d}"),
            DspError::NonPositiveDuration => write!(f, "duration must be positive"),
        }
    }
}

/// Extraction parameters. Defaults: 25 ms volume frames, 40 ms pitch frames
/// (long enough for two periods at the 70 Hz band floor), 10 ms hop,
/// band 70-400 Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DspConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub pitch_frame_ms: f64,
    pub f_min: f64,
    pub f_max: f64,
}

impl Default for DspConfig {
    fn default() -> Self {
        DspConfig {
            frame_ms: 25.0,
            hop_ms: 10.0,
            pitch_frame_ms: 40.0,
            f_min: 70.0,
            f_max: 400.0,
        }
    }
}

/// The five features plus diagnostics. Pitch fields are absent iff no frame
/// was voiced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProsodicFeatures {
    pub avg_volume_db: f64,
    pub volume_variation_db: f64,
    pub avg_pitch_hz: Option<f64>,
    pub pitch_variation_hz: Option<f64>,
    pub speaking_rate_wps: f64,
    pub voiced_ratio: f64,
    pub duration_s: f64,
}

pub(crate) fn frame_len(ms: f64, sample_rate: u32) -> usize {
    libm::round(ms / 1000.0 * sample_rate as f64) as usize
}

/// Non-overlapping view of `samples` as frames of `len` every `hop` samples.
/// Frame count = floor((n - len)/hop) + 1 when n >= len, else 0.
pub(crate) fn frames(samples: &[f64], len: usize, hop: usize) -> impl Iterator<Item = &[f64]> {
    let count = if samples.len() >= len && len > 0 && hop > 0 {
        (samples.len() - len) / hop + 1
    } else {
        0
    };
    (0..count).map(move |i| &samples[i * hop..i * hop + len])
}

pub(crate) fn rms(frame: &[f64]) -> f64 {
    let sum_sq: f64 = frame.iter().map(|x| x * x).sum();
    libm::sqrt(sum_sq / frame.len() as f64)
}

/// Per-frame 20*log10(RMS), RMS floored at 1e-5.
pub fn frame_rms_db(clip: &AudioClip, frame_ms: f64, hop_ms: f64) -> Result<Vec<f64>, DspError> {
    assert!(frame_ms >= hop_ms && hop_ms > 0.0, "frame_ms >= hop_ms > 0");
    let len = frame_len(frame_ms, clip.sample_rate);
    let hop = frame_len(hop_ms, clip.sample_rate);
    let out: Vec<f64> = frames(&clip.samples, len, hop)
        .map(|fr| 20.0 * libm::log10(rms(fr).max(RMS_FLOOR)))
        .collect();
    if out.is_empty() {
        return Err(DspError::ClipTooShort);
    }
    Ok(out)
}

/// Whitespace-token count divided by duration; empty transcript counts 0.
pub fn estimate_speaking_rate(transcript: &str, duration_s: f64) -> Result<f64, DspError> {
    if duration_s <= 0.0 {
        return Err(DspError::NonPositiveDuration);
    }
    Ok(transcript.split_whitespace().count() as f64 / duration_s)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (single observation yields 0).
pub(crate) fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    libm::sqrt(var)
}

/// Compute all five features plus diagnostics for one utterance.
pub fn extract_features(
    clip: &AudioClip,
    transcript: &str,
    config: &DspConfig,
) -> Result<ProsodicFeatures, DspError> {
    let vol_db = frame_rms_db(clip, config.frame_ms, config.hop_ms)?;
    let avg_volume_db = mean(&vol_db);
    let volume_variation_db = population_std(&vol_db);

    let pitch_track = estimate_pitch(
        clip,
        config.pitch_frame_ms,
        config.hop_ms,
        config.f_min,
        config.f_max,
    )
    .unwrap_or_default();
    let voiced: Vec<f64> = pitch_track.iter().filter_map(|f| *f).collect();
    let voiced_ratio = if pitch_track.is_empty() {
        0.0
    } else {
        voiced.len() as f64 / pitch_track.len() as f64
    };
    let (avg_pitch_hz, pitch_variation_hz) = if voiced.is_empty() {
        (None, None)
    } else {
        (Some(mean(&voiced)), Some(population_std(&voiced)))
    };

    let duration_s = clip.duration_s();
    let speaking_rate_wps = estimate_speaking_rate(transcript, duration_s)?;

    Ok(ProsodicFeatures {
        avg_volume_db,
        volume_variation_db,
        avg_pitch_hz,
        pitch_variation_hz,
        speaking_rate_wps,
        voiced_ratio,
        duration_s,
    })
}
