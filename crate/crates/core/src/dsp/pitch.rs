//! Per-frame fundamental-frequency estimation via the cumulative-mean-
//! normalized difference function (YIN), with parabolic refinement of the
//! selected lag.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{frame_len, frames, rms, AudioClip, DspError, RMS_FLOOR};

/// A frame is voiced only when its best normalized difference drops below
/// this threshold.
const PERIODICITY_THRESHOLD: f64 = 0.2;
/// Energy gate: voiced frames must be within 35 dB of the loudest frame.
const ENERGY_GATE_DB: f64 = 35.0;

/// Estimate F0 per frame; `None` marks unvoiced frames.
///
/// The band must satisfy `f_min < f_max < sample_rate / 2` and the frame
/// must hold at least two periods of `f_min`.
pub fn estimate_pitch(
    clip: &AudioClip,
    frame_ms: f64,
    hop_ms: f64,
    f_min: f64,
    f_max: f64,
) -> Result<Vec<Option<f64>>, DspError> {
    let sr = clip.sample_rate as f64;
    if !(f_min > 0.0 && f_min < f_max) {
        return Err(DspError::InvalidBand(format!("f_min {f_min} >= f_max {f_max}")));
    }
    if f_max >= sr / 2.0 {
        return Err(DspError::InvalidBand(format!("f_max {f_max} >= Nyquist {}", sr / 2.0)));
    }
    let len = frame_len(frame_ms, clip.sample_rate);
    let hop = frame_len(hop_ms, clip.sample_rate);
    let tau_max = libm::ceil(sr / f_min) as usize;
    let tau_min = (libm::floor(sr / f_max) as usize).max(2);
    if len < 2 * tau_max {
        return Err(DspError::InvalidBand(format!(
            "frame of {len} samples holds fewer than two periods of f_min {f_min}"
        )));
    }

    let frame_rms: Vec<f64> = frames(&clip.samples, len, hop).map(rms).collect();
    let max_rms = frame_rms.iter().cloned().fold(RMS_FLOOR, f64::max);
    let gate = max_rms / libm::pow(10.0, ENERGY_GATE_DB / 20.0);

    let out = frames(&clip.samples, len, hop)
        .zip(&frame_rms)
        .map(|(frame, &energy)| {
            if energy <= gate || energy <= RMS_FLOOR {
                return None;
            }
            // no analysis window: tapering amplitude-modulates the frame and
            // lifts the normalized difference at long lags, losing low F0s
            yin_frame(frame, sr, tau_min, tau_max).map(|f0| f0.clamp(f_min, f_max))
        })
        .collect();
    Ok(out)
}

fn yin_frame(frame: &[f64], sample_rate: f64, tau_min: usize, tau_max: usize) -> Option<f64> {
    let n = frame.len();
    let w = n - tau_max; // fixed summation window

    let mut diff = vec![0.0f64; tau_max + 1];
    for (tau, d) in diff.iter_mut().enumerate().skip(1) {
        let mut s = 0.0;
        for i in 0..w {
            let delta = frame[i] - frame[i + tau];
            s += delta * delta;
        }
        *d = s;
    }

    // cumulative mean normalization; a zero running sum means a flat frame
    let mut cmnd = vec![1.0f64; tau_max + 1];
    let mut running = 0.0;
    for tau in 1..=tau_max {
        running += diff[tau];
        if running > 0.0 {
            cmnd[tau] = diff[tau] * tau as f64 / running;
        }
    }

    // first dip below the threshold, then ride it down to the local minimum
    let mut tau = tau_min;
    let found = loop {
        if tau > tau_max {
            break None;
        }
        if cmnd[tau] < PERIODICITY_THRESHOLD {
            while tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau] {
                tau += 1;
            }
            break Some(tau);
        }
        tau += 1;
    };
    let tau = found?;

    let refined = if tau > 1 && tau < tau_max {
        parabolic_min(cmnd[tau - 1], cmnd[tau], cmnd[tau + 1], tau as f64)
    } else {
        tau as f64
    };
    Some(sample_rate / refined)
}

fn parabolic_min(left: f64, mid: f64, right: f64, x: f64) -> f64 {
    let denom = left - 2.0 * mid + right;
    if denom.abs() < 1e-12 {
        x
    } else {
        x + 0.5 * (left - right) / denom
    }
}
